//! Flat key/value run configuration, merged from a TOML file and command-line flags.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use zeno_core::{
    from_mod2_phase, Complex, DiagonalMirror, LossModel, MirrorModel, Operator2, SpinFlipMirror,
};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sweep,
    Opt,
    Table1,
    General,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::Opt => "opt",
            Command::Table1 => "table1",
            Command::General => "general",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Command::Sweep,
            Command::Opt,
            Command::Table1,
            Command::General,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Str(String),
}

impl Value {
    fn describe(&self) -> String {
        match self {
            Value::Num(x) => x.to_string(),
            Value::Int(i) => i.to_string(),
            Value::Str(s) => format!("{s:?}"),
        }
    }
}

/// Key/value pairs before validation; later inserts win.
pub type RawConfig = BTreeMap<String, Value>;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub theta: f64,
    pub mirror: MirrorModel,
    pub n_range: (u64, u64),
    /// Search ceiling for `opt` and `table1`.
    pub n_max: Option<u64>,
    pub loss_model: Option<LossModel>,
    pub output_path: Option<PathBuf>,
    pub output_format: Format,
}

const COMMON_KEYS: &[&str] = &["command", "theta", "out", "format"];
const LOSS_KEYS: &[&str] = &["a", "b", "c", "tau_z", "alpha1", "alpha2", "t_total"];
const DIAGONAL_ENTRIES: &[&str] = &["t_up", "t_down", "r_up", "r_down"];
const SPIN_FLIP_ENTRIES: &[&str] = &[
    "t_up_up",
    "t_up_down",
    "t_down_up",
    "t_down_down",
    "r_up_up",
    "r_up_down",
    "r_down_up",
    "r_down_down",
];
const COMPLEX_SUFFIXES: [&str; 4] = ["2", "_phase", "_re", "_im"];

fn complex_keys(entries: &[&str]) -> Vec<String> {
    entries
        .iter()
        .flat_map(|e| COMPLEX_SUFFIXES.iter().map(move |s| format!("{e}{s}")))
        .collect()
}

fn mirror_keys() -> Vec<String> {
    let mut keys = vec!["mirror".to_string()];
    keys.extend(complex_keys(DIAGONAL_ENTRIES));
    keys.extend(complex_keys(SPIN_FLIP_ENTRIES));
    keys
}

fn allowed_keys(command: Command) -> Vec<String> {
    let mut keys: Vec<String> = COMMON_KEYS.iter().map(|s| s.to_string()).collect();
    match command {
        Command::Sweep => {
            keys.extend(mirror_keys());
            keys.extend(["n_min".into(), "n_max".into()]);
        }
        Command::Opt => {
            keys.extend(mirror_keys());
            keys.push("n_max".into());
        }
        Command::Table1 => keys.push("n_max".into()),
        Command::General => keys.extend(LOSS_KEYS.iter().map(|s| s.to_string())),
    }
    keys
}

fn known_keys() -> Vec<String> {
    [
        Command::Sweep,
        Command::Opt,
        Command::Table1,
        Command::General,
    ]
    .into_iter()
    .flat_map(allowed_keys)
    .collect()
}

/// Parses a flat TOML document. Nested tables and arrays are rejected.
pub fn parse_file(text: &str) -> Result<RawConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        CliError::Config(format!("bad config file: {}", e.message()))
    })?;
    let mut raw = RawConfig::new();
    for (key, value) in table {
        let v = match value {
            toml::Value::Float(x) => Value::Num(x),
            toml::Value::Integer(i) => Value::Int(i),
            toml::Value::String(s) => Value::Str(s),
            other => {
                return Err(CliError::Config(format!(
                    "key `{key}`: expected a number or string, got a {}",
                    other.type_str()
                )))
            }
        };
        raw.insert(key, v);
    }
    Ok(raw)
}

struct Fields<'a> {
    raw: &'a RawConfig,
}

impl Fields<'_> {
    fn has(&self, key: &str) -> bool {
        self.raw.contains_key(key)
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        match self.raw.get(key) {
            None => Ok(None),
            Some(Value::Num(x)) if x.is_finite() => Ok(Some(*x)),
            Some(Value::Int(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(CliError::Config(format!(
                "key `{key}`: expected a finite number, got {}",
                v.describe()
            ))),
        }
    }

    fn count(&self, key: &str) -> Result<Option<u64>> {
        match self.raw.get(key) {
            None => Ok(None),
            Some(Value::Int(i)) if *i >= 1 => Ok(Some(*i as u64)),
            Some(v) => Err(CliError::Config(format!(
                "key `{key}`: expected an integer ≥ 1, got {}",
                v.describe()
            ))),
        }
    }

    fn text(&self, key: &str) -> Result<Option<&str>> {
        match self.raw.get(key) {
            None => Ok(None),
            Some(Value::Str(s)) => Ok(Some(s)),
            Some(v) => Err(CliError::Config(format!(
                "key `{key}`: expected a string, got {}",
                v.describe()
            ))),
        }
    }

    /// `<name>2` with `<name>_phase`, or `<name>_re` with `<name>_im`.
    fn complex(&self, name: &str) -> Result<Option<Complex>> {
        let [mod2, phase, re, im] = COMPLEX_SUFFIXES.map(|s| format!("{name}{s}"));
        let polar = self.has(&mod2) || self.has(&phase);
        let cartesian = self.has(&re) || self.has(&im);
        if polar && cartesian {
            let a = if self.has(&mod2) { &mod2 } else { &phase };
            let b = if self.has(&re) { &re } else { &im };
            return Err(CliError::Config(format!(
                "key `{b}` conflicts with `{a}`: give {name} as modulus²/phase or re/im, not both"
            )));
        }
        if polar {
            let Some(m) = self.real(&mod2)? else {
                return Err(CliError::Config(format!(
                    "key `{phase}` given without `{mod2}`"
                )));
            };
            let p = self.real(&phase)?.unwrap_or(0.0);
            return from_mod2_phase(m, p)
                .map(Some)
                .map_err(|e| CliError::Config(format!("key `{mod2}`: {e}")));
        }
        if cartesian {
            let r = self.real(&re)?.unwrap_or(0.0);
            let i = self.real(&im)?.unwrap_or(0.0);
            return Ok(Some(Complex::new(r, i)));
        }
        Ok(None)
    }

    fn first_present(&self, entries: &[&str]) -> Option<String> {
        complex_keys(entries).into_iter().find(|k| self.has(k))
    }
}

fn fill(t: Complex) -> Complex {
    Complex::new((1.0 - t.norm_sqr()).max(0.0).sqrt(), 0.0)
}

fn build_mirror(f: &Fields) -> Result<MirrorModel> {
    let diagonal_key = f.first_present(DIAGONAL_ENTRIES);
    let flip_key = f.first_present(SPIN_FLIP_ENTRIES);
    let kind = match f.text("mirror")? {
        Some(k) => k.to_string(),
        None if flip_key.is_some() => "spin_flip".into(),
        None if diagonal_key.is_some() => "diagonal".into(),
        None => "ideal".into(),
    };
    let stray = |key: Option<String>| match key {
        Some(k) => Err(CliError::Config(format!(
            "key `{k}` does not apply to a {kind} mirror"
        ))),
        None => Ok(()),
    };
    match kind.as_str() {
        "ideal" => {
            stray(diagonal_key)?;
            stray(flip_key)?;
            Ok(MirrorModel::Ideal)
        }
        "diagonal" => {
            stray(flip_key)?;
            let t_up = f.complex("t_up")?.unwrap_or(Complex::new(1.0, 0.0));
            let t_down = f.complex("t_down")?.unwrap_or(Complex::new(0.0, 0.0));
            let r_up = f.complex("r_up")?.unwrap_or_else(|| fill(t_up));
            let r_down = f.complex("r_down")?.unwrap_or_else(|| fill(t_down));
            Ok(DiagonalMirror::new(t_up, t_down, r_up, r_down)?.into())
        }
        "spin_flip" => {
            stray(diagonal_key)?;
            let mut e = [Complex::new(0.0, 0.0); 8];
            for (slot, name) in e.iter_mut().zip(SPIN_FLIP_ENTRIES) {
                *slot = f.complex(name)?.unwrap_or(*slot);
            }
            let t = Operator2::new(e[0], e[1], e[2], e[3]);
            let r = Operator2::new(e[4], e[5], e[6], e[7]);
            Ok(SpinFlipMirror::new(t, r)?.into())
        }
        other => Err(CliError::Config(format!(
            "key `mirror`: unknown kind {other:?} (expected ideal, diagonal or spin_flip)"
        ))),
    }
}

fn build_loss_model(f: &Fields, theta: Option<f64>) -> Result<LossModel> {
    let Some(a) = f.real("a")? else {
        return Err(CliError::Config("`general` needs key `a`".into()));
    };
    let tau_z = f.real("tau_z")?.unwrap_or(1.0);
    let alpha1 = f.real("alpha1")?.unwrap_or(0.0);
    let alpha2 = f.real("alpha2")?.unwrap_or(1.0 - alpha1);
    let t_total = match (f.real("t_total")?, theta) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "key `theta` conflicts with `t_total`: give the total time once".into(),
            ))
        }
        (Some(t), None) => t,
        (None, th) => th.unwrap_or(FRAC_PI_2) * tau_z,
    };
    let b = f.real("b")?.unwrap_or(0.0);
    let c = f.real("c")?.unwrap_or(0.0);
    Ok(LossModel::new(a, b, c, tau_z, alpha1, alpha2, t_total)?)
}

pub fn resolve(command: Command, raw: &RawConfig) -> Result<RunConfig> {
    let known = known_keys();
    let allowed = allowed_keys(command);
    for key in raw.keys() {
        if !known.contains(key) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        if !allowed.contains(key) {
            return Err(CliError::Config(format!(
                "key `{key}` is not used by `{}`",
                command.name()
            )));
        }
    }
    let f = Fields { raw };

    if let Some(c) = f.text("command")? {
        match Command::parse(c) {
            Some(c) if c == command => {}
            _ => {
                return Err(CliError::Config(format!(
                    "key `command` is {c:?} but `{}` was requested",
                    command.name()
                )))
            }
        }
    }

    let theta_given = f.real("theta")?;
    let theta = theta_given.unwrap_or(FRAC_PI_2);
    let output_format = match f.text("format")? {
        Some(s) => Format::parse(s).ok_or_else(|| {
            CliError::Config(format!("key `format`: expected csv or json, got {s:?}"))
        })?,
        None if matches!(command, Command::Opt | Command::General) => Format::Json,
        None => Format::Csv,
    };
    let output_path = f.text("out")?.map(PathBuf::from);

    let mirror = match command {
        Command::Sweep | Command::Opt => build_mirror(&f)?,
        _ => MirrorModel::Ideal,
    };
    let n_min = f.count("n_min")?.unwrap_or(1);
    let n_max = f.count("n_max")?;
    let n_range = (n_min, n_max.unwrap_or(1000));
    if command == Command::Sweep && n_range.0 > n_range.1 {
        return Err(CliError::Config(format!(
            "key `n_min` = {} exceeds `n_max` = {}",
            n_range.0, n_range.1
        )));
    }
    let loss_model = match command {
        Command::General => Some(build_loss_model(&f, theta_given)?),
        _ => None,
    };

    Ok(RunConfig {
        command,
        theta,
        mirror,
        n_range,
        n_max,
        loss_model,
        output_path,
        output_format,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(pairs: &[(&str, Value)]) -> RawConfig {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect()
    }

    fn config_error(r: Result<RunConfig>) -> String {
        match r {
            Err(CliError::Config(msg)) => msg,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults() {
        let cfg = resolve(Command::Sweep, &RawConfig::new()).unwrap();
        assert_eq!(cfg.theta, FRAC_PI_2);
        assert_eq!(cfg.mirror, MirrorModel::Ideal);
        assert_eq!(cfg.n_range, (1, 1000));
        assert_eq!(cfg.output_format, Format::Csv);
        assert_eq!(
            resolve(Command::Opt, &RawConfig::new())
                .unwrap()
                .output_format,
            Format::Json
        );
    }

    #[test]
    fn rejects_unknown_and_extraneous_keys() {
        let msg = config_error(resolve(
            Command::Sweep,
            &raw(&[("t_upp2", Value::Num(0.9))]),
        ));
        assert!(msg.contains("t_upp2"));
        let msg = config_error(resolve(Command::Opt, &raw(&[("n_min", Value::Int(3))])));
        assert!(msg.contains("n_min"));
        let msg = config_error(resolve(Command::Table1, &raw(&[("a", Value::Num(0.9))])));
        assert!(msg.contains("`a`"));
    }

    #[test]
    fn polar_and_cartesian_mirror_entries_agree() {
        let polar = resolve(
            Command::Opt,
            &raw(&[
                ("t_up2", Value::Num(0.25)),
                ("t_up_phase", Value::Num(FRAC_PI_2)),
            ]),
        )
        .unwrap();
        let cart = resolve(
            Command::Opt,
            &raw(&[("t_up_re", Value::Num(0.0)), ("t_up_im", Value::Num(0.5))]),
        )
        .unwrap();
        let (a, b) = (
            polar.mirror.leading_transmission(),
            cart.mirror.leading_transmission(),
        );
        assert!((a - b).norm() < 1e-15);
        let msg = config_error(resolve(
            Command::Opt,
            &raw(&[("t_up2", Value::Num(0.25)), ("t_up_im", Value::Num(0.5))]),
        ));
        assert!(msg.contains("t_up_im"));
    }

    #[test]
    fn diagonal_mirror_fills_reflection() {
        let cfg = resolve(Command::Opt, &raw(&[("t_up2", Value::Num(0.99))])).unwrap();
        assert!(cfg.mirror.is_conservative());
        assert!((cfg.mirror.reflect_operator().get(0, 0).re - 0.1).abs() < 1e-12);
    }

    #[test]
    fn spin_flip_and_diagonal_keys_do_not_mix() {
        let msg = config_error(resolve(
            Command::Opt,
            &raw(&[
                ("t_up_up2", Value::Num(0.99)),
                ("t_down2", Value::Num(0.01)),
            ]),
        ));
        assert!(msg.contains("t_down2"));
        let msg = config_error(resolve(
            Command::Opt,
            &raw(&[
                ("mirror", Value::Str("ideal".into())),
                ("t_up2", Value::Num(0.9)),
            ]),
        ));
        assert!(msg.contains("t_up2"));
    }

    #[test]
    fn general_needs_a_and_one_total_time() {
        let msg = config_error(resolve(Command::General, &RawConfig::new()));
        assert!(msg.contains("`a`"));
        let msg = config_error(resolve(
            Command::General,
            &raw(&[
                ("a", Value::Num(0.9)),
                ("theta", Value::Num(1.0)),
                ("t_total", Value::Num(1.0)),
            ]),
        ));
        assert!(msg.contains("t_total"));
        let cfg = resolve(Command::General, &raw(&[("a", Value::Num(0.9999))])).unwrap();
        assert_eq!(cfg.loss_model.unwrap().t_total(), FRAC_PI_2);
    }

    #[test]
    fn range_checks() {
        let msg = config_error(resolve(
            Command::Sweep,
            &raw(&[("n_min", Value::Int(10)), ("n_max", Value::Int(5))]),
        ));
        assert!(msg.contains("n_min"));
        let msg = config_error(resolve(Command::Sweep, &raw(&[("n_min", Value::Int(0))])));
        assert!(msg.contains("n_min"));
    }

    #[test]
    fn file_must_be_flat() {
        assert!(parse_file("theta = 1.0\nn_max = 20\nmirror = \"ideal\"\n").is_ok());
        assert!(parse_file("[mirror]\nt_up2 = 0.9\n").is_err());
        assert!(parse_file("theta = [1.0]\n").is_err());
    }

    #[test]
    fn command_key_must_match() {
        let msg = config_error(resolve(
            Command::Opt,
            &raw(&[("command", Value::Str("sweep".into()))]),
        ));
        assert!(msg.contains("command"));
        assert!(resolve(Command::Opt, &raw(&[("command", Value::Str("opt".into()))])).is_ok());
    }
}
