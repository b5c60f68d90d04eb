use rayon::prelude::*;
use serde::Serialize;

use zeno_core::{
    compare_methods, general_n_opt, general_numeric_optimum, general_p_opt, optimize,
    DiagonalMirror, LossModel, MethodComparison, OptimumReport, ZenoError, ZenoRun,
};

use crate::config::{Format, RunConfig};
use crate::error::Result;
use crate::output::{csv_table, json, opt_cell, sig12};

pub const SWEEP_HEADER: [&str; 5] = ["n", "p_exact", "p_first_order", "p_dominant", "p_ideal"];
pub const TABLE1_HEADER: [&str; 5] = [
    "t_up2",
    "n_opt_estimate",
    "n_opt_exact",
    "p_estimate",
    "p_exact",
];
pub const OPT_HEADER: [&str; 9] = [
    "theta",
    "t_up_mod2",
    "n_opt_exact",
    "p_at_exact",
    "n_opt_estimate",
    "p_estimate",
    "search_ceiling",
    "ceiling_hit",
    "no_finite_optimum",
];
pub const GENERAL_HEADER: [&str; 14] = [
    "a",
    "b",
    "c",
    "tau_z",
    "alpha1",
    "alpha2",
    "t_total",
    "n_opt",
    "frequency",
    "p_opt",
    "stationarity_residual",
    "n_star",
    "p_star",
    "note",
];

const TABLE1_MOD2: [f64; 3] = [0.99, 0.999, 0.9999];

pub fn run(cfg: &RunConfig) -> Result<String> {
    use crate::config::Command::*;
    match cfg.command {
        Sweep => sweep(cfg),
        Opt => opt(cfg),
        Table1 => table1(cfg),
        General => general(cfg),
    }
}

#[derive(Serialize)]
struct SweepRow {
    n: u64,
    p_exact: f64,
    p_first_order: Option<f64>,
    p_dominant: f64,
    p_ideal: f64,
}

impl From<MethodComparison> for SweepRow {
    fn from(m: MethodComparison) -> Self {
        SweepRow {
            n: m.n,
            p_exact: m.exact,
            p_first_order: m.first_order,
            p_dominant: m.dominant,
            p_ideal: m.ideal,
        }
    }
}

fn sweep(cfg: &RunConfig) -> Result<String> {
    let (lo, hi) = cfg.n_range;
    let template = ZenoRun::new(cfg.theta, lo, cfg.mirror)?;
    let rows: Vec<SweepRow> = (lo..=hi)
        .into_par_iter()
        .map(|n| compare_methods(&template.with_stages(n)?).map(SweepRow::from))
        .collect::<std::result::Result<_, ZenoError>>()?;
    match cfg.output_format {
        Format::Json => json(&rows),
        Format::Csv => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        sig12(r.p_exact),
                        opt_cell(r.p_first_order),
                        sig12(r.p_dominant),
                        sig12(r.p_ideal),
                    ]
                })
                .collect();
            csv_table(&SWEEP_HEADER, &cells)
        }
    }
}

fn report_cells(r: &OptimumReport) -> Vec<String> {
    vec![
        sig12(r.theta),
        sig12(r.t_up_mod2),
        r.n_opt_exact.to_string(),
        sig12(r.p_at_exact),
        r.n_opt_estimate.map(|n| n.to_string()).unwrap_or_default(),
        opt_cell(r.p_estimate),
        r.search_ceiling.to_string(),
        r.ceiling_hit.to_string(),
        r.no_finite_optimum.to_string(),
    ]
}

fn opt(cfg: &RunConfig) -> Result<String> {
    let report = optimize(cfg.theta, &cfg.mirror, cfg.n_max)?;
    match cfg.output_format {
        Format::Json => json(&report),
        Format::Csv => csv_table(&OPT_HEADER, &[report_cells(&report)]),
    }
}

#[derive(Serialize)]
struct Table1Row {
    t_up2: f64,
    n_opt_estimate: Option<u64>,
    n_opt_exact: u64,
    p_estimate: Option<f64>,
    p_exact: f64,
    ceiling_hit: bool,
}

fn table1(cfg: &RunConfig) -> Result<String> {
    let rows = TABLE1_MOD2
        .iter()
        .map(|&mod2| {
            let t = zeno_core::Complex::new(mod2.sqrt(), 0.0);
            let zero = zeno_core::Complex::new(0.0, 0.0);
            let mirror = DiagonalMirror::new(t, zero, zero, zeno_core::Complex::new(1.0, 0.0))?;
            let r = optimize(cfg.theta, &mirror.into(), cfg.n_max)?;
            Ok(Table1Row {
                t_up2: mod2,
                n_opt_estimate: r.n_opt_estimate,
                n_opt_exact: r.n_opt_exact,
                p_estimate: r.p_estimate,
                p_exact: r.p_at_exact,
                ceiling_hit: r.ceiling_hit,
            })
        })
        .collect::<std::result::Result<Vec<_>, ZenoError>>()?;
    if let Some(row) = rows.iter().find(|r| r.ceiling_hit) {
        eprintln!(
            "warning: |T↑|² = {}: optimum sits on the search ceiling",
            row.t_up2
        );
    }
    match cfg.output_format {
        Format::Json => json(&rows),
        Format::Csv => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        sig12(r.t_up2),
                        r.n_opt_estimate.map(|n| n.to_string()).unwrap_or_default(),
                        r.n_opt_exact.to_string(),
                        opt_cell(r.p_estimate),
                        sig12(r.p_exact),
                    ]
                })
                .collect();
            csv_table(&TABLE1_HEADER, &cells)
        }
    }
}

#[derive(Serialize)]
struct GeneralReport {
    a: f64,
    b: f64,
    c: f64,
    tau_z: f64,
    alpha1: f64,
    alpha2: f64,
    t_total: f64,
    n_opt: Option<f64>,
    frequency: Option<f64>,
    p_opt: f64,
    stationarity_residual: Option<f64>,
    n_star: f64,
    p_star: f64,
    note: Option<String>,
}

fn general(cfg: &RunConfig) -> Result<String> {
    let model: &LossModel = cfg
        .loss_model
        .as_ref()
        .expect("general config carries a loss model");
    let (optimum, note) = match general_n_opt(model) {
        Ok(o) => (Some(o), None),
        Err(ZenoError::NoFiniteOptimum) => (
            None,
            Some("infinite frequency: lossless stages, P = exp(-|b| t1)".to_string()),
        ),
        Err(e) => return Err(e.into()),
    };
    let p_opt = general_p_opt(model)?;
    let oracle = general_numeric_optimum(model);
    let report = GeneralReport {
        a: model.a(),
        b: model.b(),
        c: model.c(),
        tau_z: model.tau_z(),
        alpha1: model.alpha1(),
        alpha2: model.alpha2(),
        t_total: model.t_total(),
        n_opt: optimum.map(|o| o.n_opt),
        frequency: optimum.map(|o| o.frequency),
        p_opt,
        stationarity_residual: optimum.map(|o| o.stationarity_residual),
        n_star: oracle.n_star,
        p_star: oracle.p_star,
        note,
    };
    match cfg.output_format {
        Format::Json => json(&report),
        Format::Csv => {
            let r = &report;
            let row = vec![
                sig12(r.a),
                sig12(r.b),
                sig12(r.c),
                sig12(r.tau_z),
                sig12(r.alpha1),
                sig12(r.alpha2),
                sig12(r.t_total),
                opt_cell(r.n_opt),
                opt_cell(r.frequency),
                sig12(r.p_opt),
                opt_cell(r.stationarity_residual),
                sig12(r.n_star),
                sig12(r.p_star),
                r.note.clone().unwrap_or_default(),
            ];
            csv_table(&GENERAL_HEADER, &[row])
        }
    }
}
