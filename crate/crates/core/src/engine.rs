//! Survival probability after `N` stages of "rotate by θ/N, then pass a mirror".
//!
//! Four routes are provided:
//!
//! * [`survival_exact`] and friends: closed form in the eigenvalues ξ± of the
//!   per-stage transfer operator `T̃·U`, via the divided differences `A(N)`, `B(N)`;
//! * [`survival_oracle`]: plain state propagation, stage by stage, with a
//!   ledger of where the probability went;
//! * [`survival_first_order`]: expansion to first order in `T↓/T↑`;
//! * [`survival_dominant`]: the leading factor `|T↑|^{2N} cos^{2N}(θ/N)`.
//!
//! Closed forms are evaluated in log space, so `N` in the thousands with
//! `|ξ| < 1` does not underflow before the final exponentiation.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::mirror::{DiagonalMirror, MirrorModel, SpinFlipMirror};
use crate::numeric::ln_abs_cos;
use crate::spin::{rotation, Complex, Operator2, Spectrum};

/// Band accepted around `[0, 1]` before a closed-form probability is clamped.
pub const PROBABILITY_SLACK: f64 = 1e-12;

const I: Complex = Complex::new(0.0, 1.0);

/// One experiment: total half-angle θ, `N` stages, and the mirror used at each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZenoRun {
    theta: f64,
    n_stages: u64,
    mirror: MirrorModel,
}

impl ZenoRun {
    pub fn new(theta: f64, n_stages: u64, mirror: MirrorModel) -> Result<Self> {
        if !theta.is_finite() {
            return Err(ZenoError::Domain(format!("θ = {theta} is not finite")));
        }
        if n_stages == 0 {
            return Err(ZenoError::Domain("a run needs at least one stage".into()));
        }
        Ok(ZenoRun {
            theta,
            n_stages,
            mirror,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n_stages(&self) -> u64 {
        self.n_stages
    }

    pub fn mirror(&self) -> &MirrorModel {
        &self.mirror
    }

    /// θ outside `[0, π/2]`: legal, but the monotone-QZE analysis no longer applies.
    pub fn beyond_standard_regime(&self) -> bool {
        !(0.0..=FRAC_PI_2).contains(&self.theta)
    }

    pub fn with_stages(&self, n_stages: u64) -> Result<Self> {
        Self::new(self.theta, n_stages, self.mirror)
    }

    fn step(&self) -> f64 {
        self.theta / self.n_stages as f64
    }

    /// `T̃ · exp(-iθσₓ/N)`
    pub fn transfer_operator(&self) -> Operator2 {
        self.mirror.transmit_operator() * rotation(self.step()).expect("finite step")
    }
}

/// Where the probability went: detector, each mirror's reflected exit, or absorbed in the mirrors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchLedger {
    pub detected: f64,
    /// Probability of leaving through mirror `n` (index `n - 1`).
    pub reflected: Vec<f64>,
    pub absorbed: f64,
}

impl BranchLedger {
    pub fn total(&self) -> f64 {
        self.detected + self.reflected.iter().sum::<f64>() + self.absorbed
    }
}

/// Result of the stage-by-stage propagation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome {
    pub probability: f64,
    /// `ln(probability)`, kept separately so that underflowing probabilities stay comparable.
    pub ln_probability: f64,
    pub ledger: BranchLedger,
}

/// `A(N) = (ξ₊^{N+1} − ξ₋^{N+1})/(ξ₊ − ξ₋)` and `B(N) = (ξ₊^N − ξ₋^N)/(ξ₊ − ξ₋)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbCoefficients {
    pub a_n: Complex,
    pub b_n: Complex,
}

impl AbCoefficients {
    /// Divided differences of the eigenvalue powers, with the confluent limit at degeneracy.
    pub fn new(xi_plus: Complex, xi_minus: Complex, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(ZenoError::Domain("A(N), B(N) need N ≥ 1".into()));
        }
        let sums = Spectrum::from_eigenvalues(xi_plus, xi_minus).power_sums(n);
        Ok(AbCoefficients {
            a_n: sums.unscale(sums.anti_next),
            b_n: sums.unscale(sums.anti),
        })
    }

    /// Relative residuals of `A = ξ₊B + ξ₋^N` and `A = ξ₋B + ξ₊^N`.
    pub fn recurrence_residuals(&self, xi_plus: Complex, xi_minus: Complex, n: u64) -> (f64, f64) {
        let n = i32::try_from(n).unwrap_or(i32::MAX);
        let scale = self.a_n.norm().max(f64::MIN_POSITIVE);
        let r1 = (self.a_n - (xi_plus * self.b_n + xi_minus.powi(n))).norm() / scale;
        let r2 = (self.a_n - (xi_minus * self.b_n + xi_plus.powi(n))).norm() / scale;
        (r1, r2)
    }
}

fn check_probability(raw: f64, what: &'static str) -> Result<f64> {
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&raw) {
        return Err(ZenoError::NumericalConsistency { what, value: raw });
    }
    Ok(raw.clamp(0.0, 1.0))
}

fn assert_stages(n: u64) {
    assert!(n >= 1, "the number of stages must be at least 1");
}

/// `(cos(θ/N))^{2N}` for ideal mirrors.
///
/// # Panics
/// If `n == 0`.
pub fn survival_ideal(theta: f64, n: u64) -> f64 {
    assert_stages(n);
    let nf = n as f64;
    (2.0 * nf * ln_abs_cos(theta / nf)).exp().clamp(0.0, 1.0)
}

/// `ln P` from the transfer matrix elements that matter: with `M = T̃U`,
/// `P = |A − B·M₂₂|² + |B·M₂₁|²` where `M₂₂ = ⟨↓|M|↓⟩`, `M₂₁ = ⟨↓|M|↑⟩`.
fn ln_survival_closed_form(spectrum: &Spectrum, m22: Complex, m21: Complex, n: u64) -> f64 {
    let sums = spectrum.power_sums(n);
    let up = sums.anti_next - sums.anti * m22;
    let down = sums.anti * m21;
    let mantissa = up.norm_sqr() + down.norm_sqr();
    if mantissa == 0.0 {
        return f64::NEG_INFINITY;
    }
    2.0 * sums.log_scale.re + mantissa.ln()
}

/// `ln P̃` for a diagonal mirror, from the closed form in ξ±, A(N), B(N).
pub fn ln_survival_exact_diagonal(theta: f64, n: u64, mirror: &DiagonalMirror) -> f64 {
    assert_stages(n);
    let (s, c) = (theta / n as f64).sin_cos();
    let (tu, td) = (mirror.t_up(), mirror.t_down());
    // ξ± = ½[(T↑+T↓)cos ± √((T↑+T↓)²cos² − 4T↑T↓)]
    let spectrum = Spectrum::from_trace_det((tu + td) * (0.5 * c), tu * td);
    ln_survival_closed_form(&spectrum, td * c, -I * td * s, n)
}

/// Exact survival probability behind a diagonal mirror:
/// `|A − B·T↓cos(θ/N)|² + |B·T↓sin(θ/N)|²`.
///
/// # Panics
/// If `n == 0`.
pub fn survival_exact_diagonal(theta: f64, n: u64, mirror: &DiagonalMirror) -> Result<f64> {
    let ln_p = ln_survival_exact_diagonal(theta, n, mirror);
    check_probability(ln_p.exp(), "diagonal-mirror survival")
}

/// `ln P̃` for a spin-flipping mirror.
pub fn ln_survival_exact_spinflip(theta: f64, n: u64, mirror: &SpinFlipMirror) -> f64 {
    assert_stages(n);
    let (s, c) = (theta / n as f64).sin_cos();
    let t = mirror.t_matrix();
    let (uu, ud, du, dd) = (t.get(0, 0), t.get(0, 1), t.get(1, 0), t.get(1, 1));
    let half_trace = ((uu + dd) * c - I * (ud + du) * s) * 0.5;
    let det = uu * dd - ud * du;
    let spectrum = Spectrum::from_trace_det(half_trace, det);
    let m22 = dd * c - I * du * s;
    // |B(T↓↓ sin + i T↓↑ cos)| = |B·M₂₁|
    let m21 = dd * s + I * du * c;
    ln_survival_closed_form(&spectrum, m22, m21, n)
}

/// Exact survival probability behind a spin-flipping mirror:
/// `|A − B(T↓↓cos − iT↓↑sin)|² + |B(T↓↓sin + iT↓↑cos)|²`.
pub fn survival_exact_spinflip(theta: f64, n: u64, mirror: &SpinFlipMirror) -> Result<f64> {
    let ln_p = ln_survival_exact_spinflip(theta, n, mirror);
    check_probability(ln_p.exp(), "spin-flip-mirror survival")
}

/// Closed-form survival probability for any mirror model.
pub fn survival_exact(run: &ZenoRun) -> Result<f64> {
    match run.mirror() {
        MirrorModel::Ideal => Ok(survival_ideal(run.theta(), run.n_stages())),
        MirrorModel::Diagonal(m) => survival_exact_diagonal(run.theta(), run.n_stages(), m),
        MirrorModel::SpinFlip(m) => survival_exact_spinflip(run.theta(), run.n_stages(), m),
    }
}

/// `ln` of [`survival_exact`], finite even where the probability underflows.
pub fn ln_survival_exact(run: &ZenoRun) -> f64 {
    let (theta, n) = (run.theta(), run.n_stages());
    match run.mirror() {
        MirrorModel::Ideal => 2.0 * n as f64 * ln_abs_cos(theta / n as f64),
        MirrorModel::Diagonal(m) => ln_survival_exact_diagonal(theta, n, m),
        MirrorModel::SpinFlip(m) => ln_survival_exact_spinflip(theta, n, m),
    }
}

/// Propagates `|↑⟩` through `N` stages of `U` then mirror, recording each exit.
///
/// The state is renormalized as it shrinks, with the scale carried in log form.
pub fn survival_oracle(run: &ZenoRun) -> Result<OracleOutcome> {
    let n = run.n_stages();
    let u = rotation(run.step())?;
    let t = run.mirror().transmit_operator();
    let r = run.mirror().reflect_operator();

    let norm2 = |v: &[Complex; 2]| v[0].norm_sqr() + v[1].norm_sqr();
    let mut state = [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
    // true state = exp(ln_scale) * state
    let mut ln_scale = 0.0f64;
    let mut reflected = Vec::with_capacity(n as usize);
    let mut absorbed = 0.0;

    for _ in 0..n {
        let rotated = u.apply(state);
        let through = t.apply(rotated);
        let out = r.apply(rotated);
        let weight = (2.0 * ln_scale).exp();
        let lost = norm2(&rotated) - norm2(&through) - norm2(&out);
        reflected.push(weight * norm2(&out));
        absorbed += weight * lost;
        state = through;

        let nrm2 = norm2(&state);
        if nrm2 == 0.0 {
            ln_scale = f64::NEG_INFINITY;
            state = [Complex::new(0.0, 0.0); 2];
            reflected.resize(n as usize, 0.0);
            break;
        }
        if nrm2 < 1e-150 {
            let nrm = nrm2.sqrt();
            state = [state[0] / nrm, state[1] / nrm];
            ln_scale += nrm.ln();
        }
    }

    let mantissa = norm2(&state);
    let ln_probability = if mantissa == 0.0 {
        f64::NEG_INFINITY
    } else {
        2.0 * ln_scale + mantissa.ln()
    };
    let probability = ln_probability.exp();
    Ok(OracleOutcome {
        probability,
        ln_probability,
        ledger: BranchLedger {
            detected: probability,
            reflected,
            absorbed,
        },
    })
}

/// First-order expansion in `T↓/T↑`:
/// `|T↑|^{2N} cos^{2N}(θ/N) [1 − 2 Re(T↓/T↑)(N−1) tan²(θ/N)]`, clamped to `[0, 1]`.
pub fn survival_first_order(theta: f64, n: u64, mirror: &DiagonalMirror) -> Result<f64> {
    if n < 2 {
        return Err(ZenoError::Domain(
            "first-order expansion holds for N ≥ 2; at N = 1 use the exact \
             sin²θ|T↓|² + cos²θ|T↑|²"
                .into(),
        ));
    }
    let tu = mirror.t_up();
    if tu.norm() == 0.0 {
        return Err(ZenoError::Domain(
            "T↑ = 0: expansion in T↓/T↑ undefined".into(),
        ));
    }
    let ratio = mirror.t_down() / tu;
    if ratio.norm() >= 1.0 {
        return Err(ZenoError::Domain(format!(
            "|T↓/T↑| = {} is not small",
            ratio.norm()
        )));
    }
    let nf = n as f64;
    let tan = (theta / nf).tan();
    let bracket = 1.0 - 2.0 * ratio.re * (nf - 1.0) * tan * tan;
    Ok((leading_factor(theta, tu.norm_sqr(), n) * bracket).clamp(0.0, 1.0))
}

/// First-order expansion for a spin-flipping mirror, in the small ratios
/// `T↓↓/T↑↑`, `T↑↓/T↑↑`, `T↓↑/T↑↑`.
pub fn survival_first_order_spinflip(theta: f64, n: u64, mirror: &SpinFlipMirror) -> Result<f64> {
    if n < 2 {
        return Err(ZenoError::Domain(
            "first-order expansion holds for N ≥ 2".into(),
        ));
    }
    let t = mirror.t_matrix();
    let uu = t.get(0, 0);
    if uu.norm() == 0.0 {
        return Err(ZenoError::Domain("T↑↑ = 0: expansion undefined".into()));
    }
    let (dd, ud, du) = (t.get(1, 1) / uu, t.get(0, 1) / uu, t.get(1, 0) / uu);
    if dd.norm().max(ud.norm()).max(du.norm()) >= 1.0 {
        return Err(ZenoError::Domain("spin-flip ratios are not small".into()));
    }
    let nf = n as f64;
    let tan = (theta / nf).tan();
    let bracket = 1.0 - 2.0 * dd.re * (nf - 1.0) * tan * tan
        + 2.0 * ud.im * nf * tan
        + 2.0 * du.im * (nf - 1.0) * tan;
    Ok((leading_factor(theta, uu.norm_sqr(), n) * bracket).clamp(0.0, 1.0))
}

fn leading_factor(theta: f64, t_up_mod2: f64, n: u64) -> f64 {
    let nf = n as f64;
    (nf * t_up_mod2.ln() + 2.0 * nf * ln_abs_cos(theta / nf)).exp()
}

/// Dominant approximation `|T↑|^{2N} cos^{2N}(θ/N)`.
pub fn survival_dominant(theta: f64, t_up_mod2: f64, n: u64) -> Result<f64> {
    if !(t_up_mod2 > 0.0 && t_up_mod2 <= 1.0) {
        return Err(ZenoError::Domain(format!(
            "|T↑|² = {t_up_mod2} outside (0, 1]"
        )));
    }
    if n == 0 {
        return Err(ZenoError::Domain("N must be at least 1".into()));
    }
    Ok(leading_factor(theta, t_up_mod2, n).clamp(0.0, 1.0))
}

/// All four estimates for one run; `first_order` is `None` where the expansion does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodComparison {
    pub n: u64,
    pub exact: f64,
    pub first_order: Option<f64>,
    pub dominant: f64,
    pub ideal: f64,
}

pub fn compare_methods(run: &ZenoRun) -> Result<MethodComparison> {
    let (theta, n) = (run.theta(), run.n_stages());
    let exact = survival_exact(run)?;
    let first_order = match run.mirror() {
        _ if n < 2 => None,
        MirrorModel::Ideal => Some(survival_ideal(theta, n)),
        MirrorModel::Diagonal(m) => survival_first_order(theta, n, m).ok(),
        MirrorModel::SpinFlip(m) => survival_first_order_spinflip(theta, n, m).ok(),
    };
    let t_up_mod2 = run.mirror().leading_transmission().norm_sqr();
    let dominant = if t_up_mod2 > 0.0 {
        survival_dominant(theta, t_up_mod2.min(1.0), n)?
    } else {
        0.0
    };
    Ok(MethodComparison {
        n,
        exact,
        first_order,
        dominant,
        ideal: survival_ideal(theta, n),
    })
}
