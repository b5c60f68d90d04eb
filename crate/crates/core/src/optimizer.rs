//! Optimal number of measurement stages.
//!
//! With lossy stages the survival probability first rises with `N` (Zeno
//! freezing) and then decays like `|T↑|^{2N}`, so there is a finite optimum.
//! This module finds it exactly by scanning, estimates it analytically, and
//! handles the general loss model `L(t) = a + bt + ct²` combined with a
//! quadratic short-time decay `p(t) = 1 − (t/τ_Z)²`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{survival_exact, ZenoRun};
use crate::error::{Result, ZenoError};
use crate::mirror::MirrorModel;
use crate::numeric::{bisect, golden_section_max, ln_abs_cos};

/// Traverses achievable in the storage-crystal experiment; floor for the search ceiling.
pub const DEFAULT_CEILING_FLOOR: u64 = 4000;

/// Golden-section bracket and tolerance for the continuous optimum.
pub const GOLDEN_LO: f64 = 1.0;
pub const GOLDEN_HI: f64 = 1e6;
pub const GOLDEN_REL_TOL: f64 = 1e-8;

/// Absolute tolerance of the `x_opt` bisection.
pub const X_OPT_TOL: f64 = 1e-10;

/// Outcome of the exhaustive scan over `N = 1..=ceiling`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactOptimum {
    pub n_opt: u64,
    pub p_opt: f64,
    pub search_ceiling: u64,
    /// The argmax sits on the ceiling: the true optimum may lie beyond it.
    pub ceiling_hit: bool,
}

/// Smallest argmax of `survival` over `1..=n_max`.
///
/// Evaluations run in parallel; the reduction is sequential so ties always go to the smaller `N`.
pub fn n_opt_search<F>(survival: F, n_max: u64) -> Result<ExactOptimum>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    if n_max == 0 {
        return Err(ZenoError::Domain(
            "search ceiling must be at least 1".into(),
        ));
    }
    let values: Vec<f64> = (1..=n_max)
        .into_par_iter()
        .map(&survival)
        .collect::<Result<_>>()?;
    let (best, p_opt) =
        values
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                if v > bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            });
    let n_opt = best as u64 + 1;
    Ok(ExactOptimum {
        n_opt,
        p_opt,
        search_ceiling: n_max,
        ceiling_hit: n_opt == n_max,
    })
}

fn check_lossy_mod2(t_up_mod2: f64) -> Result<()> {
    if t_up_mod2 == 1.0 {
        return Err(ZenoError::NoFiniteOptimum);
    }
    if !(t_up_mod2 > 0.0 && t_up_mod2 < 1.0) {
        return Err(ZenoError::Domain(format!(
            "|T↑|² = {t_up_mod2} outside (0, 1)"
        )));
    }
    Ok(())
}

/// `N_opt ≈ [θ / √(1 − |T↑|²)]`, `[·]` rounding half away from zero, floored at 1.
pub fn n_opt_estimate(theta: f64, t_up_mod2: f64) -> Result<u64> {
    check_lossy_mod2(t_up_mod2)?;
    if !theta.is_finite() {
        return Err(ZenoError::Domain(format!("θ = {theta} is not finite")));
    }
    let x = (theta / (1.0 - t_up_mod2).sqrt()).round();
    Ok(if x < 1.0 { 1 } else { x as u64 })
}

/// `P(N_opt) ≈ 1 − 2θ√(1 − |T↑|²)`.
pub fn p_opt_estimate(theta: f64, t_up_mod2: f64) -> Result<f64> {
    check_lossy_mod2(t_up_mod2)?;
    let p = 1.0 - 2.0 * theta * (1.0 - t_up_mod2).sqrt();
    if !(0.0..=1.0).contains(&p) {
        return Err(ZenoError::OutOfRegime(format!(
            "1 − 2θ√(1 − |T↑|²) = {p}: the large-N estimate does not apply"
        )));
    }
    Ok(p)
}

/// `2θ / √(ln a⁻²)`, the small-loss approximation to [`x_opt_root`].
pub fn x_opt_approx(theta: f64, a: f64) -> f64 {
    2.0 * theta / (-2.0 * a.ln()).sqrt()
}

/// Maximizer of `f(x) = aˣ cosˣ(2θ/x)`: the root of `a·cos(2θ/x) = exp[−(2θ/x) tan(2θ/x)]`.
///
/// With `a = |T↑|` this is `x = 2N`. Solved by bisection in log form on
/// `x ∈ (4θ/π·(1 + 10⁻⁹), 10·x_approx)`.
pub fn x_opt_root(theta: f64, a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(ZenoError::Domain(format!("a = {a} outside (0, 1)")));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(ZenoError::Domain(format!("θ = {theta} must be positive")));
    }
    let ln_a = a.ln();
    let g = |x: f64| {
        let u = 2.0 * theta / x;
        ln_a + ln_abs_cos(u) + u * u.tan()
    };
    let lo = 2.0 * theta / std::f64::consts::FRAC_PI_2 * (1.0 + 1e-9);
    let hi = 10.0 * x_opt_approx(theta, a);
    if hi <= lo {
        return Err(ZenoError::NoSignChange {
            lo,
            hi,
            g_lo: g(lo),
            g_hi: g(hi),
        });
    }
    bisect(g, lo, hi, X_OPT_TOL)
}

/// Search ceiling used when none is given: `max(4·estimate, 4000)`.
pub fn default_search_ceiling(estimate: Option<u64>) -> u64 {
    estimate
        .map(|e| e.saturating_mul(4))
        .unwrap_or(0)
        .max(DEFAULT_CEILING_FLOOR)
}

/// Exact scan plus analytic estimate for one mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    pub theta: f64,
    pub t_up_mod2: f64,
    pub n_opt_exact: u64,
    pub p_at_exact: f64,
    /// `None` when the stages are lossless (`|T↑|² = 1`).
    pub n_opt_estimate: Option<u64>,
    /// `None` when lossless or when the estimate leaves its regime.
    pub p_estimate: Option<f64>,
    pub search_ceiling: u64,
    pub ceiling_hit: bool,
    pub no_finite_optimum: bool,
}

/// Scans exact survival probabilities for the given mirror and attaches the analytic estimates.
pub fn optimize(theta: f64, mirror: &MirrorModel, n_max: Option<u64>) -> Result<OptimumReport> {
    let t_up_mod2 = mirror.leading_transmission().norm_sqr();
    let (n_est, p_est, lossless) = match n_opt_estimate(theta, t_up_mod2) {
        Ok(n) => (Some(n), p_opt_estimate(theta, t_up_mod2).ok(), false),
        Err(ZenoError::NoFiniteOptimum) => (None, None, true),
        Err(e) => return Err(e),
    };
    let ceiling = n_max.unwrap_or_else(|| default_search_ceiling(n_est));
    let template = ZenoRun::new(theta, 1, *mirror)?;
    let exact = n_opt_search(|n| survival_exact(&template.with_stages(n)?), ceiling)?;
    Ok(OptimumReport {
        theta,
        t_up_mod2,
        n_opt_exact: exact.n_opt,
        p_at_exact: exact.p_opt,
        n_opt_estimate: n_est,
        p_estimate: p_est,
        search_ceiling: ceiling,
        ceiling_hit: exact.ceiling_hit,
        no_finite_optimum: lossless,
    })
}

/// Loss per stage `L(t) = a + bt + ct²` and quadratic short-time decay with Zeno time `τ_Z`,
/// over a total time `t` split as `t₁ = α₁t` in the measurement stages and `t₂ = α₂t` evolving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    a: f64,
    b: f64,
    c: f64,
    tau_z: f64,
    alpha1: f64,
    alpha2: f64,
    t_total: f64,
}

const LOSS_GRID: usize = 1000;

impl LossModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: f64,
        b: f64,
        c: f64,
        tau_z: f64,
        alpha1: f64,
        alpha2: f64,
        t_total: f64,
    ) -> Result<Self> {
        let bad = |msg: String| Err(ZenoError::InvalidLossModel(msg));
        if ![a, b, c, tau_z, alpha1, alpha2, t_total]
            .iter()
            .all(|x| x.is_finite())
        {
            return bad("all parameters must be finite".into());
        }
        if tau_z <= 0.0 || t_total <= 0.0 {
            return bad(format!("τ_Z = {tau_z} and t = {t_total} must be positive"));
        }
        if !(0.0..=1.0).contains(&a) {
            return bad(format!("a = {a} outside [0, 1]"));
        }
        if a == 1.0 && b > 0.0 {
            return bad(format!("a = 1 requires b ≤ 0, got b = {b}"));
        }
        if !(0.0..1.0).contains(&alpha1) || !(alpha2 > 0.0 && alpha2 <= 1.0) {
            return bad(format!("α₁ = {alpha1}, α₂ = {alpha2} out of range"));
        }
        if (alpha1 + alpha2 - 1.0).abs() > 1e-12 {
            return bad(format!("α₁ + α₂ = {} ≠ 1", alpha1 + alpha2));
        }
        let model = LossModel {
            a,
            b,
            c,
            tau_z,
            alpha1,
            alpha2,
            t_total,
        };
        for i in 0..=LOSS_GRID {
            let t = t_total * i as f64 / LOSS_GRID as f64;
            let l = model.loss(t);
            if !(-1e-12..=1.0 + 1e-12).contains(&l) {
                return bad(format!("L({t}) = {l} leaves [0, 1]"));
            }
        }
        Ok(model)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn tau_z(&self) -> f64 {
        self.tau_z
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn t_total(&self) -> f64 {
        self.t_total
    }

    /// Time spent in measurement stages.
    pub fn t1(&self) -> f64 {
        self.alpha1 * self.t_total
    }

    /// Time spent evolving.
    pub fn t2(&self) -> f64 {
        self.alpha2 * self.t_total
    }

    pub fn loss(&self, t: f64) -> f64 {
        self.a + self.b * t + self.c * t * t
    }

    fn loss_rate(&self, t: f64) -> f64 {
        self.b + 2.0 * self.c * t
    }

    /// `1 − (t/τ_Z)²`, clamped at 0 for `t ≥ τ_Z`.
    pub fn decay(&self, t: f64) -> f64 {
        (1.0 - (t / self.tau_z).powi(2)).max(0.0)
    }

    fn decay_rate(&self, t: f64) -> f64 {
        -2.0 * t / (self.tau_z * self.tau_z)
    }

    /// `ln{[L(t₁/N)]^N [p(t₂/N)]^N}` for continuous `N`; `−∞` where either factor vanishes.
    pub fn ln_survival(&self, n: f64) -> f64 {
        let l = self.loss(self.t1() / n);
        let p = self.decay(self.t2() / n);
        if l <= 0.0 || p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        n * (l.ln() + p.ln())
    }

    /// `d/dN ln P` at `N`: zero at the exact continuous optimum.
    pub fn stationarity_residual(&self, n: f64) -> f64 {
        let (s1, s2) = (self.t1() / n, self.t2() / n);
        let (l, p) = (self.loss(s1), self.decay(s2));
        l.ln() + p.ln() - s1 * self.loss_rate(s1) / l - s2 * self.decay_rate(s2) / p
    }
}

/// Analytic optimum of the general loss model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyOptimum {
    /// Continuous optimal number of stages.
    pub n_opt: f64,
    /// `N_opt / t`.
    pub frequency: f64,
    /// [`LossModel::stationarity_residual`] at `n_opt`.
    pub stationarity_residual: f64,
}

/// `N_opt = t·α₂/(τ_Z√(ln a⁻¹)) · √(1 − τ_Z²(α₁/α₂)²(c/a − b²/2a²))`.
pub fn general_n_opt(model: &LossModel) -> Result<FrequencyOptimum> {
    let a = model.a;
    if a == 1.0 {
        return Err(ZenoError::NoFiniteOptimum);
    }
    if a == 0.0 {
        return Err(ZenoError::OutOfRegime(
            "a = 0: every stage loses everything".into(),
        ));
    }
    let ratio = model.alpha1 / model.alpha2;
    let radicand = 1.0
        - model.tau_z.powi(2) * ratio * ratio * (model.c / a - model.b * model.b / (2.0 * a * a));
    if radicand <= 0.0 {
        return Err(ZenoError::OutOfRegime(format!(
            "negative radicand {radicand} in the optimal-frequency formula"
        )));
    }
    let frequency = model.alpha2 / (model.tau_z * (-a.ln()).sqrt()) * radicand.sqrt();
    let n_opt = model.t_total * frequency;
    if model.t2() / n_opt >= model.tau_z {
        return Err(ZenoError::OutOfRegime(format!(
            "N_opt = {n_opt}: evolution time per stage reaches τ_Z"
        )));
    }
    Ok(FrequencyOptimum {
        n_opt,
        frequency,
        stationarity_residual: model.stationarity_residual(n_opt),
    })
}

/// `P(N_opt) ≈ a^{2N_opt} exp(b t₁ / a)`; for `a = 1` the infinite-frequency value `exp(−|b| t₁)`.
pub fn general_p_opt(model: &LossModel) -> Result<f64> {
    if model.a == 1.0 {
        return Ok((-model.b.abs() * model.t1()).exp());
    }
    let n = general_n_opt(model)?.n_opt;
    let p = (2.0 * n * model.a.ln() + model.b * model.t1() / model.a).exp();
    if !(0.0..=1.0).contains(&p) {
        return Err(ZenoError::OutOfRegime(format!(
            "asymptotic optimum probability {p} outside [0, 1]"
        )));
    }
    Ok(p)
}

/// Direct maximization of `[L(t₁/N) p(t₂/N)]^N` over continuous `N ∈ [1, 10⁶]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericOptimum {
    pub n_star: f64,
    pub p_star: f64,
}

pub fn general_numeric_optimum(model: &LossModel) -> NumericOptimum {
    let (n_star, ln_p) = golden_section_max(
        |n| model.ln_survival(n),
        GOLDEN_LO,
        GOLDEN_HI,
        GOLDEN_REL_TOL,
    );
    NumericOptimum {
        n_star,
        p_star: ln_p.exp(),
    }
}
