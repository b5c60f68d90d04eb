//! Exact complex 2×2 algebra for a single spin-1/2.
//!
//! Basis order is `(|↑⟩, |↓⟩)`. An [`Operator2`] acts on column vectors, so
//! entry `(i, j)` is `⟨i|M|j⟩`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::numeric::{exp_m1, ln_1p};

pub type Complex = num_complex::Complex64;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);
const I: Complex = Complex::new(0.0, 1.0);

/// Slack allowed on `norm² ≤ 1` for states and mirror columns.
pub const NORM_SLACK: f64 = 1e-9;

/// Relative eigenvalue gap at or below which powers use the confluent expansion.
pub const DEGENERACY_GAP: f64 = 1e-8;

pub(crate) fn ensure_finite(z: Complex, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(ZenoError::Domain(format!("{what} is not finite: {z}")))
    }
}

/// `c↑|↑⟩ + c↓|↓⟩`, possibly sub-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    up: Complex,
    down: Complex,
}

impl SpinState {
    pub fn new(up: Complex, down: Complex) -> Result<Self> {
        ensure_finite(up, "spin-up amplitude")?;
        ensure_finite(down, "spin-down amplitude")?;
        let state = SpinState { up, down };
        if state.norm_sqr() > 1.0 + NORM_SLACK {
            return Err(ZenoError::Domain(format!(
                "state norm² {} exceeds 1",
                state.norm_sqr()
            )));
        }
        Ok(state)
    }

    pub fn spin_up() -> Self {
        SpinState {
            up: ONE,
            down: ZERO,
        }
    }

    pub fn spin_down() -> Self {
        SpinState {
            up: ZERO,
            down: ONE,
        }
    }

    pub fn up(&self) -> Complex {
        self.up
    }

    pub fn down(&self) -> Complex {
        self.down
    }

    pub fn amplitudes(&self) -> [Complex; 2] {
        [self.up, self.down]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }
}

/// Coefficients of `s₀·I + sₓ·σₓ + s_y·σ_y + s_z·σ_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliDecomposition {
    pub s0: Complex,
    pub sx: Complex,
    pub sy: Complex,
    pub sz: Complex,
}

/// A complex 2×2 matrix.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Operator2 {
    m: [[Complex; 2]; 2],
}

impl fmt::Debug for Operator2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

impl Operator2 {
    pub const fn new(m00: Complex, m01: Complex, m10: Complex, m11: Complex) -> Self {
        Operator2 {
            m: [[m00, m01], [m10, m11]],
        }
    }

    pub const fn from_rows(m: [[Complex; 2]; 2]) -> Self {
        Operator2 { m }
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn pauli_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub const fn pauli_y() -> Self {
        Self::new(ZERO, Complex::new(0.0, -1.0), I, ZERO)
    }

    pub const fn pauli_z() -> Self {
        Self::new(ONE, ZERO, ZERO, Complex::new(-1.0, 0.0))
    }

    pub const fn diag(a: Complex, b: Complex) -> Self {
        Self::new(a, ZERO, ZERO, b)
    }

    /// Entry `⟨row|M|col⟩`, with 0 = ↑ and 1 = ↓.
    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.m[row][col]
    }

    pub fn rows(&self) -> [[Complex; 2]; 2] {
        self.m
    }

    pub fn is_finite(&self) -> bool {
        self.m
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(ZenoError::Domain(format!(
                "operator has non-finite entries: {self:?}"
            )))
        }
    }

    pub fn trace(&self) -> Complex {
        self.m[0][0] + self.m[1][1]
    }

    pub fn determinant(&self) -> Complex {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn scale(&self, k: Complex) -> Self {
        Self::new(
            k * self.m[0][0],
            k * self.m[0][1],
            k * self.m[1][0],
            k * self.m[1][1],
        )
    }

    pub fn apply(&self, v: [Complex; 2]) -> [Complex; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Operator2) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.adjoint() * *self).max_abs_diff(&Operator2::identity()) <= tol
    }

    pub fn pauli_decomposition(&self) -> PauliDecomposition {
        let [[a, b], [c, d]] = self.m;
        PauliDecomposition {
            s0: (a + d) * 0.5,
            sx: (b + c) * 0.5,
            sy: I * (b - c) * 0.5,
            sz: (a - d) * 0.5,
        }
    }

    pub fn from_pauli(p: &PauliDecomposition) -> Self {
        Self::new(p.s0 + p.sz, p.sx - I * p.sy, p.sx + I * p.sy, p.s0 - p.sz)
    }
}

impl Mul for Operator2 {
    type Output = Operator2;

    fn mul(self, rhs: Operator2) -> Operator2 {
        let a = &self.m;
        let b = &rhs.m;
        Operator2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Operator2 {
    type Output = Operator2;

    fn add(self, rhs: Operator2) -> Operator2 {
        let mut out = self;
        for (row, rrow) in out.m.iter_mut().zip(rhs.m.iter()) {
            for (x, y) in row.iter_mut().zip(rrow.iter()) {
                *x += *y;
            }
        }
        out
    }
}

impl Sub for Operator2 {
    type Output = Operator2;

    fn sub(self, rhs: Operator2) -> Operator2 {
        self + rhs.scale(-ONE)
    }
}

/// `exp(-i·step·σₓ) = cos(step)·I − i·sin(step)·σₓ`.
///
/// `step` is the rotation half-angle accumulated in one field region.
pub fn rotation(step: f64) -> Result<Operator2> {
    if !step.is_finite() {
        return Err(ZenoError::Domain(format!(
            "rotation angle {step} is not finite"
        )));
    }
    let (s, c) = step.sin_cos();
    let c = Complex::new(c, 0.0);
    let ms = Complex::new(0.0, -s);
    Ok(Operator2::new(c, ms, ms, c))
}

/// Eigenvalues `(ξ₊, ξ₋) = tr/2 ± √((tr/2)² − det)` on the principal branch.
///
/// The smaller-modulus eigenvalue is recovered as `det / ξ_big` to avoid cancellation;
/// the labels still follow the sign in front of the square root.
pub fn eigenvalues(m: &Operator2) -> Result<(Complex, Complex)> {
    m.ensure_finite()?;
    let s = Spectrum::of(m);
    Ok((s.plus, s.minus))
}

/// Eigenvalue data for an operator, keeping the half gap `(ξ₊ − ξ₋)/2` exact.
#[derive(Debug, Clone, Copy)]
pub struct Spectrum {
    pub plus: Complex,
    pub minus: Complex,
    half_sum: Complex,
    half_gap: Complex,
}

impl Spectrum {
    pub fn of(m: &Operator2) -> Self {
        Self::from_trace_det(m.trace() * 0.5, m.determinant())
    }

    /// From `C = tr/2` and `D = det`.
    pub fn from_trace_det(half_trace: Complex, det: Complex) -> Self {
        let root = (half_trace * half_trace - det).sqrt();
        let (plus, minus) = if (half_trace.conj() * root).re >= 0.0 {
            let plus = half_trace + root;
            let minus = if plus == ZERO {
                half_trace - root
            } else {
                det / plus
            };
            (plus, minus)
        } else {
            let minus = half_trace - root;
            let plus = if minus == ZERO {
                half_trace + root
            } else {
                det / minus
            };
            (plus, minus)
        };
        Spectrum {
            plus,
            minus,
            half_sum: half_trace,
            half_gap: root,
        }
    }

    pub fn from_eigenvalues(plus: Complex, minus: Complex) -> Self {
        Spectrum {
            plus,
            minus,
            half_sum: (plus + minus) * 0.5,
            half_gap: (plus - minus) * 0.5,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        let scale = self.plus.norm().max(self.minus.norm());
        2.0 * self.half_gap.norm() <= DEGENERACY_GAP * scale
    }

    /// Power sums of order `k ≥ 1`, scaled by a common factor to stay representable.
    pub fn power_sums(&self, k: u64) -> PowerSums {
        debug_assert!(k >= 1);
        if self.plus == ZERO && self.minus == ZERO {
            return PowerSums {
                log_scale: ZERO,
                anti: if k == 1 { ONE } else { ZERO },
                anti_next: ZERO,
                sym: ZERO,
            };
        }
        if self.is_degenerate() {
            return self.confluent_sums(k);
        }
        let plus_big = self.plus.norm() >= self.minus.norm();
        let (big, small) = if plus_big {
            (self.plus, self.minus)
        } else {
            (self.minus, self.plus)
        };
        // ρ = small/big − 1 = ∓(ξ₊ − ξ₋)/big
        let gap = self.half_gap * 2.0;
        let rho = if plus_big { -gap / big } else { gap / big };
        let kf = k as f64;
        // returns (r^j, (1 − r^j)/(1 − r))
        let geometric = |j: f64| -> (Complex, Complex) {
            if rho.norm() < 0.5 {
                let l = ln_1p(rho);
                let em1 = exp_m1(l * j);
                (em1 + ONE, em1 / rho)
            } else {
                let r = small / big;
                let rj = if r == ZERO { ZERO } else { (r.ln() * j).exp() };
                (rj, (ONE - rj) / (ONE - r))
            }
        };
        let (rk, gk) = geometric(kf);
        let (_, gk1) = geometric(kf + 1.0);
        PowerSums {
            log_scale: big.ln() * (kf - 1.0),
            anti: gk,
            anti_next: big * gk1,
            sym: big * (ONE + rk) * 0.5,
        }
    }

    fn confluent_sums(&self, k: u64) -> PowerSums {
        let m = self.half_sum;
        let q = (self.half_gap / m).powi(2);
        // S(j, first) = Σ_{i ≡ first mod 2, i ≤ j} C(j, i) q^{⌊i/2⌋}
        let series = |j: u64, first: u64| -> Complex {
            if first > j {
                return ZERO;
            }
            let mut term = if first == 0 {
                ONE
            } else {
                Complex::new(j as f64, 0.0)
            };
            let mut sum = term;
            let mut i = first;
            while i + 2 <= j {
                let jf = j as f64;
                let fi = i as f64;
                term *= q * ((jf - fi) * (jf - fi - 1.0) / ((fi + 1.0) * (fi + 2.0)));
                sum += term;
                i += 2;
                if term.norm() <= 1e-18 * sum.norm() {
                    break;
                }
            }
            sum
        };
        PowerSums {
            log_scale: m.ln() * (k as f64 - 1.0),
            anti: series(k, 1),
            anti_next: m * series(k + 1, 1),
            sym: m * series(k, 0),
        }
    }
}

/// `½(ξ₊ᵏ + ξ₋ᵏ)` and the divided differences `(ξ₊ʲ − ξ₋ʲ)/(ξ₊ − ξ₋)` for `j = k, k+1`,
/// each stored as `exp(log_scale) · mantissa`.
#[derive(Debug, Clone, Copy)]
pub struct PowerSums {
    pub log_scale: Complex,
    /// `(ξ₊ᵏ − ξ₋ᵏ)/(ξ₊ − ξ₋)`
    pub anti: Complex,
    /// `(ξ₊ᵏ⁺¹ − ξ₋ᵏ⁺¹)/(ξ₊ − ξ₋)`
    pub anti_next: Complex,
    /// `½(ξ₊ᵏ + ξ₋ᵏ)`
    pub sym: Complex,
}

impl PowerSums {
    pub fn unscale(&self, mantissa: Complex) -> Complex {
        if mantissa == ZERO {
            return ZERO;
        }
        self.log_scale.exp() * mantissa
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PowerStrategy {
    /// `Mⁿ = ½(ξ₊ⁿ + ξ₋ⁿ)·I + (ξ₊ⁿ − ξ₋ⁿ)/(ξ₊ − ξ₋)·(M − tr/2·I)`
    #[default]
    Spectral,
    /// Repeated left multiplication.
    Iterated,
}

/// `Mⁿ` for `n ≥ 1`.
pub fn matrix_power(m: &Operator2, n: u64, strategy: PowerStrategy) -> Result<Operator2> {
    m.ensure_finite()?;
    if n == 0 {
        return Err(ZenoError::Domain(
            "matrix power requires n ≥ 1 (the identity is not an experiment stage)".into(),
        ));
    }
    match strategy {
        PowerStrategy::Iterated => {
            let mut acc = *m;
            for _ in 1..n {
                acc = *m * acc;
            }
            Ok(acc)
        }
        PowerStrategy::Spectral => {
            let spec = Spectrum::of(m);
            let sums = spec.power_sums(n);
            let sym = sums.unscale(sums.sym);
            let anti = sums.unscale(sums.anti);
            let traceless = *m - Operator2::identity().scale(spec.half_sum);
            Ok(Operator2::identity().scale(sym) + traceless.scale(anti))
        }
    }
}
