//! Measurement stages: the spin-selective mirror that transmits one spin
//! component and reflects the other, ideal or lossy.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::spin::{ensure_finite, Complex, Operator2, NORM_SLACK};

/// Tolerance for the equality that marks a mirror conservative.
pub const CONSERVATIVE_TOL: f64 = 1e-9;

/// Builds `√mod2 · e^{i·phase}`; mirror data are usually quoted as |T|².
pub fn from_mod2_phase(mod2: f64, phase: f64) -> Result<Complex> {
    if !(mod2.is_finite() && phase.is_finite()) || mod2 < 0.0 {
        return Err(ZenoError::InvalidMirror(format!(
            "modulus² {mod2} / phase {phase} not admissible"
        )));
    }
    Ok(Complex::from_polar(mod2.sqrt(), phase))
}

/// `T̃ = diag(T↑, T↓)`, `R̃ = diag(R↑, R↓)`: no spin flips.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalMirror {
    t_up: Complex,
    t_down: Complex,
    r_up: Complex,
    r_down: Complex,
}

impl DiagonalMirror {
    pub fn new(t_up: Complex, t_down: Complex, r_up: Complex, r_down: Complex) -> Result<Self> {
        for (z, name) in [(t_up, "T↑"), (t_down, "T↓"), (r_up, "R↑"), (r_down, "R↓")] {
            ensure_finite(z, name).map_err(|e| ZenoError::InvalidMirror(e.to_string()))?;
        }
        for (t, r, spin) in [(t_up, r_up, "↑"), (t_down, r_down, "↓")] {
            let total = t.norm_sqr() + r.norm_sqr();
            if total > 1.0 + NORM_SLACK {
                return Err(ZenoError::InvalidMirror(format!(
                    "|T{spin}|² + |R{spin}|² = {total} exceeds 1"
                )));
            }
        }
        Ok(DiagonalMirror {
            t_up,
            t_down,
            r_up,
            r_down,
        })
    }

    /// Lossless mirror with real, non-negative reflection amplitudes filling up each column.
    pub fn conservative(t_up: Complex, t_down: Complex) -> Result<Self> {
        let fill = |t: Complex| Complex::new((1.0 - t.norm_sqr()).max(0.0).sqrt(), 0.0);
        Self::new(t_up, t_down, fill(t_up), fill(t_down))
    }

    pub fn t_up(&self) -> Complex {
        self.t_up
    }

    pub fn t_down(&self) -> Complex {
        self.t_down
    }

    pub fn r_up(&self) -> Complex {
        self.r_up
    }

    pub fn r_down(&self) -> Complex {
        self.r_down
    }

    pub fn is_conservative(&self) -> bool {
        let up = self.t_up.norm_sqr() + self.r_up.norm_sqr();
        let down = self.t_down.norm_sqr() + self.r_down.norm_sqr();
        (up - 1.0).abs() <= CONSERVATIVE_TOL && (down - 1.0).abs() <= CONSERVATIVE_TOL
    }

    /// The same mirror written with explicit (zero) spin-flip entries.
    pub fn to_spin_flip(&self) -> SpinFlipMirror {
        SpinFlipMirror {
            t: Operator2::diag(self.t_up, self.t_down),
            r: Operator2::diag(self.r_up, self.r_down),
        }
    }
}

/// General mirror: transmission and reflection may flip the spin.
///
/// Entry `(i, j)` of either matrix is the amplitude for incoming spin `j` to leave
/// with spin `i`, so `T↑↓` sits at `(↑, ↓)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinFlipMirror {
    t: Operator2,
    r: Operator2,
}

impl SpinFlipMirror {
    /// Accepts the pair when each incoming spin loses no more than all of its norm,
    /// and the stacked map `(T̃; R̃)` is a contraction.
    pub fn new(t: Operator2, r: Operator2) -> Result<Self> {
        if !(t.is_finite() && r.is_finite()) {
            return Err(ZenoError::InvalidMirror(
                "non-finite spin-flip entries".into(),
            ));
        }
        let mirror = SpinFlipMirror { t, r };
        let g = mirror.gram();
        for (col, spin) in [(0, "↑"), (1, "↓")] {
            let total = g.get(col, col).re;
            if total > 1.0 + NORM_SLACK {
                return Err(ZenoError::InvalidMirror(format!(
                    "column {spin}: |T·{spin}|² + |R·{spin}|² = {total} exceeds 1"
                )));
            }
        }
        let top = gram_top_eigenvalue(&g);
        if top > 1.0 + NORM_SLACK {
            return Err(ZenoError::InvalidMirror(format!(
                "mirror amplifies some spin states (largest gain {top})"
            )));
        }
        Ok(mirror)
    }

    pub fn t_matrix(&self) -> Operator2 {
        self.t
    }

    pub fn r_matrix(&self) -> Operator2 {
        self.r
    }

    /// `T̃†T̃ + R̃†R̃`
    pub fn gram(&self) -> Operator2 {
        self.t.adjoint() * self.t + self.r.adjoint() * self.r
    }

    /// Columns normalized and mutually orthogonal: `T̃†T̃ + R̃†R̃ = I`.
    pub fn is_conservative(&self) -> bool {
        self.gram().max_abs_diff(&Operator2::identity()) <= CONSERVATIVE_TOL
    }
}

fn gram_top_eigenvalue(g: &Operator2) -> f64 {
    let a = g.get(0, 0).re;
    let d = g.get(1, 1).re;
    let b = g.get(0, 1).norm();
    0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * b).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MirrorModel {
    /// `T = |↑⟩⟨↑|`, `R = |↓⟩⟨↓|`.
    Ideal,
    Diagonal(DiagonalMirror),
    SpinFlip(SpinFlipMirror),
}

impl MirrorModel {
    pub fn transmit_operator(&self) -> Operator2 {
        match self {
            MirrorModel::Ideal => Operator2::diag(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)),
            MirrorModel::Diagonal(m) => Operator2::diag(m.t_up, m.t_down),
            MirrorModel::SpinFlip(m) => m.t,
        }
    }

    pub fn reflect_operator(&self) -> Operator2 {
        match self {
            MirrorModel::Ideal => Operator2::diag(Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)),
            MirrorModel::Diagonal(m) => Operator2::diag(m.r_up, m.r_down),
            MirrorModel::SpinFlip(m) => m.r,
        }
    }

    pub fn is_conservative(&self) -> bool {
        match self {
            MirrorModel::Ideal => true,
            MirrorModel::Diagonal(m) => m.is_conservative(),
            MirrorModel::SpinFlip(m) => m.is_conservative(),
        }
    }

    /// The no-flip transmission amplitude of a spin-up neutron (`T↑` or `T↑↑`).
    pub fn leading_transmission(&self) -> Complex {
        self.transmit_operator().get(0, 0)
    }
}

impl From<DiagonalMirror> for MirrorModel {
    fn from(m: DiagonalMirror) -> Self {
        MirrorModel::Diagonal(m)
    }
}

impl From<SpinFlipMirror> for MirrorModel {
    fn from(m: SpinFlipMirror) -> Self {
        MirrorModel::SpinFlip(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex {
        Complex::new(x, 0.0)
    }

    #[test]
    fn ideal_operators() {
        let m = MirrorModel::Ideal;
        assert_eq!(m.transmit_operator(), Operator2::diag(re(1.0), re(0.0)));
        assert_eq!(m.reflect_operator(), Operator2::diag(re(0.0), re(1.0)));
        assert!(m.is_conservative());
    }

    #[test]
    fn diagonal_embeds_coefficients() {
        let d = DiagonalMirror::new(re(0.99995), re(0.0), re(0.0), re(1.0)).unwrap();
        let m = MirrorModel::from(d);
        assert_eq!(m.transmit_operator(), Operator2::diag(re(0.99995), re(0.0)));
        assert_eq!(m.reflect_operator(), Operator2::diag(re(0.0), re(1.0)));
    }

    #[test]
    fn diagonal_reduces_to_ideal() {
        let d: MirrorModel = DiagonalMirror::new(re(1.0), re(0.0), re(0.0), re(1.0))
            .unwrap()
            .into();
        assert_eq!(
            d.transmit_operator(),
            MirrorModel::Ideal.transmit_operator()
        );
        assert_eq!(d.reflect_operator(), MirrorModel::Ideal.reflect_operator());
    }

    #[test]
    fn spin_flip_without_flips_matches_diagonal() {
        let d = DiagonalMirror::new(
            from_mod2_phase(0.9999, 0.3).unwrap(),
            from_mod2_phase(1e-4, -1.0).unwrap(),
            from_mod2_phase(1e-4, 0.0).unwrap(),
            from_mod2_phase(0.9999, 2.0).unwrap(),
        )
        .unwrap();
        let s = d.to_spin_flip();
        let s = SpinFlipMirror::new(s.t_matrix(), s.r_matrix()).unwrap();
        let (dm, sm) = (MirrorModel::from(d), MirrorModel::from(s));
        assert!(dm.transmit_operator().max_abs_diff(&sm.transmit_operator()) <= 1e-15);
        assert!(dm.reflect_operator().max_abs_diff(&sm.reflect_operator()) <= 1e-15);
        assert_eq!(dm.is_conservative(), sm.is_conservative());
    }

    #[test]
    fn spin_flip_reflect_entry_placement() {
        let z = re(0.0);
        let t = Operator2::new(re(0.99), z, z, z);
        let r = Operator2::new(z, re(0.01), z, re(0.99));
        let m = MirrorModel::from(SpinFlipMirror::new(t, r).unwrap());
        assert_eq!(m.reflect_operator().get(0, 1), re(0.01));
        assert_eq!(m.reflect_operator().get(1, 0), z);
    }

    #[test]
    fn conservative_flag() {
        let lossy = DiagonalMirror::new(re(0.9999f64.sqrt()), re(0.0), re(0.0), re(1.0)).unwrap();
        assert!(!lossy.is_conservative());
        let tight =
            DiagonalMirror::new(re(0.9999f64.sqrt()), re(0.0), re(0.0001f64.sqrt()), re(1.0))
                .unwrap();
        assert!(tight.is_conservative());
        assert!(DiagonalMirror::conservative(re(0.5), re(0.1))
            .unwrap()
            .is_conservative());
    }

    #[test]
    fn rejects_gainful_mirrors() {
        assert!(DiagonalMirror::new(re(0.9), re(0.0), re(0.5), re(1.0)).is_err());
        assert!(DiagonalMirror::new(re(f64::NAN), re(0.0), re(0.0), re(1.0)).is_err());
        // columns within budget but not orthogonal: the sum state gains norm
        let h = 0.5f64.sqrt();
        let t = Operator2::new(re(h), re(h), re(0.0), re(0.0));
        let r = Operator2::new(re(0.0), re(0.0), re(h), re(h));
        assert!(SpinFlipMirror::new(t, r).is_err());
    }

    #[test]
    fn mod2_phase_conversion() {
        let z = from_mod2_phase(0.25, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((z - Complex::new(0.0, 0.5)).norm() < 1e-16);
        assert!(from_mod2_phase(-0.1, 0.0).is_err());
    }
}
