//! Quantum Zeno experiments on a spin-1/2 with imperfect measurement stages.
//!
//! A spin starts in `|↑⟩` and crosses `N` field regions, each rotating it by
//! `θ/N` about `x`. After every region a spin-selective mirror transmits
//! (mostly) spin-up and reflects (mostly) spin-down out of the apparatus. The
//! probability of reaching the detector is the survival probability. With
//! ideal mirrors it tends to 1 as `N → ∞`; with lossy mirrors it peaks at a
//! finite `N_opt`.
//!
//! * [`spin`]: 2×2 complex algebra, rotations, eigenvalues and powers.
//! * [`mirror`]: ideal, diagonal-lossy and spin-flipping mirror models.
//! * [`engine`]: survival probabilities (closed form, propagation oracle, expansions).
//! * [`optimizer`]: optimal stage counts, exact and estimated, plus the general loss model.

pub mod engine;
pub mod error;
pub mod mirror;
pub mod numeric;
pub mod optimizer;
pub mod spin;

pub use engine::{
    compare_methods, ln_survival_exact, survival_dominant, survival_exact, survival_exact_diagonal,
    survival_exact_spinflip, survival_first_order, survival_first_order_spinflip, survival_ideal,
    survival_oracle, AbCoefficients, BranchLedger, MethodComparison, OracleOutcome, ZenoRun,
};
pub use error::{Result, ZenoError};
pub use mirror::{from_mod2_phase, DiagonalMirror, MirrorModel, SpinFlipMirror};
pub use optimizer::{
    general_n_opt, general_numeric_optimum, general_p_opt, n_opt_estimate, n_opt_search, optimize,
    p_opt_estimate, x_opt_root, ExactOptimum, FrequencyOptimum, LossModel, NumericOptimum,
    OptimumReport,
};
pub use spin::{eigenvalues, matrix_power, rotation, Complex, Operator2, PowerStrategy, SpinState};
