//! Canonical Wiener-Hopf factorization on the unit circle.
//!
//! The crate works with matrix functions `G(z) = I + F(z)` whose values
//! on the unit circle are strictly contractive, realized as transfer
//! functions `F(z) = D + zC(I - zA)^{-1}B` of discrete-time systems with
//! a dichotomous main operator (no spectrum on the circle). It computes
//! left and right canonical factorizations `G = V_- V_+` and
//! `G = W_+ W_-` in explicit state-space form, together with realizations
//! of the inverse factors and certificates of their analyticity domains.
//!
//! Supporting machinery: spectral projections (contour quadrature and an
//! ordered-Schur route that cross-check each other), construction of
//! dichotomous realizations from rational symbol data, verification of
//! the strict KYP inequality and Krein-space bicontractivity, pointwise
//! residual diagnostics, and inversion of block Toeplitz finite sections
//! through the factorization.

extern crate openblas_src as _;

mod error;
mod lapack;

pub mod json;
pub mod kyp;
pub mod matrix;
pub mod realization;
pub mod synth;
pub mod toeplitz;
pub mod verification;
pub mod wiener_hopf;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, ComplexVector};

/// Numerical tolerances used across the crate.
///
/// The defaults are standard double-precision margins; every entry can
/// be overridden through `WHFACTOR_TOL_*` environment variables (see
/// [`Tolerances::from_env`]).
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Minimal accepted distance of eigenvalues to the unit circle.
    pub dichotomy: f64,
    /// Idempotence defect allowed for spectral projections.
    pub proj: f64,
    /// Allowed disagreement between the quadrature and ordered-Schur
    /// projections (attainable regime; see `dichotomy_info`).
    pub cross: f64,
    /// Relative singular value cutoff for residue rank decisions.
    pub rank: f64,
    /// Allowed departure from selfadjointness.
    pub sym: f64,
    /// Strictness gap required below one for the circle sup norm.
    pub norm: f64,
    /// Relative reciprocal condition floor for linear solves.
    pub singular: f64,
    /// Condition number limit for matched-basis matrices.
    pub matching: f64,
    /// Norm threshold for truncated Toeplitz coefficient tails.
    pub tail: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            dichotomy: 1e-6,
            proj: 1e-8,
            cross: 1e-8,
            rank: 1e-12,
            sym: 1e-10,
            norm: 1e-6,
            singular: 1e-12,
            matching: 1e8,
            tail: 1e-9,
        }
    }
}

impl Tolerances {
    /// Defaults overridden by `WHFACTOR_TOL_DICHOTOMY`, `..._PROJ`,
    /// `..._CROSS`, `..._RANK`, `..._SYM`, `..._NORM`, `..._SINGULAR`,
    /// `..._MATCHING` and `..._TAIL` where set and parseable.
    pub fn from_env() -> Self {
        let mut t = Tolerances::default();
        let read = |name: &str, slot: &mut f64| {
            if let Ok(v) = std::env::var(name) {
                if let Ok(x) = v.parse::<f64>() {
                    *slot = x;
                }
            }
        };
        read("WHFACTOR_TOL_DICHOTOMY", &mut t.dichotomy);
        read("WHFACTOR_TOL_PROJ", &mut t.proj);
        read("WHFACTOR_TOL_CROSS", &mut t.cross);
        read("WHFACTOR_TOL_RANK", &mut t.rank);
        read("WHFACTOR_TOL_SYM", &mut t.sym);
        read("WHFACTOR_TOL_NORM", &mut t.norm);
        read("WHFACTOR_TOL_SINGULAR", &mut t.singular);
        read("WHFACTOR_TOL_MATCHING", &mut t.matching);
        read("WHFACTOR_TOL_TAIL", &mut t.tail);
        t
    }
}
