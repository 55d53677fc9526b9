//! Error type shared by all modules of the crate.

use num_complex::Complex64;

/// Errors reported by the factorization library.
///
/// The variants split into two families: mathematical check failures
/// (the input violates a hypothesis such as dichotomy, strict
/// contractivity or invertibility of `I + D`) and computational
/// failures (I/O, LAPACK breakdown, invalid arguments). The CLI maps
/// the former to exit code 2 and the latter to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("resolvent I - zA is singular at z = {z}")]
    SingularResolvent { z: Complex64 },

    #[error("operator has an eigenvalue within {distance:.3e} of the unit circle")]
    NotDichotomous { distance: f64 },

    #[error("pole q = {q} lies on the unit circle")]
    PoleOnCircle { q: Complex64 },

    #[error("pole at the origin is not representable")]
    PoleAtOrigin,

    #[error("residue at q = {q} is numerically zero; drop the pole instead")]
    RankDeficiencyTolerance { q: Complex64 },

    #[error("matrix is not selfadjoint: asymmetry {defect:.3e}")]
    NotSelfadjoint { defect: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("Gram operator is singular or nearly singular")]
    SingularGram,

    #[error("supremum norm on the circle is {sup} which is not strictly below one")]
    NormNotStrictlyContractive { sup: f64 },

    #[error("deflating subspace selection failed: {0}")]
    PencilSelectionFailed(String),

    #[error("a posteriori certification failed: {0}")]
    CertificationFailed(String),

    #[error("I + D is singular")]
    SingularIPlusD,

    #[error("principal square root undefined: eigenvalue on the closed negative real axis")]
    SqrtBranchCut,

    #[error("matched-basis matrix is ill conditioned: cond = {cond:.3e}")]
    MatchingFailed { cond: f64 },

    #[error("spectral containment violated: {0}")]
    SpectralContainmentViolated(String),

    #[error("coefficient tail is not negligible at the cutoff: norm {norm:.3e}")]
    TailTooShort { norm: f64 },

    #[error("Toeplitz section is numerically singular")]
    SingularSection,

    #[error("projection oracles disagree: {diff:.3e} exceeds allowance {allowance:.3e}")]
    ProjectionOracleMismatch { diff: f64, allowance: f64 },

    #[error("matrix entries must be finite")]
    NonFiniteData,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("LAPACK routine {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },
}

impl Error {
    /// Whether the error reports a failed mathematical hypothesis of the
    /// input rather than a computational problem.
    pub fn is_math_check_failure(&self) -> bool {
        matches!(
            self,
            Error::SingularResolvent { .. }
                | Error::NotDichotomous { .. }
                | Error::PoleOnCircle { .. }
                | Error::PoleAtOrigin
                | Error::RankDeficiencyTolerance { .. }
                | Error::NotSelfadjoint { .. }
                | Error::SingularGram
                | Error::NormNotStrictlyContractive { .. }
                | Error::SingularIPlusD
                | Error::SqrtBranchCut
                | Error::MatchingFailed { .. }
                | Error::SpectralContainmentViolated(_)
                | Error::CertificationFailed(_)
                | Error::TailTooShort { .. }
                | Error::SingularSection
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
