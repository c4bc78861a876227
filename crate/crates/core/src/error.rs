use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error(
        "matrix is not positive definite (min eigenvalue {min_eigenvalue:e}, floor {floor:e})"
    )]
    NotPositiveDefinite { min_eigenvalue: f64, floor: f64 },

    #[error("no Kraus or co-Kraus operators supplied")]
    EmptyInput,

    #[error("conjugation by the zero matrix")]
    ZeroMatrix,

    #[error("Slater condition fails: <xbar|G|xbar> = {value:e} is not positive")]
    SlaterViolation { value: f64 },

    #[error("no violating vector found although the certificate search failed (g* = {g_star:e})")]
    WitnessNotFound { g_star: f64 },

    #[error("map is not in the interior of the positive cone: {reason}")]
    NotInterior { reason: String },

    #[error("no convergence after {iterations} iterations (best residual {best_residual:e})")]
    NoConvergence {
        iterations: usize,
        best_residual: f64,
    },

    #[error("matrix is not a proper rotation (orthogonality defect {defect:e}, det {det})")]
    NotRotation { defect: f64, det: f64 },

    #[error("map is not bistochastic (unital defect {unital:e}, trace defect {trace:e})")]
    NotBistochastic { unital: f64, trace: f64 },

    #[error("Bloch block has operator norm {norm} > 1")]
    NormExceeded { norm: f64 },

    #[error("map is not positive (min pure-state eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("map lies on the boundary of the positive cone; use the regularized path")]
    BoundaryMap,

    #[error("decomposition residual {residual:e} exceeds tolerance {tol:e}")]
    VerificationFailed { residual: f64, tol: f64 },

    #[error("map has rank {rank}; a perturbation needs rank at least 2")]
    RankDeficientInput { rank: usize },

    #[error("slack matrix Q vanishes; the map is an automorphism")]
    QZero,

    #[error("no admissible perturbation size above {floor:e}")]
    PerturbationFailure { floor: f64 },

    #[error("map is not a cone automorphism")]
    NotAutomorphism,

    #[error(
        "neither Choi matrix has numerical rank one (eigenvalue ratios {ratio:e}, {ratio_t:e})"
    )]
    ExtractionFailure { ratio: f64, ratio_t: f64 },

    #[error("invalid two-qubit state: {reason}")]
    InvalidState { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
