use posmap_core::Error;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

/// A failed request: exit code, status word and a JSON diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub exit_code: i32,
    pub status: &'static str,
    pub kind: String,
    pub message: String,
    pub path: Option<String>,
    pub details: Value,
}

impl CliError {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            exit_code: EXIT_INVALID,
            status: "invalid_input",
            kind: "InvalidInput".into(),
            message: message.into(),
            path: Some(path.into()),
            details: Value::Null,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind,
            "message": self.message,
            "path": self.path,
            "details": self.details,
        })
    }
}

fn variant_name(e: &Error) -> &'static str {
    match e {
        Error::NotSquare { .. } => "NotSquare",
        Error::DimensionTooLarge { .. } => "DimensionTooLarge",
        Error::DimensionMismatch(..) => "DimensionMismatch",
        Error::NonFinite => "NonFinite",
        Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
        Error::EmptyInput => "EmptyInput",
        Error::ZeroMatrix => "ZeroMatrix",
        Error::SlaterViolation { .. } => "SlaterViolation",
        Error::WitnessNotFound { .. } => "WitnessNotFound",
        Error::NotInterior { .. } => "NotInterior",
        Error::NoConvergence { .. } => "NoConvergence",
        Error::NotRotation { .. } => "NotRotation",
        Error::NotBistochastic { .. } => "NotBistochastic",
        Error::NormExceeded { .. } => "NormExceeded",
        Error::NotPositive { .. } => "NotPositive",
        Error::BoundaryMap => "BoundaryMap",
        Error::VerificationFailed { .. } => "VerificationFailed",
        Error::RankDeficientInput { .. } => "RankDeficientInput",
        Error::QZero => "QZero",
        Error::PerturbationFailure { .. } => "PerturbationFailure",
        Error::NotAutomorphism => "NotAutomorphism",
        Error::ExtractionFailure { .. } => "ExtractionFailure",
        Error::InvalidState { .. } => "InvalidState",
    }
}

impl From<Error> for CliError {
    /// Malformed inputs exit with 2, numerical failures (budget exhausted or
    /// a result that could not be verified) with 3. Everything else is a
    /// verdict about the input (for example "not positive") and exits with 0.
    fn from(e: Error) -> Self {
        let (exit_code, status) = match &e {
            Error::NotSquare { .. }
            | Error::DimensionTooLarge { .. }
            | Error::DimensionMismatch(..)
            | Error::NonFinite
            | Error::EmptyInput
            | Error::ZeroMatrix
            | Error::SlaterViolation { .. }
            | Error::InvalidState { .. } => (EXIT_INVALID, "invalid_input"),
            Error::NoConvergence { .. }
            | Error::WitnessNotFound { .. }
            | Error::VerificationFailed { .. }
            | Error::PerturbationFailure { .. }
            | Error::ExtractionFailure { .. } => (EXIT_NO_CONVERGENCE, "no_convergence"),
            _ => (EXIT_OK, "refused"),
        };
        let details = match &e {
            Error::NoConvergence {
                iterations,
                best_residual,
            } => {
                json!({"iterations": iterations, "best_residual": best_residual})
            }
            Error::NotPositive { min_eigenvalue } => json!({"min_eigenvalue": min_eigenvalue}),
            Error::VerificationFailed { residual, tol } => {
                json!({"residual": residual, "tol": tol})
            }
            Error::WitnessNotFound { g_star } => json!({"g_star": g_star}),
            _ => Value::Null,
        };
        Self {
            exit_code,
            status,
            kind: variant_name(&e).into(),
            message: e.to_string(),
            path: None,
            details,
        }
    }
}
