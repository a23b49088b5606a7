use std::fmt;

use netspill_core::Error;
use serde::Serialize;

/// Exit status for input validation failures.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status for fitting and other runtime failures.
pub const EXIT_RUNTIME: i32 = 1;

/// An error with a stable machine-readable code and a process exit status.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    #[serde(rename = "error")]
    pub code: &'static str,
    pub message: String,
    #[serde(skip)]
    pub exit: i32,
}

impl CliError {
    pub fn validation(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            exit: EXIT_VALIDATION,
        }
    }

    pub fn runtime(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            exit: EXIT_RUNTIME,
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self::validation("IO_ERROR", format!("{}: {err}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for CliError {}

fn code_of(err: &Error) -> (&'static str, i32) {
    use Error::*;
    let v = EXIT_VALIDATION;
    let r = EXIT_RUNTIME;
    match err {
        EmptyInput => ("EMPTY_INPUT", v),
        SelfLoop { .. } => ("SELF_LOOP", v),
        EmptyId { .. } => ("EMPTY_ID", v),
        InvalidAlpha(_) => ("INVALID_ALPHA", v),
        CountExceedsDegree { .. } => ("COUNT_EXCEEDS_DEGREE", v),
        NonBinaryExposure { .. } => ("NON_BINARY_EXPOSURE", v),
        NonFinite { .. } => ("NON_FINITE", v),
        Isolate { .. } => ("ISOLATE", v),
        Misaligned { .. } => ("MISALIGNED", v),
        CovariateWidth { .. } => ("COVARIATE_WIDTH", v),
        InvalidConfig(_) => ("INVALID_CONFIG", v),
        RankDeficient { .. } => ("RANK_DEFICIENT", r),
        Separation { .. } => ("SEPARATION", r),
        NoConvergence { .. } => ("NO_CONVERGENCE", r),
        WeightFloor { .. } => ("WEIGHT_FLOOR", r),
        MismatchedContrast(_) => ("MISMATCHED_CONTRAST", r),
        TooFewComponents(_) => ("TOO_FEW_COMPONENTS", r),
        SingularBread(_) => ("SINGULAR_BREAD", r),
        NegativeVariance(_) => ("NEGATIVE_VARIANCE", r),
        SelectorLength { .. } => ("SELECTOR_LENGTH", r),
        InfeasibleGraph { .. } => ("INFEASIBLE_GRAPH", r),
        StudyFailures { .. } => ("STUDY_FAILURES", r),
        _ => ("INTERNAL", r),
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let (code, exit) = code_of(&err);
        Self {
            code,
            message: err.to_string(),
            exit,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
