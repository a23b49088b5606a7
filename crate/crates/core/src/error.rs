use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,
    #[error("row {row}: self-loop on node `{id}`")]
    SelfLoop { row: usize, id: String },
    #[error("row {row}: empty node identifier")]
    EmptyId { row: usize },
    #[error("allocation probability {0} must lie strictly inside (0, 1)")]
    InvalidAlpha(f64),
    #[error("exposed count {count} exceeds degree {degree}")]
    CountExceedsDegree { count: usize, degree: usize },
    #[error("exposure {value} at node `{node}` is not binary")]
    NonBinaryExposure { node: String, value: f64 },
    #[error("non-finite value at node `{node}`")]
    NonFinite { node: String },
    #[error("node `{node}` has no neighbors; isolates must be excluded")]
    Isolate { node: String },
    #[error("study data has {rows} rows but the network has {nodes} nodes")]
    Misaligned { rows: usize, nodes: usize },
    #[error("covariate row for node `{node}` has width {got}, expected {expected}")]
    CovariateWidth { node: String, got: usize, expected: usize },
    #[error("{model}: design matrix is rank deficient (rank {rank} of {cols})")]
    RankDeficient { model: &'static str, rank: usize, cols: usize },
    #[error("{model}: fitted probabilities are numerically 0 or 1 (separation)")]
    Separation { model: &'static str },
    #[error("{model}: no convergence after {iterations} iterations (gradient max-norm {grad_norm:e})")]
    NoConvergence {
        model: &'static str,
        iterations: usize,
        grad_norm: f64,
        last: Vec<f64>,
    },
    #[error("propensity {value:e} at node `{node}` is below the floor {floor:e}")]
    WeightFloor { node: String, value: f64, floor: f64 },
    #[error("operands do not match the {0} contrast")]
    MismatchedContrast(&'static str),
    #[error("sandwich variance needs at least 2 components, got {0}")]
    TooFewComponents(usize),
    #[error("bread matrix is singular (condition number {0:e})")]
    SingularBread(f64),
    #[error("quadratic form is negative ({0:e})")]
    NegativeVariance(f64),
    #[error("selector has length {got}, expected {expected}")]
    SelectorLength { got: usize, expected: usize },
    #[error("no simple connected {degree}-regular graph on {size} nodes after {attempts} attempts")]
    InfeasibleGraph {
        size: usize,
        degree: usize,
        attempts: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{estimator}: {failed} of {reps} replicates failed")]
    StudyFailures {
        estimator: &'static str,
        failed: usize,
        reps: usize,
    },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
