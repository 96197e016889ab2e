use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid problem data: {0}")]
    InvalidProblem(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("zero field")]
    ZeroField,
    #[error("H and F do not share a strict sign (H = {h:e}, F = {f:e})")]
    SignMismatch { h: f64, f: f64 },
    #[error("no admissible field: h <= 0 on the mask")]
    NoAdmissibleField,
    #[error("constraint set is empty (lambda* = +inf)")]
    InfeasibleConstraint,
    #[error("t0 scaling degenerate: {0}")]
    DegenerateScaling(String),
    #[error("cone is empty at lambda = {lambda}")]
    EmptyCone { lambda: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("separation parameter not found: {0}")]
    SeparationFailed(String),
    #[error("plateau not found: {0}")]
    PlateauNotFound(String),
    #[error("restricted minimizer lies on the boundary face at lambda = {lambda}")]
    BoundaryHit { lambda: f64 },
    #[error("continuation stalled at lambda = {lambda}")]
    ContinuationStall { lambda: f64 },
    #[error("no minimizer on the boundary face at mu = {mu}")]
    BoundaryMinimizerNotFound { mu: f64 },
    #[error("path collapsed")]
    PathCollapse,
    #[error("string method exceeded {0} sweeps")]
    MaxSweepsExceeded(usize),
    #[error("saddle refinement collapsed onto the first solution")]
    ConvergedToFirstSolution,
}

impl SolverError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::InvalidDomain(_) => "InvalidDomain",
            Self::InvalidProblem(_) => "InvalidProblem",
            Self::Precondition(_) => "Precondition",
            Self::ZeroField => "ZeroField",
            Self::SignMismatch { .. } => "SignMismatch",
            Self::NoAdmissibleField => "NoAdmissibleField",
            Self::InfeasibleConstraint => "InfeasibleConstraint",
            Self::DegenerateScaling(_) => "DegenerateScaling",
            Self::EmptyCone { .. } => "EmptyCone",
            Self::NoConvergence { .. } => "NoConvergence",
            Self::SeparationFailed(_) => "SeparationFailed",
            Self::PlateauNotFound(_) => "PlateauNotFound",
            Self::BoundaryHit { .. } => "BoundaryHit",
            Self::ContinuationStall { .. } => "ContinuationStall",
            Self::BoundaryMinimizerNotFound { .. } => "BoundaryMinimizerNotFound",
            Self::PathCollapse => "PathCollapse",
            Self::MaxSweepsExceeded(_) => "MaxSweepsExceeded",
            Self::ConvergedToFirstSolution => "ConvergedToFirstSolution",
        }
    }
}

pub type Result<T> = std::result::Result<T, SolverError>;
