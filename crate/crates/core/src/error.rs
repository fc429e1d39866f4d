use thiserror::Error;

/// Errors raised by the laboratory. Variants map onto the failure modes each
/// operation documents; the runner translates them into exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid law parameters: {0}")]
    InvalidLaw(String),

    #[error("no closed form for `{op}` on law {law}; use the empirical route")]
    UnsupportedLaw { op: &'static str, law: String },

    #[error("law {0} is unbounded")]
    UnboundedLaw(String),

    #[error("empty sample")]
    EmptySample,

    #[error("weights t_k are required for this sequence")]
    MissingWeights,

    #[error("weight sequence is not bounded: {0}")]
    UnboundedWeights(String),

    #[error("radius {0} is outside (0, 1)")]
    RadiusOutOfRange(f64),

    #[error("schedule unreachable: {0}")]
    ScheduleUnreachable(String),

    #[error("no coefficient envelope available: {0}")]
    UnboundedGrowth(String),

    #[error("law at index {0} carries no density bound (Q(X, l) <= b l is required)")]
    MissingDensityBound(usize),

    #[error("polynomial has degree zero")]
    DegreeZero,

    #[error("a root lies on the circle |z| = {0}")]
    RootOnCircle(f64),

    #[error("root finder failed: {0}")]
    RootFinder(String),

    #[error("fewer than {needed} roots with modulus above 1/2 (found {found})")]
    InsufficientRoots { needed: usize, found: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
