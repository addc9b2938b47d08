use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("polytope is not full-dimensional ({0})")]
    Degenerate(String),
    #[error("inequality system is unbounded or infeasible")]
    Unbounded,
    #[error("points lie in a hyperplane; lower hull needs an affinely spanning set")]
    DegenerateSpan,
    #[error("vertex {vertex} is not a smooth corner: {reason}")]
    NonSmoothCorner { vertex: String, reason: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("function is not positive on the domain (min = {min})")]
    NonPositive { min: String },
    #[error("sampled values are not convex: {0}")]
    NotConvex(String),
    #[error("level table at degree {degree} does not generate lattice point {beta:?}")]
    NotGenerated { degree: u32, beta: Vec<i64> },
    #[error("filtration does not provide degree {0}")]
    MissingDegree(u32),
    #[error("unsupported filtration variant: {0}")]
    UnsupportedVariant(String),
    #[error("invalid level table: {0}")]
    InvalidTable(String),
    #[error("filtration is not multiplicative: {0}")]
    NotMultiplicative(String),
    #[error("need at least {needed} samples per residue class, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("leading coefficient {coefficient} differs across residue classes")]
    PeriodMismatch { coefficient: &'static str },
    #[error("{series} series is not polynomial on the sampled progression")]
    ResidualNonZero { series: &'static str },
    #[error("negative norm square {0}")]
    NegativeSquare(String),
    #[error("m*eps = {0} is not an integer")]
    NonIntegerMEps(String),
    #[error("k*c = {0} is not an integer")]
    NonIntegerKc(String),
    #[error("function takes negative value {0} on the simplex")]
    NegativeFunction(String),
    #[error("matrix family is singular (determinant vanishes identically)")]
    SingularFamily,
    #[error("truncation order {order} too small: {reason}")]
    TruncationTooSmall { order: usize, reason: String },
    #[error("need at least {needed} degrees, got {got}")]
    InsufficientDegrees { needed: usize, got: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
}
