use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("duplicate interpolation point {0}")]
    DuplicatePoint(u64),
    #[error("value matrices must share one shape")]
    ShapeMismatch,
    #[error("dimension r_{index} = {dim} is not divisible by p_{index} = {parts}")]
    IndivisibleDimension { index: usize, dim: usize, parts: usize },
    #[error("chain shape mismatch: {0}")]
    ChainShapeMismatch(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("result block ({0}, {1}) is missing")]
    MissingBlock(usize, usize),
    #[error("evaluation point has {got} coordinates, scheme needs {expected}")]
    PointArityMismatch { expected: usize, got: usize },
    #[error("no evaluation supplied for grid point {0:?}")]
    MissingEvaluation(Vec<u64>),
    #[error("coefficient tensor degrees {got:?} do not match scheme degrees {expected:?}")]
    DegreeMismatch { expected: Vec<usize>, got: Vec<usize> },
    #[error("interpolation system is singular: rank {rank} < {needed} monomials")]
    SingularSystem { rank: usize, needed: usize },
    #[error("infeasible plan: N * prod(s_i) = {product} < 1 (need N * prod s_i >= 1)")]
    InfeasiblePlan { product: String },
    #[error("non-integral assignment on axis {axis}: s = {fraction} times {size} points")]
    NonIntegralAssignment { axis: usize, fraction: String, size: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("field of size {modulus} cannot host {requested} distinct evaluation points")]
    FieldTooSmall { modulus: u64, requested: usize },
    #[error("all tasks exhausted after {collected} results, system still rank-deficient ({rank} < {needed})")]
    NeverDecodable { collected: usize, rank: usize, needed: usize },
    #[error("decoded result disagrees with the reference product")]
    DecodeMismatch,
    #[error("parse error: {0}")]
    Parse(String),
}
