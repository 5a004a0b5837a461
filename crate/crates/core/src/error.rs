use thiserror::Error;

/// Errors raised by the arithmetic and pipeline layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{value} is not a unit modulo {modulus}")]
    NonUnit { value: u64, modulus: u64 },
    #[error("{a} and {b} are not coprime")]
    NotCoprime { a: u64, b: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {p}^{n} does not fit in 63 bits")]
    ModulusTooLarge { p: u64, n: u32 },
    #[error("bad discriminant {0}")]
    BadDiscriminant(i64),
    #[error("forms have different discriminants ({0} vs {1})")]
    MismatchedDiscriminant(i64, i64),
    #[error("group ring elements live over different rings")]
    MismatchedGroup,
    #[error("orders {source_order} -> {target_order} do not form a level-p step")]
    BadTower { source_order: usize, target_order: usize },
    #[error("{divisor} does not divide {order}")]
    NotDivisor { divisor: usize, order: usize },
    #[error("unsupported quotient map: {0}")]
    UnsupportedQuotient(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("assumption failed: {0}")]
    AssumptionFailed(String),
    #[error("{p} does not split in the field of discriminant {d}")]
    NotSplit { p: u64, d: i64 },
    #[error("{0} has an even number of prime factors")]
    ParityError(u64),
    #[error("{0} is not square-free")]
    NotSquareFree(u64),
    #[error("prime {0} divides the level")]
    BadPrime(u64),
    #[error("weight {weight} is not invertible modulo {modulus}")]
    NonInvertibleWeight { weight: u64, modulus: u64 },
    #[error("no eigenvector with the requested eigensystem")]
    NoEigenvector,
    #[error("eigenspace has rank {0} > 1 mod p")]
    Ambiguous(usize),
    #[error("no optimal embedding: {0}")]
    NoEmbedding(String),
    #[error("bad reduction at {0}")]
    BadReduction(u64),
    #[error("{0} exceeds the desk-scale bound")]
    TooLarge(u64),
    #[error("supersingular at {0}")]
    Supersingular(u64),
    #[error("configuration error: {0}")]
    BadConfig(String),
    #[error("empty Gross point family")]
    EmptyFamily,
    #[error("level mismatch: {0}")]
    LevelMismatch(String),
    #[error("alpha is not a unit")]
    NonUnitAlpha,
    #[error("no solution to the linear system")]
    NoSolution,
    #[error("inconsistent levels: {0}")]
    InconsistentLevels(String),
    #[error("eigenform normalization is not pinned across runs")]
    NormalizationUnpinned,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
