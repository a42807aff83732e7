use thiserror::Error;

/// Errors raised by the exact and analytic layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("generator {0} is not invertible modulo {1}")]
    NonInvertibleGenerator(String, u32),
    #[error("matrix modulus {found} does not match group modulus {expected}")]
    ModulusMismatch { expected: u32, found: u32 },
    #[error("unsupported modulus: {0}")]
    UnsupportedModulus(String),
    #[error("group of order {order} exceeds the enumeration cap {cap}")]
    GroupTooLarge { order: u64, cap: u64 },
    #[error("determinant image is a proper subgroup of (Z/{0}Z)^x; curve is not defined over Q")]
    NotDefinedOverQ(u32),
    #[error("order computation produced a non-integral value {0}")]
    NotIntegral(String),
    #[error("matrix has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("l1 norm {norm} exceeds the bound s^(s/2+1) A^(s-1) for s={s}, A={a}")]
    BoundViolated { norm: String, s: usize, a: String },
    #[error("Runge condition fails: {orbits} orbits, s = {s}")]
    RungeConditionFailed { orbits: usize, s: usize },
    #[error("sigma must be a nonempty proper subset of the cusp orbits: {0}")]
    SigmaNotProper(String),
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("j = {0} is degenerate (0 or 1728)")]
    DegenerateJ(String),
    #[error("invalid torsion index ({0}, {1}) mod {2}")]
    InvalidTorsionIndex(u32, u32, u32),
    #[error("precision exhausted at {0} bits")]
    PrecisionExhausted(usize),
    #[error("point is not certified in the upper half plane")]
    NotInUpperHalfPlane,
    #[error("|j| <= 2500 cannot be excluded")]
    NotInPlusRegion,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
