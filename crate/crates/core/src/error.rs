use thiserror::Error;

/// Errors raised by the library.
///
/// Each variant corresponds to a domain failure that a caller can act on
/// (raise precision, pick another prime, enlarge a bound, fix input data).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not squarefree")]
    NotSquarefree(i64),
    #[error("D must be a squarefree integer > 1, got {0}")]
    InvalidDiscriminant(i64),
    #[error("fundamental unit of Q(sqrt {0}) has norm +1, but a unit of norm -1 is required")]
    NoUnitOfNormMinusOne(i64),
    #[error("prime {p} does not split in Q(sqrt {d})")]
    PrimeDoesNotSplit { d: i64, p: u64 },
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("no totally positive generator of norm {p} found with |b| <= {bound}")]
    GeneratorSearchFailed { p: u64, bound: u64 },
    #[error("zero has infinite valuation")]
    InfiniteValuation,
    #[error("division by an element that vanishes to absolute precision {abs_prec}")]
    DivisionByZero { abs_prec: i64 },
    #[error("denominator divisible by p = {0}")]
    NotPIntegral(u64),
    #[error("{0} is not a simple root modulo p")]
    NotSimpleRoot(String),
    #[error("seed {0} is not a root modulo p")]
    NotARootModP(String),
    #[error("{0} is not a p-adic unit")]
    NotAUnit(String),
    #[error("insufficient precision: need at least {required} digits ({context})")]
    InsufficientPrecision { required: i64, context: String },
    #[error("index {0} is divisible by the prime being inverted")]
    NotDepleted(String),
    #[error("insufficient bound: need bound >= {required}, have {have}")]
    InsufficientBound { required: u64, have: u64 },
    #[error("operands live over different data: {0}")]
    Mismatch(String),
    #[error("weight {0:?} is not parallel")]
    NonParallelWeight((i64, i64)),
    #[error("invalid weight data: {0}")]
    InvalidWeights(String),
    #[error("j = {j} is not congruent to -1 mod {modulus}")]
    BadTwist { j: i64, modulus: u64 },
    #[error("weight point {s} is outside the family ball B({center}, {radius})")]
    OutsideBall { s: i64, center: i64, radius: i64 },
    #[error("value does not lie in the base ring to working precision")]
    NotInBaseRing,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
