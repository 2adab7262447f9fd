use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid prime context: {0}")]
    InvalidContext(String),
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("argument must be positive")]
    NonPositiveArgument,
    #[error("argument must be non-negative")]
    NegativeArgument,
    #[error("exponent must be nonzero")]
    ZeroExponent,
    #[error("insufficient p-adic precision: need {required} digits, have {available}")]
    InsufficientPrecision { required: u32, available: u32 },
    #[error("operands live in different series contexts")]
    ContextMismatch,
    #[error("substitution does not preserve the truncation ideal")]
    IdealNotPreserved,
    #[error("series is not a unit (constant term divisible by p)")]
    NonUnit,
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("tau - 1 is not nilpotent within {cap} iterations")]
    NonNilpotentTau { cap: usize },
    #[error("shift has a nonzero constant term")]
    NonNilpotentShift,
    #[error("series support exceeds the window of degree < {bound}")]
    UnsupportedWindow { bound: String },
    #[error("recursion depth {depth} exceeds cap {cap}")]
    DepthCapExceeded { depth: u32, cap: u32 },
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("differential does not restrict to the kernel in degree {degree}")]
    RestrictionFailure { degree: usize },
    #[error("not a complex: d^2 != 0 in degree {degree}")]
    NotAComplex { degree: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
