use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// Variants are grouped into families (precision, parse, domain, cap) so the
/// command-line front end can map them onto stable exit codes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("insufficient precision: need at least {needed} digits, have {available}")]
    InsufficientPrecision { needed: u32, available: u32 },
    #[error("division by p of an element that is not divisible by p")]
    NotDivisibleByP,
    #[error("precision loss: {0}")]
    PrecisionLoss(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("operands live in different contexts")]
    ContextMismatch,
    #[error("element is not a unit")]
    NotInvertible,
    #[error("matrix is not invertible mod p")]
    NotInvertibleModP,
    #[error("jet order overflow: operation needs order {needed} but the variable set stops at {max}")]
    OrderOverflow { needed: u32, max: u32 },
    #[error("polynomial has coefficients with p in the denominator")]
    NonIntegralInput,
    #[error("inexact division by p (internal invariant violated)")]
    InexactDivision,
    #[error("point does not satisfy the scheme relations: {0}")]
    NotOnScheme(String),
    #[error("curve is not ordinary at p = {0}")]
    NotOrdinary(u64),
    #[error("curve has bad reduction at p = {0}")]
    BadReduction(u64),
    #[error("delta-character coefficient is not p-integral: {0}")]
    IntegralityFailure(String),
    #[error("point is not in the domain of the formal group: {0}")]
    PNotInDomain(String),
    #[error("series is not delta-p-symmetric at the configured degree bound")]
    NotDeltaPSymmetric,
    #[error("Witt vector lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("presentation failed verification: {0}")]
    PresentationUnverified(String),
    #[error("modular parametrization has non-integral coefficients: {0}")]
    NonIntegralParametrization(String),

    #[error("degree bound exceeded: {0}")]
    DegreeBoundExceeded(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("truncation overflow: {0}")]
    TruncationOverflow(String),
    #[error("search cap exceeded: {0}")]
    SearchCapExceeded(String),

    #[error("i/o error: {0}")]
    Io(String),
}

/// Error families; each maps to one process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorFamily {
    Precision,
    Parse,
    Domain,
    Cap,
    Io,
}

impl Error {
    pub fn family(&self) -> ErrorFamily {
        use Error::*;
        match self {
            InsufficientPrecision { .. } | NotDivisibleByP | PrecisionLoss(_) => ErrorFamily::Precision,
            Parse { .. } => ErrorFamily::Parse,
            DegreeBoundExceeded(_) | CapExceeded(_) | TruncationOverflow(_) | SearchCapExceeded(_) => ErrorFamily::Cap,
            Io(_) => ErrorFamily::Io,
            _ => ErrorFamily::Domain,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.family() {
            ErrorFamily::Precision => 2,
            ErrorFamily::Parse => 3,
            ErrorFamily::Domain => 4,
            ErrorFamily::Cap => 5,
            ErrorFamily::Io => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
