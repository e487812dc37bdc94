use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operation requires a nonempty family")]
    EmptyFamily,

    #[error("exact enumeration over {size} free elements exceeds the work cap of {cap}")]
    ExactIntractable { size: usize, cap: usize },

    #[error("Monte-Carlo estimate {value} ± {half_width} straddles the threshold {threshold}")]
    Indeterminate {
        value: f64,
        half_width: f64,
        threshold: f64,
    },

    #[error("{what} overflows a 63-bit integer")]
    Overflow { what: String },

    #[error("family is not {0}-uniform")]
    NotUniform(usize),

    #[error("no sunflower with {petals} petals found and the family is not above the Erdős–Rado threshold")]
    ThresholdNotMet { petals: usize },

    #[error("base case failed: (1-{bias})^{size} >= {eps}")]
    BaseCaseFailed { bias: f64, size: usize, eps: f64 },

    #[error("family is below every case-1 threshold and the Janson exponent {exponent} does not exceed ln(1/eps) = {target}")]
    NeitherCaseApplies { exponent: f64, target: f64 },

    #[error("enumeration of {count} objects exceeds the cap of {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("{what} has {size} entries, above the cap of {cap}")]
    TooLarge {
        what: String,
        size: usize,
        cap: usize,
    },

    #[error("gate {gate} expands to more than {cap} monomials")]
    MonomialBlowup { gate: usize, cap: usize },

    #[error("gate {gate} carries a non-positive constant")]
    NegativeConstant { gate: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParams(message.into())
    }
}
