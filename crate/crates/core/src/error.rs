use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("negative valuation for buyer {buyer}, good {good}")]
    NegativeValuation { buyer: String, good: String },
    #[error("non-integer valuation for buyer {buyer}, good {good}")]
    NonIntegerValuation { buyer: String, good: String },
    #[error("price cap {cap} is below the maximum valuation {max}")]
    CapBelowMaxValuation { cap: String, max: u64 },
    #[error("tick {tick} does not divide {what}")]
    TickDoesNotDivide { tick: String, what: String },
    #[error("invalid tick: {0}")]
    InvalidTick(String),
    #[error("market has {0} goods; at most 64 are supported")]
    TooManyGoods(usize),
    #[error("unknown good id {0:?}")]
    UnknownGood(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("price of good {good} is {ticks} ticks, outside [0, {cap}]")]
    PriceOutOfRange { good: usize, ticks: u32, cap: u32 },
    #[error("price {0:?} is not an exact multiple of the tick")]
    OffGrid(String),
    #[error("invalid price literal {0:?}")]
    BadPrice(String),
    #[error("subset enumeration needs m <= {cap}, market has {goods} goods")]
    SubsetCapExceeded { goods: usize, cap: usize },
    #[error("search budget exceeded: {needed} evaluations requested, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("no fixed point reached within {max_steps} steps")]
    NoConvergence { max_steps: usize },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Resource and convergence failures, as opposed to bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::NoConvergence { .. } | Error::SubsetCapExceeded { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
