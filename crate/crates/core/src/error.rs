use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time {time} is outside the valid range {min}..={max}")]
    OutOfRange { time: usize, min: usize, max: usize },

    #[error("total assets are zero at time {time}")]
    ZeroTotalAssets { time: usize },

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("non-positive unit count {value} for fund {fund} at time {time}")]
    NonPositiveUnits { fund: String, time: usize, value: f64 },

    #[error("non-positive unit value {value} for fund {fund} at time {time}")]
    NonPositiveValue { fund: String, time: usize, value: f64 },

    #[error("unknown fund `{0}`")]
    UnknownFund(String),

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("merger time {time} must lie in 1..={max}")]
    TimeOutOfRange { time: usize, max: usize },

    #[error("a merger at time {time} lies inside the window; this index is undefined across mergers")]
    MergerInWindow { time: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid history: {0}")]
    InvalidHistory(String),

    #[error("index value {0} is outside (-1, inf)")]
    Domain(f64),

    #[error("scenario tree needs {needed} node-assets, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("payoff missing for node {node}")]
    MissingPayoff { node: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("infeasible strategy at node {node}: {reason}")]
    InfeasibleStrategy { node: usize, reason: String },

    #[error("strategy is not adapted to the tree: {0}")]
    NotAdapted(String),

    #[error("setting violated: {0}")]
    SettingViolated(String),

    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: u64, message: String },

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// Input errors are malformed or missing data; everything else is a domain error.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Io(_) | Error::MissingData(_) | Error::InvalidModel(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
