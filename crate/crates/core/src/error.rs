use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point} does not belong to a {space} space")]
    DomainMismatch { point: String, space: &'static str },

    #[error("point {point} is outside the space bounds ({bounds})")]
    OutOfRange { point: String, bounds: String },

    #[error("{0} is not a pointwise condition")]
    WrongFamily(&'static str),

    #[error("pair sample is empty")]
    EmptySample,

    #[error("every sampled instance has a zero denominator")]
    AllDegenerate,

    #[error("trace records {got} partial sums, need at least {needed}")]
    InsufficientTrace { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("query lists {0} as both required and excluded")]
    OverlappingQuery(String),

    #[error("cannot parse {what} from {input:?}: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(what: &'static str, input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            what,
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}
