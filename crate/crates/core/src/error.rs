use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing column '{0}' in log header")]
    MissingColumn(String),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("empty sample")]
    EmptySample,
    #[error("invalid sample value {0}")]
    InvalidSample(f64),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("log is empty")]
    EmptyLog,
    #[error("{0}")]
    Split(String),
    #[error("model: {0}")]
    Model(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn row(row: usize, message: impl Into<String>) -> Self {
        Error::Row { row, message: message.into() }
    }

    /// Wraps the error with the name of the pipeline stage that failed.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }
}
