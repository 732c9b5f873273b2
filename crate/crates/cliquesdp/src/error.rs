use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: entry ({i}, {j}) does not fit block {block} of size {size}")]
    InconsistentBlock { line: usize, block: usize, i: usize, j: usize, size: usize },
    #[error("cannot write problem: {0}")]
    Unsupported(&'static str),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Solver(#[from] cliquesdp_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
