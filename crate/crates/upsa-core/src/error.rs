use thiserror::Error;

/// Errors surfaced by the paraphrasing pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input is empty after trimming")]
    EmptyInput,
    #[error("corpus contains no sentences")]
    EmptyCorpus,
    #[error("format error: {0}")]
    Format(String),
    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },
    #[error("invalid edit position {position} for sentence of length {length}")]
    Position { position: usize, length: usize },
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
