use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// A complex whose boundary maps fail the composition gate is rejected
    /// outright; the message names the first offending cell.
    #[error("construction rejected: {0}")]
    ConstructionRejected(String),

    /// A mathematical claim the pipeline depends on failed verification.
    #[error("certificate failure: {0}")]
    CertificateFailure(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
