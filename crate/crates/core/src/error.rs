use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("value for n = {n} is outside the known range [1, {bound}]")]
    OutOfRange { n: u64, bound: u64 },

    #[error("growth certificate audit failed at n = {n}: {detail}")]
    CertificateAudit { n: u64, detail: String },

    #[error("a growth certificate is required: {0}")]
    MissingCertificate(String),

    #[error("basic hypothesis violated: {0}")]
    BasicHypothesis(String),

    #[error("periodicity audit failed at a = {a} (period {period})")]
    PeriodAudit { a: u64, period: u64 },

    #[error("Eratosthenes transform only available up to {bound}, needed {needed}")]
    TransformRange { bound: u64, needed: u64 },

    #[error("truncation cap {cap} reached before the radius fell below the target")]
    TruncationCap { cap: u64 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
