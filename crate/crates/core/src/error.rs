use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension out of range: {n} (supported 1..={max})")]
    DimensionOutOfRange { n: u32, max: u32 },

    #[error("memory budget exceeded: {required} bytes required, {allowed} bytes allowed")]
    MemoryBudget { required: u64, allowed: u64 },

    #[error("level out of range: {level} (graph dimension {n})")]
    LevelOutOfRange { level: u32, n: u32 },

    #[error("vertex {vertex} out of range for dimension {n}")]
    VertexOutOfRange { vertex: u64, n: u32 },

    #[error("exact diameter cap exceeded: n = {n} > cap {cap}; use sampled bounds instead")]
    ExactCapExceeded { n: u32, cap: u32 },

    #[error("enumeration budget exceeded: {required} images > {allowed} allowed")]
    EnumerationBudget { required: u64, allowed: u64 },

    #[error("invalid router parameters: {0}")]
    RouterParams(String),

    #[error("invalid check arguments: {0}")]
    CheckArgs(String),

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("malformed graph stream: {0}")]
    Format(#[from] FormatError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// True for rejections caused by resource limits rather than bad input.
    pub fn is_resource_rejection(&self) -> bool {
        matches!(
            self,
            Error::MemoryBudget { .. } | Error::ExactCapExceeded { .. } | Error::EnumerationBudget { .. }
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic {0:?}, expected \"TWC1\"")]
    BadMagic([u8; 4]),

    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),

    #[error("unknown policy code {0}")]
    UnknownPolicy(u8),

    #[error("truncated stream: expected {expected} bytes, got {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("{0} trailing bytes after the last table")]
    TrailingBytes(u64),

    #[error("level {level} copy {copy} table is not a bijection")]
    NotABijection { level: u32, copy: u64 },
}
