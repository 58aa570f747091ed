use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("particle id {id} left the domain at step {step}")]
    OutOfDomain { step: u64, id: u32 },

    #[error("non-finite state for particle id {id} at step {step}")]
    NonFinite { step: u64, id: u32 },

    #[error("engine `{tag}` disagrees with baseline: {detail}")]
    Equivalence { tag: String, detail: String },

    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the simulated physics (as opposed to usage or
    /// I/O errors).
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::OutOfDomain { .. } | Error::NonFinite { .. })
    }
}
