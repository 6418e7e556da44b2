use alloc::string::String;

/// Errors produced by the core computations.
///
/// Variants are grouped by how a caller should react: `Contract` means the
/// inputs broke a documented precondition, `Decode`/`Unsupported` come from
/// byte-stream parsing, `Numeric` signals a non-finite value during training.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("image too small: {width}x{height} holds no full {patch}x{patch} patch")]
    EmptyGrid { width: usize, height: usize, patch: usize },
    #[error("entropy undefined for an empty co-occurrence matrix")]
    EmptyMatrix,
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),
    #[error("decode error at {marker}: {reason}")]
    Decode { marker: &'static str, reason: String },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("non-finite value in forward pass at step {step}")]
    Numeric { step: usize },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn decode(marker: &'static str, reason: impl Into<String>) -> Self {
        Error::Decode {
            marker,
            reason: reason.into(),
        }
    }

    /// True for errors that stem from violated preconditions rather than bad data.
    pub fn is_contract_violation(&self) -> bool {
        matches!(
            self,
            Error::Contract(_) | Error::EmptyGrid { .. } | Error::EmptyMatrix | Error::UndefinedCorrelation(_)
        )
    }
}
