// SPDX-License-Identifier: MIT OR Apache-2.0

//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced while building, scoring, or proving explanations.
#[derive(Debug, Error)]
pub enum Error {
    /// An observation or input does not have the width the model expects.
    #[error("input width {got} does not match expected width {expected}")]
    WidthMismatch { expected: usize, got: usize },

    /// A symbol emitted by a family has no entry in the codebook.
    #[error("symbol `{0}` has no entry in the codebook")]
    UnknownSymbol(String),

    /// A symbol stream or bit string is not a valid explanation.
    #[error("decode error at position {position}: {reason}")]
    Decode { position: usize, reason: String },

    /// Codebook lengths violate the Kraft inequality.
    #[error("codebook violates the Kraft inequality (sum of 2^-len = {0})")]
    Kraft(f64),

    #[error("neighborhood of {size} edit lists exceeds the cap of {cap}")]
    NeighborhoodTooLarge { size: u128, cap: u64 },

    /// Range analysis found an activation that may leave the Q8.24 range.
    #[error("fixed-point range exceeded in layer {layer}: bound {bound} >= {limit}")]
    FixedPointOverflow { layer: usize, bound: i64, limit: i64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing rubric threshold for `{0}`")]
    MissingThreshold(String),

    /// A run configuration failed validation.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A pipeline stage failed; the stage name is kept for the error report.
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn decode(position: usize, reason: impl Into<String>) -> Self {
        Error::Decode {
            position,
            reason: reason.into(),
        }
    }

    /// Wraps an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad user input rather than a failing stage.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) | Error::MissingThreshold(_) => true,
            Error::Stage { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
