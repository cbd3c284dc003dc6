//! Shared error type for the whole pipeline.

use thiserror::Error;

/// Errors raised by landmark processing, geometry, training and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    /// The pelvis anchor triangle is collinear or the Rt. Asis direction is
    /// undefined; normalization has no unique solution.
    #[error("degenerate pelvis: {0}")]
    DegeneratePelvis(String),

    /// A coordinate is NaN or infinite (includes records with missing
    /// landmarks parsed from `NA` tokens).
    #[error("non-finite coordinate: {0}")]
    NonFinite(String),

    /// Vector/matrix dimensions do not match the expected layout.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The cutting plane does not intersect the mesh.
    #[error("empty cross-section: {0}")]
    EmptyCrossSection(String),

    /// The plane/mesh intersection could not be stitched into closed loops.
    #[error("open cross-section: {0}")]
    OpenCrossSection(String),

    /// A sample stream yielded no samples.
    #[error("empty sample stream")]
    EmptyStream,

    /// Fewer than two labeled records are available for training.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The training loss became NaN/inf at the given epoch.
    #[error("non-finite training loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    /// The feature selection digest embedded in a model does not match the
    /// selection supplied at prediction time.
    #[error("feature selection mismatch: model expects digest {expected}, got {actual}")]
    SelectionMismatch { expected: String, actual: String },

    /// Paired evaluation inputs have different lengths.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// Paired evaluation inputs disagree on subject ids.
    #[error("id mismatch: {0}")]
    IdMismatch(String),

    /// A sequence metric needs at least two frames.
    #[error("too few frames: got {got}, need at least 2")]
    TooFewFrames { got: usize },

    /// Malformed input file or unknown format version.
    #[error("parse error: {0}")]
    Parse(String),

    /// Invalid argument or configuration value.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input (arguments, file contents)
    /// rather than a failed computation. The CLI maps these to exit code 2,
    /// everything else to 3.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::InvalidInput(_)
                | Error::DimensionMismatch(_)
                | Error::LengthMismatch(_)
                | Error::IdMismatch(_)
                | Error::SelectionMismatch { .. }
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
