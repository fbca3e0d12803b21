//! Crate-wide error type.
//!
//! Everything fallible in the library funnels into [`Error`]. Variants are
//! deliberately fine-grained so callers (and the CLI) can distinguish
//! malformed inputs from contract violations and external-process failures.

use std::time::Duration;
use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two volumes that must share a shape do not.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    /// An operation needs larger dimensions than the input provides.
    #[error("dimensions too small: {0}")]
    DimensionTooSmall(String),

    /// Volume construction with inconsistent metadata (payload length,
    /// non-positive spacing, zero extent).
    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    /// Phantom kind string not in the registry.
    #[error("unknown phantom kind `{0}`")]
    UnknownPhantomKind(String),

    /// Inverse transform of a spectrum that is not Hermitian-symmetric
    /// enough to be treated as a real volume.
    #[error("non-negligible imaginary part after inverse transform (max |Im| = {max_im:e}, max |Re| = {max_re:e})")]
    NonNegligibleImaginaryPart { max_im: f64, max_re: f64 },

    /// Threshold calibration over an empty volume list.
    #[error("empty corpus")]
    EmptyCorpus,

    /// Unparseable artifact/noise spec text.
    #[error("bad spec `{text}`: {reason}")]
    BadSpecText { text: String, reason: String },

    /// Rejected engine configuration.
    #[error("bad config: {0}")]
    BadConfig(String),

    /// An operator broke its contract (wrong output dims, missing file, ...).
    #[error("operator contract violation: {0}")]
    OperatorContractViolation(String),

    /// Operator name not in the registry.
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),

    /// rvol file does not start with the RVOL magic.
    #[error("bad magic: not an rvol file")]
    BadMagic,

    /// rvol container version this build does not understand.
    #[error("unsupported rvol version {0}")]
    VersionUnsupported(u32),

    /// rvol payload shorter than the header promises.
    #[error("truncated payload: {0}")]
    TruncatedPayload(String),

    /// rvol payload longer than the header promises.
    #[error("oversized payload: {0}")]
    OversizedPayload(String),

    /// Underlying I/O failure.
    #[error("io failure: {0}")]
    IoFailure(#[from] std::io::Error),

    /// NIfTI datatype outside the supported subset (float32, int16).
    #[error("unsupported nifti datatype code {0}")]
    UnsupportedDatatype(i16),

    /// NIfTI file with a non-3D image.
    #[error("not three-dimensional: {0}")]
    NotThreeDimensional(String),

    /// NIfTI header that fails basic sanity checks.
    #[error("malformed header: {0}")]
    MalformedHeader(String),

    /// External operator process exited with a failure status.
    #[error("external process failed (exit status {0:?})")]
    ProcessFailed(Option<i32>),

    /// External operator process exceeded its deadline.
    #[error("external process timed out after {0:?}")]
    Timeout(Duration),

    /// `jdac_step` called past `max_iters`.
    #[error("iteration limit reached")]
    IterationLimit,

    /// JSON (report, manifest, sidecar) failure.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
