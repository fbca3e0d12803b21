//! Serialization and process-boundary adapters.
//!
//! The native container is rvol, a 36-byte little-endian header plus a flat
//! float32 payload; exact enough for bit-lossless round trips and trivial to
//! parse from any language. NIfTI-1 files are readable (a pragmatic subset)
//! as an on-ramp for real scan data. External executables can stand in for
//! either operator contract via file handoff.

pub mod external;
pub mod manifest;
pub mod nifti;
pub mod rvol;

pub use external::ExternalOperator;
pub use nifti::read_nifti;
pub use rvol::{read_rvol, write_rvol};
