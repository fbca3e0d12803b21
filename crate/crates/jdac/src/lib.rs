//! Joint denoising and artifact correction for volumetric images.
//!
//! The crate restores corrupted 3D scalar volumes (MR magnitude images and
//! the like) by alternating a denoiser and an artifact corrector inside a
//! plug-and-play ADMM loop. Around that engine it provides everything a
//! self-contained experiment needs: synthetic phantoms, k-space corruption
//! simulators, a gradient-based noise estimator that doubles as the loop's
//! stopping rule, volumetric quality metrics, a tiny binary volume format,
//! and a CLI.
//!
//! Start with the [`engine`] module for the restoration loop, or the guide
//! chapters under `book/` (mirrored as doc-tested modules in [`guide`]).

pub mod corruption;
pub mod engine;
pub mod error;
pub mod estimation;
pub mod guide;
pub mod io;
pub mod kspace;
pub mod metrics;
pub mod operators;
pub mod phantom;
mod rng;
pub mod volume;

pub mod cli;

pub use error::{Error, Result};
pub use phantom::{make_phantom, PhantomKind};
pub use volume::{gradient, pooled_std, stats, GradientField, Volume, VolumeStats};
