//! The book under `book/` as doc-tested modules.
//!
//! mdbook renders the guide but cannot execute its code blocks, so each
//! chapter is included here verbatim and `cargo test --doc` runs every
//! snippet. A failing example points at the chapter module it came from.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/volumes.md")]
pub mod volumes {}

#[doc = include_str!("../../../book/src/corruption.md")]
pub mod corruption {}

#[doc = include_str!("../../../book/src/estimation.md")]
pub mod estimation {}

#[doc = include_str!("../../../book/src/operators.md")]
pub mod operators {}

#[doc = include_str!("../../../book/src/engine.md")]
pub mod engine {}

#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}

#[doc = include_str!("../../../book/src/external.md")]
pub mod external {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
