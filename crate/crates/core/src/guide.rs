//! The book chapters under `book/src/` compiled as doctests.
//!
//! mdBook cannot run its own code listings against this crate, so each
//! chapter is included here as a hidden module's documentation and
//! `cargo test --doc` keeps every snippet honest.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/getting-started.md")]
mod getting_started {}

#[doc = include_str!("../../../book/src/density-estimation.md")]
mod density_estimation {}

#[doc = include_str!("../../../book/src/image-features.md")]
mod image_features {}

#[doc = include_str!("../../../book/src/classification.md")]
mod classification {}

#[doc = include_str!("../../../book/src/evaluation.md")]
mod evaluation {}

#[doc = include_str!("../../../book/src/reproducing.md")]
mod reproducing {}
