//! mdbook cannot run a chapter's code fences as tests by itself, so each
//! chapter is included here as module documentation and `cargo test --doc`
//! exercises every snippet in the guide.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/normalization.md")]
pub mod normalization {}

#[doc = include_str!("../../../book/src/segmentation.md")]
pub mod segmentation {}

#[doc = include_str!("../../../book/src/subsets.md")]
pub mod subsets {}

#[doc = include_str!("../../../book/src/masking.md")]
pub mod masking {}

#[doc = include_str!("../../../book/src/surrogate.md")]
pub mod surrogate {}

#[doc = include_str!("../../../book/src/paraphrase_cleaning.md")]
pub mod paraphrase_cleaning {}

#[doc = include_str!("../../../book/src/determinism.md")]
pub mod determinism {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
