//! Runs the guide's code listings as doc-tests. One module per chapter so
//! a failure points at its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/grammars.md")]
pub mod grammars {}
#[doc = include_str!("../../../book/src/variation.md")]
pub mod variation {}
#[doc = include_str!("../../../book/src/fitness.md")]
pub mod fitness {}
#[doc = include_str!("../../../book/src/targets.md")]
pub mod targets {}
#[doc = include_str!("../../../book/src/campaigns.md")]
pub mod campaigns {}
