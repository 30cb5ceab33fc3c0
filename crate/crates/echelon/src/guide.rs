//! The book chapters, compiled as doc-tests.
//!
//! mdBook does not run the code fences in `book/src` as tests, so each
//! chapter is included here verbatim; `cargo test --doc` then executes every
//! snippet, keeping the guide and the library honest with each other.

#[doc = include_str!("../../../book/src/scales.md")]
pub mod scales {}

#[doc = include_str!("../../../book/src/operators.md")]
pub mod operators {}

#[doc = include_str!("../../../book/src/small_divisors.md")]
pub mod small_divisors {}

#[doc = include_str!("../../../book/src/iteration.md")]
pub mod iteration {}

#[doc = include_str!("../../../book/src/kam.md")]
pub mod kam {}
