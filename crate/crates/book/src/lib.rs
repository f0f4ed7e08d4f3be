//! Compiles the guide's listings as doc-tests; mdbook cannot resolve crate
//! dependencies on its own.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/embedding.md")]
pub mod embedding {}
#[doc = include_str!("../../../book/src/persistence.md")]
pub mod persistence {}
#[doc = include_str!("../../../book/src/landscapes.md")]
pub mod landscapes {}
#[doc = include_str!("../../../book/src/clustering.md")]
pub mod clustering {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
