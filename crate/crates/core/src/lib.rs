pub mod classify;
pub mod cli;
pub mod error;
pub mod expr;
pub mod flatout;
pub mod geometry;
pub mod prolong;
pub mod system;

pub use error::{Error, Result};

#[doc = include_str!("../../../book/src/expressions.md")]
#[cfg(doctest)]
pub mod book_expressions {}

#[doc = include_str!("../../../book/src/geometry.md")]
#[cfg(doctest)]
pub mod book_geometry {}

#[doc = include_str!("../../../book/src/towers.md")]
#[cfg(doctest)]
pub mod book_towers {}

#[doc = include_str!("../../../book/src/classification.md")]
#[cfg(doctest)]
pub mod book_classification {}

#[doc = include_str!("../../../book/src/flat-outputs.md")]
#[cfg(doctest)]
pub mod book_flat_outputs {}

#[doc = include_str!("../../../book/src/sysfile.md")]
#[cfg(doctest)]
pub mod book_sysfile {}

#[doc = include_str!("../../../README.md")]
#[cfg(doctest)]
pub mod readme {}
