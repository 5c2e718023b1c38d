//! Finite weighted point spaces treated as vector lattices: conditional
//! expectation operators determined by partitions, lattice-valued L¹/L∞
//! norms, and the strong (α) and uniform (φ) mixing coefficients between
//! conditioning partitions.
//!
//! Everything is computed in exact rational arithmetic. The [`verify`]
//! module is a falsification harness: it re-checks every inequality the
//! library claims, over fixed fixtures and seeded random instances, and
//! extracts a re-runnable witness from any violation.

pub mod cond;
pub mod doc;
pub mod error;
pub mod fixtures;
pub mod mixing;
pub mod norms;
pub mod rat;
pub mod space;
pub mod verify;

pub use error::{Error, Result};
pub use rat::Rat;
