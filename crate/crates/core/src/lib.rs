//! Lattice homology and knot lattice homology for knots presented by
//! negative-definite plumbing forests.
//!
//! The crate is organised bottom-up:
//!
//! * [`plumbing`] parses plumbing graphs and handles the intersection form.
//! * [`grading`] enumerates Spin^c structures and evaluates grading formulas.
//! * [`complex`] builds finite filtered cube complexes and the maps between them.
//! * [`homology`] computes GF(2) invariants of those complexes.
//! * [`reduction`] certifies truncations and implements the filtered-line models.
//! * [`surgery`] assembles the chain-level surgery complex and iterates it.
//!
//! All arithmetic on heights and gradings is exact.

pub mod complex;
pub mod error;
pub mod grading;
pub mod homology;
pub mod plumbing;
pub mod rational;
pub mod reduction;
pub mod script;
pub mod surgery;

pub use error::{Error, Result};
pub use rational::Q;
