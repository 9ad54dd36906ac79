//! Construction and certification of maximally entangling bipartite and
//! multipartite gates obtained by coherifying permutation tensors.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! front end and parallel drivers live in the `qconv` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bipartite;
pub mod coherence;
pub mod coherify;
pub mod error;
pub mod families;
pub mod invariants;
pub mod latin;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod search;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
