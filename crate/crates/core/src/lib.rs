//! Computational toolkit for large sets of combinatorial designs.
//!
//! The crate covers divisibility arithmetic for designs and large sets
//! ([`setsys`]), verification of designs, large sets and uniform subsets
//! ([`verify`]), exact integer-lattice algebra ([`lattice`]), the random
//! partition process with its Gaussian point estimate and error bounds
//! ([`probmodel`]), and backtracking search for small designs and large sets
//! ([`search`]). File formats live in [`formats`].

pub mod error;
pub mod formats;
pub mod lattice;
pub mod probmodel;
pub mod repr;
pub mod search;
pub mod setsys;
pub mod verify;

pub use error::{Error, Result};
