//! Symmetric chains and chain partitions of the Boolean lattice, built on
//! bracket signatures and a normalized-matching poset on the upper half.

pub mod chain;
pub mod cli;
pub mod counting;
pub mod error;
pub mod lattice;
pub mod matching;
pub mod signature;
pub mod partition;
pub mod symposet;

pub use chain::Chain;
pub use error::{Error, Result};
pub use lattice::{GroundSet, Subset, SubsetFormat};
