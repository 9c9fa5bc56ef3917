//! Path types as a partial semigroup, conjugacy, lasso types and witness
//! chains.

pub mod algebra;
pub mod chain;

pub use algebra::{ConjugacyClass, PathAlgebra, Signature, TypePair};
pub use chain::{branch_type, strong_type, strong_type_with, verify_chain, Link, WitnessChain};
