//! Executable machinery for bisimulation-invariant MSO over finite transition
//! systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`system`], [`path`], [`lasso`], [`scc`] and [`format`] hold the data model
//!   and its structural operations (disjoint union, fusion, concatenation,
//!   lasso decomposition, SCC condensation) plus the JSON file formats.
//! * [`bisim`] decides bisimilarity by partition refinement, with a naive
//!   greatest-fixpoint oracle, quotients and bounded unravellings.
//! * [`mso`] evaluates MSO formulas and computes rank-m Hintikka types.
//! * [`semigroup`] builds the partial semigroup of pointed-path types, decides
//!   conjugacy and constructs verified witness chains between lassos.
//! * [`hierarchy`] computes nested types of hierarchical lassos, normalises
//!   them, computes Cantor–Bendixson ranks and the tree-extension encodings.

pub mod bisim;
pub mod checks;
pub mod error;
pub mod format;
pub mod gen;
pub mod hierarchy;
pub mod lasso;
pub mod mso;
pub mod path;
pub mod scc;
pub mod semigroup;
pub mod system;

pub use error::{Error, Result};
pub use lasso::{Attachment, KLasso, Lasso};
pub use mso::{Guards, TypeId};
pub use path::PointedPath;
pub use semigroup::{PathAlgebra, Signature, WitnessChain};
pub use system::TransitionSystem;

/// Action labels and color names are plain strings.
pub type Label = String;
pub type Color = String;
