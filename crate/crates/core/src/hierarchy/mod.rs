//! Nested types of hierarchical lassos, normalisation, Cantor–Bendixson
//! rank and the tree-extension encodings.

pub mod cb;
pub mod chains;
pub mod encode;
pub mod types;

pub use cb::{cb_rank, CBRank, CBValue, CBWitness};
pub use chains::{normalize_1lasso, tp_equiv_chain};
pub use encode::{
    decode, decode_parts, encode_glasso, encode_tree_extension, glasso_chain, partial_unravel, tree_extension_chain, tree_pieces,
    EncodedSystem,
    LabelColors, LabelKey,
};
pub use types::{relabel_tp, tp, tp_with, Enriched, NestedType, TypeSession};
