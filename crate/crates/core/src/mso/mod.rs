//! Monadic second-order logic: formulas, evaluation and Hintikka types.

pub mod formula;
pub mod hintikka;
pub mod structure;

pub use formula::{evaluate, evaluate_structure, parse_formula, Assignment, Formula, Value};
pub use hintikka::{
    clear_caches, equiv_m, equiv_m_with, fuse_equiv_check, fuse_structure_equiv_check, hintikka, hintikka_with,
    path_theory, path_theory_with, system_type, system_type_with, Atom, Guards, TypeId,
};
pub use structure::{Mask, Structure, MAX_ELEMENTS};
