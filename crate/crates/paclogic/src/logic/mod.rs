//! Formula representation, classical evaluation, and partial evaluation with
//! witnessing over obscured scenes.

mod atoms;
mod formula;
mod text;

pub use atoms::{Atom, AtomId, AtomTable, ObscuredScene, Scene, Ternary};
pub use formula::{horn_to_formula, Formula, PartialEvalResult};
pub use text::{parse_formula, parse_formula_at, print_formula};
