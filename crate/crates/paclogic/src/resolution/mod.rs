//! Space-bounded treelike resolution with query-driven learning: clause and
//! CNF types, the learning search, proof verification, normality checking,
//! and the node-count / sample-size bounds.

mod clause;
mod proof;
mod search;

pub use clause::{parse_clause_arg, parse_dimacs, print_dimacs, Clause, Cnf, Literal};
pub use proof::{
    check_normal, extract_premises, print_resolution_proof, resolution_proof_json, verify_proof,
    ProofNode, ResolutionProof,
};
pub use search::{
    count_bounds, learn_search_space, refute, sample_size_resolution, CountBounds, LearnConfig,
};
