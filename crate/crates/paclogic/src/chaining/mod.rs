//! Backward chaining over ground Horn knowledge bases with query-driven
//! learning: subgoal dependency graphs, the search meta-algorithm, and its
//! credulous / skeptical learning variants.

mod graph;
mod kb;
mod proof;
mod search;

pub use graph::{Generated, GraphNode, NodeKind, NodeStatus, StatusMap, SubgoalGraph};
pub use kb::{ground, parse_kb, AtomPattern, GroundRule, HornKb, RuleSchema, Term};
pub use proof::{
    chaining_proof_json, print_chaining_proof, verify_chaining_proof, ChainingProof,
    Justification, ProofLine,
};
pub use search::{
    backward_search, learn_backward_search, passes_sample_test, sample_size_chaining,
    ExploreStep, LearnMode, SearchOutcome, SearchResult, SearchStats,
};
pub(crate) use search::validate_sample_params;

/// The worked-example knowledge base about fragile objects, used across the
/// test suite.
#[cfg(test)]
pub(crate) const SCULPTURE_KB: &str = "\
domain sculpture crate floor sidewalk
rule crushed(X) & fragile(X) => broken(X)
rule hit(X,Y) & fragile(X) & hard(Y) => broken(X)
fact fragile(sculpture)
fact crushed(sculpture)
";
