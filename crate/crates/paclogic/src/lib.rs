//! A propositional reasoning engine that learns supporting premises from
//! partially observed examples while it searches for a proof.
//!
//! The engine works over a logic of ground atoms and integer linear-threshold
//! connectives. Truth assignments ("scenes") are drawn from an explicit
//! distribution and passed through a masking process that hides some atom
//! values, producing ternary "obscured scenes". Two proof-search fragments are
//! provided, both instrumented so that subgoals consistent with the observed
//! samples can be adopted as learned premises mid-search:
//!
//! * [`chaining`] — backward chaining over ground Horn knowledge bases,
//!   driven by a subgoal dependency graph (query vertices and weighted
//!   threshold vertices).
//! * [`resolution`] — space-bounded treelike resolution refutation with
//!   per-branch sample filtering.
//!
//! The [`oracle`] module holds independent brute-force reference
//! implementations (exhaustive enumeration, Monte Carlo trial harness) used by
//! the test suite to validate both the combinatorial claims and the
//! statistical guarantees at desk scale. The [`cli`] module backs the
//! `paclogic` binary.
//!
//! All core types are immutable after construction and safe to share across
//! threads; every randomized operation takes an explicit 64-bit seed and is
//! bit-for-bit reproducible (the generator is ChaCha12).

pub mod chaining;
pub mod cli;
pub mod dist;
pub mod error;
pub mod logic;
pub mod oracle;
pub mod resolution;

pub use error::{ChainError, DistError, LogicError, ParseError, ResolutionError};
pub use logic::{Atom, AtomTable, Formula, ObscuredScene, PartialEvalResult, Scene, Ternary};
