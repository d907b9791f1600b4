//! Error types shared across the crate.

use thiserror::Error;

/// Errors from formula construction and classical evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("atom id {id} out of range for scene of {n} atoms")]
    AtomOutOfRange { id: u32, n: usize },
    #[error("threshold weights must be nonzero integers")]
    ZeroWeight,
    #[error("atom name {0:?} already interned")]
    DuplicateAtom(String),
}

/// Errors from distributions, masking processes and sampling.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistError {
    #[error("distribution support is empty")]
    EmptySupport,
    #[error("support probabilities sum to {0}, expected 1")]
    BadTotal(String),
    #[error("probability {0} outside (0, 1]")]
    BadProbability(String),
    #[error("duplicate scene in support")]
    DuplicateScene,
    #[error("scene length {got} does not match atom count {want}")]
    BadSceneLength { got: usize, want: usize },
    #[error("exact enumeration infeasible over {0} atoms (limit {1}); use the Monte Carlo estimate instead")]
    EstimateOnly(usize, usize),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// Errors from knowledge-base grounding and chaining search.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("domain is empty but rule schemas contain variables")]
    EmptyDomain,
    #[error("predicate {name} used with arity {got} and arity {want}")]
    ArityMismatch { name: String, got: usize, want: usize },
    #[error("unknown atom {0:?}")]
    UnknownAtom(String),
    #[error("rule head appears in its own body: {0}")]
    HeadInBody(String),
    #[error("duplicate atom in rule body: {0}")]
    DuplicateBodyAtom(String),
    #[error("parameter out of range: {0}")]
    BadParameter(String),
}

/// Errors from clause and resolution-proof handling.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolutionError {
    #[error("atom {0} appears with both polarities in one clause")]
    BothPolarities(u32),
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("enumeration limits exceeded: {0}")]
    LimitExceeded(String),
}

/// Parse errors for the crate's text file formats, with 1-based line numbers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: usize, msg: impl Into<String>) -> Self {
        ParseError { line, msg: msg.into() }
    }
}
