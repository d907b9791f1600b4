//! The backward-search driver and its query-driven learning variant, plus
//! the chaining sample-size bound.
//!
//! The driver owns a mutable subgoal graph per query; the KB and samples are
//! shared immutably, so independent searches can run concurrently.

use std::collections::BTreeSet;

use crate::chaining::graph::{Generated, NodeKind, SubgoalGraph};
use crate::chaining::kb::HornKb;
use crate::chaining::proof::{ChainingProof, Justification, ProofLine};
use crate::error::ChainError;
use crate::logic::{AtomId, ObscuredScene, Ternary};

/// How a candidate premise is tested against the samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnMode {
    /// Accept unless some sample witnesses the atom false.
    Credulous,
    /// Accept only if every sample witnesses the atom true.
    Skeptical,
}

/// Whether `atom` may be adopted as a premise given the samples. The two
/// modes differ exactly on hidden entries.
pub fn passes_sample_test(atom: AtomId, samples: &[ObscuredScene], mode: LearnMode) -> bool {
    match mode {
        LearnMode::Credulous => samples
            .iter()
            .all(|rho| rho.get(atom) != Some(Ternary::False)),
        LearnMode::Skeptical => samples
            .iter()
            .all(|rho| rho.get(atom) == Some(Ternary::True)),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub iterations: u64,
    pub edges_added: u64,
    pub vertices_created: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Proof(ChainingProof),
    Fail,
}

impl SearchOutcome {
    pub fn proof(&self) -> Option<&ChainingProof> {
        match self {
            SearchOutcome::Proof(p) => Some(p),
            SearchOutcome::Fail => None,
        }
    }

    pub fn is_proof(&self) -> bool {
        matches!(self, SearchOutcome::Proof(_))
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    pub stats: SearchStats,
    /// Atoms adopted during the run (empty for the plain search).
    pub learned: BTreeSet<AtomId>,
    /// EXPLORE proposals in order, for the obliviousness checks: the atom
    /// for query vertices, the rule index for threshold vertices.
    pub explore_trace: Vec<ExploreStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExploreStep {
    Query(AtomId),
    Rule(usize),
}

/// Plain backward search: TEST / EXPLORE / GENERATE until the goal is
/// successful from the KB or the graph is exhausted.
pub fn backward_search(goal: AtomId, kb: &HornKb) -> SearchResult {
    drive(goal, kb, None)
}

/// Backward search with query-driven learning: each newly generated query
/// vertex whose atom passes the mode's sample test joins the working KB
/// before marking, so the oblivious search treats it exactly like a fact
/// that had been present all along.
pub fn learn_backward_search(
    goal: AtomId,
    kb: &HornKb,
    samples: &[ObscuredScene],
    mode: LearnMode,
) -> SearchResult {
    drive(goal, kb, Some((samples, mode)))
}

fn drive(
    goal: AtomId,
    kb: &HornKb,
    learn: Option<(&[ObscuredScene], LearnMode)>,
) -> SearchResult {
    let mut stats = SearchStats::default();
    let mut learned: BTreeSet<AtomId> = BTreeSet::new();
    let mut trace = Vec::new();

    // The shortcut from the meta-algorithm: a goal already in the KB has a
    // trivial proof and the graph is never built.
    if kb.facts.contains(&goal) {
        return SearchResult {
            outcome: SearchOutcome::Proof(ChainingProof {
                lines: vec![ProofLine { atom: goal, justification: Justification::Hypothesis }],
            }),
            stats,
            learned,
            explore_trace: trace,
        };
    }

    let mut g = SubgoalGraph::new(goal, kb);
    let mut successes: BTreeSet<AtomId> = kb.facts.clone();

    loop {
        stats.iterations += 1;
        if let Some(proof) = g.test(kb, &learned) {
            return SearchResult {
                outcome: SearchOutcome::Proof(proof),
                stats,
                learned,
                explore_trace: trace,
            };
        }
        let Some(v) = g.explore(&successes) else {
            return SearchResult { outcome: SearchOutcome::Fail, stats, learned, explore_trace: trace };
        };
        trace.push(match g.node(v).kind {
            NodeKind::Query { atom, .. } => ExploreStep::Query(atom),
            NodeKind::Threshold { rule, .. } => ExploreStep::Rule(rule),
        });
        match g.generate(v, kb) {
            Generated::FullyExplored => g.unmark(v),
            Generated::Edge { target, created } => {
                stats.edges_added += 1;
                if created {
                    stats.vertices_created += 1;
                    match g.node(target).kind {
                        NodeKind::Query { atom, .. } => {
                            // Learning happens at vertex creation, before
                            // the marking decision, so a learned atom is
                            // never marked and never explored below.
                            if let Some((samples, mode)) = learn {
                                if !successes.contains(&atom)
                                    && passes_sample_test(atom, samples, mode)
                                {
                                    learned.insert(atom);
                                    successes.insert(atom);
                                }
                            }
                            if !successes.contains(&atom) {
                                g.mark(target);
                            }
                        }
                        NodeKind::Threshold { .. } => g.mark(target),
                    }
                }
            }
        }
    }
}

/// Sample-size bound for chaining: `m = ceil(c * (N*log2(N)*ln(2) +
/// ln(1/delta)) / (epsilon*eta))`, the proof-length term being `B = N log N`
/// bits for chaining proofs.
pub fn sample_size_chaining(
    n: u64,
    epsilon: f64,
    delta: f64,
    eta: f64,
    c: f64,
) -> Result<u64, ChainError> {
    validate_sample_params(n, epsilon, delta, eta, c)?;
    let b_term = n as f64 * (n as f64).log2() * std::f64::consts::LN_2;
    let m = c * (b_term + (1.0 / delta).ln()) / (epsilon * eta);
    Ok(m.ceil() as u64)
}

pub(crate) fn validate_sample_params(
    n: u64,
    epsilon: f64,
    delta: f64,
    eta: f64,
    c: f64,
) -> Result<(), ChainError> {
    if n < 1 {
        return Err(ChainError::BadParameter("N must be at least 1".into()));
    }
    for (name, v) in [("epsilon", epsilon), ("delta", delta), ("eta", eta)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(ChainError::BadParameter(format!("{name} = {v} outside (0, 1]")));
        }
    }
    if !(c > 0.0) {
        return Err(ChainError::BadParameter(format!("c = {c} must be positive")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaining::kb::parse_kb;
    use crate::chaining::proof::verify_chaining_proof;
    use crate::chaining::SCULPTURE_KB;
    use crate::logic::{AtomTable, ObscuredScene, Ternary};

    fn setup() -> (HornKb, AtomTable, AtomId) {
        let (kb, table) = parse_kb(SCULPTURE_KB).unwrap();
        let goal = table.lookup("broken(sculpture)").unwrap();
        (kb, table, goal)
    }

    fn proof_lines(result: &SearchResult, table: &AtomTable) -> Vec<String> {
        result
            .outcome
            .proof()
            .expect("proof")
            .lines
            .iter()
            .map(|l| table.name(l.atom).to_string())
            .collect()
    }

    #[test]
    fn sculpture_query_finds_three_line_proof() {
        let (kb, table, goal) = setup();
        let result = backward_search(goal, &kb);
        assert_eq!(
            proof_lines(&result, &table),
            ["crushed(sculpture)", "fragile(sculpture)", "broken(sculpture)"]
        );
        let proof = result.outcome.proof().unwrap();
        assert!(verify_chaining_proof(proof, &kb, goal, None));
        assert_eq!(
            proof.lines[2].justification,
            Justification::Chaining { rule: 0, premises: vec![1, 2] }
        );
    }

    #[test]
    fn hit_floor_variant_fails_after_full_generation() {
        // hit(sculpture, floor) holds instead of crushed(sculpture), and
        // hard(floor) is not given: no proof exists.
        let src = "\
domain sculpture crate floor sidewalk
rule crushed(X) & fragile(X) => broken(X)
rule hit(X,Y) & fragile(X) & hard(Y) => broken(X)
fact fragile(sculpture)
fact hit(sculpture,floor)
";
        let (kb, table) = parse_kb(src).unwrap();
        let goal = table.lookup("broken(sculpture)").unwrap();
        let result = backward_search(goal, &kb);
        assert_eq!(result.outcome, SearchOutcome::Fail);
        // The whole reachable graph was generated before giving up: the
        // crushed rule (1 grounding) and the hit rule (4 groundings for y),
        // plus every body atom.
        assert!(result.stats.edges_added >= 5);
        assert!(result.stats.iterations <= 3 * (result.stats.edges_added + result.stats.vertices_created + 2));
    }

    #[test]
    fn query_already_a_fact_is_trivial() {
        let (kb, table, _) = setup();
        let fragile = table.lookup("fragile(sculpture)").unwrap();
        let result = backward_search(fragile, &kb);
        assert_eq!(result.stats.iterations, 0);
        let proof = result.outcome.proof().unwrap();
        assert_eq!(proof.lines.len(), 1);
        assert!(verify_chaining_proof(proof, &kb, fragile, None));
    }

    fn kb_without_fragile_fact() -> (HornKb, AtomTable, AtomId) {
        let src = "\
domain sculpture crate floor sidewalk
rule crushed(X) & fragile(X) => broken(X)
rule hit(X,Y) & fragile(X) & hard(Y) => broken(X)
fact crushed(sculpture)
";
        let (kb, table) = parse_kb(src).unwrap();
        let goal = table.lookup("broken(sculpture)").unwrap();
        (kb, table, goal)
    }

    /// Samples with fragile(sculpture) fixed to the given ternary value and
    /// everything else hidden.
    fn samples_with_fragile(table: &AtomTable, values: &[Ternary]) -> Vec<ObscuredScene> {
        let fragile = table.lookup("fragile(sculpture)").unwrap();
        values
            .iter()
            .map(|&v| {
                let mut vals = vec![Ternary::Hidden; table.len()];
                vals[fragile.index()] = v;
                ObscuredScene::new(vals)
            })
            .collect()
    }

    #[test]
    fn credulous_learning_supplies_missing_fact() {
        let (kb, table, goal) = kb_without_fragile_fact();
        let samples = samples_with_fragile(&table, &[Ternary::True, Ternary::Hidden]);
        let result = learn_backward_search(goal, &kb, &samples, LearnMode::Credulous);
        let proof = result.outcome.proof().expect("learned proof");
        let fragile = table.lookup("fragile(sculpture)").unwrap();
        assert!(proof
            .lines
            .iter()
            .any(|l| l.atom == fragile && l.justification == Justification::Learned));
        assert!(verify_chaining_proof(
            proof,
            &kb,
            goal,
            Some((&samples, LearnMode::Credulous))
        ));
        assert_eq!(proof.learned_premises().len(), 1);
    }

    #[test]
    fn counterexample_blocks_credulous_learning() {
        let (kb, table, goal) = kb_without_fragile_fact();
        let samples = samples_with_fragile(&table, &[Ternary::True, Ternary::False]);
        let result = learn_backward_search(goal, &kb, &samples, LearnMode::Credulous);
        assert_eq!(result.outcome, SearchOutcome::Fail);
    }

    #[test]
    fn skeptical_needs_every_sample_witnessed_true() {
        let (kb, table, goal) = kb_without_fragile_fact();
        let samples = samples_with_fragile(&table, &[Ternary::True, Ternary::Hidden]);
        // Credulous learns from {1, *}; skeptical does not.
        assert!(
            learn_backward_search(goal, &kb, &samples, LearnMode::Credulous)
                .outcome
                .is_proof()
        );
        assert_eq!(
            learn_backward_search(goal, &kb, &samples, LearnMode::Skeptical).outcome,
            SearchOutcome::Fail
        );
        let all_true = samples_with_fragile(&table, &[Ternary::True, Ternary::True]);
        assert!(
            learn_backward_search(goal, &kb, &all_true, LearnMode::Skeptical)
                .outcome
                .is_proof()
        );
    }

    #[test]
    fn replayed_kb_with_learned_facts_succeeds() {
        let (kb, table, goal) = kb_without_fragile_fact();
        let samples = samples_with_fragile(&table, &[Ternary::Hidden]);
        let result = learn_backward_search(goal, &kb, &samples, LearnMode::Credulous);
        let learned = result.learned.clone();
        assert!(!learned.is_empty());
        let augmented = kb.with_extra_facts(learned);
        let replay = backward_search(goal, &augmented);
        let proof = replay.outcome.proof().expect("replay proof");
        assert!(verify_chaining_proof(proof, &augmented, goal, None));
    }

    #[test]
    fn sample_size_matches_hand_computed_values() {
        // N=1 kills the B term; delta = 1/e gives ln(1/delta) = 1.
        assert_eq!(sample_size_chaining(1, 1.0, (-1.0f64).exp(), 1.0, 1.0).unwrap(), 1);
        // N=8, eps=0.2, delta=0.1, eta=0.5: ceil(189.38...) = 190.
        assert_eq!(sample_size_chaining(8, 0.2, 0.1, 0.5, 1.0).unwrap(), 190);
    }

    #[test]
    fn sample_size_scales_linearly_in_inverse_epsilon() {
        let m1 = sample_size_chaining(8, 0.2, 0.1, 0.5, 1.0).unwrap();
        let m2 = sample_size_chaining(8, 0.1, 0.1, 0.5, 1.0).unwrap();
        assert!(m2 == 2 * m1 || m2 == 2 * m1 - 1, "m1={m1} m2={m2}");
    }

    #[test]
    fn sample_size_rejects_bad_parameters() {
        assert!(sample_size_chaining(0, 0.5, 0.5, 0.5, 1.0).is_err());
        assert!(sample_size_chaining(4, 0.0, 0.5, 0.5, 1.0).is_err());
        assert!(sample_size_chaining(4, 0.5, 1.5, 0.5, 1.0).is_err());
        assert!(sample_size_chaining(4, 0.5, 0.5, 0.5, 0.0).is_err());
    }
}
