//! Chaining proofs: ordered fact lines with hypothesis / learned / chaining
//! justifications, plus printing, serialization and an independent checker.

use std::collections::BTreeSet;

use serde_json::json;

use crate::chaining::kb::HornKb;
use crate::chaining::search::{passes_sample_test, LearnMode};
use crate::logic::{AtomId, AtomTable, ObscuredScene};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    /// The atom is a fact of the given KB.
    Hypothesis,
    /// The atom was adopted from the samples during the search.
    Learned,
    /// The atom is the head of `rule`, whose body atoms appear at the given
    /// 1-based earlier lines, in body order.
    Chaining { rule: usize, premises: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofLine {
    pub atom: AtomId,
    pub justification: Justification,
}

/// A chaining proof: the last line is the query, and every chaining line
/// follows from earlier lines by one KB rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainingProof {
    pub lines: Vec<ProofLine>,
}

impl ChainingProof {
    /// The learned premise set H' carried by this proof.
    pub fn learned_premises(&self) -> BTreeSet<AtomId> {
        self.lines
            .iter()
            .filter(|l| l.justification == Justification::Learned)
            .map(|l| l.atom)
            .collect()
    }

    pub fn query(&self) -> Option<AtomId> {
        self.lines.last().map(|l| l.atom)
    }
}

/// Numbered-line rendering mirroring the worked-example layout:
///
/// ```text
/// 1. crushed(sculpture) (hypothesis)
/// 2. fragile(sculpture) (hypothesis)
/// 3. broken(sculpture) (chaining, 1 & 2, crushed(X) & fragile(X) => broken(X) / X=sculpture)
/// ```
pub fn print_chaining_proof(proof: &ChainingProof, table: &AtomTable, kb: &HornKb) -> String {
    let mut out = String::new();
    for (i, line) in proof.lines.iter().enumerate() {
        let atom = table.name(line.atom);
        match &line.justification {
            Justification::Hypothesis => {
                out.push_str(&format!("{}. {} (hypothesis)\n", i + 1, atom));
            }
            Justification::Learned => {
                out.push_str(&format!("{}. {} (learned)\n", i + 1, atom));
            }
            Justification::Chaining { rule, premises } => {
                let refs: Vec<String> = premises.iter().map(|p| p.to_string()).collect();
                out.push_str(&format!(
                    "{}. {} (chaining, {}, {})\n",
                    i + 1,
                    atom,
                    refs.join(" & "),
                    kb.rule_display(*rule)
                ));
            }
        }
    }
    out
}

/// Machine-readable form of a proof.
pub fn chaining_proof_json(
    proof: &ChainingProof,
    table: &AtomTable,
    kb: &HornKb,
) -> serde_json::Value {
    let lines: Vec<serde_json::Value> = proof
        .lines
        .iter()
        .enumerate()
        .map(|(i, line)| match &line.justification {
            Justification::Hypothesis => json!({
                "n": i + 1,
                "atom": table.name(line.atom),
                "by": "hypothesis",
            }),
            Justification::Learned => json!({
                "n": i + 1,
                "atom": table.name(line.atom),
                "by": "learned",
            }),
            Justification::Chaining { rule, premises } => {
                let r = &kb.rules[*rule];
                let subst: serde_json::Map<String, serde_json::Value> = r
                    .subst
                    .iter()
                    .map(|(v, c)| (v.clone(), json!(c)))
                    .collect();
                json!({
                    "n": i + 1,
                    "atom": table.name(line.atom),
                    "by": "chaining",
                    "premises": premises,
                    "rule": kb.schemas[r.schema].display(),
                    "subst": subst,
                })
            }
        })
        .collect();
    json!({ "lines": lines })
}

/// Independent proof checker: every line must be a KB fact, a learned atom
/// passing the mode's sample test, or follow from earlier lines by the cited
/// rule; atoms appear at most once; the last line is the query.
pub fn verify_chaining_proof(
    proof: &ChainingProof,
    kb: &HornKb,
    query: AtomId,
    learned_evidence: Option<(&[ObscuredScene], LearnMode)>,
) -> bool {
    if proof.query() != Some(query) {
        return false;
    }
    let mut seen = BTreeSet::new();
    for (i, line) in proof.lines.iter().enumerate() {
        if !seen.insert(line.atom) {
            return false;
        }
        match &line.justification {
            Justification::Hypothesis => {
                if !kb.facts.contains(&line.atom) {
                    return false;
                }
            }
            Justification::Learned => match learned_evidence {
                Some((samples, mode)) => {
                    if !passes_sample_test(line.atom, samples, mode) {
                        return false;
                    }
                }
                None => return false,
            },
            Justification::Chaining { rule, premises } => {
                let Some(r) = kb.rules.get(*rule) else {
                    return false;
                };
                if r.head != line.atom || premises.len() != r.body.len() {
                    return false;
                }
                for (p, &body_atom) in premises.iter().zip(&r.body) {
                    // 1-based reference to a strictly earlier line.
                    if *p == 0 || *p > i {
                        return false;
                    }
                    if proof.lines[*p - 1].atom != body_atom {
                        return false;
                    }
                }
            }
        }
    }
    true
}
