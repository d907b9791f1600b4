//! Treelike resolution proofs: cut and weakening nodes over hypothesis
//! leaves, with verification, normality checking, and space accounting.

use std::collections::BTreeSet;

use serde_json::json;

use crate::logic::{AtomId, AtomTable};
use crate::resolution::clause::{Clause, Cnf};

/// One node of a treelike proof. Edges run from premises toward the
/// conclusion, so in this representation only Cut nodes have children:
/// weakening occurs only at leaves, deriving a superset of an input clause
/// in one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofNode {
    /// Asserts a clause as a (learned) hypothesis.
    Hypothesis { clause: Clause },
    /// Derives `derived` by weakening the input clause `phi[from]`.
    Weakening { derived: Clause, from: usize },
    /// Resolves `left` (holding the pivot in one polarity) against `right`
    /// (holding the other) into `conclusion`.
    Cut {
        pivot: AtomId,
        left: Box<ProofNode>,
        right: Box<ProofNode>,
        conclusion: Clause,
    },
}

impl ProofNode {
    /// The clause this node derives.
    pub fn clause(&self) -> &Clause {
        match self {
            ProofNode::Hypothesis { clause } => clause,
            ProofNode::Weakening { derived, .. } => derived,
            ProofNode::Cut { conclusion, .. } => conclusion,
        }
    }

    pub fn node_count(&self) -> u64 {
        match self {
            ProofNode::Cut { left, right, .. } => 1 + left.node_count() + right.node_count(),
            _ => 1,
        }
    }

    /// Peak clause count when evaluating right subtrees first (the order
    /// matching the search's s / s-1 budget split): a leaf holds one clause;
    /// a cut evaluates its right child with the full budget, holds the
    /// result, then evaluates its left child.
    pub fn eval_space(&self) -> u64 {
        match self {
            ProofNode::Cut { left, right, .. } => right.eval_space().max(1 + left.eval_space()),
            _ => 1,
        }
    }

    /// Minimal space over both evaluation orders (the bottom-up pebbling
    /// rule): equal children cost one extra, unequal children cost the max.
    pub fn min_space(&self) -> u64 {
        match self {
            ProofNode::Cut { left, right, .. } => {
                let l = left.min_space();
                let r = right.min_space();
                if l == r {
                    l + 1
                } else {
                    l.max(r)
                }
            }
            _ => 1,
        }
    }

    fn for_each(&self, f: &mut impl FnMut(&ProofNode)) {
        f(self);
        if let ProofNode::Cut { left, right, .. } = self {
            left.for_each(f);
            right.for_each(f);
        }
    }
}

/// A treelike resolution proof with its space budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolutionProof {
    pub root: ProofNode,
    /// The space bound the proof was found under; verification checks the
    /// evaluation-order peak against it.
    pub space: u32,
}

impl ResolutionProof {
    pub fn node_count(&self) -> u64 {
        self.root.node_count()
    }

    pub fn min_space(&self) -> u64 {
        self.root.min_space()
    }
}

/// The learned premise set H': all hypothesis-leaf clauses, first occurrence
/// first, deduplicated (a conjunction is a set).
pub fn extract_premises(proof: &ResolutionProof, n_atoms: usize) -> Cnf {
    let mut seen = BTreeSet::new();
    let mut clauses = Vec::new();
    proof.root.for_each(&mut |node| {
        if let ProofNode::Hypothesis { clause } = node {
            if seen.insert(clause.clone()) {
                clauses.push(clause.clone());
            }
        }
    });
    Cnf::new(clauses, n_atoms)
}

/// Checks a proof against the input CNF and a hypothesis set: weakening
/// leaves must derive supersets of their cited input clause, hypothesis
/// leaves must belong to `h`, cuts must be well formed, and the peak
/// simultaneous-clause count along the evaluation order must stay within
/// the proof's space budget.
pub fn verify_proof(proof: &ResolutionProof, phi: &Cnf, h: &Cnf) -> bool {
    fn node_ok(node: &ProofNode, phi: &Cnf, h: &Cnf) -> bool {
        match node {
            ProofNode::Hypothesis { clause } => h.clauses.contains(clause),
            ProofNode::Weakening { derived, from } => match phi.clauses.get(*from) {
                Some(base) => derived.is_superset_of(base),
                None => false,
            },
            ProofNode::Cut { pivot, left, right, conclusion } => {
                let lc = left.clause();
                let rc = right.clause();
                let (Some(lp), Some(rp)) = (lc.polarity_of(*pivot), rc.polarity_of(*pivot))
                else {
                    return false;
                };
                if lp == rp {
                    return false;
                }
                // conclusion = (left minus pivot) union (right minus pivot),
                // with no polarity clashes hidden by the union.
                let l_rest = lc.without(*pivot);
                let r_rest = rc.without(*pivot);
                let merged = l_rest
                    .literals()
                    .chain(r_rest.literals())
                    .collect::<Vec<_>>();
                match Clause::from_literals(merged) {
                    Ok(m) => {
                        m == *conclusion && node_ok(left, phi, h) && node_ok(right, phi, h)
                    }
                    Err(_) => false,
                }
            }
        }
    }
    node_ok(&proof.root, phi, h) && proof.root.eval_space() <= proof.space as u64
}

/// Checks the three normality conditions.
///
/// Condition 1 (edges out of cut nodes lead to cut nodes) is structural
/// here: weakening never occurs between cuts in this representation. The
/// checked conditions are (2) every node strictly inside a cut's subtree
/// mentions the cut's pivot variable, and (3) no variable is cut twice along
/// any root-to-leaf path (each path ends in at most one weakening step, so
/// the one-weakening-per-variable condition is structural as well).
pub fn check_normal(proof: &ResolutionProof) -> bool {
    fn subtree_mentions(node: &ProofNode, atom: AtomId) -> bool {
        let mut ok = true;
        node.for_each(&mut |n| {
            if !n.clause().mentions(atom) {
                ok = false;
            }
        });
        ok
    }
    fn walk(node: &ProofNode, pivots_above: &mut Vec<AtomId>) -> bool {
        match node {
            ProofNode::Cut { pivot, left, right, .. } => {
                if pivots_above.contains(pivot) {
                    return false;
                }
                if !subtree_mentions(left, *pivot) || !subtree_mentions(right, *pivot) {
                    return false;
                }
                pivots_above.push(*pivot);
                let ok = walk(left, pivots_above) && walk(right, pivots_above);
                pivots_above.pop();
                ok
            }
            _ => true,
        }
    }
    walk(&proof.root, &mut Vec::new())
}

/// Indented tree rendering:
///
/// ```text
/// cut x1 -> ()
///   hyp (x1)
///   weaken (~x1) from 1
/// ```
pub fn print_resolution_proof(proof: &ResolutionProof, table: &AtomTable) -> String {
    fn go(node: &ProofNode, table: &AtomTable, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match node {
            ProofNode::Hypothesis { clause } => {
                out.push_str(&format!("{pad}hyp {}\n", clause.display(table)));
            }
            ProofNode::Weakening { derived, from } => {
                out.push_str(&format!(
                    "{pad}weaken {} from {}\n",
                    derived.display(table),
                    from + 1
                ));
            }
            ProofNode::Cut { pivot, left, right, conclusion } => {
                out.push_str(&format!(
                    "{pad}cut {} -> {}\n",
                    table.name(*pivot),
                    conclusion.display(table)
                ));
                go(left, table, depth + 1, out);
                go(right, table, depth + 1, out);
            }
        }
    }
    let mut out = String::new();
    go(&proof.root, table, 0, &mut out);
    out
}

fn clause_json(clause: &Clause, table: &AtomTable) -> serde_json::Value {
    json!(clause
        .literals()
        .map(|l| l.display(table))
        .collect::<Vec<_>>())
}

/// Structured serialization with node types `hyp`, `weaken`, `cut`.
pub fn resolution_proof_json(proof: &ResolutionProof, table: &AtomTable) -> serde_json::Value {
    fn go(node: &ProofNode, table: &AtomTable) -> serde_json::Value {
        match node {
            ProofNode::Hypothesis { clause } => json!({
                "type": "hyp",
                "clause": clause_json(clause, table),
            }),
            ProofNode::Weakening { derived, from } => json!({
                "type": "weaken",
                "clause": clause_json(derived, table),
                "from": from + 1,
            }),
            ProofNode::Cut { pivot, left, right, conclusion } => json!({
                "type": "cut",
                "pivot": table.name(*pivot),
                "conclusion": clause_json(conclusion, table),
                "left": go(left, table),
                "right": go(right, table),
            }),
        }
    }
    json!({
        "space": proof.space,
        "nodes": proof.node_count(),
        "root": go(&proof.root, table),
    })
}
