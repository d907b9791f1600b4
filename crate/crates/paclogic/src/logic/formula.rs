//! Formulas over ground atoms with integer linear-threshold connectives,
//! classical evaluation, and partial evaluation with witnessing.

use std::collections::BTreeSet;

use crate::error::LogicError;
use crate::logic::atoms::{AtomId, ObscuredScene, Scene, Ternary};

/// A quantifier-free formula. The only primitive connectives are negation and
/// the integer linear-threshold connective `[c1*f1 + ... + ck*fk >= b]`,
/// which is true when the weights of the true children sum to at least the
/// bound. AND, OR, implication and equivalence are constructor sugar compiled
/// to thresholds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(AtomId),
    Not(Box<Formula>),
    Threshold { terms: Vec<(i64, Formula)>, bound: i64 },
}

/// Outcome of partially evaluating a formula on an obscured scene: witnessed
/// to a Boolean constant, or a residual formula over still-hidden atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartialEvalResult {
    WitnessedTrue,
    WitnessedFalse,
    Residual(Formula),
}

impl PartialEvalResult {
    pub fn is_witnessed(&self) -> bool {
        !matches!(self, PartialEvalResult::Residual(_))
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            PartialEvalResult::WitnessedTrue => Some(true),
            PartialEvalResult::WitnessedFalse => Some(false),
            PartialEvalResult::Residual(_) => None,
        }
    }

    fn witnessed(b: bool) -> Self {
        if b {
            PartialEvalResult::WitnessedTrue
        } else {
            PartialEvalResult::WitnessedFalse
        }
    }
}

impl Formula {
    pub fn atom(id: AtomId) -> Formula {
        Formula::Atom(id)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    /// Raw threshold constructor; rejects zero weights.
    pub fn threshold(terms: Vec<(i64, Formula)>, bound: i64) -> Result<Formula, LogicError> {
        if terms.iter().any(|(c, _)| *c == 0) {
            return Err(LogicError::ZeroWeight);
        }
        Ok(Formula::Threshold { terms, bound })
    }

    /// k-ary AND: all weights 1, bound k. The empty AND is the vacuous
    /// threshold `[ >= 0 ]`, which is true.
    pub fn and(children: Vec<Formula>) -> Formula {
        let bound = children.len() as i64;
        Formula::Threshold {
            terms: children.into_iter().map(|f| (1, f)).collect(),
            bound,
        }
    }

    /// k-ary OR: all weights 1, bound 1. The empty OR is false.
    pub fn or(children: Vec<Formula>) -> Formula {
        Formula::Threshold {
            terms: children.into_iter().map(|f| (1, f)).collect(),
            bound: 1,
        }
    }

    /// `a -> b` as the threshold `[-1*a + 1*b >= 0]`.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Threshold {
            terms: vec![(-1, a), (1, b)],
            bound: 0,
        }
    }

    /// `a <-> b` as the conjunction of the two implications.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(vec![
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        ])
    }

    /// Constant true/false as empty thresholds.
    pub fn constant(b: bool) -> Formula {
        Formula::Threshold {
            terms: Vec::new(),
            bound: if b { 0 } else { 1 },
        }
    }

    /// Set of atoms mentioned anywhere in the formula.
    pub fn atoms(&self) -> BTreeSet<AtomId> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<AtomId>) {
        match self {
            Formula::Atom(id) => {
                out.insert(*id);
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::Threshold { terms, .. } => {
                for (_, f) in terms {
                    f.collect_atoms(out);
                }
            }
        }
    }

    /// Classical evaluation on a total scene. A threshold is true iff the
    /// weights of its true children sum to at least the bound.
    pub fn eval(&self, x: &Scene) -> Result<bool, LogicError> {
        match self {
            Formula::Atom(id) => x.get(*id).ok_or(LogicError::AtomOutOfRange {
                id: id.0,
                n: x.len(),
            }),
            Formula::Not(f) => Ok(!f.eval(x)?),
            Formula::Threshold { terms, bound } => {
                let mut sum: i128 = 0;
                for (c, f) in terms {
                    if f.eval(x)? {
                        sum += *c as i128;
                    }
                }
                Ok(sum >= *bound as i128)
            }
        }
    }

    /// Partial evaluation on an obscured scene.
    ///
    /// An atom is witnessed to its value unless hidden. A negation is
    /// witnessed to the flipped value when its child is witnessed, and is
    /// otherwise the negation of the child's residual. A threshold
    /// `[sum c_i psi_i >= b]` is
    ///
    /// * witnessed true when the witnessed-true weight plus `min{0, c_i}`
    ///   over unwitnessed terms reaches `b`,
    /// * witnessed false when the witnessed-true weight plus `max{0, c_i}`
    ///   over unwitnessed terms stays below `b`,
    /// * and otherwise reduces to the unwitnessed terms (each replaced by its
    ///   own residual) with bound `d = b - sum of witnessed-true weights`.
    ///
    /// A residual therefore mentions only atoms hidden in `rho`. Witnessing
    /// is deliberately weaker than the value being determined on all
    /// completions; see the module tests.
    pub fn partial_eval(&self, rho: &ObscuredScene) -> PartialEvalResult {
        match self {
            Formula::Atom(id) => match rho
                .get(*id)
                .unwrap_or_else(|| panic!("atom id {} out of range for obscured scene of {} atoms", id.0, rho.len()))
            {
                Ternary::True => PartialEvalResult::WitnessedTrue,
                Ternary::False => PartialEvalResult::WitnessedFalse,
                Ternary::Hidden => PartialEvalResult::Residual(Formula::Atom(*id)),
            },
            Formula::Not(f) => match f.partial_eval(rho) {
                PartialEvalResult::WitnessedTrue => PartialEvalResult::WitnessedFalse,
                PartialEvalResult::WitnessedFalse => PartialEvalResult::WitnessedTrue,
                PartialEvalResult::Residual(g) => {
                    PartialEvalResult::Residual(Formula::not(g))
                }
            },
            Formula::Threshold { terms, bound } => {
                let bound = *bound as i128;
                let mut true_weight: i128 = 0;
                let mut min_unwitnessed: i128 = 0;
                let mut max_unwitnessed: i128 = 0;
                let mut residual_terms: Vec<(i64, Formula)> = Vec::new();
                for (c, f) in terms {
                    match f.partial_eval(rho) {
                        PartialEvalResult::WitnessedTrue => true_weight += *c as i128,
                        PartialEvalResult::WitnessedFalse => {}
                        PartialEvalResult::Residual(g) => {
                            min_unwitnessed += (*c as i128).min(0);
                            max_unwitnessed += (*c as i128).max(0);
                            residual_terms.push((*c, g));
                        }
                    }
                }
                if true_weight + min_unwitnessed >= bound {
                    PartialEvalResult::witnessed(true)
                } else if true_weight + max_unwitnessed < bound {
                    PartialEvalResult::witnessed(false)
                } else {
                    // d = b - sum of witnessed-true weights fits in i64 here:
                    // the two checks above bracket it between the residual
                    // min and max weight sums.
                    let d = bound - true_weight;
                    PartialEvalResult::Residual(Formula::Threshold {
                        terms: residual_terms,
                        bound: d as i64,
                    })
                }
            }
        }
    }
}

/// Threshold encoding of the Horn clause `body_1 AND ... AND body_k => head`:
/// `[-1*body_1 - ... - 1*body_k + 1*head >= 1 - k]`. A fact (empty body)
/// encodes as `[1*head >= 1]`.
pub fn horn_to_formula(body: &[AtomId], head: AtomId) -> Formula {
    let mut terms: Vec<(i64, Formula)> = body.iter().map(|&a| (-1, Formula::Atom(a))).collect();
    terms.push((1, Formula::Atom(head)));
    Formula::Threshold {
        terms,
        bound: 1 - body.len() as i64,
    }
}
