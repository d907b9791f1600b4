//! Space-bounded treelike resolution with query-driven learning, its entry
//! point for refutation, and the node-count / proof-count / sample-size
//! bounds.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::ResolutionError;
use crate::logic::{AtomId, ObscuredScene, Ternary};
use crate::resolution::clause::{Clause, Cnf, Literal};
use crate::resolution::proof::{ProofNode, ResolutionProof};

/// Parameters of a learning resolution run.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig {
    pub space: u32,
    pub epsilon: f64,
    pub delta: f64,
    pub eta: f64,
    pub const_c: f64,
}

impl LearnConfig {
    pub fn validate(&self) -> Result<(), ResolutionError> {
        if self.space < 1 {
            return Err(ResolutionError::BadParameter("space must be at least 1".into()));
        }
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("eta", self.eta),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(ResolutionError::BadParameter(format!(
                    "{name} = {v} outside (0, 1]"
                )));
            }
        }
        if !(self.const_c > 0.0) {
            return Err(ResolutionError::BadParameter("c must be positive".into()));
        }
        Ok(())
    }
}

struct Search<'a> {
    phi: &'a Cnf,
    samples: &'a [ObscuredScene],
    backtrack: bool,
    /// Results per (space, clause) state. The active sample sublist is a
    /// function of the clause (a sample drops out exactly when some literal
    /// added on the way down evaluates to 1 on it), so caching on the clause
    /// is sound and leaves the recursion's answers unchanged.
    memo: HashMap<(u32, Clause), Option<ProofNode>>,
}

impl<'a> Search<'a> {
    /// One step of the recursion, on the sample sublist `active`.
    ///
    /// In order: (1) a clause never witnessed false in the active samples is
    /// asserted as a hypothesis leaf; (2) a superset of an input clause is
    /// derived by weakening; (3) with space to spare, each absent literal is
    /// tried as a cut pivot, the positive-extension branch searched with one
    /// less unit of space on the samples where the literal is not 1, and on
    /// success the negative-extension branch with full space on the samples
    /// where it is not 0. As printed, the algorithm gives up entirely when
    /// the second branch fails; `backtrack` continues the literal loop
    /// instead (an extension, off by default).
    fn run(&mut self, s: u32, c: &Clause, active: &[usize]) -> Option<ProofNode> {
        let key = (s, c.clone());
        if let Some(cached) = self.memo.get(&key) {
            return cached.clone();
        }
        let result = self.run_uncached(s, c, active);
        self.memo.insert(key, result.clone());
        result
    }

    fn run_uncached(&mut self, s: u32, c: &Clause, active: &[usize]) -> Option<ProofNode> {
        if !active
            .iter()
            .any(|&i| c.witnessed_false(&self.samples[i]))
        {
            return Some(ProofNode::Hypothesis { clause: c.clone() });
        }
        if let Some(from) = self
            .phi
            .clauses
            .iter()
            .position(|input| c.is_superset_of(input))
        {
            return Some(ProofNode::Weakening { derived: c.clone(), from });
        }
        if s > 1 {
            for atom in 0..self.phi.n_atoms as u32 {
                if c.mentions(AtomId(atom)) {
                    continue;
                }
                for positive in [true, false] {
                    let lit = Literal { atom: AtomId(atom), positive };
                    let c_pos = c.with(lit).expect("atom absent from clause");
                    let c_neg = c.with(lit.negated()).expect("atom absent from clause");
                    let left_active: Vec<usize> = active
                        .iter()
                        .copied()
                        .filter(|&i| lit.value(&self.samples[i]) != Ternary::True)
                        .collect();
                    let Some(left) = self.run(s - 1, &c_pos, &left_active) else {
                        continue;
                    };
                    let right_active: Vec<usize> = active
                        .iter()
                        .copied()
                        .filter(|&i| lit.value(&self.samples[i]) != Ternary::False)
                        .collect();
                    if let Some(right) = self.run(s, &c_neg, &right_active) {
                        return Some(ProofNode::Cut {
                            pivot: AtomId(atom),
                            left: Box::new(left),
                            right: Box::new(right),
                            conclusion: c.clone(),
                        });
                    }
                    if !self.backtrack {
                        return None;
                    }
                }
            }
        }
        None
    }
}

/// Space-bounded treelike search for a proof of `c` from `phi` and whatever
/// sample-consistent clauses it decides to assert; those hypothesis leaves
/// are the learned premises.
pub fn learn_search_space(
    phi: &Cnf,
    s: u32,
    c: &Clause,
    samples: &[ObscuredScene],
    backtrack: bool,
) -> Option<ResolutionProof> {
    let mut search = Search { phi, samples, backtrack, memo: HashMap::new() };
    let active: Vec<usize> = (0..samples.len()).collect();
    search
        .run(s, c, &active)
        .map(|root| ResolutionProof { root, space: s })
}

/// Refutation entry point: searches for the empty clause. The empty clause
/// is witnessed false on every obscured scene, so with a nonempty sample
/// list the hypothesis base case never fires at the root.
pub fn refute(
    phi: &Cnf,
    cfg: &LearnConfig,
    samples: &[ObscuredScene],
    backtrack: bool,
) -> Result<Option<ResolutionProof>, ResolutionError> {
    cfg.validate()?;
    debug_assert!(!samples.is_empty(), "refutation needs at least one sample");
    Ok(learn_search_space(phi, cfg.space, &Clause::empty(), samples, backtrack))
}

/// Sample-size bound for space-bounded resolution:
/// `m = ceil(c * (N^(s-1)*log2(N)*ln(2) + ln(1/delta)) / (eta*epsilon))`.
pub fn sample_size_resolution(
    n: u64,
    s: u32,
    epsilon: f64,
    delta: f64,
    eta: f64,
    c: f64,
) -> Result<u64, ResolutionError> {
    if s < 1 || n < s as u64 {
        return Err(ResolutionError::BadParameter(format!(
            "need N >= s >= 1, got N = {n}, s = {s}"
        )));
    }
    crate::chaining::validate_sample_params(n, epsilon, delta, eta, c)
        .map_err(|e| ResolutionError::BadParameter(e.to_string()))?;
    let b_term = (n as f64).powi(s as i32 - 1) * (n as f64).log2() * std::f64::consts::LN_2;
    let m = c * (b_term + (1.0 / delta).ln()) / (eta * epsilon);
    Ok(m.ceil() as u64)
}

/// Node-count and proof-count bounds for space-s normal treelike proofs
/// over N atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct CountBounds {
    /// Minimum node count: 2^s - 1.
    pub min_nodes: BigInt,
    /// Maximum node count: 2 (eN/(s-1))^(s-1), evaluated with a fixed
    /// 20-digit rational lower bound on e so that comparisons against it
    /// are conservative. By convention 1 when s = 1.
    pub max_nodes: BigRational,
    /// Proof-count bound (8N)^L with L = floor((eN/(s-1))^(s-1)), again a
    /// conservative evaluation of the closed form. For s = 1 this is the
    /// number of single-node proofs, 3^N.
    pub max_proofs: BigInt,
}

/// Rational lower bound on Euler's number, 20 digits.
fn euler_lower() -> BigRational {
    BigRational::new(
        "271828182845904523536".parse::<BigInt>().unwrap(),
        BigInt::from(10u64).pow(20),
    )
}

pub fn count_bounds(n: u64, s: u32) -> Result<CountBounds, ResolutionError> {
    if s < 1 || n < s as u64 {
        return Err(ResolutionError::BadParameter(format!(
            "need N >= s >= 1, got N = {n}, s = {s}"
        )));
    }
    if s == 1 {
        return Ok(CountBounds {
            min_nodes: BigInt::one(),
            max_nodes: BigRational::one(),
            max_proofs: BigInt::from(3u32).pow(n as u32),
        });
    }
    let min_nodes = (BigInt::one() << s) - 1;
    let base = euler_lower() * BigRational::from(BigInt::from(n))
        / BigRational::from(BigInt::from(s as u64 - 1));
    let mut l = BigRational::one();
    for _ in 0..s - 1 {
        l *= &base;
    }
    let max_nodes = BigRational::from(BigInt::from(2)) * &l;
    let exponent = l.floor().to_integer().to_u32().ok_or_else(|| {
        ResolutionError::LimitExceeded("proof-count exponent overflows".into())
    })?;
    let max_proofs = BigInt::from(8 * n).pow(exponent);
    Ok(CountBounds { min_nodes, max_nodes, max_proofs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolution::clause::parse_clause_arg;
    use crate::resolution::proof::{check_normal, extract_premises, verify_proof};
    use crate::logic::ObscuredScene;

    fn rho(spec: &str) -> ObscuredScene {
        ObscuredScene::new(spec.chars().map(|c| Ternary::from_char(c).unwrap()).collect())
    }

    fn clause(spec: &str, n: usize) -> Clause {
        parse_clause_arg(spec, n).unwrap()
    }

    #[test]
    fn consistent_clause_becomes_hypothesis_regardless_of_phi() {
        let phi = Cnf::new(vec![clause("-1", 2)], 2);
        let samples = [rho("1*"), rho("**")];
        let c = clause("1", 2);
        let proof = learn_search_space(&phi, 1, &c, &samples, false).unwrap();
        assert_eq!(proof.root, ProofNode::Hypothesis { clause: c });
    }

    #[test]
    fn superset_of_input_becomes_weakening() {
        let phi = Cnf::new(vec![clause("1", 2)], 2);
        // (x1 | x2) is witnessed false somewhere, so the hypothesis case is
        // skipped and weakening from clause 0 applies.
        let samples = [rho("00")];
        let c = clause("1 2", 2);
        let proof = learn_search_space(&phi, 1, &c, &samples, false).unwrap();
        assert_eq!(proof.root, ProofNode::Weakening { derived: c, from: 0 });
    }

    #[test]
    fn one_variable_refutation_learns_the_unit() {
        // phi = {(~x)}, samples witness x true somewhere and never false:
        // the left branch asserts (x) from the samples, the right weakens
        // to (~x), and the cut yields the empty clause.
        let phi = Cnf::new(vec![clause("-1", 1)], 1);
        let samples = [rho("1"), rho("*")];
        let cfg = LearnConfig { space: 2, epsilon: 0.5, delta: 0.5, eta: 0.5, const_c: 1.0 };
        let proof = refute(&phi, &cfg, &samples, false).unwrap().expect("proof");
        assert_eq!(proof.node_count(), 3);
        let h = extract_premises(&proof, 1);
        assert_eq!(h.clauses, vec![clause("1", 1)]);
        assert!(verify_proof(&proof, &phi, &h));
        assert!(check_normal(&proof));
        match &proof.root {
            ProofNode::Cut { pivot, left, right, conclusion } => {
                assert_eq!(*pivot, AtomId(0));
                assert!(conclusion.is_empty());
                assert!(matches!(**left, ProofNode::Hypothesis { .. }));
                assert!(matches!(**right, ProofNode::Weakening { .. }));
            }
            other => panic!("expected cut, got {other:?}"),
        }
    }

    #[test]
    fn empty_clause_in_phi_weakens_immediately() {
        let phi = Cnf::new(vec![Clause::empty()], 1);
        let cfg = LearnConfig { space: 1, epsilon: 0.5, delta: 0.5, eta: 0.5, const_c: 1.0 };
        let samples = [rho("*")];
        let proof = refute(&phi, &cfg, &samples, false).unwrap().expect("proof");
        assert_eq!(proof.root, ProofNode::Weakening { derived: Clause::empty(), from: 0 });
    }

    #[test]
    fn empty_phi_at_space_one_returns_none() {
        let phi = Cnf::new(vec![], 1);
        let cfg = LearnConfig { space: 1, epsilon: 0.5, delta: 0.5, eta: 0.5, const_c: 1.0 };
        let samples = [rho("1")];
        assert!(refute(&phi, &cfg, &samples, false).unwrap().is_none());
    }

    #[test]
    fn backtracking_never_loses_to_the_printed_control_flow() {
        // The verbatim algorithm gives up outright when a cut's second
        // branch fails. Supersets of space-s-provable clauses stay provable
        // (restrict the proof by the added literal), so that abort never
        // costs a refutation; the two modes agree on success. Checked here
        // on a deterministic mini-corpus, and statistically at scale in the
        // acceptance suite.
        let corpus: &[(Cnf, Vec<ObscuredScene>)] = &[
            (Cnf::new(vec![clause("-1", 2), clause("1 2", 2)], 2), vec![rho("1*"), rho("*0")]),
            (Cnf::new(vec![clause("2", 2), clause("-2", 2)], 2), vec![rho("11"), rho("10")]),
            (
                Cnf::new(vec![clause("1 2", 3), clause("-2 3", 3), clause("-3", 3)], 3),
                vec![rho("0**"), rho("*1*"), rho("11*")],
            ),
        ];
        for (s, (phi, samples)) in [(2u32, &corpus[0]), (2, &corpus[1]), (3, &corpus[2])] {
            let verbatim = learn_search_space(phi, s, &Clause::empty(), samples, false);
            let back = learn_search_space(phi, s, &Clause::empty(), samples, true);
            assert_eq!(verbatim.is_some(), back.is_some());
            if let Some(p) = verbatim {
                let h = extract_premises(&p, phi.n_atoms);
                assert!(verify_proof(&p, phi, &h));
            }
        }
    }

    #[test]
    fn learned_premises_never_witnessed_false_in_scope() {
        // Premise-consistency invariant on a slightly larger run.
        let phi = Cnf::new(vec![clause("-1 -2", 3), clause("-3", 3)], 3);
        let samples = [rho("11*"), rho("1*1"), rho("*11"), rho("***")];
        let proof = learn_search_space(&phi, 3, &Clause::empty(), &samples, true);
        if let Some(p) = proof {
            let h = extract_premises(&p, 3);
            assert!(verify_proof(&p, &phi, &h));
            // Every hypothesis clause is consistent with the full sample
            // list restricted to its branch; the weaker global statement
            // checked here is that it is consistent with the samples that
            // never saw any of its literals set true.
            for c in &h.clauses {
                let in_scope: Vec<&ObscuredScene> = samples
                    .iter()
                    .filter(|r| c.literals().all(|l| l.value(r) != Ternary::True))
                    .collect();
                assert!(in_scope.iter().all(|r| !c.witnessed_false(r)));
            }
        }
    }

    #[test]
    fn sample_size_matches_hand_computed_values() {
        // N=2, s=1: ceil(log2(2)*ln2 + 1) = ceil(1.693) = 2 with delta=1/e.
        assert_eq!(
            sample_size_resolution(2, 1, 1.0, (-1.0f64).exp(), 1.0, 1.0).unwrap(),
            2
        );
        // N=4, s=2, eps=1/4, delta=1/10, eta=1/4: ceil(125.56) = 126.
        assert_eq!(sample_size_resolution(4, 2, 0.25, 0.1, 0.25, 1.0).unwrap(), 126);
    }

    #[test]
    fn sample_size_doubles_when_eta_halves() {
        let m1 = sample_size_resolution(4, 2, 0.25, 0.1, 0.5, 1.0).unwrap();
        let m2 = sample_size_resolution(4, 2, 0.25, 0.1, 0.25, 1.0).unwrap();
        assert!(m2 == 2 * m1 || m2 == 2 * m1 - 1, "m1={m1} m2={m2}");
    }

    #[test]
    fn sample_size_requires_n_at_least_s() {
        assert!(sample_size_resolution(1, 2, 0.5, 0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn count_bounds_examples() {
        // s=1 convention.
        let b = count_bounds(4, 1).unwrap();
        assert_eq!(b.min_nodes, BigInt::one());
        assert_eq!(b.max_proofs, BigInt::from(81));

        // N=4, s=3: min 7, max 2(4e/2)^2 = 8e^2 ~ 59.11.
        let b = count_bounds(4, 3).unwrap();
        assert_eq!(b.min_nodes, BigInt::from(7));
        let max = b.max_nodes.to_f64().unwrap();
        assert!((max - 59.112).abs() < 0.01, "max {max}");

        // N=2, s=2: proof bound (16)^floor(2e) = 16^5.
        let b = count_bounds(2, 2).unwrap();
        assert_eq!(b.max_proofs, BigInt::from(16u64).pow(5));

        assert!(count_bounds(2, 3).is_err());
    }
}
