//! Independent brute-force reference implementations used to validate the
//! combinatorial and statistical claims at desk scale.
//!
//! Nothing here shares an evaluation code path with the production modules:
//! the validity oracle re-implements formula evaluation from scratch, and
//! the space-bounded search oracle is the standard non-learning recursion
//! with full backtracking. Oracles may be exponential by design.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::chaining::{
    learn_backward_search, sample_size_chaining, verify_chaining_proof, HornKb, LearnMode,
};
use crate::dist::{sample, ExplicitDistribution, MaskingProcess};
use crate::error::ResolutionError;
use crate::logic::{AtomId, AtomTable, Formula, ObscuredScene, Scene};
use crate::resolution::{
    check_normal, extract_premises, refute, sample_size_resolution, verify_proof, Clause, Cnf,
    LearnConfig, Literal, ProofNode, ResolutionProof,
};

/// Enumeration guards for the oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumLimit {
    pub max_atoms: usize,
    pub max_space: u32,
}

impl EnumLimit {
    /// Limits for scene-space enumeration.
    pub fn scenes() -> Self {
        EnumLimit { max_atoms: 12, max_space: 3 }
    }

    /// Limits for proof-space enumeration.
    pub fn proofs() -> Self {
        EnumLimit { max_atoms: 6, max_space: 3 }
    }
}

// ---------------------------------------------------------------------------
// Validity oracle
// ---------------------------------------------------------------------------

/// Evaluates a formula with an explicit operand stack instead of direct
/// recursion; written separately from `Formula::eval` so the two can
/// cross-check each other.
fn eval_independent(f: &Formula, x: &Scene) -> bool {
    enum Frame<'a> {
        Visit(&'a Formula),
        ApplyNot,
        ApplyThreshold { weights: Vec<i64>, bound: i64 },
    }
    let mut work = vec![Frame::Visit(f)];
    let mut values: Vec<bool> = Vec::new();
    while let Some(frame) = work.pop() {
        match frame {
            Frame::Visit(Formula::Atom(id)) => {
                values.push(x.get(*id).expect("atom id within scene"));
            }
            Frame::Visit(Formula::Not(g)) => {
                work.push(Frame::ApplyNot);
                work.push(Frame::Visit(g));
            }
            Frame::Visit(Formula::Threshold { terms, bound }) => {
                work.push(Frame::ApplyThreshold {
                    weights: terms.iter().map(|(c, _)| *c).collect(),
                    bound: *bound,
                });
                for (_, g) in terms {
                    work.push(Frame::Visit(g));
                }
            }
            Frame::ApplyNot => {
                let v = values.pop().expect("operand for negation");
                values.push(!v);
            }
            Frame::ApplyThreshold { weights, bound } => {
                // Children were pushed in term order, so they pop off the
                // value stack in reverse.
                let mut sum: i128 = 0;
                for &w in weights.iter().rev() {
                    let v = values.pop().expect("operand for threshold");
                    if v {
                        sum += w as i128;
                    }
                }
                values.push(sum >= bound as i128);
            }
        }
    }
    values.pop().expect("final value")
}

/// Exact probability that `f` holds under `d`, computed independently of
/// `dist::validity`.
pub fn exact_validity(f: &Formula, d: &ExplicitDistribution) -> BigRational {
    let mut acc = BigRational::zero();
    for (scene, p) in d.support() {
        if eval_independent(f, scene) {
            acc += p;
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// The implicit hypothesis set
// ---------------------------------------------------------------------------

/// Every clause of width at most `max_width` over `n_atoms` atoms that is
/// never witnessed false in `samples`, ordered by width, then atom ids, then
/// polarity pattern. The clause space has size 3^N; `limit.max_atoms` guards
/// the blow-up.
pub fn all_consistent_clauses(
    samples: &[ObscuredScene],
    max_width: usize,
    n_atoms: usize,
    limit: EnumLimit,
) -> Result<Cnf, ResolutionError> {
    if n_atoms > limit.max_atoms {
        return Err(ResolutionError::LimitExceeded(format!(
            "clause space 3^{n_atoms} exceeds the enumeration limit"
        )));
    }
    let mut clauses = Vec::new();
    for subset in subsets_by_width(n_atoms as u32, max_width) {
        for bits in 0u64..(1 << subset.len()) {
            let lits = subset.iter().enumerate().map(|(i, &a)| Literal {
                atom: AtomId(a),
                positive: bits >> i & 1 == 1,
            });
            let clause = Clause::from_literals(lits).expect("distinct atoms");
            if !samples.iter().any(|rho| clause.witnessed_false(rho)) {
                clauses.push(clause);
            }
        }
    }
    Ok(Cnf::new(clauses, n_atoms))
}

/// Atom subsets in width order, lexicographic within each width.
fn subsets_by_width(n: u32, max_width: usize) -> Vec<Vec<u32>> {
    fn fixed(start: u32, n: u32, want: usize, buf: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if buf.len() == want {
            out.push(buf.clone());
            return;
        }
        for a in start..n {
            buf.push(a);
            fixed(a + 1, n, want, buf, out);
            buf.pop();
        }
    }
    let mut out = Vec::new();
    for width in 0..=max_width.min(n as usize) {
        fixed(0, n, width, &mut Vec::new(), &mut out);
    }
    out
}

// ---------------------------------------------------------------------------
// Standard space-bounded search (the existence oracle)
// ---------------------------------------------------------------------------

/// The standard non-learning space-bounded recursion with full backtracking:
/// the base case derives any superset of a clause of `h` (hypothesis;
/// callers pass superset-closed hypothesis sets) or of `phi` (weakening),
/// and the step tries every absent literal as a pivot. Memoized per
/// (space, clause).
pub fn reference_space_search(phi: &Cnf, h: &Cnf, s: u32, c: &Clause) -> Option<ResolutionProof> {
    struct Ctx<'a> {
        phi: &'a Cnf,
        h: &'a Cnf,
        memo: HashMap<(u32, Clause), Option<ProofNode>>,
    }
    fn go(ctx: &mut Ctx, s: u32, c: &Clause) -> Option<ProofNode> {
        let key = (s, c.clone());
        if let Some(hit) = ctx.memo.get(&key) {
            return hit.clone();
        }
        let result = step(ctx, s, c);
        ctx.memo.insert(key, result.clone());
        result
    }
    fn step(ctx: &mut Ctx, s: u32, c: &Clause) -> Option<ProofNode> {
        if ctx.h.clauses.iter().any(|hc| c.is_superset_of(hc)) {
            return Some(ProofNode::Hypothesis { clause: c.clone() });
        }
        if let Some(from) = ctx.phi.clauses.iter().position(|pc| c.is_superset_of(pc)) {
            return Some(ProofNode::Weakening { derived: c.clone(), from });
        }
        if s > 1 {
            for atom in 0..ctx.phi.n_atoms as u32 {
                if c.mentions(AtomId(atom)) {
                    continue;
                }
                for positive in [true, false] {
                    let lit = Literal { atom: AtomId(atom), positive };
                    let c_pos = c.with(lit).expect("absent atom");
                    let Some(left) = go(ctx, s - 1, &c_pos) else { continue };
                    let c_neg = c.with(lit.negated()).expect("absent atom");
                    if let Some(right) = go(ctx, s, &c_neg) {
                        return Some(ProofNode::Cut {
                            pivot: AtomId(atom),
                            left: Box::new(left),
                            right: Box::new(right),
                            conclusion: c.clone(),
                        });
                    }
                }
            }
        }
        None
    }
    let mut ctx = Ctx { phi, h, memo: HashMap::new() };
    go(&mut ctx, s, c).map(|root| ResolutionProof { root, space: s })
}

// ---------------------------------------------------------------------------
// Normal-proof enumeration
// ---------------------------------------------------------------------------

fn combine_space(l: u64, r: u64) -> u64 {
    if l == r {
        l + 1
    } else {
        l.max(r)
    }
}

/// All cut-only normal treelike proofs of the empty clause over the atoms in
/// `avail`, extending clause `c`, with minimal space at most `cap`. Each
/// entry carries its minimal space.
fn build_normal(c: &Clause, avail: &[u32], cap: u64) -> Vec<(ProofNode, u64)> {
    let mut out: Vec<(ProofNode, u64)> = Vec::new();
    out.push((ProofNode::Hypothesis { clause: c.clone() }, 1));
    if cap < 2 {
        return out;
    }
    for (i, &atom) in avail.iter().enumerate() {
        let rest: Vec<u32> = avail[..i].iter().chain(&avail[i + 1..]).copied().collect();
        for positive in [true, false] {
            let lit = Literal { atom: AtomId(atom), positive };
            let c_pos = c.with(lit).expect("absent atom");
            let c_neg = c.with(lit.negated()).expect("absent atom");
            let lefts = build_normal(&c_pos, &rest, cap - 1);
            let rights = build_normal(&c_neg, &rest, cap);
            for (l, lms) in &lefts {
                for (r, rms) in &rights {
                    let ms = combine_space(*lms, *rms);
                    if ms <= cap {
                        out.push((
                            ProofNode::Cut {
                                pivot: AtomId(atom),
                                left: Box::new(l.clone()),
                                right: Box::new(r.clone()),
                                conclusion: c.clone(),
                            },
                            ms,
                        ));
                    }
                }
            }
        }
    }
    out
}

/// Streams every cut-only normal treelike proof of the empty clause over `n`
/// atoms whose minimal space is at most `s`, returning the count. Trees are
/// ordered (the side holding the positive pivot occurrence matters) and
/// every clause is forced by the pivots above it.
pub fn visit_normal_proofs(
    n: u32,
    s: u32,
    visit: &mut impl FnMut(&ProofNode),
) -> Result<u64, ResolutionError> {
    if n < s || s < 1 {
        return Err(ResolutionError::BadParameter(format!(
            "need N >= s >= 1, got N = {n}, s = {s}"
        )));
    }
    if n > 4 || s > 3 {
        return Err(ResolutionError::LimitExceeded(
            "normal-proof enumeration is limited to N <= 4, s <= 3".into(),
        ));
    }
    let avail: Vec<u32> = (0..n).collect();
    let trees = build_normal(&Clause::empty(), &avail, s as u64);
    for (t, _) in &trees {
        visit(t);
    }
    Ok(trees.len() as u64)
}

/// Materializes the proofs of [`visit_normal_proofs`], guarded by a count
/// cap. Each proof's `space` field records its evaluation-order peak.
pub fn enumerate_normal_proofs(n: u32, s: u32) -> Result<Vec<ResolutionProof>, ResolutionError> {
    let census = normal_proof_census(n, s)?;
    let total: BigInt = census.iter().map(|(_, _, c)| c.clone()).sum();
    if total > BigInt::from(100_000u64) {
        return Err(ResolutionError::LimitExceeded(format!(
            "{total} proofs exceed the materialization cap; use the census or visitor"
        )));
    }
    let mut out = Vec::new();
    visit_normal_proofs(n, s, &mut |p| {
        out.push(ResolutionProof { root: p.clone(), space: p.eval_space() as u32 })
    })?;
    Ok(out)
}

/// Exact histogram over (node count, minimal space) of the proofs that
/// [`visit_normal_proofs`] enumerates, computed by dynamic programming
/// without materializing them (and so usable beyond the visitor's limits).
pub fn normal_proof_census(n: u32, s: u32) -> Result<Vec<(u64, u64, BigInt)>, ResolutionError> {
    if n < s || s < 1 {
        return Err(ResolutionError::BadParameter(format!(
            "need N >= s >= 1, got N = {n}, s = {s}"
        )));
    }
    // h[v] maps (node count, min space) to the number of trees over v
    // distinct available pivots.
    let leaf: HashMap<(u64, u64), BigInt> = [((1, 1), BigInt::one())].into_iter().collect();
    let mut h: Vec<HashMap<(u64, u64), BigInt>> = vec![leaf.clone()];
    for v in 1..=n as u64 {
        let prev = &h[v as usize - 1];
        let mut cur = leaf.clone();
        for (&(lk, lms), lc) in prev {
            for (&(rk, rms), rc) in prev {
                let ms = combine_space(lms, rms);
                if ms > s as u64 {
                    continue;
                }
                let k = 1 + lk + rk;
                let add = BigInt::from(2 * v) * lc * rc;
                *cur.entry((k, ms)).or_insert_with(BigInt::zero) += add;
            }
        }
        h.push(cur);
    }
    let mut out: Vec<(u64, u64, BigInt)> = h[n as usize]
        .iter()
        .map(|(&(k, ms), c)| (k, ms, c.clone()))
        .collect();
    out.sort();
    Ok(out)
}

// ---------------------------------------------------------------------------
// Monte Carlo guarantee harness
// ---------------------------------------------------------------------------

/// Which learning fragment a trial runs.
#[derive(Debug, Clone)]
pub enum Fragment {
    Chaining { kb: HornKb, query: AtomId, mode: LearnMode },
    Resolution { cnf: Cnf, clause: Clause, space: u32, backtrack: bool },
}

/// A fully pinned-down repeated-trial experiment.
#[derive(Debug, Clone)]
pub struct TrialSpec {
    pub fragment: Fragment,
    pub dist: ExplicitDistribution,
    pub mask: MaskingProcess,
    pub table: AtomTable,
    pub epsilon: BigRational,
    pub delta: BigRational,
    pub eta: BigRational,
    pub const_c: f64,
    pub trials: u32,
    pub seed: u64,
    /// Overrides the sample size computed from the fragment's bound.
    pub sample_size: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: u32,
    pub returned_proof: bool,
    /// Display strings of the learned premises.
    pub learned: Vec<String>,
    /// Exact validity of the learned conjunction (1 when nothing learned).
    pub learned_validity: Option<BigRational>,
    /// Whether the learned conjunction is (1 - epsilon)-valid.
    pub premises_valid: Option<bool>,
    /// Whether the returned proof passes the independent checker (plus
    /// normality, for resolution).
    pub proof_checks: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct GuaranteeReport {
    pub m: u64,
    pub trials: u32,
    pub proofs_returned: u32,
    pub invalid_premise_proofs: u32,
    pub failed_proof_checks: u32,
    /// delta + 3 sigma at this trial count: the margin the acceptance tests
    /// hold both violation rates to.
    pub threshold: f64,
    pub outcomes: Vec<TrialOutcome>,
}

impl GuaranteeReport {
    pub fn proof_rate(&self) -> f64 {
        self.proofs_returned as f64 / self.trials.max(1) as f64
    }

    pub fn invalid_premise_rate(&self) -> f64 {
        self.invalid_premise_proofs as f64 / self.trials.max(1) as f64
    }
}

impl fmt::Display for GuaranteeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples per trial: {}", self.m)?;
        writeln!(f, "trials: {}", self.trials)?;
        for o in &self.outcomes {
            if o.returned_proof {
                let v = o
                    .learned_validity
                    .as_ref()
                    .map(|v| v.to_string())
                    .unwrap_or_default();
                writeln!(
                    f,
                    "trial {:>4}: proof  learned=[{}] validity={} premises_ok={} checks_ok={}",
                    o.trial,
                    o.learned.join(", "),
                    v,
                    o.premises_valid.unwrap_or(false),
                    o.proof_checks.unwrap_or(false),
                )?;
            } else {
                writeln!(f, "trial {:>4}: fail", o.trial)?;
            }
        }
        writeln!(f, "proofs returned: {} ({:.4})", self.proofs_returned, self.proof_rate())?;
        writeln!(
            f,
            "invalid-premise proofs: {} ({:.4})",
            self.invalid_premise_proofs,
            self.invalid_premise_rate()
        )?;
        writeln!(f, "failed proof checks: {}", self.failed_proof_checks)?;
        write!(f, "threshold delta+3sigma: {:.4}", self.threshold)
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Runs the learning algorithm on fresh samples per trial (seeds partition
/// as `seed + trial`) and reports the empirical rates that the statistical
/// guarantees bound: the rate of returned proofs whose learned conjunction
/// is not (1 - epsilon)-valid, and the raw proof-return rate.
pub fn monte_carlo_guarantee(spec: &TrialSpec) -> Result<GuaranteeReport, String> {
    let n = spec.dist.atom_count() as u64;
    let epsilon = rational_to_f64(&spec.epsilon);
    let delta = rational_to_f64(&spec.delta);
    let eta = rational_to_f64(&spec.eta);
    let m = match spec.sample_size {
        Some(m) => m,
        None => match &spec.fragment {
            Fragment::Chaining { .. } => {
                sample_size_chaining(n, epsilon, delta, eta, spec.const_c)
                    .map_err(|e| e.to_string())?
            }
            Fragment::Resolution { space, .. } => {
                sample_size_resolution(n, *space, epsilon, delta, eta, spec.const_c)
                    .map_err(|e| e.to_string())?
            }
        },
    };
    let one_minus_eps = BigRational::one() - &spec.epsilon;
    let mut outcomes = Vec::with_capacity(spec.trials as usize);
    let mut proofs_returned = 0;
    let mut invalid = 0;
    let mut failed_checks = 0;

    for trial in 0..spec.trials {
        let samples = sample(
            &spec.dist,
            &spec.mask,
            m as usize,
            spec.seed.wrapping_add(trial as u64),
        )
        .map_err(|e| e.to_string())?;
        let outcome = run_trial(spec, trial, &samples.scenes, &one_minus_eps)?;
        if outcome.returned_proof {
            proofs_returned += 1;
            if outcome.premises_valid == Some(false) {
                invalid += 1;
            }
            if outcome.proof_checks == Some(false) {
                failed_checks += 1;
            }
        }
        outcomes.push(outcome);
    }

    let sigma = (delta * (1.0 - delta) / spec.trials.max(1) as f64).sqrt();
    Ok(GuaranteeReport {
        m,
        trials: spec.trials,
        proofs_returned,
        invalid_premise_proofs: invalid,
        failed_proof_checks: failed_checks,
        threshold: delta + 3.0 * sigma,
        outcomes,
    })
}

fn run_trial(
    spec: &TrialSpec,
    trial: u32,
    scenes: &[ObscuredScene],
    one_minus_eps: &BigRational,
) -> Result<TrialOutcome, String> {
    let fail = TrialOutcome {
        trial,
        returned_proof: false,
        learned: Vec::new(),
        learned_validity: None,
        premises_valid: None,
        proof_checks: None,
    };
    match &spec.fragment {
        Fragment::Chaining { kb, query, mode } => {
            let result = learn_backward_search(*query, kb, scenes, *mode);
            let Some(proof) = result.outcome.proof() else {
                return Ok(fail);
            };
            let learned: Vec<AtomId> = proof.learned_premises().into_iter().collect();
            let conj = Formula::and(learned.iter().map(|&a| Formula::Atom(a)).collect());
            let v = exact_validity(&conj, &spec.dist);
            let ok = verify_chaining_proof(proof, kb, *query, Some((scenes, *mode)));
            Ok(TrialOutcome {
                trial,
                returned_proof: true,
                learned: learned.iter().map(|&a| spec.table.name(a).to_string()).collect(),
                premises_valid: Some(&v >= one_minus_eps),
                learned_validity: Some(v),
                proof_checks: Some(ok),
            })
        }
        Fragment::Resolution { cnf, clause, space, backtrack } => {
            let cfg = LearnConfig {
                space: *space,
                epsilon: rational_to_f64(&spec.epsilon),
                delta: rational_to_f64(&spec.delta),
                eta: rational_to_f64(&spec.eta),
                const_c: spec.const_c,
            };
            let result = if clause.is_empty() {
                refute(cnf, &cfg, scenes, *backtrack).map_err(|e| e.to_string())?
            } else {
                cfg.validate().map_err(|e| e.to_string())?;
                crate::resolution::learn_search_space(cnf, cfg.space, clause, scenes, *backtrack)
            };
            let Some(proof) = result else {
                return Ok(fail);
            };
            let h = extract_premises(&proof, cnf.n_atoms);
            let v = exact_validity(&h.to_formula(), &spec.dist);
            let ok = verify_proof(&proof, cnf, &h) && check_normal(&proof);
            Ok(TrialOutcome {
                trial,
                returned_proof: true,
                learned: h.clauses.iter().map(|c| c.display(&spec.table)).collect(),
                premises_valid: Some(&v >= one_minus_eps),
                learned_validity: Some(v),
                proof_checks: Some(ok),
            })
        }
    }
}
