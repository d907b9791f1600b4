//! Scene distributions, masking processes, sampling, and exact validity /
//! concealment computation on small instances.
//!
//! Probabilities are exact rationals throughout. Randomized operations use a
//! ChaCha12 generator seeded explicitly, so identical seeds reproduce sample
//! sets bit for bit; concurrent trials should partition the seed space.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{DistError, ParseError};
use crate::logic::{AtomId, AtomTable, Formula, ObscuredScene, PartialEvalResult, Scene, Ternary};

/// Atom-count cap for the exact enumeration in [`concealment`] and
/// [`counterexample_rate`] under coin masking.
pub const EXACT_ENUM_LIMIT: usize = 16;

/// A finitely supported distribution over scenes, with exact rational
/// probabilities summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitDistribution {
    n: usize,
    support: Vec<(Scene, BigRational)>,
}

impl ExplicitDistribution {
    pub fn new(support: Vec<(Scene, BigRational)>) -> Result<Self, DistError> {
        if support.is_empty() {
            return Err(DistError::EmptySupport);
        }
        let n = support[0].0.len();
        let mut seen = BTreeSet::new();
        let mut total = BigRational::zero();
        for (scene, p) in &support {
            if scene.len() != n {
                return Err(DistError::BadSceneLength { got: scene.len(), want: n });
            }
            if !seen.insert(scene.clone()) {
                return Err(DistError::DuplicateScene);
            }
            if p <= &BigRational::zero() || p > &BigRational::one() {
                return Err(DistError::BadProbability(p.to_string()));
            }
            total += p;
        }
        if !total.is_one() {
            return Err(DistError::BadTotal(total.to_string()));
        }
        Ok(ExplicitDistribution { n, support })
    }

    /// Uniform distribution over the given scenes.
    pub fn uniform(scenes: Vec<Scene>) -> Result<Self, DistError> {
        let k = scenes.len();
        let p = BigRational::new(BigInt::one(), BigInt::from(k.max(1)));
        Self::new(scenes.into_iter().map(|s| (s, p.clone())).collect())
    }

    /// Uniform over all 2^n scenes of n atoms. Intended for small tests.
    pub fn uniform_over_all(n: usize) -> Result<Self, DistError> {
        Self::uniform((0..1u64 << n).map(|bits| Scene::from_bits(n, bits)).collect())
    }

    pub fn atom_count(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[(Scene, BigRational)] {
        &self.support
    }
}

/// A randomized map from scenes to consistent obscured scenes. Masks only
/// ever hide values, never alter them, so the output is always consistent
/// with the input scene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaskingProcess {
    /// Always hides exactly the given atoms.
    FixedSubset(BTreeSet<AtomId>),
    /// Hides each atom independently with probability `p`.
    IndependentCoin(BigRational),
    /// Rules applied in order; the first whose condition holds on the scene
    /// fires, hiding its atom set with the stated probability (and hiding
    /// nothing otherwise). If no condition matches, nothing is hidden.
    ValueDependent(Vec<MaskRule>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskRule {
    pub condition: Formula,
    pub hidden: BTreeSet<AtomId>,
    pub prob: BigRational,
}

impl MaskingProcess {
    pub fn coin(num: i64, den: i64) -> Self {
        MaskingProcess::IndependentCoin(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn hide_nothing() -> Self {
        MaskingProcess::FixedSubset(BTreeSet::new())
    }

    /// Applies one random mask draw to `x`.
    pub fn apply(&self, x: &Scene, rng: &mut ChaCha12Rng) -> Result<ObscuredScene, DistError> {
        match self {
            MaskingProcess::FixedSubset(hidden) => {
                Ok(ObscuredScene::from_scene_hiding(x, |a| hidden.contains(&a)))
            }
            MaskingProcess::IndependentCoin(p) => {
                let mut hidden = vec![false; x.len()];
                for h in hidden.iter_mut() {
                    *h = bernoulli(p, rng);
                }
                Ok(ObscuredScene::from_scene_hiding(x, |a| hidden[a.index()]))
            }
            MaskingProcess::ValueDependent(rules) => {
                for rule in rules {
                    if rule.condition.eval(x)? {
                        if bernoulli(&rule.prob, rng) {
                            return Ok(ObscuredScene::from_scene_hiding(x, |a| {
                                rule.hidden.contains(&a)
                            }));
                        }
                        return Ok(ObscuredScene::from_scene(x));
                    }
                }
                Ok(ObscuredScene::from_scene(x))
            }
        }
    }
}

/// Exact Bernoulli draw: compares a uniform 64-bit draw, read as the rational
/// `u / 2^64`, against `p`.
fn bernoulli(p: &BigRational, rng: &mut ChaCha12Rng) -> bool {
    let u: u64 = rng.gen();
    &BigRational::new(BigInt::from(u), BigInt::from(1u128 << 64)) < p
}

/// Where a sample set came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Generated { dist: String, mask: String },
    External(String),
}

/// A list of obscured scenes together with the seed and source that produced
/// it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    pub scenes: Vec<ObscuredScene>,
    pub seed: u64,
    pub provenance: Provenance,
}

/// Draws `count` scenes from `d`, masks each with `m_proc`, deterministically
/// in `seed`.
pub fn sample(
    d: &ExplicitDistribution,
    m_proc: &MaskingProcess,
    count: usize,
    seed: u64,
) -> Result<SampleSet, DistError> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut scenes = Vec::with_capacity(count);
    for _ in 0..count {
        let x = draw_scene(d, &mut rng);
        let rho = m_proc.apply(x, &mut rng)?;
        scenes.push(rho);
    }
    Ok(SampleSet {
        scenes,
        seed,
        provenance: Provenance::Generated { dist: String::new(), mask: String::new() },
    })
}

fn draw_scene<'a>(d: &'a ExplicitDistribution, rng: &mut ChaCha12Rng) -> &'a Scene {
    let u: u64 = rng.gen();
    let target = BigRational::new(BigInt::from(u), BigInt::from(1u128 << 64));
    let mut acc = BigRational::zero();
    for (scene, p) in d.support() {
        acc += p;
        if target < acc {
            return scene;
        }
    }
    // Total mass is exactly 1 and target < 1, so the loop always returns;
    // this keeps the function total anyway.
    &d.support().last().unwrap().0
}

/// Exact probability that `f` evaluates true under `d`.
pub fn validity(d: &ExplicitDistribution, f: &Formula) -> Result<BigRational, DistError> {
    let mut acc = BigRational::zero();
    for (scene, p) in d.support() {
        if f.eval(scene)? {
            acc += p;
        }
    }
    Ok(acc)
}

/// Degree of concealment of a formula class: the minimum over falsifiable
/// formulas of the probability that the formula is witnessed after masking,
/// conditioned on it being false in the underlying scene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concealment {
    pub eta: BigRational,
    /// False when no formula in the class is ever falsified under `d`; the
    /// conditional is then vacuous and eta is reported as 1.
    pub falsifiable: bool,
}

/// What to count when enumerating mask outcomes for a fixed scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WitnessEvent {
    /// Partial evaluation yields any Boolean constant.
    Witnessed,
    /// Partial evaluation yields false.
    WitnessedFalse,
}

/// Exact probability of the witness event over the mask distribution, for a
/// fixed scene. Coin masks are enumerated over the atoms the formula
/// mentions (witnessing cannot depend on any other entry); the other mask
/// kinds are constant-size case splits.
fn witness_probability(
    m_proc: &MaskingProcess,
    x: &Scene,
    f: &Formula,
    event: WitnessEvent,
) -> Result<BigRational, DistError> {
    let hit = |rho: &ObscuredScene| -> bool {
        match (event, f.partial_eval(rho)) {
            (WitnessEvent::Witnessed, r) => r.is_witnessed(),
            (WitnessEvent::WitnessedFalse, r) => r == PartialEvalResult::WitnessedFalse,
        }
    };
    match m_proc {
        MaskingProcess::FixedSubset(hidden) => {
            let rho = ObscuredScene::from_scene_hiding(x, |a| hidden.contains(&a));
            Ok(if hit(&rho) { BigRational::one() } else { BigRational::zero() })
        }
        MaskingProcess::IndependentCoin(p) => {
            let atoms: Vec<AtomId> = f.atoms().into_iter().collect();
            if atoms.len() > EXACT_ENUM_LIMIT {
                return Err(DistError::EstimateOnly(atoms.len(), EXACT_ENUM_LIMIT));
            }
            let q = BigRational::one() - p;
            let mut acc = BigRational::zero();
            for bits in 0u64..(1 << atoms.len()) {
                let hidden: BTreeSet<AtomId> = atoms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| bits >> i & 1 == 1)
                    .map(|(_, &a)| a)
                    .collect();
                let rho = ObscuredScene::from_scene_hiding(x, |a| hidden.contains(&a));
                if hit(&rho) {
                    let h = hidden.len() as u32;
                    let term = pow_rational(p, h) * pow_rational(&q, atoms.len() as u32 - h);
                    acc += term;
                }
            }
            Ok(acc)
        }
        MaskingProcess::ValueDependent(rules) => {
            for rule in rules {
                if rule.condition.eval(x)? {
                    let masked = ObscuredScene::from_scene_hiding(x, |a| rule.hidden.contains(&a));
                    let plain = ObscuredScene::from_scene(x);
                    let mut acc = BigRational::zero();
                    if hit(&masked) {
                        acc += &rule.prob;
                    }
                    if hit(&plain) {
                        acc += BigRational::one() - &rule.prob;
                    }
                    return Ok(acc);
                }
            }
            let plain = ObscuredScene::from_scene(x);
            Ok(if hit(&plain) { BigRational::one() } else { BigRational::zero() })
        }
    }
}

fn pow_rational(p: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= p;
    }
    acc
}

/// Exact concealment of `formulas` under `d` and `m_proc`: the minimum over
/// formulas falsified with positive probability of
/// `Pr[f witnessed on m(x) | f false on x]`.
pub fn concealment(
    d: &ExplicitDistribution,
    m_proc: &MaskingProcess,
    formulas: &[Formula],
) -> Result<Concealment, DistError> {
    let mut eta: Option<BigRational> = None;
    for f in formulas {
        let mut denom = BigRational::zero();
        let mut num = BigRational::zero();
        for (scene, p) in d.support() {
            if !f.eval(scene)? {
                denom += p;
                num += p * witness_probability(m_proc, scene, f, WitnessEvent::Witnessed)?;
            }
        }
        if denom.is_zero() {
            continue;
        }
        let ratio = num / denom;
        eta = Some(match eta {
            Some(e) if e <= ratio => e,
            _ => ratio,
        });
    }
    match eta {
        Some(eta) => Ok(Concealment { eta, falsifiable: true }),
        None => Ok(Concealment { eta: BigRational::one(), falsifiable: false }),
    }
}

/// Exact probability over masked draws that `f` is witnessed false.
pub fn counterexample_rate(
    d: &ExplicitDistribution,
    m_proc: &MaskingProcess,
    f: &Formula,
) -> Result<BigRational, DistError> {
    let mut acc = BigRational::zero();
    for (scene, p) in d.support() {
        acc += p * witness_probability(m_proc, scene, f, WitnessEvent::WitnessedFalse)?;
    }
    Ok(acc)
}

/// Monte Carlo estimate with a 95% normal-approximation interval, for
/// instances beyond the exact enumeration limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub ci95: f64,
    pub trials: usize,
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6} +/- {:.6} ({} trials)", self.value, self.ci95, self.trials)
    }
}

/// Monte Carlo counterpart of [`counterexample_rate`].
pub fn counterexample_rate_estimate(
    d: &ExplicitDistribution,
    m_proc: &MaskingProcess,
    f: &Formula,
    trials: usize,
    seed: u64,
) -> Result<Estimate, DistError> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..trials {
        let x = draw_scene(d, &mut rng).clone();
        let rho = m_proc.apply(&x, &mut rng)?;
        if f.partial_eval(&rho) == PartialEvalResult::WitnessedFalse {
            hits += 1;
        }
    }
    Ok(binomial_estimate(hits, trials))
}

/// Monte Carlo counterpart of [`concealment`] for a single formula.
pub fn concealment_estimate(
    d: &ExplicitDistribution,
    m_proc: &MaskingProcess,
    f: &Formula,
    trials: usize,
    seed: u64,
) -> Result<Estimate, DistError> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut falsified = 0usize;
    let mut witnessed = 0usize;
    for _ in 0..trials {
        let x = draw_scene(d, &mut rng).clone();
        if f.eval(&x)? {
            continue;
        }
        falsified += 1;
        let rho = m_proc.apply(&x, &mut rng)?;
        if f.partial_eval(&rho).is_witnessed() {
            witnessed += 1;
        }
    }
    Ok(binomial_estimate(witnessed, falsified))
}

fn binomial_estimate(hits: usize, trials: usize) -> Estimate {
    if trials == 0 {
        return Estimate { value: 1.0, ci95: 0.0, trials: 0 };
    }
    let p = hits as f64 / trials as f64;
    let ci = 1.96 * (p * (1.0 - p) / trials as f64).sqrt();
    Estimate { value: p, ci95: ci, trials }
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// Parses "p/q" or "p" into an exact rational.
pub fn parse_rational(s: &str, line: usize) -> Result<BigRational, ParseError> {
    let bad = || ParseError::new(line, format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((num, den)) => {
            let n: BigInt = num.trim().parse().map_err(|_| bad())?;
            let d: BigInt = den.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(ParseError::new(line, "zero denominator"));
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = s.trim().parse().map_err(|_| bad())?;
            Ok(BigRational::from(n))
        }
    }
}

fn parse_atom_header(line_text: &str, line: usize) -> Result<AtomTable, ParseError> {
    let rest = line_text
        .strip_prefix("atoms:")
        .ok_or_else(|| ParseError::new(line, "expected header 'atoms: a b c ...'"))?;
    let names: Vec<&str> = rest.split_whitespace().collect();
    if names.is_empty() {
        return Err(ParseError::new(line, "empty atom list"));
    }
    AtomTable::from_names(names).map_err(|e| ParseError::new(line, e.to_string()))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Distribution file: header `atoms: a b c`, then lines `prob scene-bits`,
/// e.g. `1/4 101`.
pub fn parse_distribution(text: &str) -> Result<(ExplicitDistribution, AtomTable), ParseError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, "empty distribution file"))?;
    let table = parse_atom_header(header, hline)?;
    let n = table.len();
    let mut support = Vec::new();
    for (ln, l) in lines {
        let (p_str, bits) = l
            .split_once(char::is_whitespace)
            .ok_or_else(|| ParseError::new(ln, "expected 'prob bits'"))?;
        let p = parse_rational(p_str, ln)?;
        let bits = bits.trim();
        if bits.len() != n {
            return Err(ParseError::new(ln, format!("expected {n} scene bits, got {}", bits.len())));
        }
        let mut values = Vec::with_capacity(n);
        for c in bits.chars() {
            match c {
                '0' => values.push(false),
                '1' => values.push(true),
                other => return Err(ParseError::new(ln, format!("bad scene bit {other:?}"))),
            }
        }
        support.push((Scene::new(values), p));
    }
    let d = ExplicitDistribution::new(support)
        .map_err(|e| ParseError::new(0, format!("invalid distribution: {e}")))?;
    Ok((d, table))
}

pub fn print_distribution(d: &ExplicitDistribution, table: &AtomTable) -> String {
    let mut out = format!("atoms: {}\n", table.names().join(" "));
    for (scene, p) in d.support() {
        let bits: String = scene.values().iter().map(|&b| if b { '1' } else { '0' }).collect();
        out.push_str(&format!("{p} {bits}\n"));
    }
    out
}

fn resolve_atoms(
    names: &[&str],
    table: &AtomTable,
    line: usize,
) -> Result<BTreeSet<AtomId>, ParseError> {
    names
        .iter()
        .map(|n| {
            table
                .lookup(n)
                .ok_or_else(|| ParseError::new(line, format!("unknown atom {n:?}")))
        })
        .collect()
}

/// Mask file. One of:
///
/// ```text
/// fixed a c
/// coin 1/2
/// when <formula> hide a b with 3/4     (repeatable; first match fires)
/// ```
pub fn parse_mask(text: &str, table: &AtomTable) -> Result<MaskingProcess, ParseError> {
    let mut rules: Vec<MaskRule> = Vec::new();
    let mut simple: Option<MaskingProcess> = None;
    for (ln, l) in content_lines(text) {
        if simple.is_some() {
            return Err(ParseError::new(ln, "trailing content after mask definition"));
        }
        if let Some(rest) = l.strip_prefix("fixed") {
            if !rules.is_empty() {
                return Err(ParseError::new(ln, "cannot mix 'when' rules with 'fixed'"));
            }
            let names: Vec<&str> = rest.split_whitespace().collect();
            simple = Some(MaskingProcess::FixedSubset(resolve_atoms(&names, table, ln)?));
        } else if let Some(rest) = l.strip_prefix("coin") {
            if !rules.is_empty() {
                return Err(ParseError::new(ln, "cannot mix 'when' rules with 'coin'"));
            }
            let p = parse_rational(rest.trim(), ln)?;
            if p.is_negative() || p > BigRational::one() {
                return Err(ParseError::new(ln, format!("coin probability {p} outside [0, 1]")));
            }
            simple = Some(MaskingProcess::IndependentCoin(p));
        } else if let Some(rest) = l.strip_prefix("when ") {
            let (cond_str, tail) = rest
                .split_once(" hide ")
                .ok_or_else(|| ParseError::new(ln, "expected 'when <formula> hide a b with p'"))?;
            let (atoms_str, prob_str) = tail
                .rsplit_once(" with ")
                .ok_or_else(|| ParseError::new(ln, "expected 'with <prob>' at end of rule"))?;
            let mut scratch = table.clone();
            let condition = crate::logic::parse_formula_at(cond_str, &mut scratch, ln)?;
            if scratch.len() != table.len() {
                return Err(ParseError::new(ln, "mask condition mentions unknown atoms"));
            }
            let names: Vec<&str> = atoms_str.split_whitespace().collect();
            let hidden = resolve_atoms(&names, table, ln)?;
            let prob = parse_rational(prob_str, ln)?;
            if prob.is_negative() || prob > BigRational::one() {
                return Err(ParseError::new(ln, format!("rule probability {prob} outside [0, 1]")));
            }
            rules.push(MaskRule { condition, hidden, prob });
        } else {
            return Err(ParseError::new(ln, format!("unrecognized mask line {l:?}")));
        }
    }
    if let Some(m) = simple {
        return Ok(m);
    }
    if rules.is_empty() {
        return Err(ParseError::new(1, "empty mask file"));
    }
    Ok(MaskingProcess::ValueDependent(rules))
}

/// Scene sample file: header `atoms: a b c`, then one row per scene over
/// `{0,1,*}`, one character per atom.
pub fn parse_scenes(text: &str) -> Result<(Vec<ObscuredScene>, AtomTable), ParseError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| ParseError::new(1, "empty scene file"))?;
    let table = parse_atom_header(header, hline)?;
    let n = table.len();
    let mut scenes = Vec::new();
    for (ln, l) in lines {
        let row = l.trim();
        if row.chars().count() != n {
            return Err(ParseError::new(ln, format!("expected {n} entries, got {}", row.chars().count())));
        }
        let mut values = Vec::with_capacity(n);
        for c in row.chars() {
            values.push(
                Ternary::from_char(c)
                    .ok_or_else(|| ParseError::new(ln, format!("bad entry {c:?}")))?,
            );
        }
        scenes.push(ObscuredScene::new(values));
    }
    Ok((scenes, table))
}

pub fn print_scenes(scenes: &[ObscuredScene], table: &AtomTable) -> String {
    let mut out = format!("atoms: {}\n", table.names().join(" "));
    for s in scenes {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn two_atom_uniform() -> ExplicitDistribution {
        ExplicitDistribution::uniform_over_all(2).unwrap()
    }

    #[test]
    fn distribution_validates_total() {
        let bad = ExplicitDistribution::new(vec![(Scene::from_bits(1, 0), ratio(1, 2))]);
        assert!(matches!(bad, Err(DistError::BadTotal(_))));
        let dup = ExplicitDistribution::new(vec![
            (Scene::from_bits(1, 0), ratio(1, 2)),
            (Scene::from_bits(1, 0), ratio(1, 2)),
        ]);
        assert!(matches!(dup, Err(DistError::DuplicateScene)));
    }

    #[test]
    fn sample_count_zero_is_empty() {
        let d = two_atom_uniform();
        let s = sample(&d, &MaskingProcess::hide_nothing(), 0, 7).unwrap();
        assert!(s.scenes.is_empty());
    }

    #[test]
    fn fixed_empty_mask_reveals_everything() {
        let d = two_atom_uniform();
        let s = sample(&d, &MaskingProcess::hide_nothing(), 50, 3).unwrap();
        assert!(s.scenes.iter().all(|rho| rho.is_total()));
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let d = two_atom_uniform();
        let m = MaskingProcess::coin(1, 3);
        let a = sample(&d, &m, 100, 42).unwrap();
        let b = sample(&d, &m, 100, 42).unwrap();
        let c = sample(&d, &m, 100, 43).unwrap();
        assert_eq!(a.scenes, b.scenes);
        assert_ne!(a.scenes, c.scenes);
    }

    #[test]
    fn coin_half_hides_about_half() {
        // Law-of-large-numbers check: N=4, 10^4 draws, tolerance 0.02.
        let d = ExplicitDistribution::uniform_over_all(4).unwrap();
        let m = MaskingProcess::coin(1, 2);
        let s = sample(&d, &m, 10_000, 2024).unwrap();
        let hidden: usize = s.scenes.iter().map(|r| r.hidden_count()).sum();
        let frac = hidden as f64 / (4.0 * 10_000.0);
        assert!((frac - 0.5).abs() < 0.02, "hidden fraction {frac}");
    }

    #[test]
    fn masked_samples_stay_consistent() {
        // Masks never lie: re-deriving the underlying scene draw with the
        // same seed, every sampled obscured scene must be consistent.
        let d = two_atom_uniform();
        let m = MaskingProcess::ValueDependent(vec![MaskRule {
            condition: Formula::Atom(AtomId(0)),
            hidden: [AtomId(0)].into_iter().collect(),
            prob: ratio(3, 4),
        }]);
        let s = sample(&d, &m, 200, 11).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for rho in &s.scenes {
            let x = draw_scene(&d, &mut rng).clone();
            let replayed = m.apply(&x, &mut rng).unwrap();
            assert_eq!(rho, &replayed);
            assert!(rho.consistent_with(&x));
        }
    }

    #[test]
    fn validity_of_tautology_and_contradiction() {
        let d = two_atom_uniform();
        let a = Formula::Atom(AtomId(0));
        let taut = Formula::or(vec![a.clone(), Formula::not(a.clone())]);
        let contra = Formula::and(vec![a.clone(), Formula::not(a)]);
        assert!(validity(&d, &taut).unwrap().is_one());
        assert!(validity(&d, &contra).unwrap().is_zero());
    }

    #[test]
    fn validity_weighted_example() {
        // [2a - 3b >= 0] is true on exactly half of the four scenes.
        let d = two_atom_uniform();
        let f = Formula::threshold(
            vec![(2, Formula::Atom(AtomId(0))), (-3, Formula::Atom(AtomId(1)))],
            0,
        )
        .unwrap();
        assert_eq!(validity(&d, &f).unwrap(), ratio(1, 2));
    }

    #[test]
    fn concealment_nothing_hidden_is_one() {
        let d = two_atom_uniform();
        let f = Formula::Atom(AtomId(0));
        let c = concealment(&d, &MaskingProcess::hide_nothing(), &[f]).unwrap();
        assert!(c.falsifiable);
        assert!(c.eta.is_one());
    }

    #[test]
    fn concealment_hide_all_is_zero() {
        let d = two_atom_uniform();
        let f = Formula::Atom(AtomId(0));
        let m = MaskingProcess::FixedSubset([AtomId(0)].into_iter().collect());
        let c = concealment(&d, &m, &[f]).unwrap();
        assert!(c.falsifiable);
        assert!(c.eta.is_zero());
    }

    #[test]
    fn concealment_coin_half_on_k_clause_is_half_pow_k() {
        // A clause over k atoms under coin(1/2): witnessed on a falsifying
        // scene exactly when all k atoms are revealed.
        for k in 1..=4usize {
            let d = ExplicitDistribution::uniform_over_all(k).unwrap();
            let clause = Formula::or((0..k).map(|i| Formula::Atom(AtomId(i as u32))).collect());
            let c = concealment(&d, &MaskingProcess::coin(1, 2), &[clause]).unwrap();
            assert!(c.falsifiable);
            assert_eq!(c.eta, ratio(1, 1 << k), "k = {k}");
        }
    }

    #[test]
    fn concealment_unfalsifiable_class_flags() {
        let d = two_atom_uniform();
        let a = Formula::Atom(AtomId(0));
        let taut = Formula::or(vec![a.clone(), Formula::not(a)]);
        let c = concealment(&d, &MaskingProcess::coin(1, 2), &[taut]).unwrap();
        assert!(!c.falsifiable);
        assert!(c.eta.is_one());
    }

    #[test]
    fn rate_of_tautology_is_zero() {
        let d = two_atom_uniform();
        let a = Formula::Atom(AtomId(0));
        let taut = Formula::or(vec![a.clone(), Formula::not(a)]);
        assert!(counterexample_rate(&d, &MaskingProcess::coin(1, 2), &taut)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn rate_without_masking_is_one_minus_validity() {
        let d = two_atom_uniform();
        let f = Formula::and(vec![Formula::Atom(AtomId(0)), Formula::Atom(AtomId(1))]);
        let rate = counterexample_rate(&d, &MaskingProcess::hide_nothing(), &f).unwrap();
        let v = validity(&d, &f).unwrap();
        assert_eq!(rate, BigRational::one() - v);
    }

    #[test]
    fn estimate_only_error_beyond_limit() {
        let n = EXACT_ENUM_LIMIT + 1;
        let scenes = vec![Scene::new(vec![false; n]), Scene::new(vec![true; n])];
        let d = ExplicitDistribution::uniform(scenes).unwrap();
        let wide = Formula::or((0..n).map(|i| Formula::Atom(AtomId(i as u32))).collect());
        let err = counterexample_rate(&d, &MaskingProcess::coin(1, 2), &wide);
        assert!(matches!(err, Err(DistError::EstimateOnly(_, _))));
        // The Monte Carlo route still works; the true rate here is 2^-18.
        let est =
            counterexample_rate_estimate(&d, &MaskingProcess::coin(1, 2), &wide, 2000, 5).unwrap();
        assert!(est.value < 0.01);
    }

    #[test]
    fn distribution_file_round_trip() {
        let src = "atoms: a b\n1/4 10\n3/4 01\n";
        let (d, t) = parse_distribution(src).unwrap();
        assert_eq!(d.atom_count(), 2);
        assert_eq!(print_distribution(&d, &t), src);
        assert!(parse_distribution("atoms: a\n1/2 0\n").is_err()); // total 1/2
        assert!(parse_distribution("atoms: a\n1 00\n").is_err()); // width
    }

    #[test]
    fn mask_file_variants() {
        let t = AtomTable::from_names(["a", "b", "c"]).unwrap();
        assert_eq!(
            parse_mask("fixed a c", &t).unwrap(),
            MaskingProcess::FixedSubset([AtomId(0), AtomId(2)].into_iter().collect())
        );
        assert_eq!(parse_mask("fixed", &t).unwrap(), MaskingProcess::hide_nothing());
        assert_eq!(parse_mask("coin 1/2", &t).unwrap(), MaskingProcess::coin(1, 2));
        let m = parse_mask("when a & b hide c with 3/4\nwhen a hide a b with 1", &t).unwrap();
        match m {
            MaskingProcess::ValueDependent(rules) => {
                assert_eq!(rules.len(), 2);
                assert_eq!(rules[0].prob, ratio(3, 4));
            }
            other => panic!("expected rules, got {other:?}"),
        }
        assert!(parse_mask("when d hide a with 1", &t).is_err());
        assert!(parse_mask("coin 3/2", &t).is_err());
    }

    #[test]
    fn scene_file_round_trip() {
        let src = "atoms: a b c\n10*\n011\n";
        let (scenes, t) = parse_scenes(src).unwrap();
        assert_eq!(scenes.len(), 2);
        assert_eq!(scenes[0].get(AtomId(2)), Some(Ternary::Hidden));
        assert_eq!(print_scenes(&scenes, &t), src);
        assert!(parse_scenes("atoms: a\n2\n").is_err());
    }

    #[test]
    fn formula_text_reusable_in_mask_conditions() {
        let mut t = AtomTable::new();
        let f = parse_formula("a -> b", &mut t).unwrap();
        assert_eq!(f.atoms().len(), 2);
    }
}
