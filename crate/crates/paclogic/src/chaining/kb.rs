//! Horn rule schemas, propositionalization over a finite domain, and the
//! knowledge-base file format.
//!
//! A schema like `hit(X,Y) & fragile(X) => broken(X)` is ground by
//! substituting every combination of domain constants for its variables
//! (identifiers starting with an uppercase letter). The resulting ground
//! rules keep a pointer to their schema and substitution for display.

use std::collections::{BTreeSet, HashMap};

use crate::error::{ChainError, ParseError};
use crate::logic::{horn_to_formula, AtomId, AtomTable, Formula};

/// A term in a rule schema: a variable or a domain constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(String),
}

/// An atom pattern `pred(t1, ..., tk)` appearing in a schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomPattern {
    pub pred: String,
    pub args: Vec<Term>,
}

impl AtomPattern {
    fn vars(&self) -> impl Iterator<Item = &String> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        })
    }

    fn ground_name(&self, subst: &HashMap<&str, &str>) -> String {
        if self.args.is_empty() {
            return self.pred.clone();
        }
        let args: Vec<&str> = self
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => subst[v.as_str()],
                Term::Const(c) => c.as_str(),
            })
            .collect();
        format!("{}({})", self.pred, args.join(","))
    }
}

/// A function-free Horn rule schema with implicitly universally quantified
/// variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSchema {
    pub body: Vec<AtomPattern>,
    pub head: AtomPattern,
}

impl RuleSchema {
    /// Variables in first-appearance order (body first, then head).
    pub fn variables(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for pat in self.body.iter().chain(std::iter::once(&self.head)) {
            for v in pat.vars() {
                if !seen.contains(v) {
                    seen.push(v.clone());
                }
            }
        }
        seen
    }

    /// Display form, e.g. `crushed(X) & fragile(X) => broken(X)`.
    pub fn display(&self) -> String {
        let pat = |p: &AtomPattern| {
            if p.args.is_empty() {
                p.pred.clone()
            } else {
                let args: Vec<String> = p
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => v.clone(),
                        Term::Const(c) => c.clone(),
                    })
                    .collect();
                format!("{}({})", p.pred, args.join(","))
            }
        };
        let body: Vec<String> = self.body.iter().map(&pat).collect();
        format!("{} => {}", body.join(" & "), pat(&self.head))
    }
}

/// A ground Horn rule with provenance for display.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundRule {
    pub body: Vec<AtomId>,
    pub head: AtomId,
    pub schema: usize,
    /// Variable bindings in schema variable order.
    pub subst: Vec<(String, String)>,
}

impl GroundRule {
    /// Threshold encoding of the rule as an implication formula.
    pub fn to_formula(&self) -> Formula {
        horn_to_formula(&self.body, self.head)
    }
}

/// A ground Horn knowledge base: facts plus an ordered rule list. Rule order
/// (schema order, then substitution order) is the fixed ordering used by the
/// search.
#[derive(Debug, Clone)]
pub struct HornKb {
    pub facts: BTreeSet<AtomId>,
    pub rules: Vec<GroundRule>,
    pub schemas: Vec<RuleSchema>,
    head_index: HashMap<AtomId, Vec<usize>>,
}

impl HornKb {
    pub fn new(facts: BTreeSet<AtomId>, rules: Vec<GroundRule>, schemas: Vec<RuleSchema>) -> Self {
        let mut head_index: HashMap<AtomId, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            head_index.entry(r.head).or_default().push(i);
        }
        HornKb { facts, rules, schemas, head_index }
    }

    /// Indices of rules with the given head, in rule order.
    pub fn rules_with_head(&self, atom: AtomId) -> &[usize] {
        self.head_index.get(&atom).map_or(&[], |v| v.as_slice())
    }

    /// Display text for a ground rule: schema plus substitution, e.g.
    /// `crushed(X) & fragile(X) => broken(X) / X=sculpture`.
    pub fn rule_display(&self, rule: usize) -> String {
        let r = &self.rules[rule];
        let schema = &self.schemas[r.schema];
        if r.subst.is_empty() {
            schema.display()
        } else {
            let binds: Vec<String> = r.subst.iter().map(|(v, c)| format!("{v}={c}")).collect();
            format!("{} / {}", schema.display(), binds.join(", "))
        }
    }

    /// A KB augmented with extra facts (used to replay learning runs).
    pub fn with_extra_facts(&self, extra: impl IntoIterator<Item = AtomId>) -> HornKb {
        let mut facts = self.facts.clone();
        facts.extend(extra);
        HornKb::new(facts, self.rules.clone(), self.schemas.clone())
    }
}

/// Grounds rule schemas and facts over a finite domain.
///
/// The atom table is populated with the full vocabulary: every grounding of
/// every predicate mentioned in the schemas or facts, predicates in
/// first-appearance order and argument tuples in domain order. Groundings
/// that would put the head in its own body are dropped; duplicate body atoms
/// within one grounding are collapsed.
pub fn ground(
    schemas: &[RuleSchema],
    facts: &[AtomPattern],
    domain: &[String],
) -> Result<(HornKb, AtomTable), ChainError> {
    // Collect predicate signatures in first-appearance order.
    let mut sigs: Vec<(String, usize)> = Vec::new();
    let mut arity: HashMap<String, usize> = HashMap::new();
    let mut note = |pat: &AtomPattern| -> Result<(), ChainError> {
        match arity.get(&pat.pred) {
            Some(&k) if k != pat.args.len() => Err(ChainError::ArityMismatch {
                name: pat.pred.clone(),
                got: pat.args.len(),
                want: k,
            }),
            Some(_) => Ok(()),
            None => {
                arity.insert(pat.pred.clone(), pat.args.len());
                sigs.push((pat.pred.clone(), pat.args.len()));
                Ok(())
            }
        }
    };
    for s in schemas {
        for pat in s.body.iter().chain(std::iter::once(&s.head)) {
            note(pat)?;
        }
    }
    for f in facts {
        note(f)?;
    }

    if domain.is_empty() {
        let needs_domain = sigs.iter().any(|(_, k)| *k > 0);
        if needs_domain {
            return Err(ChainError::EmptyDomain);
        }
    }

    // Intern the full vocabulary.
    let mut table = AtomTable::new();
    for (pred, k) in &sigs {
        for combo in tuples(domain, *k) {
            let name = if *k == 0 {
                pred.clone()
            } else {
                format!("{}({})", pred, combo.join(","))
            };
            table.intern(&name);
        }
    }

    // Ground the facts.
    let mut fact_ids = BTreeSet::new();
    for f in facts {
        for t in &f.args {
            match t {
                Term::Var(v) => {
                    return Err(ChainError::BadParameter(format!(
                        "fact {} contains variable {v}",
                        f.pred
                    )))
                }
                Term::Const(c) => {
                    if !domain.iter().any(|d| d == c) {
                        return Err(ChainError::UnknownAtom(format!(
                            "constant {c:?} not in domain"
                        )));
                    }
                }
            }
        }
        let name = f.ground_name(&HashMap::new());
        let id = table
            .lookup(&name)
            .ok_or_else(|| ChainError::UnknownAtom(name.clone()))?;
        fact_ids.insert(id);
    }

    // Ground the rules: schema order, then substitutions with the first
    // variable varying slowest.
    let mut rules = Vec::new();
    for (si, schema) in schemas.iter().enumerate() {
        let vars = schema.variables();
        for combo in tuples(domain, vars.len()) {
            let subst: HashMap<&str, &str> = vars
                .iter()
                .map(String::as_str)
                .zip(combo.iter().map(String::as_str))
                .collect();
            let head_name = schema.head.ground_name(&subst);
            let head = table.lookup(&head_name).expect("vocabulary covers heads");
            let mut body = Vec::new();
            for pat in &schema.body {
                let name = pat.ground_name(&subst);
                let id = table.lookup(&name).expect("vocabulary covers bodies");
                if !body.contains(&id) {
                    body.push(id);
                }
            }
            if body.contains(&head) {
                continue;
            }
            rules.push(GroundRule {
                body,
                head,
                schema: si,
                subst: vars
                    .iter()
                    .cloned()
                    .zip(combo.iter().cloned())
                    .collect(),
            });
        }
    }

    Ok((HornKb::new(fact_ids, rules, schemas.to_vec()), table))
}

/// All k-tuples over `domain`, first coordinate varying slowest.
fn tuples(domain: &[String], k: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * domain.len());
        for prefix in &out {
            for c in domain {
                let mut t = prefix.clone();
                t.push(c.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

// ---------------------------------------------------------------------------
// KB file format
// ---------------------------------------------------------------------------

fn parse_pattern(src: &str, line: usize) -> Result<AtomPattern, ParseError> {
    let src = src.trim();
    let bad = |msg: &str| ParseError::new(line, format!("{msg} in atom {src:?}"));
    let ident_ok = |s: &str| {
        !s.is_empty()
            && s.chars().next().unwrap().is_ascii_alphabetic()
            && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
    };
    let term = |s: &str| -> Term {
        if s.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
            Term::Var(s.to_string())
        } else {
            Term::Const(s.to_string())
        }
    };
    match src.split_once('(') {
        None => {
            if !ident_ok(src) {
                return Err(bad("bad predicate name"));
            }
            Ok(AtomPattern { pred: src.to_string(), args: Vec::new() })
        }
        Some((pred, rest)) => {
            let pred = pred.trim();
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| bad("missing closing parenthesis"))?;
            if !ident_ok(pred) {
                return Err(bad("bad predicate name"));
            }
            let mut args = Vec::new();
            for part in inner.split(',') {
                let part = part.trim();
                if !ident_ok(part) {
                    return Err(bad("bad argument"));
                }
                args.push(term(part));
            }
            Ok(AtomPattern { pred: pred.to_string(), args })
        }
    }
}

/// KB file:
///
/// ```text
/// domain sculpture crate floor sidewalk
/// rule crushed(X) & fragile(X) => broken(X)
/// fact crushed(sculpture)
/// ```
pub fn parse_kb(text: &str) -> Result<(HornKb, AtomTable), ParseError> {
    let mut domain: Vec<String> = Vec::new();
    let mut schemas: Vec<RuleSchema> = Vec::new();
    let mut facts: Vec<AtomPattern> = Vec::new();
    for (ln, l) in text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
    {
        if let Some(rest) = l.strip_prefix("domain") {
            for c in rest.split_whitespace() {
                if c.chars().next().is_some_and(|ch| ch.is_ascii_uppercase()) {
                    return Err(ParseError::new(ln, format!("domain constant {c:?} must not start uppercase")));
                }
                domain.push(c.to_string());
            }
        } else if let Some(rest) = l.strip_prefix("rule ") {
            let (body_str, head_str) = rest
                .split_once("=>")
                .ok_or_else(|| ParseError::new(ln, "rule needs '=>'"))?;
            let head = parse_pattern(head_str, ln)?;
            let mut body = Vec::new();
            for part in body_str.split('&') {
                body.push(parse_pattern(part, ln)?);
            }
            if body.is_empty() {
                return Err(ParseError::new(ln, "rule body is empty; use a fact"));
            }
            schemas.push(RuleSchema { body, head });
        } else if let Some(rest) = l.strip_prefix("fact ") {
            let pat = parse_pattern(rest, ln)?;
            if pat.vars().next().is_some() {
                return Err(ParseError::new(ln, "facts must be ground"));
            }
            facts.push(pat);
        } else {
            return Err(ParseError::new(ln, format!("unrecognized KB line {l:?}")));
        }
    }
    ground(&schemas, &facts, &domain).map_err(|e| ParseError::new(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaining::SCULPTURE_KB;

    #[test]
    fn grounding_counts() {
        let (kb, table) = parse_kb(SCULPTURE_KB).unwrap();
        // One single-variable schema over 4 constants plus one two-variable
        // schema: 4 + 16 groundings.
        assert_eq!(kb.rules.len(), 4 + 16);
        // Vocabulary: crushed, fragile, broken, hard unary (4 each) and hit
        // binary (16).
        assert_eq!(table.len(), 4 * 4 + 16);
        assert_eq!(kb.facts.len(), 2);
    }

    #[test]
    fn variable_free_schema_grounds_to_itself() {
        let (kb, _) = parse_kb("domain a\nrule p(a) => q(a)\n").unwrap();
        assert_eq!(kb.rules.len(), 1);
        assert!(kb.rules[0].subst.is_empty());
        assert_eq!(kb.rule_display(0), "p(a) => q(a)");
    }

    #[test]
    fn rule_display_carries_substitution() {
        let (kb, table) = parse_kb(SCULPTURE_KB).unwrap();
        let broken = table.lookup("broken(sculpture)").unwrap();
        let first = kb.rules_with_head(broken)[0];
        assert_eq!(
            kb.rule_display(first),
            "crushed(X) & fragile(X) => broken(X) / X=sculpture"
        );
    }

    #[test]
    fn head_index_respects_rule_order() {
        let (kb, table) = parse_kb(SCULPTURE_KB).unwrap();
        let broken = table.lookup("broken(sculpture)").unwrap();
        let rules = kb.rules_with_head(broken);
        // Schema order first: the crushed/fragile rule precedes all hit
        // groundings.
        assert_eq!(kb.rules[rules[0]].schema, 0);
        assert!(rules.len() == 1 + 4);
    }

    #[test]
    fn arity_mismatch_rejected() {
        let err = parse_kb("domain a\nrule p(X) & p(X,X) => q(X)\n");
        assert!(err.is_err());
    }

    #[test]
    fn empty_domain_with_variables_rejected() {
        let err = parse_kb("rule p(X) => q(X)\n");
        assert!(err.is_err());
        // Zero-arity KBs work without a domain.
        let (kb, table) = parse_kb("rule rain & cold => snow\nfact rain\n").unwrap();
        assert_eq!(kb.rules.len(), 1);
        assert_eq!(table.len(), 3);
    }

    #[test]
    fn facts_must_use_domain_constants() {
        let err = parse_kb("domain a\nrule p(X) => q(X)\nfact p(zebra)\n");
        assert!(err.is_err());
    }

    #[test]
    fn self_supporting_groundings_dropped() {
        // p(X) & q(X,Y) => p(Y) grounds to rules with head p(c); the X=Y=c
        // grounding would put the head in its own body and is dropped.
        let (kb, _) = parse_kb("domain a b\nrule p(X) & q(X,Y) => p(Y)\n").unwrap();
        assert_eq!(kb.rules.len(), 2);
    }

    #[test]
    fn ground_rule_formula_encoding() {
        let (kb, _) = parse_kb("domain a\nrule p(a) & q(a) => r(a)\n").unwrap();
        let f = kb.rules[0].to_formula();
        // Falsified only when the body holds and the head fails.
        use crate::logic::Scene;
        for bits in 0..8u64 {
            let x = Scene::from_bits(3, bits);
            let body_true = x.values()[0] && x.values()[1];
            let head_true = x.values()[2];
            assert_eq!(f.eval(&x).unwrap(), !body_true || head_true);
        }
    }
}
