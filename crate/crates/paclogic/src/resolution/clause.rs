//! Clauses, CNFs, clause witnessing, and the DIMACS file format.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{ParseError, ResolutionError};
use crate::logic::{AtomId, AtomTable, Formula, ObscuredScene, Ternary};

/// A literal: an atom with a polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: AtomId,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: AtomId) -> Self {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: AtomId) -> Self {
        Literal { atom, positive: false }
    }

    pub fn negated(self) -> Self {
        Literal { atom: self.atom, positive: !self.positive }
    }

    /// Three-valued value of the literal under an obscured scene.
    pub fn value(self, rho: &ObscuredScene) -> Ternary {
        match rho.get(self.atom) {
            Some(Ternary::Hidden) | None => Ternary::Hidden,
            Some(v) => {
                let b = v == Ternary::True;
                Ternary::from_bool(b == self.positive)
            }
        }
    }

    pub fn display(self, table: &AtomTable) -> String {
        if self.positive {
            table.name(self.atom).to_string()
        } else {
            format!("~{}", table.name(self.atom))
        }
    }
}

/// A clause: a set of literals with no atom in both polarities. The empty
/// clause is allowed (and unsatisfiable).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clause {
    lits: BTreeMap<AtomId, bool>,
}

impl Clause {
    pub fn empty() -> Self {
        Clause::default()
    }

    pub fn from_literals(
        lits: impl IntoIterator<Item = Literal>,
    ) -> Result<Self, ResolutionError> {
        let mut map = BTreeMap::new();
        for l in lits {
            match map.insert(l.atom, l.positive) {
                Some(p) if p != l.positive => {
                    return Err(ResolutionError::BothPolarities(l.atom.0))
                }
                _ => {}
            }
        }
        Ok(Clause { lits: map })
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.lits
            .iter()
            .map(|(&atom, &positive)| Literal { atom, positive })
    }

    pub fn polarity_of(&self, atom: AtomId) -> Option<bool> {
        self.lits.get(&atom).copied()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.polarity_of(lit.atom) == Some(lit.positive)
    }

    pub fn mentions(&self, atom: AtomId) -> bool {
        self.lits.contains_key(&atom)
    }

    /// The clause extended with `lit`; errors if the opposite polarity is
    /// already present.
    pub fn with(&self, lit: Literal) -> Result<Clause, ResolutionError> {
        let mut out = self.clone();
        match out.lits.insert(lit.atom, lit.positive) {
            Some(p) if p != lit.positive => Err(ResolutionError::BothPolarities(lit.atom.0)),
            _ => Ok(out),
        }
    }

    /// The clause with `atom` removed entirely.
    pub fn without(&self, atom: AtomId) -> Clause {
        let mut out = self.clone();
        out.lits.remove(&atom);
        out
    }

    pub fn is_superset_of(&self, other: &Clause) -> bool {
        other
            .lits
            .iter()
            .all(|(a, p)| self.lits.get(a) == Some(p))
    }

    /// Witnessed false iff every literal is witnessed false; the empty
    /// clause is witnessed false on every obscured scene.
    pub fn witnessed_false(&self, rho: &ObscuredScene) -> bool {
        self.literals().all(|l| l.value(rho) == Ternary::False)
    }

    /// OR-of-literals threshold encoding (weights 1, bound 1), negative
    /// literals as negated atoms.
    pub fn to_formula(&self) -> Formula {
        Formula::or(
            self.literals()
                .map(|l| {
                    if l.positive {
                        Formula::Atom(l.atom)
                    } else {
                        Formula::not(Formula::Atom(l.atom))
                    }
                })
                .collect(),
        )
    }

    pub fn display(&self, table: &AtomTable) -> String {
        let parts: Vec<String> = self.literals().map(|l| l.display(table)).collect();
        format!("({})", parts.join(" | "))
    }
}

/// A CNF: an ordered list of clauses over `n_atoms` atoms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cnf {
    pub clauses: Vec<Clause>,
    pub n_atoms: usize,
}

impl Cnf {
    pub fn new(clauses: Vec<Clause>, n_atoms: usize) -> Self {
        Cnf { clauses, n_atoms }
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    /// AND-of-clauses formula; the empty CNF is the vacuous (true) formula.
    pub fn to_formula(&self) -> Formula {
        Formula::and(self.clauses.iter().map(Clause::to_formula).collect())
    }

    pub fn display(&self, table: &AtomTable) -> String {
        let parts: Vec<String> = self.clauses.iter().map(|c| c.display(table)).collect();
        parts.join(" & ")
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .literals()
            .map(|l| {
                if l.positive {
                    format!("{}", l.atom.0 + 1)
                } else {
                    format!("-{}", l.atom.0 + 1)
                }
            })
            .collect();
        write!(f, "({})", parts.join(" "))
    }
}

// ---------------------------------------------------------------------------
// DIMACS
// ---------------------------------------------------------------------------

/// Parses a DIMACS CNF file. Atom names default to `x1..xN` and may be
/// overridden with naming comments `c atom <id> <name>` before or after the
/// header. Clauses are signed-id sequences terminated by `0`, possibly
/// spanning lines. Clauses with an atom in both polarities are rejected.
pub fn parse_dimacs(text: &str) -> Result<(Cnf, AtomTable), ParseError> {
    let mut n_atoms: Option<usize> = None;
    let mut n_clauses: Option<usize> = None;
    let mut names: BTreeMap<usize, String> = BTreeMap::new();
    let mut pending: Vec<Literal> = Vec::new();
    let mut clauses: Vec<Clause> = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('c') {
            let parts: Vec<&str> = comment.split_whitespace().collect();
            if parts.len() == 3 && parts[0] == "atom" {
                let id: usize = parts[1]
                    .parse()
                    .map_err(|_| ParseError::new(ln, "bad atom id in naming comment"))?;
                if id == 0 {
                    return Err(ParseError::new(ln, "atom ids are 1-based"));
                }
                names.insert(id, parts[2].to_string());
            }
            continue;
        }
        if let Some(header) = line.strip_prefix('p') {
            if n_atoms.is_some() {
                return Err(ParseError::new(ln, "duplicate header"));
            }
            let parts: Vec<&str> = header.split_whitespace().collect();
            if parts.len() != 3 || parts[0] != "cnf" {
                return Err(ParseError::new(ln, "expected 'p cnf <atoms> <clauses>'"));
            }
            n_atoms = Some(
                parts[1]
                    .parse()
                    .map_err(|_| ParseError::new(ln, "bad atom count"))?,
            );
            n_clauses = Some(
                parts[2]
                    .parse()
                    .map_err(|_| ParseError::new(ln, "bad clause count"))?,
            );
            continue;
        }
        let Some(n) = n_atoms else {
            return Err(ParseError::new(ln, "clause before 'p cnf' header"));
        };
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| ParseError::new(ln, format!("bad literal {tok:?}")))?;
            if v == 0 {
                let clause = Clause::from_literals(pending.drain(..))
                    .map_err(|e| ParseError::new(ln, e.to_string()))?;
                clauses.push(clause);
            } else {
                let id = v.unsigned_abs() as usize;
                if id > n {
                    return Err(ParseError::new(
                        ln,
                        format!("literal {v} exceeds atom count {n}"),
                    ));
                }
                pending.push(Literal { atom: AtomId(id as u32 - 1), positive: v > 0 });
            }
        }
    }

    let n = n_atoms.ok_or_else(|| ParseError::new(1, "missing 'p cnf' header"))?;
    if !pending.is_empty() {
        return Err(ParseError::new(0, "unterminated clause at end of file"));
    }
    if let Some(m) = n_clauses {
        if clauses.len() != m {
            return Err(ParseError::new(
                0,
                format!("header declares {m} clauses, found {}", clauses.len()),
            ));
        }
    }
    for id in names.keys() {
        if *id > n {
            return Err(ParseError::new(0, format!("naming comment for atom {id} beyond count {n}")));
        }
    }
    let table = AtomTable::from_names((1..=n).map(|i| {
        names
            .get(&i)
            .cloned()
            .unwrap_or_else(|| format!("x{i}"))
    }))
    .map_err(|e| ParseError::new(0, e.to_string()))?;
    Ok((Cnf::new(clauses, n), table))
}

pub fn print_dimacs(cnf: &Cnf, table: &AtomTable) -> String {
    let mut out = String::new();
    for (i, name) in table.names().iter().enumerate() {
        let default = format!("x{}", i + 1);
        if *name != default {
            out.push_str(&format!("c atom {} {}\n", i + 1, name));
        }
    }
    out.push_str(&format!("p cnf {} {}\n", cnf.n_atoms, cnf.clauses.len()));
    for c in &cnf.clauses {
        let mut parts: Vec<String> = c
            .literals()
            .map(|l| {
                if l.positive {
                    format!("{}", l.atom.0 + 1)
                } else {
                    format!("-{}", l.atom.0 + 1)
                }
            })
            .collect();
        parts.push("0".into());
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a bare clause given as signed 1-based ids, e.g. `"1 -3"`. An empty
/// string (or a lone `0`) is the empty clause.
pub fn parse_clause_arg(s: &str, n_atoms: usize) -> Result<Clause, ParseError> {
    let mut lits = Vec::new();
    for tok in s.split_whitespace() {
        let v: i64 = tok
            .parse()
            .map_err(|_| ParseError::new(1, format!("bad literal {tok:?}")))?;
        if v == 0 {
            continue;
        }
        let id = v.unsigned_abs() as usize;
        if id > n_atoms {
            return Err(ParseError::new(1, format!("literal {v} exceeds atom count {n_atoms}")));
        }
        lits.push(Literal { atom: AtomId(id as u32 - 1), positive: v > 0 });
    }
    Clause::from_literals(lits).map_err(|e| ParseError::new(1, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{ObscuredScene, PartialEvalResult};

    fn lit(v: i64) -> Literal {
        Literal { atom: AtomId(v.unsigned_abs() as u32 - 1), positive: v > 0 }
    }

    fn clause(vs: &[i64]) -> Clause {
        Clause::from_literals(vs.iter().map(|&v| lit(v))).unwrap()
    }

    fn rho(spec: &str) -> ObscuredScene {
        ObscuredScene::new(spec.chars().map(|c| Ternary::from_char(c).unwrap()).collect())
    }

    #[test]
    fn both_polarities_rejected() {
        assert_eq!(
            Clause::from_literals([lit(1), lit(-1)]),
            Err(ResolutionError::BothPolarities(0))
        );
        assert!(clause(&[1]).with(lit(-1)).is_err());
    }

    #[test]
    fn empty_clause_always_witnessed_false() {
        let c = Clause::empty();
        assert!(c.witnessed_false(&rho("***")));
        assert!(c.witnessed_false(&rho("101")));
    }

    #[test]
    fn clause_witnessing_requires_all_literals_false() {
        let c = clause(&[1, -2]);
        assert!(c.witnessed_false(&rho("01*")));
        assert!(!c.witnessed_false(&rho("0**")));
        assert!(!c.witnessed_false(&rho("11*")));
    }

    #[test]
    fn clause_witnessing_agrees_with_threshold_encoding() {
        // The direct literal scan must match partial evaluation of the OR
        // encoding on every obscured scene over three atoms.
        let cases = [clause(&[1]), clause(&[-1, 2]), clause(&[1, -2, 3]), Clause::empty()];
        let mut rhos = Vec::new();
        for a in "01*".chars() {
            for b in "01*".chars() {
                for c in "01*".chars() {
                    rhos.push(rho(&format!("{a}{b}{c}")));
                }
            }
        }
        for c in &cases {
            let f = c.to_formula();
            for r in &rhos {
                assert_eq!(
                    c.witnessed_false(r),
                    f.partial_eval(r) == PartialEvalResult::WitnessedFalse,
                    "clause {c} on {r}"
                );
            }
        }
    }

    #[test]
    fn superset_includes_equality() {
        assert!(clause(&[1, 2]).is_superset_of(&clause(&[1])));
        assert!(clause(&[1]).is_superset_of(&clause(&[1])));
        assert!(!clause(&[1]).is_superset_of(&clause(&[-1])));
        assert!(clause(&[1]).is_superset_of(&Clause::empty()));
    }

    #[test]
    fn dimacs_round_trip() {
        let src = "c atom 1 rain\np cnf 3 2\n1 -2 0\n3 0\n";
        let (cnf, table) = parse_dimacs(src).unwrap();
        assert_eq!(cnf.n_atoms, 3);
        assert_eq!(cnf.clauses.len(), 2);
        assert_eq!(table.name(AtomId(0)), "rain");
        assert_eq!(table.name(AtomId(1)), "x2");
        assert_eq!(print_dimacs(&cnf, &table), src);
    }

    #[test]
    fn dimacs_rejects_malformed_input() {
        assert!(parse_dimacs("1 2 0\n").is_err()); // clause before header
        assert!(parse_dimacs("p cnf 1 1\n2 0\n").is_err()); // out of range
        assert!(parse_dimacs("p cnf 2 1\n1 -1 0\n").is_err()); // tautology
        assert!(parse_dimacs("p cnf 2 2\n1 0\n").is_err()); // count mismatch
        assert!(parse_dimacs("p cnf 2 1\n1\n").is_err()); // unterminated
    }

    #[test]
    fn clause_arg_parsing() {
        assert_eq!(parse_clause_arg("", 3).unwrap(), Clause::empty());
        assert_eq!(parse_clause_arg("0", 3).unwrap(), Clause::empty());
        assert_eq!(parse_clause_arg("1 -3", 3).unwrap(), clause(&[1, -3]));
        assert!(parse_clause_arg("4", 3).is_err());
    }
}
