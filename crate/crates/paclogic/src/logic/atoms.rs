//! Ground atoms, total scenes, and ternary obscured scenes.

use std::collections::HashMap;
use std::fmt;

use crate::error::LogicError;

/// Index of a ground atomic formula, dense in `[0, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub u32);

impl AtomId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A ground atomic formula: a dense id plus a display name such as
/// `broken(sculpture)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub id: AtomId,
    pub name: String,
}

/// Interning table for ground atoms. Ids are dense and names unique.
#[derive(Debug, Clone, Default)]
pub struct AtomTable {
    names: Vec<String>,
    index: HashMap<String, AtomId>,
}

impl AtomTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from names in id order.
    pub fn from_names<I: IntoIterator<Item = S>, S: Into<String>>(
        names: I,
    ) -> Result<Self, LogicError> {
        let mut t = Self::new();
        for n in names {
            t.intern_new(n.into())?;
        }
        Ok(t)
    }

    /// Interns a fresh name; errors if it is already present.
    pub fn intern_new(&mut self, name: String) -> Result<AtomId, LogicError> {
        if self.index.contains_key(&name) {
            return Err(LogicError::DuplicateAtom(name));
        }
        let id = AtomId(self.names.len() as u32);
        self.index.insert(name.clone(), id);
        self.names.push(name);
        Ok(id)
    }

    /// Returns the id for `name`, interning it if new.
    pub fn intern(&mut self, name: &str) -> AtomId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = AtomId(self.names.len() as u32);
        self.index.insert(name.to_owned(), id);
        self.names.push(name.to_owned());
        id
    }

    pub fn lookup(&self, name: &str) -> Option<AtomId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: AtomId) -> &str {
        &self.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Atom> + '_ {
        self.names.iter().enumerate().map(|(i, n)| Atom {
            id: AtomId(i as u32),
            name: n.clone(),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// A total truth assignment to all `N` ground atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scene {
    values: Vec<bool>,
}

impl Scene {
    pub fn new(values: Vec<bool>) -> Self {
        Scene { values }
    }

    /// Scene of `n` atoms with bits taken from the low bits of `bits`
    /// (atom 0 is the least significant bit). Handy in exhaustive tests.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        Scene {
            values: (0..n).map(|i| bits >> i & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, id: AtomId) -> Option<bool> {
        self.values.get(id.index()).copied()
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }
}

/// A value in the three-valued logic of obscured scenes: 0, 1, or `*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ternary {
    False,
    True,
    Hidden,
}

impl Ternary {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Ternary::True
        } else {
            Ternary::False
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Ternary::False => Some(false),
            Ternary::True => Some(true),
            Ternary::Hidden => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Ternary::False => '0',
            Ternary::True => '1',
            Ternary::Hidden => '*',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(Ternary::False),
            '1' => Some(Ternary::True),
            '*' => Some(Ternary::Hidden),
            _ => None,
        }
    }
}

/// A partial assignment: each atom is 0, 1, or hidden (`*`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObscuredScene {
    values: Vec<Ternary>,
}

impl ObscuredScene {
    pub fn new(values: Vec<Ternary>) -> Self {
        ObscuredScene { values }
    }

    /// Fully hidden scene over `n` atoms.
    pub fn all_hidden(n: usize) -> Self {
        ObscuredScene {
            values: vec![Ternary::Hidden; n],
        }
    }

    /// Total obscured scene agreeing with `x` everywhere.
    pub fn from_scene(x: &Scene) -> Self {
        ObscuredScene {
            values: x.values().iter().map(|&b| Ternary::from_bool(b)).collect(),
        }
    }

    /// `x` with the atoms in `hidden` replaced by `*`.
    pub fn from_scene_hiding(x: &Scene, hidden: impl Fn(AtomId) -> bool) -> Self {
        ObscuredScene {
            values: x
                .values()
                .iter()
                .enumerate()
                .map(|(i, &b)| {
                    if hidden(AtomId(i as u32)) {
                        Ternary::Hidden
                    } else {
                        Ternary::from_bool(b)
                    }
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, id: AtomId) -> Option<Ternary> {
        self.values.get(id.index()).copied()
    }

    pub fn values(&self) -> &[Ternary] {
        &self.values
    }

    pub fn hidden_count(&self) -> usize {
        self.values
            .iter()
            .filter(|v| **v == Ternary::Hidden)
            .count()
    }

    pub fn is_total(&self) -> bool {
        self.hidden_count() == 0
    }

    /// Consistency: agreement with `x` on every non-`*` entry.
    pub fn consistent_with(&self, x: &Scene) -> bool {
        self.values.len() == x.len()
            && self
                .values
                .iter()
                .zip(x.values())
                .all(|(v, &b)| v.as_bool().map_or(true, |w| w == b))
    }

    /// `self` refines `other` when it agrees on all of `other`'s non-`*`
    /// entries and may reveal more.
    pub fn refines(&self, other: &ObscuredScene) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(v, w)| match w.as_bool() {
                    Some(b) => v.as_bool() == Some(b),
                    None => true,
                })
    }

    /// All total scenes consistent with this obscured scene, in ascending
    /// bit order of the hidden positions. Intended for small tests.
    pub fn completions(&self) -> Vec<Scene> {
        let hidden: Vec<usize> = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == Ternary::Hidden)
            .map(|(i, _)| i)
            .collect();
        let mut out = Vec::with_capacity(1 << hidden.len());
        for bits in 0u64..(1 << hidden.len()) {
            let mut vals: Vec<bool> = self
                .values
                .iter()
                .map(|v| v.as_bool().unwrap_or(false))
                .collect();
            for (j, &pos) in hidden.iter().enumerate() {
                vals[pos] = bits >> j & 1 == 1;
            }
            out.push(Scene::new(vals));
        }
        out
    }
}

impl fmt::Display for ObscuredScene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.values {
            write!(f, "{}", v.as_char())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_dense_and_unique() {
        let mut t = AtomTable::new();
        let a = t.intern("a");
        let b = t.intern("b");
        assert_eq!(a, AtomId(0));
        assert_eq!(b, AtomId(1));
        assert_eq!(t.intern("a"), a);
        assert_eq!(t.len(), 2);
        assert!(t.intern_new("a".into()).is_err());
    }

    #[test]
    fn consistency_ignores_hidden() {
        let x = Scene::from_bits(3, 0b101);
        let rho = ObscuredScene::new(vec![Ternary::True, Ternary::Hidden, Ternary::True]);
        assert!(rho.consistent_with(&x));
        let bad = ObscuredScene::new(vec![Ternary::False, Ternary::Hidden, Ternary::True]);
        assert!(!bad.consistent_with(&x));
    }

    #[test]
    fn refinement() {
        let rho = ObscuredScene::new(vec![Ternary::True, Ternary::Hidden]);
        let finer = ObscuredScene::new(vec![Ternary::True, Ternary::False]);
        assert!(finer.refines(&rho));
        assert!(!rho.refines(&finer));
        assert!(rho.refines(&rho));
    }

    #[test]
    fn completions_enumerate_hidden_entries() {
        let rho = ObscuredScene::new(vec![Ternary::Hidden, Ternary::True, Ternary::Hidden]);
        let cs = rho.completions();
        assert_eq!(cs.len(), 4);
        assert!(cs.iter().all(|x| rho.consistent_with(x)));
    }
}
