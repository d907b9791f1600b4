//! Partial subgoal dependency graphs: query vertices and weighted threshold
//! vertices, with the EXPLORE / GENERATE / TEST primitives of the backward
//! search.
//!
//! Query vertices are shared (one per atom), so a subgoal reached along two
//! rule bodies is cached rather than re-derived; the depth-first exploration
//! never revisits a vertex within one pass, which keeps circular subgoal
//! chains from looping.

use std::collections::{BTreeSet, HashMap};

use crate::chaining::kb::HornKb;
use crate::chaining::proof::{ChainingProof, Justification, ProofLine};
use crate::logic::AtomId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    /// A subgoal atom. `total_rules` is the number of KB rules with this
    /// head, fixed at creation.
    Query { atom: AtomId, total_rules: usize },
    /// A grounded rule: threshold equal to the body size, `w_plus`/`w_minus`
    /// the positive/negative weight not yet generated as edges.
    Threshold { threshold: i64, w_plus: i64, w_minus: i64, rule: usize },
}

#[derive(Debug, Clone)]
pub struct GraphNode {
    pub kind: NodeKind,
    pub unexplored: bool,
    /// Outgoing edges in generation order, with integer weights.
    pub edges: Vec<(usize, i64)>,
    gen_cursor: usize,
    /// Set once GENERATE has reported this vertex fully explored. A query
    /// vertex can only be judged unsuccessful after that point.
    fully_explored: bool,
}

/// Status of a vertex under a given success set, per the partial-graph
/// success rules (these mirror the threshold witnessing rules).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Unknown,
    Successful,
    Unsuccessful,
}

/// Statuses for every vertex plus the order in which successes were derived;
/// the timestamps give the proof extraction a well-founded derivation order.
#[derive(Debug, Clone)]
pub struct StatusMap {
    pub status: Vec<NodeStatus>,
    time: Vec<u64>,
}

impl StatusMap {
    pub fn of(&self, v: usize) -> NodeStatus {
        self.status[v]
    }
}

/// Outcome of one GENERATE step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generated {
    FullyExplored,
    Edge { target: usize, created: bool },
}

#[derive(Debug, Clone)]
pub struct SubgoalGraph {
    nodes: Vec<GraphNode>,
    atom_nodes: HashMap<AtomId, usize>,
    source: usize,
}

impl SubgoalGraph {
    /// Fresh graph holding only the goal vertex, marked unexplored.
    pub fn new(goal: AtomId, kb: &HornKb) -> Self {
        let node = GraphNode {
            kind: NodeKind::Query { atom: goal, total_rules: kb.rules_with_head(goal).len() },
            unexplored: true,
            edges: Vec::new(),
            gen_cursor: 0,
            fully_explored: false,
        };
        let mut atom_nodes = HashMap::new();
        atom_nodes.insert(goal, 0);
        SubgoalGraph { nodes: vec![node], atom_nodes, source: 0 }
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, v: usize) -> &GraphNode {
        &self.nodes[v]
    }

    pub fn mark(&mut self, v: usize) {
        self.nodes[v].unexplored = true;
    }

    pub fn unmark(&mut self, v: usize) {
        self.nodes[v].unexplored = false;
    }

    pub fn atom_of(&self, v: usize) -> Option<AtomId> {
        match self.nodes[v].kind {
            NodeKind::Query { atom, .. } => Some(atom),
            NodeKind::Threshold { .. } => None,
        }
    }

    /// Least-fixed-point statuses given the atoms already successful (facts
    /// and learned premises).
    ///
    /// A threshold vertex is successful when the weight into successful
    /// children plus `w_minus` plus the negative weights into unknown
    /// children reaches its threshold; it is unsuccessful when the weight
    /// into successful children plus `w_plus` plus the positive weights into
    /// unknown children stays below it. A query vertex is successful when
    /// its atom is in the success set or some child threshold vertex is
    /// successful, and unsuccessful when fully generated with every child
    /// unsuccessful.
    pub fn node_status(&self, successes: &BTreeSet<AtomId>) -> StatusMap {
        let n = self.nodes.len();
        let mut status = vec![NodeStatus::Unknown; n];
        let mut time = vec![0u64; n];
        let mut clock = 0u64;
        loop {
            let mut changed = false;
            for v in 0..n {
                if status[v] != NodeStatus::Unknown {
                    continue;
                }
                let node = &self.nodes[v];
                let new = match &node.kind {
                    NodeKind::Query { atom, .. } => {
                        if successes.contains(atom)
                            || node
                                .edges
                                .iter()
                                .any(|&(t, _)| status[t] == NodeStatus::Successful)
                        {
                            NodeStatus::Successful
                        } else if node.fully_explored
                            && node
                                .edges
                                .iter()
                                .all(|&(t, _)| status[t] == NodeStatus::Unsuccessful)
                        {
                            NodeStatus::Unsuccessful
                        } else {
                            NodeStatus::Unknown
                        }
                    }
                    NodeKind::Threshold { threshold, w_plus, w_minus, .. } => {
                        let mut succ_sum: i128 = 0;
                        let mut unknown_neg: i128 = 0;
                        let mut unknown_pos: i128 = 0;
                        for &(t, w) in &node.edges {
                            match status[t] {
                                NodeStatus::Successful => succ_sum += w as i128,
                                NodeStatus::Unsuccessful => {}
                                NodeStatus::Unknown => {
                                    unknown_neg += (w as i128).min(0);
                                    unknown_pos += (w as i128).max(0);
                                }
                            }
                        }
                        let thr = *threshold as i128;
                        if succ_sum + *w_minus as i128 + unknown_neg >= thr {
                            NodeStatus::Successful
                        } else if succ_sum + *w_plus as i128 + unknown_pos < thr {
                            NodeStatus::Unsuccessful
                        } else {
                            NodeStatus::Unknown
                        }
                    }
                };
                if new != NodeStatus::Unknown {
                    status[v] = new;
                    clock += 1;
                    time[v] = clock;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        StatusMap { status, time }
    }

    /// EXPLORE: the next vertex to work on, or `None` when the search is
    /// exhausted.
    ///
    /// Depth-first from the source in edge-generation order, returning the
    /// first vertex in post order still marked unexplored. The search stops
    /// early at query vertices whose atom is already successful from the
    /// knowledge base; those vertices are created unmarked and never
    /// generate a subtree.
    pub fn explore(&self, successes: &BTreeSet<AtomId>) -> Option<usize> {
        let mut visited = vec![false; self.nodes.len()];
        let mut found: Option<usize> = None;
        self.post_order(self.source, successes, &mut visited, &mut found);
        found
    }

    fn post_order(
        &self,
        v: usize,
        successes: &BTreeSet<AtomId>,
        visited: &mut [bool],
        found: &mut Option<usize>,
    ) {
        if visited[v] || found.is_some() {
            return;
        }
        visited[v] = true;
        if let NodeKind::Query { atom, .. } = &self.nodes[v].kind {
            if successes.contains(atom) {
                return;
            }
        }
        for i in 0..self.nodes[v].edges.len() {
            let (t, _) = self.nodes[v].edges[i];
            self.post_order(t, successes, visited, found);
            if found.is_some() {
                return;
            }
        }
        if self.nodes[v].unexplored {
            *found = Some(v);
        }
    }

    /// GENERATE: adds the next outgoing edge of `v`, or reports the vertex
    /// fully explored.
    ///
    /// A query vertex generates an edge to a fresh threshold vertex for the
    /// next KB rule with its atom in the head (threshold and `w_plus` equal
    /// to the body size). A threshold vertex generates a weight-1 edge to
    /// the vertex of the next body atom, decrementing `w_plus`; body-atom
    /// vertices are shared across rules. New vertices are created unmarked;
    /// the search driver decides marking.
    pub fn generate(&mut self, v: usize, kb: &HornKb) -> Generated {
        match self.nodes[v].kind.clone() {
            NodeKind::Query { atom, .. } => {
                let rules = kb.rules_with_head(atom);
                let cursor = self.nodes[v].gen_cursor;
                if cursor >= rules.len() {
                    self.nodes[v].fully_explored = true;
                    return Generated::FullyExplored;
                }
                self.nodes[v].gen_cursor += 1;
                let rule_idx = rules[cursor];
                let body_len = kb.rules[rule_idx].body.len() as i64;
                let t = self.nodes.len();
                self.nodes.push(GraphNode {
                    kind: NodeKind::Threshold {
                        threshold: body_len,
                        w_plus: body_len,
                        w_minus: 0,
                        rule: rule_idx,
                    },
                    unexplored: false,
                    edges: Vec::new(),
                    gen_cursor: 0,
                    fully_explored: false,
                });
                self.nodes[v].edges.push((t, 1));
                Generated::Edge { target: t, created: true }
            }
            NodeKind::Threshold { rule, .. } => {
                let body = &kb.rules[rule].body;
                let cursor = self.nodes[v].gen_cursor;
                if cursor >= body.len() {
                    self.nodes[v].fully_explored = true;
                    return Generated::FullyExplored;
                }
                self.nodes[v].gen_cursor += 1;
                let atom = body[cursor];
                let (target, created) = match self.atom_nodes.get(&atom) {
                    Some(&t) => (t, false),
                    None => {
                        let t = self.nodes.len();
                        self.nodes.push(GraphNode {
                            kind: NodeKind::Query {
                                atom,
                                total_rules: kb.rules_with_head(atom).len(),
                            },
                            unexplored: false,
                            edges: Vec::new(),
                            gen_cursor: 0,
                            fully_explored: false,
                        });
                        self.atom_nodes.insert(atom, t);
                        (t, true)
                    }
                };
                self.nodes[v].edges.push((target, 1));
                if let NodeKind::Threshold { w_plus, .. } = &mut self.nodes[v].kind {
                    *w_plus -= 1;
                }
                Generated::Edge { target, created }
            }
        }
    }

    /// TEST: a chaining proof of the source atom if it is successful from
    /// the given facts and learned premises, `None` otherwise. Never returns
    /// a proof for an unsuccessful or unknown source.
    pub fn test(
        &self,
        kb: &HornKb,
        learned: &BTreeSet<AtomId>,
    ) -> Option<ChainingProof> {
        let mut successes: BTreeSet<AtomId> = kb.facts.clone();
        successes.extend(learned.iter().copied());
        let status = self.node_status(&successes);
        if status.of(self.source) != NodeStatus::Successful {
            return None;
        }
        let mut lines: Vec<ProofLine> = Vec::new();
        let mut line_of: HashMap<AtomId, usize> = HashMap::new();
        self.emit(self.source, &status, kb, learned, &mut lines, &mut line_of);
        Some(ChainingProof { lines })
    }

    /// Emits proof lines for the successful query vertex `v` in derivation
    /// order, returning its 1-based line number.
    fn emit(
        &self,
        v: usize,
        status: &StatusMap,
        kb: &HornKb,
        learned: &BTreeSet<AtomId>,
        lines: &mut Vec<ProofLine>,
        line_of: &mut HashMap<AtomId, usize>,
    ) -> usize {
        let atom = self.atom_of(v).expect("emit called on query vertex");
        if let Some(&n) = line_of.get(&atom) {
            return n;
        }
        let justification = if kb.facts.contains(&atom) {
            Justification::Hypothesis
        } else if learned.contains(&atom) {
            Justification::Learned
        } else {
            // The rule that made this vertex successful: the first child in
            // generation order whose success strictly precedes ours.
            let t = self.nodes[v]
                .edges
                .iter()
                .map(|&(t, _)| t)
                .find(|&t| {
                    status.of(t) == NodeStatus::Successful && status.time[t] < status.time[v]
                })
                .expect("successful non-axiom vertex has an earlier successful rule child");
            let rule = match self.nodes[t].kind {
                NodeKind::Threshold { rule, .. } => rule,
                NodeKind::Query { .. } => unreachable!("query children are threshold vertices"),
            };
            let premises: Vec<usize> = self.nodes[t]
                .edges
                .iter()
                .map(|&(q, _)| self.emit(q, status, kb, learned, lines, line_of))
                .collect();
            Justification::Chaining { rule, premises }
        };
        lines.push(ProofLine { atom, justification });
        let n = lines.len();
        line_of.insert(atom, n);
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaining::kb::parse_kb;
    use crate::chaining::SCULPTURE_KB;

    fn setup() -> (HornKb, crate::logic::AtomTable, AtomId) {
        let (kb, table) = parse_kb(SCULPTURE_KB).unwrap();
        let goal = table.lookup("broken(sculpture)").unwrap();
        (kb, table, goal)
    }

    #[test]
    fn fresh_graph_explores_the_goal() {
        let (kb, _, goal) = setup();
        let g = SubgoalGraph::new(goal, &kb);
        assert_eq!(g.explore(&kb.facts), Some(g.source()));
    }

    #[test]
    fn isolated_unknown_goal_has_unknown_status() {
        let (kb, table, _) = setup();
        let hard_floor = table.lookup("hard(floor)").unwrap();
        let g = SubgoalGraph::new(hard_floor, &kb);
        let status = g.node_status(&kb.facts);
        assert_eq!(status.of(g.source()), NodeStatus::Unknown);
    }

    #[test]
    fn generate_follows_worked_example() {
        let (kb, table, goal) = setup();
        let mut g = SubgoalGraph::new(goal, &kb);

        // First GENERATE on the goal: the crushed & fragile rule, threshold
        // 2, both conjuncts still ungenerated.
        let Generated::Edge { target: rule_v, created: true } = g.generate(g.source(), &kb)
        else {
            panic!("expected an edge");
        };
        match g.node(rule_v).kind {
            NodeKind::Threshold { threshold, w_plus, w_minus, rule } => {
                assert_eq!(threshold, 2);
                assert_eq!(w_plus, 2);
                assert_eq!(w_minus, 0);
                assert_eq!(kb.rules[rule].schema, 0);
            }
            _ => panic!("expected threshold vertex"),
        }
        g.mark(rule_v);

        // The new rule vertex is the next to explore.
        assert_eq!(g.explore(&kb.facts), Some(rule_v));

        // Its first body atom is crushed(sculpture), in the KB, and w_plus
        // drops to 1.
        let Generated::Edge { target: crushed_v, created: true } = g.generate(rule_v, &kb) else {
            panic!("expected an edge");
        };
        assert_eq!(g.atom_of(crushed_v), table.lookup("crushed(sculpture)"));
        match g.node(rule_v).kind {
            NodeKind::Threshold { w_plus, .. } => assert_eq!(w_plus, 1),
            _ => unreachable!(),
        }

        // Not yet witnessed: threshold needs fragile(sculpture) too, so the
        // AND vertex is neither successful (1 + 0 < 2) nor unsuccessful
        // (1 + 1 >= 2).
        let status = g.node_status(&kb.facts);
        assert_eq!(status.of(rule_v), NodeStatus::Unknown);
        assert!(g.test(&kb, &BTreeSet::new()).is_none());

        // The KB atom is not marked, so exploration returns to the rule.
        assert_eq!(g.explore(&kb.facts), Some(rule_v));

        // Generating fragile(sculpture) completes the rule.
        let Generated::Edge { .. } = g.generate(rule_v, &kb) else {
            panic!("expected an edge");
        };
        let status = g.node_status(&kb.facts);
        assert_eq!(status.of(rule_v), NodeStatus::Successful);
        assert_eq!(status.of(g.source()), NodeStatus::Successful);

        let proof = g.test(&kb, &BTreeSet::new()).expect("proof");
        let names: Vec<&str> = proof.lines.iter().map(|l| table.name(l.atom)).collect();
        assert_eq!(
            names,
            ["crushed(sculpture)", "fragile(sculpture)", "broken(sculpture)"]
        );
    }

    #[test]
    fn and_vertex_without_edges_is_not_unsuccessful() {
        // Threshold 2 with w_plus 2 and no edges: 0 + 2 >= 2.
        let (kb, _, goal) = setup();
        let mut g = SubgoalGraph::new(goal, &kb);
        let Generated::Edge { target, .. } = g.generate(g.source(), &kb) else {
            panic!();
        };
        let status = g.node_status(&kb.facts);
        assert_eq!(status.of(target), NodeStatus::Unknown);
    }

    #[test]
    fn dead_end_atom_is_fully_explored_immediately() {
        let (kb, table, _) = setup();
        let hard_floor = table.lookup("hard(floor)").unwrap();
        let mut g = SubgoalGraph::new(hard_floor, &kb);
        assert_eq!(g.generate(g.source(), &kb), Generated::FullyExplored);
        // Once fully explored with no rule children, the vertex settles
        // unsuccessful.
        let status = g.node_status(&kb.facts);
        assert_eq!(status.of(g.source()), NodeStatus::Unsuccessful);
    }

    #[test]
    fn goal_in_facts_makes_source_successful() {
        let (kb, table, _) = setup();
        let fragile = table.lookup("fragile(sculpture)").unwrap();
        let g = SubgoalGraph::new(fragile, &kb);
        let status = g.node_status(&kb.facts);
        assert_eq!(status.of(g.source()), NodeStatus::Successful);
        let proof = g.test(&kb, &BTreeSet::new()).expect("trivial proof");
        assert_eq!(proof.lines.len(), 1);
    }

    #[test]
    fn explore_exhaustion_returns_none() {
        let (kb, table, _) = setup();
        let hard_floor = table.lookup("hard(floor)").unwrap();
        let mut g = SubgoalGraph::new(hard_floor, &kb);
        assert_eq!(g.generate(g.source(), &kb), Generated::FullyExplored);
        g.unmark(g.source());
        assert_eq!(g.explore(&kb.facts), None);
    }
}
