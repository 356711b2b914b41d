//! Influence diagram data model.
//!
//! A [`Diagram`] is a typed DAG over chance, deterministic, decision and utility
//! nodes. Arcs into decisions are information arcs; every other arc is a
//! relevance arc. Diagrams are immutable once built: every transformation in
//! this crate produces a new diagram.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Label of the "leave it alone" alternative of a set decision.
pub const DO_NOTHING: &str = "do_nothing";
/// Prefix of the "force the target to k" alternatives of a set decision.
pub const SET_PREFIX: &str = "set=";

/// Alternatives of a set decision for a variable, in the variable's state order.
pub fn set_decision_states(target: &Variable) -> Vec<String> {
    std::iter::once(DO_NOTHING.to_string())
        .chain(target.states.iter().map(|s| format!("{SET_PREFIX}{s}")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: impl Into<String>, states: impl IntoIterator<Item = S>) -> Self {
        Variable {
            name: name.into(),
            states: states.into_iter().map(Into::into).collect(),
        }
    }

    pub fn card(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

/// Local distributions `P(x | parents)`, one row per parent instance.
///
/// Rows are stored in canonical order: lexicographic over `parent_order`, with the
/// first parent most significant and each parent's states in declared order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    pub parent_order: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ConditionalTable {
    pub fn new(parent_order: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        ConditionalTable { parent_order, rows }
    }

    /// A parentless table holding a single distribution.
    pub fn prior(distribution: Vec<f64>) -> Self {
        ConditionalTable {
            parent_order: Vec::new(),
            rows: vec![distribution],
        }
    }
}

/// Utility for each instance of the utility node's parents, canonical row order.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityTable {
    pub parents: Vec<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Chance(ConditionalTable),
    /// A chance node whose rows are one-hot.
    Deterministic(ConditionalTable),
    Decision {
        /// When set, this decision is a set decision for the named variable.
        set_decision_for: Option<String>,
    },
    Utility(UtilityTable),
}

impl NodeKind {
    pub fn is_decision(&self) -> bool {
        matches!(self, NodeKind::Decision { .. })
    }

    /// Chance or deterministic.
    pub fn is_uncertain(&self) -> bool {
        matches!(self, NodeKind::Chance(_) | NodeKind::Deterministic(_))
    }

    pub fn is_utility(&self) -> bool {
        matches!(self, NodeKind::Utility(_))
    }

    pub fn table(&self) -> Option<&ConditionalTable> {
        match self {
            NodeKind::Chance(t) | NodeKind::Deterministic(t) => Some(t),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            NodeKind::Chance(_) => "chance",
            NodeKind::Deterministic(_) => "deterministic",
            NodeKind::Decision { .. } => "decision",
            NodeKind::Utility(_) => "utility",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub variable: Variable,
    pub kind: NodeKind,
}

impl Node {
    pub fn name(&self) -> &str {
        &self.variable.name
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: String,
    pub to: String,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.from, self.to)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Annotations {
    /// The modeller asserts every node is in the conditional fixed set of its parents.
    pub causal: bool,
    /// Variables asserted to be unaffected by the decisions.
    pub declared_fixed: BTreeSet<String>,
    /// Groups of variables whose mechanisms are jointly assessed rather than independent.
    pub dependent_mechanisms: Vec<Vec<String>>,
}

/// Everything a [`Diagram`] is made of, with public fields for construction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagramParts {
    pub nodes: Vec<Node>,
    pub relevance_arcs: Vec<Edge>,
    pub information_arcs: Vec<Edge>,
    pub decision_order: Option<Vec<String>>,
    pub annotations: Annotations,
}

/// An influence diagram. See [`crate::validate::validate_diagram`] for the invariants
/// every algorithm in the crate assumes.
#[derive(Debug, Clone)]
pub struct Diagram {
    parts: DiagramParts,
    index: HashMap<String, usize>,
}

impl PartialEq for Diagram {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts
    }
}

impl Diagram {
    /// Builds a diagram without validating it. Duplicate names resolve to the
    /// first occurrence; `validate_diagram` reports them.
    pub fn from_parts(parts: DiagramParts) -> Self {
        let mut index = HashMap::with_capacity(parts.nodes.len());
        for (i, n) in parts.nodes.iter().enumerate() {
            index.entry(n.variable.name.clone()).or_insert(i);
        }
        Diagram { parts, index }
    }

    /// Builds a diagram and rejects it if validation reports anything.
    pub fn validated(parts: DiagramParts) -> Result<Self> {
        let d = Diagram::from_parts(parts);
        let report = crate::validate::validate_diagram(&d);
        if report.is_valid() {
            Ok(d)
        } else {
            Err(Error::InvalidDiagram(report))
        }
    }

    pub fn builder() -> DiagramBuilder {
        DiagramBuilder::default()
    }

    pub fn parts(&self) -> &DiagramParts {
        &self.parts
    }

    pub fn into_parts(self) -> DiagramParts {
        self.parts
    }

    pub fn nodes(&self) -> &[Node] {
        &self.parts.nodes
    }

    pub fn len(&self) -> usize {
        self.parts.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.nodes.is_empty()
    }

    pub fn relevance_arcs(&self) -> &[Edge] {
        &self.parts.relevance_arcs
    }

    pub fn information_arcs(&self) -> &[Edge] {
        &self.parts.information_arcs
    }

    pub fn decision_order(&self) -> Option<&[String]> {
        self.parts.decision_order.as_deref()
    }

    pub fn annotations(&self) -> &Annotations {
        &self.parts.annotations
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn node(&self, name: &str) -> Result<&Node> {
        self.index_of(name).map(|i| &self.parts.nodes[i])
    }

    pub fn node_at(&self, i: usize) -> &Node {
        &self.parts.nodes[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.parts.nodes[i].variable.name
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        self.node(name).map(|n| &n.variable)
    }

    pub fn decisions(&self) -> Vec<usize> {
        self.indices_where(|k| k.is_decision())
    }

    /// Chance and deterministic nodes.
    pub fn uncertain(&self) -> Vec<usize> {
        self.indices_where(|k| k.is_uncertain())
    }

    pub fn utility(&self) -> Option<usize> {
        self.parts.nodes.iter().position(|n| n.kind.is_utility())
    }

    fn indices_where(&self, pred: impl Fn(&NodeKind) -> bool) -> Vec<usize> {
        (0..self.len()).filter(|&i| pred(&self.parts.nodes[i].kind)).collect()
    }

    /// Parents along relevance and information arcs, in arc order.
    pub fn parents(&self, i: usize) -> Vec<usize> {
        let name = self.name(i);
        self.all_arcs()
            .filter(|e| e.to == name)
            .filter_map(|e| self.index.get(&e.from).copied())
            .collect()
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        let name = self.name(i);
        self.all_arcs()
            .filter(|e| e.from == name)
            .filter_map(|e| self.index.get(&e.to).copied())
            .collect()
    }

    pub fn all_arcs(&self) -> impl Iterator<Item = &Edge> {
        self.parts
            .relevance_arcs
            .iter()
            .chain(self.parts.information_arcs.iter())
    }

    /// Adjacency lists (children) over both arc kinds.
    pub fn child_lists(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.len()];
        for e in self.all_arcs() {
            if let (Some(&a), Some(&b)) = (self.index.get(&e.from), self.index.get(&e.to)) {
                ch[a].push(b);
            }
        }
        ch
    }

    pub fn parent_lists(&self) -> Vec<Vec<usize>> {
        let mut pa = vec![Vec::new(); self.len()];
        for e in self.all_arcs() {
            if let (Some(&a), Some(&b)) = (self.index.get(&e.from), self.index.get(&e.to)) {
                pa[b].push(a);
            }
        }
        pa
    }

    /// Kahn order over both arc kinds, ties broken by declaration order.
    /// `None` when the arcs contain a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let ch = self.child_lists();
        let mut indeg = vec![0usize; self.len()];
        for c in ch.iter().flatten() {
            indeg[*c] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..self.len()).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(&i) = ready.iter().next() {
            ready.remove(&i);
            order.push(i);
            for &c in &ch[i] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == self.len()).then_some(order)
    }

    /// Nodes reachable from `from` by directed paths (excluding the sources
    /// themselves unless reachable from another source).
    pub fn descendants_of(&self, from: &[usize]) -> BTreeSet<usize> {
        let ch = self.child_lists();
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = from.iter().flat_map(|&s| ch[s].iter().copied()).collect();
        let mut out = BTreeSet::new();
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            out.insert(v);
            stack.extend(ch[v].iter().copied());
        }
        out
    }

    /// Descendants of any decision node.
    pub fn decision_descendants(&self) -> BTreeSet<usize> {
        self.descendants_of(&self.decisions())
    }

    /// Graphical fixed set: chance and deterministic nodes that are not
    /// descendants of a decision, plus anything declared fixed.
    pub fn fixed_nodes(&self) -> BTreeSet<usize> {
        let desc = self.decision_descendants();
        let mut fixed: BTreeSet<usize> = self.uncertain().into_iter().filter(|i| !desc.contains(i)).collect();
        for name in &self.parts.annotations.declared_fixed {
            if let Some(&i) = self.index.get(name) {
                fixed.insert(i);
            }
        }
        fixed
    }

    /// The set decision targeting `x`, if any.
    pub fn set_decision_of(&self, x: usize) -> Option<usize> {
        let target = self.name(x);
        self.parts
            .nodes
            .iter()
            .position(|n| matches!(&n.kind, NodeKind::Decision { set_decision_for: Some(t) } if t == target))
    }

    /// Returns a copy with one more information arc.
    pub fn with_information_arc(&self, from: &str, to: &str) -> Diagram {
        let mut parts = self.parts.clone();
        parts.information_arcs.push(Edge::new(from, to));
        Diagram::from_parts(parts)
    }
}

/// Convenience constructor. Table-bearing nodes add their relevance arcs.
#[derive(Debug, Default)]
pub struct DiagramBuilder {
    parts: DiagramParts,
}

impl DiagramBuilder {
    fn push_relevance(&mut self, from: &str, to: &str) {
        let e = Edge::new(from, to);
        if !self.parts.relevance_arcs.contains(&e) {
            self.parts.relevance_arcs.push(e);
        }
    }

    pub fn chance(mut self, name: &str, states: &[&str], parents: &[&str], rows: Vec<Vec<f64>>) -> Self {
        for p in parents {
            self.push_relevance(p, name);
        }
        self.parts.nodes.push(Node {
            variable: Variable::new(name, states.iter().copied()),
            kind: NodeKind::Chance(ConditionalTable::new(
                parents.iter().map(|s| s.to_string()).collect(),
                rows,
            )),
        });
        self
    }

    /// Deterministic node given the chosen state index per parent instance.
    pub fn deterministic(mut self, name: &str, states: &[&str], parents: &[&str], choice: &[usize]) -> Self {
        for p in parents {
            self.push_relevance(p, name);
        }
        let rows = choice
            .iter()
            .map(|&k| (0..states.len()).map(|s| if s == k { 1.0 } else { 0.0 }).collect())
            .collect();
        self.parts.nodes.push(Node {
            variable: Variable::new(name, states.iter().copied()),
            kind: NodeKind::Deterministic(ConditionalTable::new(
                parents.iter().map(|s| s.to_string()).collect(),
                rows,
            )),
        });
        self
    }

    pub fn decision(mut self, name: &str, states: &[&str]) -> Self {
        self.parts.nodes.push(Node {
            variable: Variable::new(name, states.iter().copied()),
            kind: NodeKind::Decision { set_decision_for: None },
        });
        self
    }

    /// Set decision for an already-declared variable `target`.
    pub fn set_decision(mut self, name: &str, target: &str) -> Self {
        let states = self
            .parts
            .nodes
            .iter()
            .find(|n| n.name() == target)
            .map(|n| set_decision_states(&n.variable))
            .unwrap_or_default();
        self.push_relevance(name, target);
        self.parts.nodes.push(Node {
            variable: Variable::new(name, states),
            kind: NodeKind::Decision {
                set_decision_for: Some(target.to_string()),
            },
        });
        self
    }

    pub fn utility(mut self, name: &str, parents: &[&str], values: Vec<f64>) -> Self {
        for p in parents {
            self.push_relevance(p, name);
        }
        self.parts.nodes.push(Node {
            variable: Variable::new(name, Vec::<String>::new()),
            kind: NodeKind::Utility(UtilityTable {
                parents: parents.iter().map(|s| s.to_string()).collect(),
                values,
            }),
        });
        self
    }

    pub fn relevance(mut self, from: &str, to: &str) -> Self {
        self.push_relevance(from, to);
        self
    }

    pub fn information(mut self, from: &str, to: &str) -> Self {
        self.parts.information_arcs.push(Edge::new(from, to));
        self
    }

    pub fn decision_order(mut self, order: &[&str]) -> Self {
        self.parts.decision_order = Some(order.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn causal(mut self, causal: bool) -> Self {
        self.parts.annotations.causal = causal;
        self
    }

    pub fn declare_fixed(mut self, name: &str) -> Self {
        self.parts.annotations.declared_fixed.insert(name.to_string());
        self
    }

    pub fn dependent_mechanisms(mut self, group: &[&str]) -> Self {
        self.parts
            .annotations
            .dependent_mechanisms
            .push(group.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn build(self) -> Diagram {
        Diagram::from_parts(self.parts)
    }

    pub fn build_valid(self) -> Result<Diagram> {
        Diagram::validated(self.parts)
    }
}

/// One state per bound variable.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(BTreeMap<String, String>);

impl Assignment {
    pub fn new() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn with(mut self, name: impl Into<String>, state: impl Into<String>) -> Self {
        self.0.insert(name.into(), state.into());
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, state: impl Into<String>) {
        self.0.insert(name.into(), state.into());
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    /// Parses `name=state` pairs separated by commas. Empty input is the empty assignment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Assignment::new();
        for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("expected name=state, got `{pair}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if out.contains(k) {
                return Err(Error::DuplicateVariable(k.to_string()));
            }
            out.insert(k, v);
        }
        Ok(out)
    }

    /// Checks every binding against the diagram's variables.
    pub fn check(&self, d: &Diagram) -> Result<()> {
        for (k, v) in self.iter() {
            let var = d.variable(k)?;
            if var.state_index(v).is_none() {
                return Err(Error::UnknownState {
                    variable: k.to_string(),
                    state: v.to_string(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        Assignment(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}
