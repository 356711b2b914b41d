//! Twin networks for counterfactual queries.
//!
//! The fixed set (fixed chance nodes and mechanisms) is shared. Every other
//! node gets a factual copy, which keeps its name, and a counterfactual copy
//! named with a trailing `'`. Both copies read the shared layer through the
//! same tables, so conditioning the factual copy on what happened updates the
//! mechanisms that drive the counterfactual copy.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::hcf::ensure_canonical;
use crate::inference::posterior;
use crate::model::{Assignment, ConditionalTable, Diagram, DiagramParts, Edge, Node, NodeKind, UtilityTable};

/// Suffix of counterfactual copies.
pub const PRIME: char = '\'';

/// Name of the counterfactual copy of `name`.
pub fn primed(name: &str) -> String {
    format!("{name}{PRIME}")
}

/// A twin network built from a canonical-form diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct TwinDiagram {
    /// Shared layer plus both copies of every non-fixed node except the utility.
    pub diagram: Diagram,
    /// Factual and counterfactual copies of the utility node. They sit outside
    /// [`TwinDiagram::diagram`], which admits at most one utility node.
    pub utility: Option<(Node, Node)>,
    /// Nodes of the fixed set, present once.
    pub shared: BTreeSet<String>,
    /// Original names of the copied nodes.
    pub copied: Vec<String>,
}

impl TwinDiagram {
    /// Nodes in the twin, counting both utility copies.
    pub fn node_count(&self) -> usize {
        self.diagram.len() + if self.utility.is_some() { 2 } else { 0 }
    }

    /// Name of the node that answers for `name` in the counterfactual copy.
    pub fn counterfactual_name(&self, name: &str) -> String {
        if self.shared.contains(name) {
            name.to_string()
        } else {
            primed(name)
        }
    }
}

/// Builds the twin network of `h`, which must be in canonical form.
pub fn build_twin(h: &Diagram) -> Result<TwinDiagram> {
    ensure_canonical(h)?;
    let fixed = h.fixed_nodes();
    let shared: BTreeSet<String> = fixed.iter().map(|&i| h.name(i).to_string()).collect();
    let is_shared = |n: &str| shared.contains(n);
    let cf = |n: &str| if is_shared(n) { n.to_string() } else { primed(n) };

    let mut copied = Vec::new();
    let mut nodes = Vec::new();
    let mut second = Vec::new();
    let mut utility = None;
    for node in h.nodes() {
        let name = node.name();
        if is_shared(name) {
            nodes.push(node.clone());
            continue;
        }
        copied.push(name.to_string());
        let twin_name = primed(name);
        if h.contains(&twin_name) {
            return Err(Error::Format(format!(
                "cannot name the counterfactual copy of `{name}`: `{twin_name}` already exists"
            )));
        }
        let kind = match &node.kind {
            NodeKind::Chance(t) => NodeKind::Chance(rename_table(t, &cf)),
            NodeKind::Deterministic(t) => NodeKind::Deterministic(rename_table(t, &cf)),
            NodeKind::Decision { set_decision_for } => NodeKind::Decision {
                set_decision_for: set_decision_for.as_deref().map(cf),
            },
            NodeKind::Utility(u) => NodeKind::Utility(UtilityTable {
                parents: u.parents.iter().map(|p| cf(p)).collect(),
                values: u.values.clone(),
            }),
        };
        let mut variable = node.variable.clone();
        variable.name = twin_name;
        let copy = Node { variable, kind };
        if node.kind.is_utility() {
            utility = Some((node.clone(), copy));
        } else {
            nodes.push(node.clone());
            second.push(copy);
        }
    }
    nodes.extend(second);

    let utility_name = utility.as_ref().map(|(u, _)| u.name().to_string());
    let not_utility = |e: &&Edge| Some(&e.to) != utility_name.as_ref();
    let mut relevance: Vec<Edge> = h.relevance_arcs().iter().filter(not_utility).cloned().collect();
    relevance.extend(
        h.relevance_arcs()
            .iter()
            .filter(not_utility)
            .filter(|e| !is_shared(&e.to))
            .map(|e| Edge::new(cf(&e.from), cf(&e.to))),
    );
    let mut information = h.information_arcs().to_vec();
    information.extend(h.information_arcs().iter().map(|e| Edge::new(cf(&e.from), cf(&e.to))));
    let decision_order = h.decision_order().map(|order| {
        let mut o = order.to_vec();
        o.extend(order.iter().map(|n| primed(n)));
        o
    });
    let parts = DiagramParts {
        nodes,
        relevance_arcs: relevance,
        information_arcs: information,
        decision_order,
        annotations: h.annotations().clone(),
    };
    Ok(TwinDiagram {
        diagram: Diagram::validated(parts)?,
        utility,
        shared,
        copied,
    })
}

fn rename_table(t: &ConditionalTable, cf: &impl Fn(&str) -> String) -> ConditionalTable {
    ConditionalTable::new(t.parent_order.iter().map(|p| cf(p)).collect(), t.rows.clone())
}

/// "Had the decisions been `counterfactual_decisions`, what would `query`
/// have been, given that `factual_evidence` was observed under
/// `factual_decisions`?"
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CounterfactualQuery {
    /// Total over the decisions, original names.
    pub factual_decisions: Assignment,
    /// Chance or deterministic nodes of the factual copy or the shared layer.
    pub factual_evidence: Assignment,
    /// Total over the decisions, original names (a trailing `'` is accepted).
    pub counterfactual_decisions: Assignment,
    /// Original names, answered in the counterfactual copy.
    pub query: Vec<String>,
}

fn strip_prime<'a>(h: &Diagram, name: &'a str) -> &'a str {
    match name.strip_suffix(PRIME) {
        Some(base) if !h.contains(name) && h.contains(base) => base,
        _ => name,
    }
}

/// Posterior over the counterfactual copies of the query variables (named
/// with a trailing `'` unless they are shared).
pub fn counterfactual(h: &Diagram, q: &CounterfactualQuery) -> Result<Factor> {
    let twin = build_twin(h)?;
    let (decisions, evidence) = twin_bindings(h, &twin, q)?;
    let query = q
        .query
        .iter()
        .map(|n| {
            let n = strip_prime(h, n);
            h.index_of(n)?;
            Ok(twin.counterfactual_name(n))
        })
        .collect::<Result<Vec<_>>>()?;
    posterior(&twin.diagram, &decisions, &evidence, &query)
}

/// Expected counterfactual utility `E[U' | evidence]` for the same query
/// shape; the `query` field is ignored.
pub fn counterfactual_expected_utility(h: &Diagram, q: &CounterfactualQuery) -> Result<f64> {
    let twin = build_twin(h)?;
    let (_, cf_utility) = twin.utility.clone().ok_or(Error::NoUtilityNode)?;
    let NodeKind::Utility(u) = &cf_utility.kind else {
        unreachable!("utility copy has utility kind")
    };
    let (decisions, evidence) = twin_bindings(h, &twin, q)?;
    let dist = posterior(&twin.diagram, &decisions, &evidence, &u.parents)?;
    Ok(dist.values().iter().zip(&u.values).map(|(p, v)| p * v).sum())
}

fn twin_bindings(h: &Diagram, twin: &TwinDiagram, q: &CounterfactualQuery) -> Result<(Assignment, Assignment)> {
    let mut decisions = Assignment::new();
    for (n, s) in q.factual_decisions.iter() {
        h.index_of(n)?;
        decisions.insert(n, s);
    }
    for (n, s) in q.counterfactual_decisions.iter() {
        let n = strip_prime(h, n);
        h.index_of(n)?;
        decisions.insert(twin.counterfactual_name(n), s);
    }
    for (n, _) in q.factual_evidence.iter() {
        h.index_of(n)?;
    }
    Ok((decisions, q.factual_evidence.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::hcf::{to_hcf, HcfOptions};
    use crate::inference::{decision_instances, joint};

    fn a(pairs: &[(&str, &str)]) -> Assignment {
        pairs.iter().copied().collect()
    }

    #[test]
    fn m1_twin_has_five_nodes() {
        let h = to_hcf(&fixtures::m1(0.05, 0.2), &HcfOptions::default()).unwrap();
        let t = build_twin(&h.diagram).unwrap();
        assert_eq!(t.node_count(), 5);
        let names: BTreeSet<&str> = t.diagram.nodes().iter().map(Node::name).collect();
        assert_eq!(
            names,
            BTreeSet::from(["lung_cancer(smoke)", "smoke", "lung_cancer", "smoke'", "lung_cancer'"])
        );
    }

    #[test]
    fn coin_twin_counts_utility_copies() {
        let t = build_twin(&fixtures::coin(0.5, false)).unwrap();
        assert_eq!(t.node_count(), 5);
        let u = build_twin(&fixtures::coin_with_utility(0.5, false)).unwrap();
        assert_eq!(u.node_count(), 7);
        assert_eq!(u.utility.as_ref().unwrap().1.name(), "utility'");
    }

    #[test]
    fn all_fixed_twin_is_the_original() {
        let d = Diagram::builder()
            .chance("a", &["0", "1"], &[], vec![vec![0.5, 0.5]])
            .chance("b", &["0", "1"], &["a"], vec![vec![0.9, 0.1], vec![0.2, 0.8]])
            .build();
        let t = build_twin(&d).unwrap();
        assert_eq!(t.diagram, d);
        assert!(t.copied.is_empty());
    }

    #[test]
    fn coin_counterfactual_loses() {
        let q = CounterfactualQuery {
            factual_decisions: a(&[("d", "heads")]),
            factual_evidence: a(&[("w", "win")]),
            counterfactual_decisions: a(&[("d", "tails")]),
            query: vec!["w".into()],
        };
        let f = counterfactual(&fixtures::coin(0.5, false), &q).unwrap();
        assert_eq!(f.prob(&[("w'", "lose")]).unwrap(), 1.0);
    }

    #[test]
    fn m1_counterfactual() {
        let h = to_hcf(&fixtures::m1(0.05, 0.2), &HcfOptions::default()).unwrap();
        let mut q = CounterfactualQuery {
            factual_decisions: a(&[("smoke", "no")]),
            factual_evidence: a(&[("lung_cancer", "no")]),
            counterfactual_decisions: a(&[("smoke'", "yes")]),
            query: vec!["lung_cancer".into()],
        };
        let f = counterfactual(&h.diagram, &q).unwrap();
        assert!((f.prob(&[("lung_cancer'", "yes")]).unwrap() - 0.2).abs() < 1e-12);
        q.counterfactual_decisions = a(&[("smoke", "no")]);
        let g = counterfactual(&h.diagram, &q).unwrap();
        assert_eq!(g.prob(&[("lung_cancer'", "yes")]).unwrap(), 0.0);
    }

    #[test]
    fn factual_copy_marginal_is_the_original_joint() {
        let h = to_hcf(&fixtures::lifestyle(), &HcfOptions::default()).unwrap();
        let t = build_twin(&h.diagram).unwrap();
        for dec in decision_instances(&h.diagram) {
            let mut both = dec.clone();
            for (n, s) in dec.iter() {
                both.insert(primed(n), s);
            }
            let orig = joint(&h.diagram, &dec).unwrap();
            let tw = joint(&t.diagram, &both).unwrap().marginal(&orig.scope());
            assert!(orig.max_abs_diff(&tw).unwrap() < 1e-12);
        }
    }

    #[test]
    fn counterfactual_utility() {
        let q = CounterfactualQuery {
            factual_decisions: a(&[("d", "heads")]),
            factual_evidence: a(&[("w", "win")]),
            counterfactual_decisions: a(&[("d", "tails")]),
            query: Vec::new(),
        };
        let eu = counterfactual_expected_utility(&fixtures::coin_with_utility(0.5, false), &q).unwrap();
        assert_eq!(eu, 0.0);
    }

    #[test]
    fn zero_evidence() {
        let q = CounterfactualQuery {
            factual_decisions: a(&[("d", "heads")]),
            factual_evidence: a(&[("w", "lose")]),
            counterfactual_decisions: a(&[("d", "tails")]),
            query: vec!["w".into()],
        };
        assert_eq!(
            counterfactual(&fixtures::coin(1.0, false), &q),
            Err(Error::ZeroProbabilityEvidence)
        );
    }
}
