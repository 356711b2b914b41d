//! Structural and numerical validation of diagrams.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::instances::{instance_count, row_key, Odometer};
use crate::model::{set_decision_states, ConditionalTable, Diagram, NodeKind, Variable};

/// Tolerance for CPT row sums and one-hot checks.
pub const ROW_TOLERANCE: f64 = 1e-9;

/// Every violated invariant, as human-readable messages naming the offender.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// True if any violation message contains `needle`.
    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.contains(needle))
    }

    fn push(&mut self, msg: String) {
        self.violations.push(msg);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.violations.join("; "))
    }
}

/// Checks every structural and numerical invariant of `d`.
pub fn validate_diagram(d: &Diagram) -> ValidationReport {
    let mut r = ValidationReport::default();
    check_variables(d, &mut r);
    check_arcs(d, &mut r);
    if d.topological_order().is_none() {
        r.push("arcs contain a cycle".into());
    }
    for node in d.nodes() {
        match &node.kind {
            NodeKind::Chance(t) => check_table(d, &node.variable, t, false, &mut r),
            NodeKind::Deterministic(t) => check_table(d, &node.variable, t, true, &mut r),
            NodeKind::Decision { set_decision_for } => {
                if let Some(target) = set_decision_for {
                    check_set_decision(d, &node.variable, target, &mut r);
                }
            }
            NodeKind::Utility(u) => {
                let name = &node.variable.name;
                let expected = relevance_parents(d, name);
                let declared: BTreeSet<&str> = u.parents.iter().map(String::as_str).collect();
                if declared.len() != u.parents.len() || declared != expected {
                    r.push(format!(
                        "utility `{name}`: parents {:?} do not match its relevance arcs {:?}",
                        u.parents, expected
                    ));
                } else if let Some(cards) = parent_cards(d, &u.parents) {
                    let n = instance_count(&cards);
                    if u.values.len() != n {
                        r.push(format!(
                            "utility `{name}`: {} values for {n} parent instances",
                            u.values.len()
                        ));
                    }
                    if u.values.iter().any(|v| !v.is_finite()) {
                        r.push(format!("utility `{name}`: non-finite value"));
                    }
                }
            }
        }
    }
    check_decision_order(d, &mut r);
    check_annotations(d, &mut r);
    r
}

fn check_variables(d: &Diagram, r: &mut ValidationReport) {
    let mut names = HashSet::new();
    let mut utilities = 0;
    for node in d.nodes() {
        let v = &node.variable;
        if v.name.is_empty() {
            r.push("variable with empty name".into());
        }
        if !names.insert(v.name.as_str()) {
            r.push(format!("duplicate variable `{}`", v.name));
        }
        if node.kind.is_utility() {
            utilities += 1;
            if !v.states.is_empty() {
                r.push(format!("utility `{}` must not declare states", v.name));
            }
            continue;
        }
        if v.states.len() < 2 {
            r.push(format!("variable `{}` needs at least two states", v.name));
        }
        let distinct: HashSet<&String> = v.states.iter().collect();
        if distinct.len() != v.states.len() {
            r.push(format!("variable `{}` has duplicate state labels", v.name));
        }
    }
    if utilities > 1 {
        r.push(format!("{utilities} utility nodes; at most one is allowed"));
    }
}

fn check_arcs(d: &Diagram, r: &mut ValidationReport) {
    let mut seen = HashSet::new();
    for e in d.relevance_arcs() {
        if !seen.insert(e) {
            r.push(format!("duplicate arc {e}"));
        }
        let (Ok(from), Ok(to)) = (d.node(&e.from), d.node(&e.to)) else {
            r.push(format!("relevance arc {e} names an unknown variable"));
            continue;
        };
        if to.kind.is_decision() {
            r.push(format!("relevance arc {e} enters decision `{}`", e.to));
        }
        if from.kind.is_utility() {
            r.push(format!("arc {e} leaves utility node `{}`", e.from));
        }
    }
    for e in d.information_arcs() {
        if !seen.insert(e) {
            r.push(format!("duplicate arc {e}"));
        }
        let (Ok(from), Ok(to)) = (d.node(&e.from), d.node(&e.to)) else {
            r.push(format!("information arc {e} names an unknown variable"));
            continue;
        };
        if !to.kind.is_decision() {
            r.push(format!(
                "information arc {e} enters {} node `{}`",
                to.kind.label(),
                e.to
            ));
        }
        if from.kind.is_utility() {
            r.push(format!("arc {e} leaves utility node `{}`", e.from));
        }
    }
}

fn relevance_parents<'a>(d: &'a Diagram, name: &str) -> BTreeSet<&'a str> {
    d.relevance_arcs()
        .iter()
        .filter(|e| e.to == name)
        .map(|e| e.from.as_str())
        .collect()
}

fn parent_cards(d: &Diagram, parents: &[String]) -> Option<Vec<usize>> {
    parents.iter().map(|p| d.variable(p).ok().map(Variable::card)).collect()
}

fn check_table(d: &Diagram, var: &Variable, t: &ConditionalTable, one_hot: bool, r: &mut ValidationReport) {
    let name = &var.name;
    let mut expected = relevance_parents(d, name);
    if let Some(s) = d.index_of(name).ok().and_then(|i| d.set_decision_of(i)) {
        expected.remove(d.name(s));
    }
    let declared: BTreeSet<&str> = t.parent_order.iter().map(String::as_str).collect();
    if declared.len() != t.parent_order.len() || declared != expected {
        r.push(format!(
            "node `{name}`: parent_order {:?} does not match its relevance parents {:?}",
            t.parent_order, expected
        ));
        return;
    }
    let Some(cards) = parent_cards(d, &t.parent_order) else {
        return;
    };
    let parents: Vec<&Variable> = t.parent_order.iter().filter_map(|p| d.variable(p).ok()).collect();
    let n = instance_count(&cards);
    if t.rows.len() != n {
        r.push(format!("node `{name}`: {} rows for {n} parent instances", t.rows.len()));
        return;
    }
    for (row, states) in t.rows.iter().zip(Odometer::new(&cards)) {
        let key = row_key(&parents, &states);
        if row.len() != var.card() {
            r.push(format!(
                "node `{name}` row `{key}`: {} entries for {} states",
                row.len(),
                var.card()
            ));
            continue;
        }
        if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
            r.push(format!("node `{name}` row `{key}`: entry outside [0, 1]"));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_TOLERANCE {
            r.push(format!("node `{name}` row `{key}`: row sum {sum} is not 1"));
        }
        if one_hot {
            let ones = row.iter().filter(|p| (*p - 1.0).abs() <= ROW_TOLERANCE).count();
            let zeros = row.iter().filter(|p| p.abs() <= ROW_TOLERANCE).count();
            if ones != 1 || zeros != row.len() - 1 {
                r.push(format!("deterministic node `{name}` row `{key}` is not one-hot"));
            }
        }
    }
}

fn check_set_decision(d: &Diagram, var: &Variable, target: &str, r: &mut ValidationReport) {
    let name = &var.name;
    let Ok(t) = d.node(target) else {
        r.push(format!("set decision `{name}` targets unknown variable `{target}`"));
        return;
    };
    if !t.kind.is_uncertain() {
        r.push(format!(
            "set decision `{name}` targets {} node `{target}`",
            t.kind.label()
        ));
        return;
    }
    let want: BTreeSet<String> = set_decision_states(&t.variable).into_iter().collect();
    let have: BTreeSet<String> = var.states.iter().cloned().collect();
    if want != have {
        r.push(format!(
            "set decision `{name}`: alternatives must be do_nothing plus set=<state> for each state of `{target}`"
        ));
    }
    let Ok(i) = d.index_of(name) else { return };
    let children: BTreeSet<&str> = d.children(i).into_iter().map(|c| d.name(c)).collect();
    if children.len() != 1 || !children.contains(target) {
        r.push(format!(
            "set decision `{name}`: `{target}` must be its only child, found {children:?}"
        ));
    }
    let rivals = d
        .nodes()
        .iter()
        .filter(|n| matches!(&n.kind, NodeKind::Decision { set_decision_for: Some(x) } if x == target))
        .count();
    if rivals > 1 && d.set_decision_of(d.index_of(target).unwrap_or(0)) == Some(i) {
        r.push(format!("`{target}` has {rivals} set decisions; at most one is allowed"));
    }
}

fn check_decision_order(d: &Diagram, r: &mut ValidationReport) {
    let Some(order) = d.decision_order() else { return };
    let decisions: BTreeSet<&str> = d.decisions().into_iter().map(|i| d.name(i)).collect();
    let listed: BTreeSet<&str> = order.iter().map(String::as_str).collect();
    if listed.len() != order.len() || listed != decisions {
        r.push(format!(
            "decision_order {order:?} must list every decision exactly once"
        ));
        return;
    }
    for (pos, later) in order.iter().enumerate() {
        let Ok(i) = d.index_of(later) else { continue };
        let desc = d.descendants_of(&[i]);
        for earlier in &order[..pos] {
            if let Ok(j) = d.index_of(earlier) {
                if desc.contains(&j) {
                    r.push(format!("decision_order puts `{earlier}` before its ancestor `{later}`"));
                }
            }
        }
    }
}

fn check_annotations(d: &Diagram, r: &mut ValidationReport) {
    let a = d.annotations();
    for name in a.declared_fixed.iter().chain(a.dependent_mechanisms.iter().flatten()) {
        match d.node(name) {
            Ok(n) if n.kind.is_uncertain() => {}
            Ok(n) => r.push(format!(
                "annotation names {} node `{name}`; only chance variables qualify",
                n.kind.label()
            )),
            Err(_) => r.push(format!("annotation names unknown variable `{name}`")),
        }
    }
}
