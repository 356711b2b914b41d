//! The JSON model format.
//!
//! ```json
//! {
//!   "variables": [
//!     {"name": "smoke", "kind": "decision", "states": ["no", "yes"]},
//!     {"name": "lung_cancer", "kind": "chance", "states": ["no", "yes"]}
//!   ],
//!   "relevance_arcs": [{"from": "smoke", "to": "lung_cancer"}],
//!   "information_arcs": [],
//!   "cpts": {
//!     "lung_cancer": {
//!       "parent_order": ["smoke"],
//!       "rows": {"no": [0.95, 0.05], "yes": [0.8, 0.2]}
//!     }
//!   },
//!   "decision_order": ["smoke"],
//!   "annotations": {"causal": true, "declared_fixed": []}
//! }
//! ```
//!
//! Row keys join parent states with `|` in `parent_order`; a node without
//! parents has the single key `""`. Deterministic nodes use the same shape
//! with one-hot rows, and utility values are keyed the same way. Canonical-form
//! diagrams add a `mechanisms` section naming each mechanism's target, domain
//! and fixed parents.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::error::Category;

use crate::error::{Error, Result};
use crate::hcf::{HcfDiagram, MechanismRecord};
use crate::instances::{row_key, Odometer, KEY_SEPARATOR};
use crate::model::{
    Annotations, ConditionalTable, Diagram, DiagramParts, Edge, Node, NodeKind, UtilityTable, Variable,
};
use crate::validate::validate_diagram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableKind {
    Chance,
    Deterministic,
    Decision,
    Utility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableEntry {
    pub name: String,
    pub kind: VariableKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_decision_for: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcEntry {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub parent_order: Vec<String>,
    pub rows: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityEntry {
    pub parents: Vec<String>,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationsEntry {
    #[serde(default)]
    pub causal: bool,
    #[serde(default)]
    pub declared_fixed: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dependent_mechanisms: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismEntry {
    pub node: String,
    pub target: String,
    pub domain: Vec<String>,
    pub fixed_parents: Vec<String>,
}

/// The document as written on disk.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub variables: Vec<VariableEntry>,
    #[serde(default)]
    pub relevance_arcs: Vec<ArcEntry>,
    #[serde(default)]
    pub information_arcs: Vec<ArcEntry>,
    #[serde(default)]
    pub cpts: BTreeMap<String, TableEntry>,
    #[serde(default)]
    pub deterministic: BTreeMap<String, TableEntry>,
    #[serde(default)]
    pub utility: BTreeMap<String, UtilityEntry>,
    #[serde(default)]
    pub decision_order: Option<Vec<String>>,
    #[serde(default)]
    pub annotations: AnnotationsEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanisms: Option<Vec<MechanismEntry>>,
}

fn read_file(text: &str) -> Result<ModelFile> {
    serde_json::from_str(text).map_err(|e| match e.classify() {
        Category::Syntax | Category::Eof | Category::Io => Error::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        },
        Category::Data => Error::Format(e.to_string()),
    })
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<Diagram> {
    let file = read_file(text)?;
    file_to_diagram(&file)
}

/// Parses a canonical-form document, rebuilding its mechanisms.
pub fn parse_hcf(text: &str) -> Result<HcfDiagram> {
    let file = read_file(text)?;
    let d = file_to_diagram(&file)?;
    let records: Vec<MechanismRecord> = file
        .mechanisms
        .unwrap_or_default()
        .into_iter()
        .map(|m| MechanismRecord {
            node: m.node,
            target: m.target,
            domain: m.domain,
            fixed_parents: m.fixed_parents,
        })
        .collect();
    HcfDiagram::from_records(d, &records)
}

/// Converts a parsed document into a validated diagram.
pub fn file_to_diagram(file: &ModelFile) -> Result<Diagram> {
    let mut seen = BTreeSet::new();
    for v in &file.variables {
        if !seen.insert(v.name.as_str()) {
            return Err(Error::DuplicateVariable(v.name.clone()));
        }
    }
    let vars: BTreeMap<&str, Variable> = file
        .variables
        .iter()
        .map(|v| (v.name.as_str(), Variable::new(v.name.clone(), v.states.clone())))
        .collect();
    let kind_of = |n: &str| file.variables.iter().find(|v| v.name == n).map(|v| v.kind);
    for (section, names, kind) in [
        ("cpts", file.cpts.keys().collect::<Vec<_>>(), VariableKind::Chance),
        (
            "deterministic",
            file.deterministic.keys().collect(),
            VariableKind::Deterministic,
        ),
        ("utility", file.utility.keys().collect(), VariableKind::Utility),
    ] {
        for n in names {
            match kind_of(n) {
                None => return Err(Error::UnknownVariable(n.clone())),
                Some(k) if k != kind => {
                    return Err(Error::Format(format!(
                        "`{n}` appears in \"{section}\" but is not a {} node",
                        section_kind(kind)
                    )))
                }
                _ => {}
            }
        }
    }

    let mut nodes = Vec::with_capacity(file.variables.len());
    for v in &file.variables {
        let variable = vars[v.name.as_str()].clone();
        if v.set_decision_for.is_some() && v.kind != VariableKind::Decision {
            return Err(Error::Format(format!(
                "`{}` has set_decision_for but is not a decision",
                v.name
            )));
        }
        let kind = match v.kind {
            VariableKind::Chance => {
                let t = file
                    .cpts
                    .get(&v.name)
                    .ok_or_else(|| Error::Format(format!("no cpt for chance node `{}`", v.name)))?;
                NodeKind::Chance(read_table(&v.name, t, &vars)?)
            }
            VariableKind::Deterministic => {
                let t = file
                    .deterministic
                    .get(&v.name)
                    .ok_or_else(|| Error::Format(format!("no table for deterministic node `{}`", v.name)))?;
                NodeKind::Deterministic(read_table(&v.name, t, &vars)?)
            }
            VariableKind::Decision => NodeKind::Decision {
                set_decision_for: v.set_decision_for.clone(),
            },
            VariableKind::Utility => {
                let u = file
                    .utility
                    .get(&v.name)
                    .ok_or_else(|| Error::Format(format!("no values for utility node `{}`", v.name)))?;
                let parents = parent_vars(&v.name, &u.parents, &vars)?;
                let cards: Vec<usize> = parents.iter().map(|p| p.card()).collect();
                let mut values = Vec::new();
                let mut used = 0;
                for st in Odometer::new(&cards) {
                    let key = row_key(&parents, &st);
                    let value = u
                        .values
                        .get(&key)
                        .ok_or_else(|| Error::Format(format!("utility `{}` is missing row `{key}`", v.name)))?;
                    used += 1;
                    values.push(*value);
                }
                if used != u.values.len() {
                    return Err(unknown_key(&v.name, u.values.keys(), &parents));
                }
                NodeKind::Utility(UtilityTable {
                    parents: u.parents.clone(),
                    values,
                })
            }
        };
        nodes.push(Node { variable, kind });
    }

    let arcs = |list: &[ArcEntry]| list.iter().map(|a| Edge::new(a.from.clone(), a.to.clone())).collect();
    let parts = DiagramParts {
        nodes,
        relevance_arcs: arcs(&file.relevance_arcs),
        information_arcs: arcs(&file.information_arcs),
        decision_order: file.decision_order.clone(),
        annotations: Annotations {
            causal: file.annotations.causal,
            declared_fixed: file.annotations.declared_fixed.iter().cloned().collect(),
            dependent_mechanisms: file.annotations.dependent_mechanisms.clone(),
        },
    };
    let d = Diagram::from_parts(parts);
    let report = validate_diagram(&d);
    if report.is_valid() {
        Ok(d)
    } else {
        Err(Error::InvalidDiagram(report))
    }
}

fn section_kind(kind: VariableKind) -> &'static str {
    match kind {
        VariableKind::Chance => "chance",
        VariableKind::Deterministic => "deterministic",
        VariableKind::Decision => "decision",
        VariableKind::Utility => "utility",
    }
}

fn parent_vars<'a>(node: &str, names: &[String], vars: &'a BTreeMap<&str, Variable>) -> Result<Vec<&'a Variable>> {
    names
        .iter()
        .map(|p| {
            vars.get(p.as_str())
                .ok_or_else(|| Error::Format(format!("`{node}` lists unknown parent `{p}`")))
        })
        .collect()
}

fn read_table(node: &str, t: &TableEntry, vars: &BTreeMap<&str, Variable>) -> Result<ConditionalTable> {
    let parents = parent_vars(node, &t.parent_order, vars)?;
    let cards: Vec<usize> = parents.iter().map(|p| p.card()).collect();
    let mut rows = Vec::new();
    for st in Odometer::new(&cards) {
        let key = row_key(&parents, &st);
        let row = t
            .rows
            .get(&key)
            .ok_or_else(|| Error::Format(format!("`{node}` is missing row `{key}`")))?;
        rows.push(row.clone());
    }
    if rows.len() != t.rows.len() {
        return Err(unknown_key(node, t.rows.keys(), &parents));
    }
    Ok(ConditionalTable::new(t.parent_order.clone(), rows))
}

/// Error for a row key that matches no parent instance, naming the key and,
/// when the key splits cleanly, the unknown state.
fn unknown_key<'k>(node: &str, keys: impl Iterator<Item = &'k String>, parents: &[&Variable]) -> Error {
    let cards: Vec<usize> = parents.iter().map(|p| p.card()).collect();
    let valid: BTreeSet<String> = Odometer::new(&cards).map(|st| row_key(parents, &st)).collect();
    let Some(bad) = keys.into_iter().find(|k| !valid.contains(*k)) else {
        return Error::Format(format!("`{node}` has rows that match no parent instance"));
    };
    let parts: Vec<&str> = if parents.is_empty() {
        vec![bad.as_str()]
    } else {
        bad.split(KEY_SEPARATOR).collect()
    };
    let detail = if parts.len() == parents.len() {
        parents
            .iter()
            .zip(&parts)
            .find(|(p, s)| p.state_index(s).is_none())
            .map(|(p, s)| format!(": `{}` has no state `{s}`", p.name))
            .unwrap_or_default()
    } else {
        String::new()
    };
    Error::Format(format!("`{node}` row key `{bad}` matches no parent instance{detail}"))
}

/// Converts a diagram into its document form.
pub fn diagram_to_file(d: &Diagram) -> ModelFile {
    let mut file = ModelFile::default();
    for node in d.nodes() {
        let v = &node.variable;
        let (kind, set_for) = match &node.kind {
            NodeKind::Chance(t) => {
                file.cpts.insert(v.name.clone(), write_table(d, t));
                (VariableKind::Chance, None)
            }
            NodeKind::Deterministic(t) => {
                file.deterministic.insert(v.name.clone(), write_table(d, t));
                (VariableKind::Deterministic, None)
            }
            NodeKind::Decision { set_decision_for } => (VariableKind::Decision, set_decision_for.clone()),
            NodeKind::Utility(u) => {
                let parents: Vec<&Variable> = u.parents.iter().filter_map(|p| d.variable(p).ok()).collect();
                let cards: Vec<usize> = parents.iter().map(|p| p.card()).collect();
                let values = Odometer::new(&cards)
                    .zip(&u.values)
                    .map(|(st, &x)| (row_key(&parents, &st), x))
                    .collect();
                file.utility.insert(
                    v.name.clone(),
                    UtilityEntry {
                        parents: u.parents.clone(),
                        values,
                    },
                );
                (VariableKind::Utility, None)
            }
        };
        file.variables.push(VariableEntry {
            name: v.name.clone(),
            kind,
            states: v.states.clone(),
            set_decision_for: set_for,
        });
    }
    let arcs = |list: &[Edge]| {
        list.iter()
            .map(|e| ArcEntry {
                from: e.from.clone(),
                to: e.to.clone(),
            })
            .collect()
    };
    file.relevance_arcs = arcs(d.relevance_arcs());
    file.information_arcs = arcs(d.information_arcs());
    file.decision_order = d.decision_order().map(<[String]>::to_vec);
    let a = d.annotations();
    file.annotations = AnnotationsEntry {
        causal: a.causal,
        declared_fixed: a.declared_fixed.iter().cloned().collect(),
        dependent_mechanisms: a.dependent_mechanisms.clone(),
    };
    file
}

fn write_table(d: &Diagram, t: &ConditionalTable) -> TableEntry {
    let parents: Vec<&Variable> = t.parent_order.iter().filter_map(|p| d.variable(p).ok()).collect();
    let cards: Vec<usize> = parents.iter().map(|p| p.card()).collect();
    TableEntry {
        parent_order: t.parent_order.clone(),
        rows: Odometer::new(&cards)
            .zip(&t.rows)
            .map(|(st, row)| (row_key(&parents, &st), row.clone()))
            .collect(),
    }
}

/// Pretty-printed JSON with sorted table keys.
pub fn serialize_model(d: &Diagram) -> String {
    serde_json::to_string_pretty(&diagram_to_file(d)).expect("model files always serialize")
}

/// [`serialize_model`] plus the `mechanisms` section.
pub fn serialize_hcf(h: &HcfDiagram) -> String {
    let mut file = diagram_to_file(&h.diagram);
    file.mechanisms = Some(
        h.records()
            .into_iter()
            .map(|r| MechanismEntry {
                node: r.node,
                target: r.target,
                domain: r.domain,
                fixed_parents: r.fixed_parents,
            })
            .collect(),
    );
    serde_json::to_string_pretty(&file).expect("model files always serialize")
}
