//! Mechanism extraction and the canonical-form rewrite.
//!
//! A mechanism `x(Y)` is a variable whose states are all mappings from the
//! instances of `Y` (the parents of `x` outside the fixed set) to the states of
//! `x`. Rewriting every non-fixed chance node as a deterministic function of
//! `Y` and its mechanism moves all uncertainty into the fixed set, which is
//! what makes fixed-set membership, counterfactuals and value of information
//! computable.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::inference::{decision_instances, posterior, require_valid};
use crate::instances::{instance_index, Odometer, KEY_SEPARATOR};
use crate::model::{Assignment, ConditionalTable, Diagram, Edge, Node, NodeKind, Variable};
use crate::Caps;

/// Separates a Y-instance key from the chosen state in a mapping label.
pub const MAPS_TO: &str = "->";
/// Separates the entries of a mapping label.
pub const ENTRY_SEPARATOR: &str = ";";

/// An extracted mechanism: the mapping-valued variable `x(Y)` and its prior.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismSpec {
    /// Name of the mechanism node, `x(Y1,Y2,...)`.
    pub node: String,
    pub target: Variable,
    /// Parents of the target outside the fixed set, in table order.
    pub domain: Vec<Variable>,
    /// Parents of the target inside the fixed set, in table order.
    pub fixed_parents: Vec<String>,
    /// `mappings[i][j]` is the target state chosen by mapping `i` at Y-instance `j`.
    pub mappings: Vec<Vec<usize>>,
    /// Distribution over the mappings, conditioned on the mechanism's parents.
    pub prior: ConditionalTable,
}

impl MechanismSpec {
    /// State labels of the mechanism node.
    pub fn labels(&self) -> Vec<String> {
        self.mappings
            .iter()
            .map(|f| mapping_label(&self.target, &self.domain, f))
            .collect()
    }

    pub fn variable(&self) -> Variable {
        Variable::new(self.node.clone(), self.labels())
    }

    /// Target state under mapping `m` at the Y-instance with the given states.
    pub fn apply(&self, m: usize, y_states: &[usize]) -> usize {
        let cards: Vec<usize> = self.domain.iter().map(Variable::card).collect();
        self.mappings[m][instance_index(&cards, y_states)]
    }

    pub fn domain_names(&self) -> Vec<String> {
        self.domain.iter().map(|v| v.name.clone()).collect()
    }
}

/// Name of the mechanism node for `x` with domain `domain`.
pub fn mechanism_name<S: AsRef<str>>(x: &str, domain: &[S]) -> String {
    let names: Vec<&str> = domain.iter().map(AsRef::as_ref).collect();
    format!("{x}({})", names.join(","))
}

/// Human-readable label of one mapping: `ykey->state` entries joined by `;`,
/// or just the state when the domain is empty.
pub fn mapping_label(x: &Variable, domain: &[Variable], f: &[usize]) -> String {
    if domain.is_empty() {
        return x.states[f[0]].clone();
    }
    let cards: Vec<usize> = domain.iter().map(Variable::card).collect();
    Odometer::new(&cards)
        .zip(f)
        .map(|(y, &k)| {
            let key: Vec<&str> = domain.iter().zip(&y).map(|(v, &s)| v.states[s].as_str()).collect();
            format!("{}{MAPS_TO}{}", key.join(KEY_SEPARATOR), x.states[k])
        })
        .collect::<Vec<_>>()
        .join(ENTRY_SEPARATOR)
}

/// Every mapping from the instances of `domain` to the states of `x`, in
/// lexicographic order (the value at the first Y-instance is most significant).
/// An empty domain has one instance, giving one constant mapping per state.
pub fn enumerate_mechanism_states(x: &Variable, domain: &[Variable], caps: &Caps) -> Result<Vec<Vec<usize>>> {
    if let Some(v) = domain.iter().find(|v| v.name == x.name) {
        return Err(Error::OverlappingSets(format!("`{}` cannot map into itself", v.name)));
    }
    let q = domain.iter().fold(1u128, |a, v| a.saturating_mul(v.card() as u128));
    let r = x.card() as u128;
    let size = u32::try_from(q)
        .ok()
        .and_then(|q| r.checked_pow(q))
        .unwrap_or(u128::MAX);
    if size > caps.mechanism_states {
        return Err(Error::StateSpaceExceeded {
            what: "mechanism states",
            size,
            cap: caps.mechanism_states,
        });
    }
    Ok(Odometer::new(&vec![x.card(); q as usize]).collect())
}

struct Split {
    table: ConditionalTable,
    domain: Vec<usize>,
    fixed_parents: Vec<usize>,
}

fn split_parents(d: &Diagram, x: usize, fixed: &BTreeSet<usize>) -> Result<Split> {
    let name = d.name(x);
    let table = match &d.node_at(x).kind {
        NodeKind::Chance(t) | NodeKind::Deterministic(t) => t.clone(),
        _ => return Err(Error::NotUncertain(name.to_string())),
    };
    if fixed.contains(&x) {
        return Err(Error::NothingToExtract(format!("`{name}` is in the fixed set")));
    }
    let mut domain = Vec::new();
    let mut fixed_parents = Vec::new();
    for p in &table.parent_order {
        let i = d.index_of(p)?;
        if fixed.contains(&i) {
            fixed_parents.push(i);
        } else {
            domain.push(i);
        }
    }
    if domain.is_empty() && d.set_decision_of(x).is_none() {
        return Err(Error::NothingToExtract(format!(
            "`{name}` has no parent outside the fixed set"
        )));
    }
    Ok(Split {
        table,
        domain,
        fixed_parents,
    })
}

/// The product prior `P(f | z) = prod_y P(x = f(y) | y, z)`: the mechanism
/// whose responses at different Y-instances are mutually independent and
/// which reproduces the original table exactly.
pub fn canonical_mechanism_prior(d: &Diagram, x: &str, caps: &Caps) -> Result<MechanismSpec> {
    require_valid(d)?;
    let xi = d.index_of(x)?;
    let fixed = d.fixed_nodes();
    let split = split_parents(d, xi, &fixed)?;
    build_spec(d, xi, &split, None, caps)
}

fn build_spec(
    d: &Diagram,
    xi: usize,
    split: &Split,
    user_prior: Option<&ConditionalTable>,
    caps: &Caps,
) -> Result<MechanismSpec> {
    let target = d.node_at(xi).variable.clone();
    let domain: Vec<Variable> = split.domain.iter().map(|&i| d.node_at(i).variable.clone()).collect();
    let domain_names: Vec<&str> = domain.iter().map(|v| v.name.as_str()).collect();
    let mappings = enumerate_mechanism_states(&target, &domain, caps)?;
    let fixed_parents: Vec<String> = split.fixed_parents.iter().map(|&i| d.name(i).to_string()).collect();
    let prior = match user_prior {
        Some(t) => t.clone(),
        None => product_prior(d, split, &mappings),
    };
    Ok(MechanismSpec {
        node: mechanism_name(&target.name, &domain_names),
        target,
        domain,
        fixed_parents,
        mappings,
        prior,
    })
}

fn product_prior(d: &Diagram, split: &Split, mappings: &[Vec<usize>]) -> ConditionalTable {
    let t = &split.table;
    let parent_idx: Vec<usize> = t
        .parent_order
        .iter()
        .map(|p| d.index_of(p).expect("validated parent"))
        .collect();
    let parent_cards: Vec<usize> = parent_idx.iter().map(|&i| d.node_at(i).variable.card()).collect();
    let y_cards: Vec<usize> = split.domain.iter().map(|&i| d.node_at(i).variable.card()).collect();
    let z_cards: Vec<usize> = split
        .fixed_parents
        .iter()
        .map(|&i| d.node_at(i).variable.card())
        .collect();
    let y_instances: Vec<Vec<usize>> = Odometer::new(&y_cards).collect();
    let mut rows = Vec::new();
    for z in Odometer::new(&z_cards) {
        // original row index for each Y-instance under this z
        let cpt_rows: Vec<&Vec<f64>> = y_instances
            .iter()
            .map(|y| {
                let states: Vec<usize> = parent_idx
                    .iter()
                    .map(|p| {
                        if let Some(k) = split.domain.iter().position(|q| q == p) {
                            y[k]
                        } else {
                            let k = split.fixed_parents.iter().position(|q| q == p).unwrap();
                            z[k]
                        }
                    })
                    .collect();
                &t.rows[instance_index(&parent_cards, &states)]
            })
            .collect();
        rows.push(
            mappings
                .iter()
                .map(|f| f.iter().zip(&cpt_rows).map(|(&k, row)| row[k]).product())
                .collect(),
        );
    }
    ConditionalTable::new(
        split.fixed_parents.iter().map(|&i| d.name(i).to_string()).collect(),
        rows,
    )
}

/// Options for [`to_hcf`].
#[derive(Debug, Clone, Default)]
pub struct HcfOptions {
    /// Proceed even when the diagram is not annotated causal.
    pub assume_causal: bool,
    /// User-assessed mechanism priors keyed by target name. Parents may be
    /// fixed nodes or other mechanism nodes; rows range over the mappings.
    pub priors: BTreeMap<String, ConditionalTable>,
    pub caps: Caps,
}

/// A diagram in canonical form together with the mechanisms that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct HcfDiagram {
    pub diagram: Diagram,
    pub mechanisms: Vec<MechanismSpec>,
    /// Mechanism node name to the node it was extracted from.
    pub provenance: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

/// Names recorded for one mechanism in a serialized canonical-form diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismRecord {
    pub node: String,
    pub target: String,
    pub domain: Vec<String>,
    pub fixed_parents: Vec<String>,
}

impl HcfDiagram {
    /// Rebuilds mechanism specs from a diagram that already contains the
    /// mechanism nodes, checking that each node's states are the canonical
    /// mappings and that the result is in canonical form.
    pub fn from_records(diagram: Diagram, records: &[MechanismRecord]) -> Result<Self> {
        require_valid(&diagram)?;
        let mut mechanisms = Vec::new();
        let mut provenance = BTreeMap::new();
        for r in records {
            let node = diagram.node(&r.node)?;
            let NodeKind::Chance(prior) = &node.kind else {
                return Err(Error::NotCanonical(format!(
                    "mechanism `{}` must be a chance node",
                    r.node
                )));
            };
            let target = diagram.variable(&r.target)?.clone();
            let domain = r
                .domain
                .iter()
                .map(|n| diagram.variable(n).cloned())
                .collect::<Result<Vec<_>>>()?;
            let mappings = enumerate_mechanism_states(&target, &domain, &Caps::default())?;
            let spec = MechanismSpec {
                node: r.node.clone(),
                target,
                domain,
                fixed_parents: r.fixed_parents.clone(),
                mappings,
                prior: prior.clone(),
            };
            if spec.labels() != node.variable.states {
                return Err(Error::NotCanonical(format!(
                    "states of mechanism `{}` are not the mappings of `{}`",
                    r.node, r.target
                )));
            }
            provenance.insert(r.node.clone(), r.target.clone());
            mechanisms.push(spec);
        }
        ensure_canonical(&diagram)?;
        Ok(HcfDiagram {
            diagram,
            mechanisms,
            provenance,
            warnings: Vec::new(),
        })
    }

    pub fn records(&self) -> Vec<MechanismRecord> {
        self.mechanisms
            .iter()
            .map(|m| MechanismRecord {
                node: m.node.clone(),
                target: m.target.name.clone(),
                domain: m.domain_names(),
                fixed_parents: m.fixed_parents.clone(),
            })
            .collect()
    }

    pub fn mechanism_for(&self, target: &str) -> Option<&MechanismSpec> {
        self.mechanisms.iter().find(|m| m.target.name == target)
    }
}

/// Checks that `d` is valid and every chance node downstream of a decision is
/// deterministic, with no declared-fixed node downstream of a decision.
pub fn ensure_canonical(d: &Diagram) -> Result<()> {
    require_valid(d)?;
    let desc = d.decision_descendants();
    for &i in &desc {
        let node = d.node_at(i);
        if matches!(node.kind, NodeKind::Chance(_)) {
            return Err(Error::NotCanonical(format!(
                "chance node `{}` depends on a decision but is not deterministic",
                node.name()
            )));
        }
        if d.annotations().declared_fixed.contains(node.name()) {
            return Err(Error::NotCanonical(format!(
                "`{}` is declared fixed but depends on a decision",
                node.name()
            )));
        }
    }
    Ok(())
}

/// Rewrites `d` into canonical form. Every chance node outside the fixed set
/// gets a mechanism node and becomes a deterministic function of its non-fixed
/// parents and that mechanism; its fixed parents move to the mechanism.
/// Deterministic nodes and the utility node are left as they are.
pub fn to_hcf(d: &Diagram, opts: &HcfOptions) -> Result<HcfDiagram> {
    require_valid(d)?;
    if !d.annotations().causal && !opts.assume_causal {
        return Err(Error::NotCausal);
    }
    let fixed = d.fixed_nodes();
    for e in d.relevance_arcs() {
        let from = d.index_of(&e.from)?;
        if d.annotations().declared_fixed.contains(&e.to) && !fixed.contains(&from) {
            return Err(Error::ReassessmentRequired {
                from: e.from.clone(),
                to: e.to.clone(),
            });
        }
    }
    for group in &d.annotations().dependent_mechanisms {
        let missing: Vec<String> = group
            .iter()
            .filter(|n| !opts.priors.contains_key(*n))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(Error::DependentMechanismsUnassessed(missing));
        }
    }
    if let Some(name) = opts.priors.keys().find(|n| {
        d.index_of(n)
            .map(|i| fixed.contains(&i) || !matches!(d.node_at(i).kind, NodeKind::Chance(_)))
            .unwrap_or(true)
    }) {
        return Err(Error::NothingToExtract(format!(
            "a prior was supplied for `{name}`, which gets no mechanism"
        )));
    }

    let mut specs = Vec::new();
    for (i, node) in d.nodes().iter().enumerate() {
        if !matches!(node.kind, NodeKind::Chance(_)) || fixed.contains(&i) {
            continue;
        }
        let split = split_parents(d, i, &fixed)?;
        let spec = build_spec(d, i, &split, opts.priors.get(node.name()), &opts.caps)?;
        if d.contains(&spec.node) {
            return Err(Error::Format(format!(
                "mechanism name `{}` is already a variable",
                spec.node
            )));
        }
        specs.push(spec);
    }
    let mech_names: BTreeSet<&str> = specs.iter().map(|s| s.node.as_str()).collect();
    for s in &specs {
        for p in &s.prior.parent_order {
            let ok = mech_names.contains(p.as_str()) || d.index_of(p).map(|i| fixed.contains(&i)).unwrap_or(false);
            if !ok {
                return Err(Error::Format(format!(
                    "mechanism `{}` may only depend on fixed nodes and mechanisms, not `{p}`",
                    s.node
                )));
            }
        }
    }

    let by_target: BTreeMap<&str, &MechanismSpec> = specs.iter().map(|s| (s.target.name.as_str(), s)).collect();
    let mut parts = d.parts().clone();
    let mut nodes = Vec::with_capacity(parts.nodes.len() + specs.len());
    for node in parts.nodes.drain(..) {
        let Some(spec) = by_target.get(node.name()) else {
            nodes.push(node);
            continue;
        };
        nodes.push(Node {
            variable: spec.variable(),
            kind: NodeKind::Chance(spec.prior.clone()),
        });
        nodes.push(Node {
            variable: node.variable.clone(),
            kind: NodeKind::Deterministic(target_table(spec)),
        });
    }
    parts.nodes = nodes;
    parts.relevance_arcs.retain(|e| match by_target.get(e.to.as_str()) {
        Some(spec) => !spec.fixed_parents.contains(&e.from),
        None => true,
    });
    for s in &specs {
        for p in &s.prior.parent_order {
            parts.relevance_arcs.push(Edge::new(p.clone(), s.node.clone()));
        }
        parts
            .relevance_arcs
            .push(Edge::new(s.node.clone(), s.target.name.clone()));
    }
    parts.annotations.causal = true;
    let diagram = Diagram::validated(parts)?;
    ensure_canonical(&diagram)?;

    let warnings = independence_warnings(d, &specs);
    let provenance = specs.iter().map(|s| (s.node.clone(), s.target.name.clone())).collect();
    Ok(HcfDiagram {
        diagram,
        mechanisms: specs,
        provenance,
        warnings,
    })
}

fn target_table(spec: &MechanismSpec) -> ConditionalTable {
    let mut parent_order = spec.domain_names();
    parent_order.push(spec.node.clone());
    let mut cards: Vec<usize> = spec.domain.iter().map(Variable::card).collect();
    let q = cards.iter().product::<usize>();
    cards.push(spec.mappings.len());
    let r = spec.target.card();
    let rows = Odometer::new(&cards)
        .map(|st| {
            let (y, m) = st.split_at(st.len() - 1);
            let y_index = instance_index(&cards[..cards.len() - 1], y);
            debug_assert!(y_index < q);
            let k = spec.mappings[m[0]][y_index];
            (0..r).map(|s| if s == k { 1.0 } else { 0.0 }).collect()
        })
        .collect();
    ConditionalTable::new(parent_order, rows)
}

/// Two extracted nodes joined by an arc whose mechanisms both have no parents
/// are the pattern left behind by marginalizing a common cause; their
/// mechanisms are treated as independent unless declared otherwise.
fn independence_warnings(d: &Diagram, specs: &[MechanismSpec]) -> Vec<String> {
    let grouped = |a: &str, b: &str| {
        d.annotations()
            .dependent_mechanisms
            .iter()
            .any(|g| g.iter().any(|n| n == a) && g.iter().any(|n| n == b))
    };
    let parentless: BTreeSet<&str> = specs
        .iter()
        .filter(|s| s.prior.parent_order.is_empty())
        .map(|s| s.target.name.as_str())
        .collect();
    d.relevance_arcs()
        .iter()
        .filter(|e| parentless.contains(e.from.as_str()) && parentless.contains(e.to.as_str()))
        .filter(|e| !grouped(&e.from, &e.to))
        .map(|e| {
            format!(
                "mechanisms of `{}` and `{}` are assumed independent; if they share a \
                 marginalized common cause, declare them as dependent mechanisms and supply a joint prior",
                e.from, e.to
            )
        })
        .collect()
}

/// Result of [`check_marginal_reproduction`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MarginalReport {
    pub violations: Vec<String>,
    /// Number of `(x, y, z, k)` marginals compared.
    pub checked: usize,
    pub max_error: f64,
}

impl MarginalReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Tolerance for [`check_marginal_reproduction`].
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

/// Audits every mechanism: summing its prior over the mappings that send `y`
/// to `k` must give the original `P(x = k | y, z)`, and the rewritten target
/// must apply the mapping it is given. Never fails; problems are reported.
pub fn check_marginal_reproduction(orig: &Diagram, hcf: &HcfDiagram) -> MarginalReport {
    let mut report = MarginalReport::default();
    for m in &hcf.mechanisms {
        if let Err(e) = audit_mechanism(orig, hcf, m, &mut report) {
            report.violations.push(format!("mechanism `{}`: {e}", m.node));
        }
    }
    report
}

fn audit_mechanism(orig: &Diagram, hcf: &HcfDiagram, m: &MechanismSpec, report: &mut MarginalReport) -> Result<()> {
    let x = &m.target.name;
    let table = orig
        .node(x)?
        .kind
        .table()
        .ok_or_else(|| Error::NotUncertain(x.clone()))?
        .clone();
    let domain_names = m.domain_names();
    let expected: BTreeSet<&String> = domain_names.iter().chain(&m.fixed_parents).collect();
    let actual: BTreeSet<&String> = table.parent_order.iter().collect();
    if expected != actual {
        report.violations.push(format!(
            "`{x}`: original parents {:?} are not the mechanism's domain plus fixed parents",
            table.parent_order
        ));
        return Ok(());
    }
    let parent_vars: Vec<Variable> = table
        .parent_order
        .iter()
        .map(|p| orig.variable(p).cloned())
        .collect::<Result<_>>()?;
    let parent_cards: Vec<usize> = parent_vars.iter().map(Variable::card).collect();
    let z_vars: Vec<Variable> = m
        .fixed_parents
        .iter()
        .map(|p| orig.variable(p).cloned())
        .collect::<Result<_>>()?;
    let z_cards: Vec<usize> = z_vars.iter().map(Variable::card).collect();
    let y_cards: Vec<usize> = m.domain.iter().map(Variable::card).collect();
    let reads_prior_directly = {
        let a: BTreeSet<&String> = m.prior.parent_order.iter().collect();
        let b: BTreeSet<&String> = m.fixed_parents.iter().collect();
        a == b
    };
    let decisions = decision_instances(&hcf.diagram).into_iter().next().unwrap_or_default();

    for z in Odometer::new(&z_cards) {
        let z_assignment: Assignment = z_vars
            .iter()
            .zip(&z)
            .map(|(v, &s)| (v.name.clone(), v.states[s].clone()))
            .collect();
        let p_f: Vec<f64> = if reads_prior_directly {
            let cards: Vec<usize> = m
                .prior
                .parent_order
                .iter()
                .map(|p| orig.variable(p).map(Variable::card))
                .collect::<Result<_>>()?;
            let states: Vec<usize> = m
                .prior
                .parent_order
                .iter()
                .map(|p| z[m.fixed_parents.iter().position(|q| q == p).unwrap()])
                .collect();
            m.prior.rows[instance_index(&cards, &states)].clone()
        } else {
            match posterior(&hcf.diagram, &decisions, &z_assignment, &[m.node.as_str()]) {
                Ok(f) => f.values().to_vec(),
                Err(Error::ZeroProbabilityEvidence) => continue,
                Err(e) => return Err(e),
            }
        };
        for (yi, y) in Odometer::new(&y_cards).enumerate() {
            let states: Vec<usize> = table
                .parent_order
                .iter()
                .map(|p| match domain_names.iter().position(|q| q == p) {
                    Some(k) => y[k],
                    None => z[m.fixed_parents.iter().position(|q| q == p).unwrap()],
                })
                .collect();
            let row = &table.rows[instance_index(&parent_cards, &states)];
            for (k, &want) in row.iter().enumerate() {
                let got: f64 = m
                    .mappings
                    .iter()
                    .zip(&p_f)
                    .filter(|(f, _)| f[yi] == k)
                    .map(|(_, p)| p)
                    .sum();
                let err = (got - want).abs();
                report.checked += 1;
                report.max_error = report.max_error.max(err);
                if err.is_nan() || err > MARGINAL_TOLERANCE {
                    let ykey: Vec<String> = m
                        .domain
                        .iter()
                        .zip(&y)
                        .map(|(v, &s)| format!("{}={}", v.name, v.states[s]))
                        .collect();
                    report.violations.push(format!(
                        "`{x}` = {} at [{}] given [{}]: mechanism gives {got}, table gives {want}",
                        m.target.states[k],
                        ykey.join(","),
                        z_assignment
                    ));
                }
            }
        }
    }
    audit_target_table(hcf, m, report)
}

fn audit_target_table(hcf: &HcfDiagram, m: &MechanismSpec, report: &mut MarginalReport) -> Result<()> {
    let x = &m.target.name;
    let NodeKind::Deterministic(t) = &hcf.diagram.node(x)?.kind else {
        report
            .violations
            .push(format!("`{x}` is not deterministic in the canonical form"));
        return Ok(());
    };
    let cards: Vec<usize> = t
        .parent_order
        .iter()
        .map(|p| hcf.diagram.variable(p).map(Variable::card))
        .collect::<Result<_>>()?;
    let domain_names = m.domain_names();
    let positions: Vec<Option<usize>> = t
        .parent_order
        .iter()
        .map(|p| domain_names.iter().position(|q| q == p))
        .collect();
    let Some(mpos) = t.parent_order.iter().position(|p| *p == m.node) else {
        report
            .violations
            .push(format!("`{x}` does not read its mechanism `{}`", m.node));
        return Ok(());
    };
    if positions.iter().filter(|p| p.is_some()).count() != domain_names.len()
        || t.parent_order.len() != domain_names.len() + 1
    {
        report.violations.push(format!(
            "`{x}` reads {:?}, expected its domain plus `{}`",
            t.parent_order, m.node
        ));
        return Ok(());
    }
    for st in Odometer::new(&cards) {
        let y: Vec<usize> = {
            let mut y = vec![0; domain_names.len()];
            for (i, p) in positions.iter().enumerate() {
                if let Some(k) = p {
                    y[*k] = st[i];
                }
            }
            y
        };
        let want = m.apply(st[mpos], &y);
        let row = &t.rows[instance_index(&cards, &st)];
        if row[want] != 1.0 {
            report
                .violations
                .push(format!("`{x}` does not apply mapping `{}`", m.labels()[st[mpos]]));
        }
    }
    Ok(())
}
