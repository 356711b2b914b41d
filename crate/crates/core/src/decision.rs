//! Optimal policies and value of information by exhaustive policy search.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::inference::{decision_instances, joint, require_valid};
use crate::instances::{instance_index, Odometer};
use crate::model::{Assignment, Diagram, NodeKind, Variable};
use crate::net::Net;
use crate::Caps;

/// Margin an alternative policy must beat the incumbent by to replace it.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// What one decision chooses for each instance of its information parents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionRule {
    pub decision: Variable,
    /// Information parents in declaration order.
    pub observed: Vec<Variable>,
    /// `choice[i]` is the alternative index for the `i`-th observed instance.
    pub choice: Vec<usize>,
}

impl DecisionRule {
    /// The alternative chosen when the observed variables take `states`.
    pub fn choose(&self, states: &[usize]) -> usize {
        let cards: Vec<usize> = self.observed.iter().map(Variable::card).collect();
        self.choice[instance_index(&cards, states)]
    }

    /// `(observed instance, alternative)` labels, in instance order.
    pub fn entries(&self) -> Vec<(Assignment, String)> {
        let cards: Vec<usize> = self.observed.iter().map(Variable::card).collect();
        Odometer::new(&cards)
            .zip(&self.choice)
            .map(|(st, &c)| {
                let inst = self
                    .observed
                    .iter()
                    .zip(&st)
                    .map(|(v, &s)| (v.name.clone(), v.states[s].clone()))
                    .collect();
                (inst, self.decision.states[c].clone())
            })
            .collect()
    }
}

/// One rule per decision, in decision order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub rules: Vec<DecisionRule>,
}

impl Policy {
    pub fn rule(&self, decision: &str) -> Option<&DecisionRule> {
        self.rules.iter().find(|r| r.decision.name == decision)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            for (inst, alt) in r.entries() {
                if inst.is_empty() {
                    writeln!(f, "{} = {alt}", r.decision.name)?;
                } else {
                    writeln!(f, "{} = {alt} when {inst}", r.decision.name)?;
                }
            }
        }
        Ok(())
    }
}

struct Layout {
    /// Diagram indices of the decisions, in decision order.
    decisions: Vec<usize>,
    observed: Vec<Vec<usize>>,
    observed_cards: Vec<Vec<usize>>,
    /// Offset of each rule's digits in the flat policy vector.
    offsets: Vec<usize>,
    /// One digit per (decision, observed instance); its radix is the decision's card.
    radices: Vec<usize>,
}

fn layout(d: &Diagram, caps: &Caps) -> Result<Layout> {
    let order: Vec<usize> = match d.decision_order() {
        Some(o) => o.iter().map(|n| d.index_of(n)).collect::<Result<_>>()?,
        None if d.decisions().is_empty() => Vec::new(),
        None => return Err(Error::NoDecisionOrder),
    };
    let mut observed = Vec::new();
    let mut observed_cards = Vec::new();
    let mut offsets = Vec::new();
    let mut radices = Vec::new();
    let mut size: u128 = 1;
    for &k in &order {
        let name = d.name(k);
        let mut obs: Vec<usize> = d
            .information_arcs()
            .iter()
            .filter(|e| e.to == name)
            .map(|e| d.index_of(&e.from))
            .collect::<Result<_>>()?;
        obs.sort_unstable();
        let cards: Vec<usize> = obs.iter().map(|&i| d.node_at(i).variable.card()).collect();
        let instances: usize = cards.iter().product();
        let card = d.node_at(k).variable.card();
        offsets.push(radices.len());
        radices.extend(std::iter::repeat_n(card, instances));
        let u32_instances = u32::try_from(instances).unwrap_or(u32::MAX);
        size = size.saturating_mul((card as u128).checked_pow(u32_instances).unwrap_or(u128::MAX));
        observed.push(obs);
        observed_cards.push(cards);
    }
    if size > caps.policies {
        return Err(Error::StateSpaceExceeded {
            what: "policies",
            size,
            cap: caps.policies,
        });
    }
    Ok(Layout {
        decisions: order,
        observed,
        observed_cards,
        offsets,
        radices,
    })
}

/// An entry of the expected-utility table: a decision instance, the observed
/// instance index of each decision, and the summed `P * U` of all outcomes
/// sharing them.
struct Entry {
    decisions: Vec<usize>,
    observed: Vec<usize>,
    weight: f64,
}

fn utility_table(d: &Diagram, lay: &Layout) -> Result<Vec<Entry>> {
    let net = Net::new(d)?;
    let u = net.utility().ok_or(Error::NoUtilityNode)?;
    let cards: Vec<usize> = lay.decisions.iter().map(|&k| net.card(k)).collect();
    let mut entries = Vec::new();
    for inst in Odometer::new(&cards) {
        let mut fixed = vec![None; net.len()];
        for (&k, &s) in lay.decisions.iter().zip(&inst) {
            fixed[k] = Some(s);
        }
        let mut acc: HashMap<Vec<usize>, f64> = HashMap::new();
        net.for_each_support(&fixed, |full, p| {
            let key: Vec<usize> = lay
                .observed
                .iter()
                .zip(&lay.observed_cards)
                .map(|(obs, c)| {
                    let st: Vec<usize> = obs.iter().map(|&i| full[i]).collect();
                    instance_index(c, &st)
                })
                .collect();
            *acc.entry(key).or_insert(0.0) += p * net.utility_value(u, full);
        });
        let mut keyed: Vec<(Vec<usize>, f64)> = acc.into_iter().collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        entries.extend(keyed.into_iter().map(|(observed, weight)| Entry {
            decisions: inst.clone(),
            observed,
            weight,
        }));
    }
    Ok(entries)
}

fn to_policy(d: &Diagram, lay: &Layout, digits: &[usize]) -> Policy {
    let rules = lay
        .decisions
        .iter()
        .enumerate()
        .map(|(r, &k)| {
            let n: usize = lay.observed_cards[r].iter().product();
            DecisionRule {
                decision: d.node_at(k).variable.clone(),
                observed: lay.observed[r].iter().map(|&i| d.node_at(i).variable.clone()).collect(),
                choice: digits[lay.offsets[r]..lay.offsets[r] + n].to_vec(),
            }
        })
        .collect();
    Policy { rules }
}

/// The expected-utility maximizing policy and its expected utility.
///
/// Policies are searched exhaustively in canonical order (decision order,
/// observed instances in lexicographic order, alternatives in state order);
/// a later policy replaces the incumbent only if it is better by more than
/// [`TIE_TOLERANCE`].
pub fn optimal_policy(d: &Diagram) -> Result<(Policy, f64)> {
    optimal_policy_with_caps(d, &Caps::default())
}

pub fn optimal_policy_with_caps(d: &Diagram, caps: &Caps) -> Result<(Policy, f64)> {
    require_valid(d)?;
    if d.utility().is_none() {
        return Err(Error::NoUtilityNode);
    }
    let lay = layout(d, caps)?;
    let entries = utility_table(d, &lay)?;
    let mut best: Option<(Vec<usize>, f64)> = None;
    for digits in Odometer::new(&lay.radices) {
        let eu: f64 = entries
            .iter()
            .filter(|e| {
                e.decisions
                    .iter()
                    .zip(&e.observed)
                    .zip(&lay.offsets)
                    .all(|((&chosen, &obs), &off)| digits[off + obs] == chosen)
            })
            .map(|e| e.weight)
            .sum();
        if best.as_ref().is_none_or(|(_, b)| eu > b + TIE_TOLERANCE) {
            best = Some((digits, eu));
        }
    }
    let (digits, eu) = best.expect("at least one policy");
    Ok((to_policy(d, &lay, &digits), eu))
}

/// Expected utility of `policy`, summed over the full joint of every decision
/// instance the policy can produce.
pub fn expected_utility(d: &Diagram, policy: &Policy) -> Result<f64> {
    require_valid(d)?;
    let u = d.utility().ok_or(Error::NoUtilityNode)?;
    let NodeKind::Utility(table) = &d.node_at(u).kind else {
        unreachable!("utility index points at a utility node")
    };
    let mut total = 0.0;
    for inst in decision_instances(d) {
        let j = joint(d, &inst)?;
        let scope: Vec<String> = j.scope().iter().map(|s| s.to_string()).collect();
        let state_of = |st: &[usize], name: &str| -> Result<usize> {
            if let Some(p) = scope.iter().position(|n| n == name) {
                return Ok(st[p]);
            }
            let v = d.variable(name)?;
            let label = inst.get(name).ok_or_else(|| Error::MissingDecision(name.to_string()))?;
            v.state_index(label).ok_or_else(|| Error::UnknownState {
                variable: name.to_string(),
                state: label.to_string(),
            })
        };
        for (idx, st) in Odometer::new(&j.cards()).enumerate() {
            let p = j.values()[idx];
            if p == 0.0 {
                continue;
            }
            let mut consistent = true;
            for r in &policy.rules {
                let obs = r
                    .observed
                    .iter()
                    .map(|v| state_of(&st, &v.name))
                    .collect::<Result<Vec<_>>>()?;
                if r.decision.states[r.choose(&obs)] != inst.get(&r.decision.name).unwrap_or_default() {
                    consistent = false;
                    break;
                }
            }
            if !consistent {
                continue;
            }
            let ps = table
                .parents
                .iter()
                .map(|n| state_of(&st, n))
                .collect::<Result<Vec<_>>>()?;
            let cards: Vec<usize> = table
                .parents
                .iter()
                .map(|n| d.variable(n).map(Variable::card))
                .collect::<Result<_>>()?;
            total += p * table.values[instance_index(&cards, &ps)];
        }
    }
    Ok(total)
}

/// Options for [`value_of_information`].
#[derive(Debug, Clone, Default)]
pub struct VoiOptions {
    /// Also let every later decision observe the variable.
    pub no_forgetting: bool,
    pub caps: Caps,
}

/// Gain in optimal expected utility from observing `x` before `decision`:
/// the optimum with the information arc minus the optimum without it.
///
/// Only variables in the fixed set can be observed before deciding;
/// anything the decisions can influence is rejected.
pub fn value_of_information(d: &Diagram, x: &str, decision: &str, opts: &VoiOptions) -> Result<f64> {
    require_valid(d)?;
    let xi = d.index_of(x)?;
    let di = d.index_of(decision)?;
    if !d.node_at(di).kind.is_decision() {
        return Err(Error::NotADecision(decision.to_string()));
    }
    if !d.node_at(xi).kind.is_uncertain() {
        return Err(Error::NotUncertain(x.to_string()));
    }
    if !d.fixed_nodes().contains(&xi) {
        return Err(Error::NotObservable(x.to_string()));
    }
    let mut targets = vec![decision.to_string()];
    if opts.no_forgetting {
        let order = d.decision_order().ok_or(Error::NoDecisionOrder)?;
        if let Some(p) = order.iter().position(|n| n == decision) {
            targets.extend(order[p + 1..].iter().cloned());
        }
    }
    let mut with = d.clone();
    for t in &targets {
        let exists = with.information_arcs().iter().any(|e| e.from == x && e.to == *t);
        if !exists {
            with = with.with_information_arc(x, t);
        }
    }
    if with.topological_order().is_none() {
        return Err(Error::CycleIntroduced {
            from: x.to_string(),
            to: decision.to_string(),
        });
    }
    let (_, base) = optimal_policy_with_caps(d, &opts.caps)?;
    let (_, informed) = optimal_policy_with_caps(&with, &opts.caps)?;
    Ok(informed - base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::hcf::{to_hcf, HcfOptions};

    #[test]
    fn blind_coin_bet() {
        let (p, eu) = optimal_policy(&fixtures::coin_with_utility(0.5, false)).unwrap();
        assert_eq!(eu, 0.5);
        // ties keep the first alternative
        assert_eq!(p.rule("d").unwrap().choice, vec![0]);
    }

    #[test]
    fn observed_coin_bet() {
        let d = fixtures::coin_with_utility(0.5, true);
        let (p, eu) = optimal_policy(&d).unwrap();
        assert_eq!(eu, 1.0);
        assert_eq!(p.rule("d").unwrap().choice, vec![0, 1]);
        assert_eq!(expected_utility(&d, &p).unwrap(), 1.0);
    }

    #[test]
    fn certain_coin() {
        let (p, eu) = optimal_policy(&fixtures::coin_with_utility(1.0, false)).unwrap();
        assert_eq!(eu, 1.0);
        assert_eq!(p.rule("d").unwrap().entries()[0].1, "heads");
    }

    #[test]
    fn voi_on_coin() {
        let o = VoiOptions::default();
        let d = fixtures::coin_with_utility(0.5, false);
        assert_eq!(value_of_information(&d, "c", "d", &o).unwrap(), 0.5);
        let certain = fixtures::coin_with_utility(1.0, false);
        assert_eq!(value_of_information(&certain, "c", "d", &o).unwrap(), 0.0);
        assert_eq!(
            value_of_information(&d, "w", "d", &o),
            Err(Error::NotObservable("w".into()))
        );
    }

    #[test]
    fn already_observed_is_worth_nothing() {
        let d = fixtures::coin_with_utility(0.5, true);
        assert_eq!(value_of_information(&d, "c", "d", &VoiOptions::default()).unwrap(), 0.0);
    }

    #[test]
    fn lifestyle_policy_matches_enumeration() {
        let d = fixtures::lifestyle();
        let (p, eu) = optimal_policy(&d).unwrap();
        assert!((expected_utility(&d, &p).unwrap() - eu).abs() < 1e-10);
        let voi = value_of_information(&d, "genotype", "diet", &VoiOptions::default()).unwrap();
        assert!(voi >= -1e-12);
    }

    #[test]
    fn canonical_form_makes_every_chance_node_observable() {
        let d = fixtures::smoking_pleasure();
        assert!(matches!(
            value_of_information(&d, "lung_cancer", "smoke", &VoiOptions::default()),
            Err(Error::NotObservable(_))
        ));
        let h = to_hcf(&d, &HcfOptions::default()).unwrap();
        for m in &h.mechanisms {
            let v = value_of_information(&h.diagram, &m.node, "smoke", &VoiOptions::default()).unwrap();
            assert!(v >= -1e-12);
        }
    }

    #[test]
    fn errors() {
        let mut parts = fixtures::coin(0.5, false).into_parts();
        assert_eq!(
            optimal_policy(&Diagram::from_parts(parts.clone())).unwrap_err(),
            Error::NoUtilityNode
        );
        parts = fixtures::coin_with_utility(0.5, false).into_parts();
        parts.decision_order = None;
        assert_eq!(
            optimal_policy(&Diagram::from_parts(parts)).unwrap_err(),
            Error::NoDecisionOrder
        );
        let caps = Caps {
            policies: 3,
            ..Caps::default()
        };
        assert!(optimal_policy_with_caps(&fixtures::coin_with_utility(0.5, true), &caps)
            .unwrap_err()
            .is_resource_cap());
    }
}
