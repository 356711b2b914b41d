//! Exact inference: full-joint enumeration and variable elimination.
//!
//! Decisions are treated as given constants. A set decision composes with its
//! target: `do_nothing` defers to the target's table, `set=k` forces state `k`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::instances::{instance_count, Odometer};
use crate::model::{Assignment, Diagram, Variable};
use crate::net::Net;
use crate::validate::validate_diagram;
use crate::Caps;

pub(crate) fn require_valid(d: &Diagram) -> Result<()> {
    let r = validate_diagram(d);
    if r.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidDiagram(r))
    }
}

/// Every instance of the diagram's decisions, in declaration order.
pub fn decision_instances(d: &Diagram) -> Vec<Assignment> {
    let decisions: Vec<Variable> = d
        .decisions()
        .into_iter()
        .map(|i| d.node_at(i).variable.clone())
        .collect();
    let cards: Vec<usize> = decisions.iter().map(Variable::card).collect();
    Odometer::new(&cards)
        .map(|st| {
            decisions
                .iter()
                .zip(st)
                .map(|(v, s)| (v.name.clone(), v.states[s].clone()))
                .collect()
        })
        .collect()
}

fn check_joint_size(net: &Net, caps: &Caps) -> Result<()> {
    let cards: Vec<usize> = net.uncertain().iter().map(|&v| net.card(v)).collect();
    let size = cards.iter().fold(1u128, |a, &c| a.saturating_mul(c as u128));
    if size > caps.joint_entries {
        return Err(Error::StateSpaceExceeded {
            what: "joint table entries",
            size,
            cap: caps.joint_entries,
        });
    }
    Ok(())
}

/// `P(U | D = decisions)` over every chance and deterministic node, in
/// declaration order, by enumerating the product of local distributions.
pub fn joint(d: &Diagram, decisions: &Assignment) -> Result<Factor> {
    joint_with_caps(d, decisions, &Caps::default())
}

pub fn joint_with_caps(d: &Diagram, decisions: &Assignment, caps: &Caps) -> Result<Factor> {
    require_valid(d)?;
    let net = Net::new(d)?;
    check_joint_size(&net, caps)?;
    let fixed = net.decision_states(decisions)?;
    let scope = net.uncertain();
    let cards: Vec<usize> = scope.iter().map(|&v| net.card(v)).collect();
    let mut values = vec![0.0; instance_count(&cards)];
    net.for_each_support(&fixed, |full, p| {
        let idx = scope.iter().fold(0, |acc, &v| acc * net.card(v) + full[v]);
        values[idx] += p;
    });
    Factor::new(scope.iter().map(|&v| net.vars[v].clone()).collect(), values)
}

struct Resolved {
    net: Net,
    fixed: Vec<Option<usize>>,
    query: Vec<usize>,
}

fn resolve<S: AsRef<str>>(d: &Diagram, decisions: &Assignment, evidence: &Assignment, query: &[S]) -> Result<Resolved> {
    require_valid(d)?;
    let net = Net::new(d)?;
    let mut fixed = net.decision_states(decisions)?;
    for (name, state) in evidence.iter() {
        let v = d.index_of(name)?;
        if !net.is_uncertain(v) {
            return Err(Error::NotUncertain(name.to_string()));
        }
        fixed[v] = Some(net.state_of(v, state)?);
    }
    let mut seen = BTreeSet::new();
    let mut q = Vec::new();
    for name in query {
        let name = name.as_ref();
        let v = d.index_of(name)?;
        if !net.is_uncertain(v) {
            return Err(Error::NotUncertain(name.to_string()));
        }
        if evidence.contains(name) {
            return Err(Error::OverlappingSets(format!("query and evidence share `{name}`")));
        }
        if seen.insert(v) {
            q.push(v);
        }
    }
    Ok(Resolved { net, fixed, query: q })
}

/// `P(query | evidence, D = decisions)` by variable elimination with a greedy
/// min-fill order (ties broken by variable name).
pub fn posterior<S: AsRef<str>>(
    d: &Diagram,
    decisions: &Assignment,
    evidence: &Assignment,
    query: &[S],
) -> Result<Factor> {
    let r = resolve(d, decisions, evidence, query)?;
    let net = &r.net;
    let mut factors: Vec<Factor> = net
        .uncertain()
        .into_iter()
        .map(|v| {
            let mut f = net.family_factor(v);
            for (u, s) in r.fixed.iter().enumerate() {
                if let Some(s) = s {
                    f = f.reduce(&net.vars[u].name, *s);
                }
            }
            f
        })
        .collect();
    let keep: BTreeSet<&str> = r.query.iter().map(|&v| net.vars[v].name.as_str()).collect();
    let mut remaining: BTreeSet<String> = factors
        .iter()
        .flat_map(|f| f.scope().into_iter().map(str::to_string))
        .filter(|n| !keep.contains(n.as_str()))
        .collect();
    while let Some(var) = next_to_eliminate(&factors, &remaining) {
        remaining.remove(&var);
        let (touch, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.position(&var).is_some());
        factors = rest;
        let prod = touch.iter().fold(Factor::unit(), |acc, f| acc.product(f));
        factors.push(prod.sum_out(&var));
    }
    let result = factors.iter().fold(Factor::unit(), |acc, f| acc.product(f));
    let names: Vec<&str> = r.query.iter().map(|&v| net.vars[v].name.as_str()).collect();
    result.reorder(&names).normalized()
}

fn next_to_eliminate(factors: &[Factor], remaining: &BTreeSet<String>) -> Option<String> {
    let mut best: Option<(usize, &String)> = None;
    for var in remaining {
        let mut neighbours: BTreeSet<&str> = BTreeSet::new();
        for f in factors.iter().filter(|f| f.position(var).is_some()) {
            neighbours.extend(f.scope().into_iter().filter(|n| n != var));
        }
        let nb: Vec<&str> = neighbours.into_iter().collect();
        let mut fill = 0;
        for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                let linked = factors
                    .iter()
                    .any(|f| f.position(nb[i]).is_some() && f.position(nb[j]).is_some());
                if !linked {
                    fill += 1;
                }
            }
        }
        // BTreeSet iteration is name-ordered, so strict < keeps the first name on ties
        if best.is_none_or(|(b, _)| fill < b) {
            best = Some((fill, var));
        }
    }
    best.map(|(_, v)| v.clone())
}

/// Same contract as [`posterior`], computed from the full joint.
pub fn posterior_by_enumeration<S: AsRef<str>>(
    d: &Diagram,
    decisions: &Assignment,
    evidence: &Assignment,
    query: &[S],
) -> Result<Factor> {
    let r = resolve(d, decisions, evidence, query)?;
    check_joint_size(&r.net, &Caps::default())?;
    let mut j = joint(d, decisions)?;
    for (name, state) in evidence.iter() {
        let v = d.index_of(name)?;
        j = j.reduce(name, r.net.state_of(v, state)?);
    }
    let names: Vec<&str> = r.query.iter().map(|&v| r.net.vars[v].name.as_str()).collect();
    j.marginal(&names).normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn a(pairs: &[(&str, &str)]) -> Assignment {
        pairs.iter().copied().collect()
    }

    #[test]
    fn m1_joint_reads_the_row() {
        let j = joint(&fixtures::m1(0.05, 0.2), &a(&[("smoke", "yes")])).unwrap();
        assert!((j.prob(&[("lung_cancer", "yes")]).unwrap() - 0.2).abs() < 1e-15);
        assert!((j.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coin_win_is_half_for_either_bet() {
        let d = fixtures::coin(0.5, false);
        for bet in ["heads", "tails"] {
            let j = joint(&d, &a(&[("d", bet)])).unwrap();
            assert_eq!(j.prob(&[("w", "win")]).unwrap(), 0.5);
        }
    }

    #[test]
    fn set_decision_forces_target() {
        let d = fixtures::m1_with_set_decision();
        for smoke in ["no", "yes"] {
            let j = joint(&d, &a(&[("smoke", smoke), ("s_lc", "set=no")])).unwrap();
            assert_eq!(j.prob(&[("lung_cancer", "no")]).unwrap(), 1.0);
        }
        let j = joint(&d, &a(&[("smoke", "yes"), ("s_lc", "do_nothing")])).unwrap();
        assert!((j.prob(&[("lung_cancer", "yes")]).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn missing_decision() {
        let d = fixtures::m1(0.05, 0.2);
        assert_eq!(
            joint(&d, &Assignment::new()),
            Err(Error::MissingDecision("smoke".into()))
        );
    }

    #[test]
    fn coin_posterior_is_deterministic() {
        let d = fixtures::coin(0.5, false);
        let p = posterior(&d, &a(&[("d", "heads")]), &a(&[("w", "win")]), &["c"]).unwrap();
        assert_eq!(p.prob(&[("c", "heads")]).unwrap(), 1.0);
    }

    #[test]
    fn m1_posterior_without_evidence() {
        let d = fixtures::m1(0.05, 0.2);
        let p = posterior::<&str>(&d, &a(&[("smoke", "yes")]), &Assignment::new(), &["lung_cancer"]).unwrap();
        assert!((p.prob(&[("lung_cancer", "yes")]).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn evidence_on_deterministic_child_matches_enumeration() {
        // fixed parent + deterministic child: conditioning inverts the child
        let d = Diagram::builder()
            .chance("g", &["a", "b", "c"], &[], vec![vec![0.2, 0.5, 0.3]])
            .decision("s", &["no", "yes"])
            .deterministic("x", &["lo", "hi"], &["s", "g"], &[0, 0, 1, 1, 0, 1])
            .build();
        let dec = a(&[("s", "yes")]);
        let ev = a(&[("x", "hi")]);
        let ve = posterior(&d, &dec, &ev, &["g"]).unwrap();
        let en = posterior_by_enumeration(&d, &dec, &ev, &["g"]).unwrap();
        assert!(ve.max_abs_diff(&en).unwrap() < 1e-12);
        assert!((ve.prob(&[("g", "a")]).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_evidence() {
        let d = fixtures::coin(1.0, false);
        let r = posterior(&d, &a(&[("d", "heads")]), &a(&[("w", "lose")]), &["c"]);
        assert_eq!(r, Err(Error::ZeroProbabilityEvidence));
    }

    #[test]
    fn lifestyle_variable_elimination_matches_enumeration() {
        let d = fixtures::lifestyle();
        for dec in decision_instances(&d) {
            let ev = a(&[("length_of_life", "long")]);
            let q = ["lung_cancer", "genotype"];
            let ve = posterior(&d, &dec, &ev, &q).unwrap();
            let en = posterior_by_enumeration(&d, &dec, &ev, &q).unwrap();
            assert!(ve.max_abs_diff(&en).unwrap() < 1e-12);
        }
    }
}
