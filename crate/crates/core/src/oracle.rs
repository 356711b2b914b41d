//! Semantic fixed sets and causes, computed by enumerating functional worlds.
//!
//! In canonical form every uncertainty sits in the fixed set, so one joint
//! instance of the fixed set (a world) together with a decision instance
//! determines every other variable. `x` is in the conditional fixed set of `C`
//! when, inside each world of positive weight, any two decision instances that
//! agree on `C` also agree on `x`.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::graph::{d_separated_indices, minimal_subsets, sorted_by_name, to_name_set, CauseMethod, CauseReport};
use crate::hcf::ensure_canonical;
use crate::inference::{decision_instances, joint_with_caps, require_valid};
use crate::instances::Odometer;
use crate::model::{Assignment, Diagram};
use crate::net::{Kind, Net};
use crate::Caps;

/// Every positive-weight world of a canonical-form diagram, with the value of
/// every node under every decision instance.
#[derive(Debug, Clone)]
pub struct FunctionalWorlds {
    names: Vec<String>,
    fixed: BTreeSet<usize>,
    weights: Vec<f64>,
    decisions: Vec<Assignment>,
    /// `values[w][k]` holds one entry per node: a state index, or the bits of
    /// the utility value.
    values: Vec<Vec<Vec<u64>>>,
}

impl FunctionalWorlds {
    /// Enumerates worlds of `d`, which must be in canonical form.
    pub fn enumerate(d: &Diagram, caps: &Caps) -> Result<Self> {
        ensure_canonical(d)?;
        let net = Net::new(d)?;
        let fixed = d.fixed_nodes();
        let decisions = net.decisions();
        let dec_cards: Vec<usize> = decisions.iter().map(|&v| net.card(v)).collect();
        let dec_instances: Vec<Vec<usize>> = Odometer::new(&dec_cards).collect();
        let pairs = (dec_instances.len() as u128).pow(2);
        let max_worlds = caps.world_pairs / pairs.max(1);

        let order: Vec<usize> = net.topo.iter().copied().filter(|v| fixed.contains(v)).collect();
        let rest: Vec<usize> = net
            .topo
            .iter()
            .copied()
            .filter(|&v| net.kinds[v] != Kind::Decision && !fixed.contains(&v))
            .collect();
        let mut worlds: Vec<(Vec<usize>, f64)> = Vec::new();
        let mut full = vec![0usize; net.len()];
        let mut overflow = false;
        world_dfs(&net, &order, 0, 1.0, &mut full, &mut |full, p| {
            if worlds.len() as u128 >= max_worlds {
                overflow = true;
                return false;
            }
            worlds.push((full.to_vec(), p));
            true
        });
        if overflow {
            let size = fixed
                .iter()
                .fold(1u128, |a, &v| a.saturating_mul(net.card(v) as u128))
                .saturating_mul(pairs);
            return Err(Error::StateSpaceExceeded {
                what: "world pairs",
                size,
                cap: caps.world_pairs,
            });
        }

        let mut values = Vec::with_capacity(worlds.len());
        let mut weights = Vec::with_capacity(worlds.len());
        for (world, w) in worlds {
            let mut per_decision = Vec::with_capacity(dec_instances.len());
            for inst in &dec_instances {
                let mut full = world.clone();
                for (&v, &s) in decisions.iter().zip(inst) {
                    full[v] = s;
                }
                let mut row = vec![0u64; net.len()];
                for &v in &rest {
                    if net.kinds[v] == Kind::Utility {
                        continue;
                    }
                    full[v] = net
                        .forced_state(v, &full)
                        .ok_or_else(|| Error::NotCanonical(format!("`{}` has no certain state", net.vars[v].name)))?;
                }
                for v in 0..net.len() {
                    row[v] = if net.kinds[v] == Kind::Utility {
                        net.utility_value(v, &full).to_bits()
                    } else {
                        full[v] as u64
                    };
                }
                per_decision.push(row);
            }
            values.push(per_decision);
            weights.push(w);
        }
        Ok(FunctionalWorlds {
            names: net.vars.iter().map(|v| v.name.clone()).collect(),
            fixed,
            weights,
            decisions: decision_instances(d),
            values,
        })
    }

    pub fn world_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, w: usize) -> f64 {
        self.weights[w]
    }

    /// Decision instances in the order used by [`FunctionalWorlds::value`].
    pub fn decision_instances(&self) -> &[Assignment] {
        &self.decisions
    }

    /// Node index by name.
    pub fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// State index (or utility bits) of node `v` in world `w` under decision instance `k`.
    pub fn value(&self, w: usize, k: usize, v: usize) -> u64 {
        self.values[w][k][v]
    }

    pub fn is_fixed(&self, v: usize) -> bool {
        self.fixed.contains(&v)
    }

    /// Whether `x` is in the conditional fixed set of `c` (node indices).
    pub fn fixed_given(&self, x: usize, c: &[usize]) -> bool {
        let mut seen: HashMap<Vec<u64>, u64> = HashMap::new();
        for per_decision in &self.values {
            seen.clear();
            for row in per_decision {
                let key: Vec<u64> = c.iter().map(|&v| row[v]).collect();
                match seen.get(&key) {
                    Some(&val) if val != row[x] => return false,
                    Some(_) => {}
                    None => {
                        seen.insert(key, row[x]);
                    }
                }
            }
        }
        true
    }
}

fn world_dfs(
    net: &Net,
    order: &[usize],
    depth: usize,
    p: f64,
    full: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize], f64) -> bool,
) -> bool {
    if depth == order.len() {
        return visit(full, p);
    }
    let v = order[depth];
    for k in 0..net.card(v) {
        full[v] = k;
        let q = net.prob(v, full, k);
        if q > 0.0 && !world_dfs(net, order, depth + 1, p * q, full, visit) {
            return false;
        }
    }
    true
}

/// Whether `x` is in the conditional fixed set of `c` in canonical-form `d`.
/// With `c` empty this tests membership in the fixed set itself.
pub fn oracle_fixed_set_member<S: AsRef<str>>(d: &Diagram, x: &str, c: &[S], caps: &Caps) -> Result<bool> {
    let worlds = FunctionalWorlds::enumerate(d, caps)?;
    let xi = worlds.index(x)?;
    let ci = c.iter().map(|n| worlds.index(n.as_ref())).collect::<Result<Vec<_>>>()?;
    Ok(worlds.fixed_given(xi, &ci))
}

/// Minimal semantic causes of `x`: every inclusion-minimal `C` with
/// `x` outside the fixed set and inside the conditional fixed set of `C`.
///
/// Candidates are decisions and non-fixed chance or deterministic nodes.
/// Fixed nodes never change across decisions within a world, so they can be
/// dropped from any qualifying set; the utility node is a value, not a cause.
pub fn oracle_causes(d: &Diagram, x: &str, caps: &Caps) -> Result<CauseReport> {
    let worlds = FunctionalWorlds::enumerate(d, caps)?;
    oracle_causes_in(d, &worlds, x, caps)
}

/// [`oracle_causes`] over worlds that have already been enumerated for `d`.
pub fn oracle_causes_in(d: &Diagram, worlds: &FunctionalWorlds, x: &str, caps: &Caps) -> Result<CauseReport> {
    let xi = d.index_of(x)?;
    if worlds.fixed_given(xi, &[]) {
        return Ok(CauseReport {
            target: x.to_string(),
            cause_sets: Vec::new(),
            method: CauseMethod::Oracle,
            reason: Some(format!("{x} ∈ F(D): it takes the same state under every decision")),
            warnings: Vec::new(),
        });
    }
    let pool: Vec<usize> = (0..d.len())
        .filter(|&i| i != xi && !d.node_at(i).kind.is_utility() && !worlds.is_fixed(i))
        .collect();
    if pool.len() > caps.blocking_pool {
        return Err(Error::NodeBudgetExceeded {
            pool: pool.len(),
            cap: caps.blocking_pool,
        });
    }
    let pool = sorted_by_name(d, pool);
    let sets = minimal_subsets(&pool, |c| worlds.fixed_given(xi, c));
    Ok(CauseReport {
        target: x.to_string(),
        cause_sets: sets.iter().map(|s| to_name_set(d, s)).collect(),
        method: CauseMethod::Oracle,
        reason: None,
        warnings: Vec::new(),
    })
}

/// Numerical independence threshold for the D-map scan.
pub const CI_TOLERANCE: f64 = 1e-9;

/// Outcome of [`oracle_is_d_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct DMapVerdict {
    pub is_d_map: bool,
    /// The first independence found that the graph does not show.
    pub counterexample: Option<String>,
    /// Number of (pair, conditioning set, decision instance) triples examined.
    pub checked: usize,
}

/// Scans every numerical conditional independence the diagram exhibits and
/// checks that the graph shows it as d-separation, with the decisions always
/// in the conditioning set.
///
/// Pairs of chance or deterministic nodes are tested per decision instance.
/// A decision `k` and a chance node `y` count as independent given `Z` when
/// `P(y | Z, D)` does not change with `k`, the other decisions held fixed;
/// the graph must then separate them given `Z` and the other decisions.
/// Conditioning sets range over chance and deterministic nodes, up to
/// `max_cond` of them.
pub fn oracle_is_d_map(d: &Diagram, max_cond: usize, caps: &Caps) -> Result<DMapVerdict> {
    require_valid(d)?;
    let uncertain = d.uncertain();
    let decisions = d.decisions();
    let instances = decision_instances(d);
    let joints = instances
        .iter()
        .map(|inst| joint_with_caps(d, inst, caps))
        .collect::<Result<Vec<Factor>>>()?;
    let mut checked = 0;
    let fail = |msg: String, checked: usize| DMapVerdict {
        is_d_map: false,
        counterexample: Some(msg),
        checked,
    };

    for (a, &x) in uncertain.iter().enumerate() {
        for &y in &uncertain[a + 1..] {
            let others: Vec<usize> = uncertain.iter().copied().filter(|&v| v != x && v != y).collect();
            for z in subsets_up_to(&others, max_cond) {
                let zd: BTreeSet<usize> = z.iter().copied().chain(decisions.iter().copied()).collect();
                let separated = d_separated_indices(d, &BTreeSet::from([x]), &BTreeSet::from([y]), &zd);
                if separated {
                    checked += instances.len();
                    continue;
                }
                for (inst, j) in instances.iter().zip(&joints) {
                    checked += 1;
                    if ci_deviation(j, d.name(x), d.name(y), &names(d, &z)) < CI_TOLERANCE {
                        return Ok(fail(
                            format!(
                                "`{}` and `{}` are independent given {{{}}} under [{inst}] but not d-separated",
                                d.name(x),
                                d.name(y),
                                names(d, &z).join(", ")
                            ),
                            checked,
                        ));
                    }
                }
            }
        }
    }

    for (di, &k) in decisions.iter().enumerate() {
        for &y in &uncertain {
            let others: Vec<usize> = uncertain.iter().copied().filter(|&v| v != y).collect();
            for z in subsets_up_to(&others, max_cond) {
                let zd: BTreeSet<usize> = z
                    .iter()
                    .copied()
                    .chain(decisions.iter().copied().filter(|&v| v != k))
                    .collect();
                let separated = d_separated_indices(d, &BTreeSet::from([k]), &BTreeSet::from([y]), &zd);
                if separated {
                    checked += 1;
                    continue;
                }
                // group decision instances that agree on every decision but k
                let mut groups: HashMap<Vec<String>, Vec<usize>> = HashMap::new();
                for (i, inst) in instances.iter().enumerate() {
                    let key = decisions
                        .iter()
                        .enumerate()
                        .filter(|&(e, _)| e != di)
                        .map(|(_, &v)| inst.get(d.name(v)).unwrap_or_default().to_string())
                        .collect();
                    groups.entry(key).or_default().push(i);
                }
                let mut keys: Vec<&Vec<String>> = groups.keys().collect();
                keys.sort();
                for key in keys {
                    checked += 1;
                    let members = &groups[key];
                    let tables: Vec<&Factor> = members.iter().map(|&i| &joints[i]).collect();
                    if invariant_in_decision(&tables, d.name(y), &names(d, &z)) {
                        return Ok(fail(
                            format!(
                                "`{}` does not depend on decision `{}` given {{{}}} under [{}] but is not d-separated from it",
                                d.name(y),
                                d.name(k),
                                names(d, &z).join(", "),
                                key.join(", ")
                            ),
                            checked,
                        ));
                    }
                }
            }
        }
    }
    Ok(DMapVerdict {
        is_d_map: true,
        counterexample: None,
        checked,
    })
}

fn names(d: &Diagram, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| d.name(i).to_string()).collect()
}

fn subsets_up_to(pool: &[usize], max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![(Vec::new(), 0usize)];
    for _ in 0..max.min(pool.len()) {
        let mut next = Vec::new();
        for (set, start) in frontier {
            for (i, &p) in pool.iter().enumerate().skip(start) {
                let mut s: Vec<usize> = set.clone();
                s.push(p);
                out.push(s.clone());
                next.push((s, i + 1));
            }
        }
        frontier = next;
    }
    out
}

/// Largest `|P(x, y | z) - P(x | z) P(y | z)|` over instances `z` of positive probability.
fn ci_deviation(joint: &Factor, x: &str, y: &str, z: &[String]) -> f64 {
    let mut scope: Vec<&str> = vec![x, y];
    scope.extend(z.iter().map(String::as_str));
    let m = joint.marginal(&scope);
    let cards = m.cards();
    let (cx, cy) = (cards[0], cards[1]);
    let zc = &cards[2..];
    let mut worst: f64 = 0.0;
    for zs in Odometer::new(zc) {
        let mut pxy = vec![vec![0.0; cy]; cx];
        let mut pz = 0.0;
        for (i, row) in pxy.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut st = vec![i, j];
                st.extend(&zs);
                *cell = m.at(&st);
                pz += *cell;
            }
        }
        if pz <= 0.0 {
            continue;
        }
        for row in &pxy {
            let px: f64 = row.iter().sum::<f64>() / pz;
            for (j, &cell) in row.iter().enumerate() {
                let py: f64 = pxy.iter().map(|r| r[j]).sum::<f64>() / pz;
                worst = worst.max((cell / pz - px * py).abs());
            }
        }
    }
    worst
}

/// Whether `P(y | z)` is the same in every table wherever `z` has positive probability.
fn invariant_in_decision(tables: &[&Factor], y: &str, z: &[String]) -> bool {
    if tables.len() < 2 {
        return true;
    }
    let mut scope: Vec<&str> = z.iter().map(String::as_str).collect();
    scope.push(y);
    let margs: Vec<Factor> = tables.iter().map(|t| t.marginal(&scope)).collect();
    let cards = margs[0].cards();
    let (zc, cy) = (&cards[..cards.len() - 1], cards[cards.len() - 1]);
    for zs in Odometer::new(zc) {
        let mut reference: Option<Vec<f64>> = None;
        for m in &margs {
            let row: Vec<f64> = (0..cy)
                .map(|k| {
                    let mut st = zs.clone();
                    st.push(k);
                    m.at(&st)
                })
                .collect();
            let total: f64 = row.iter().sum();
            if total <= 0.0 {
                continue;
            }
            let cond: Vec<f64> = row.iter().map(|p| p / total).collect();
            match &reference {
                None => reference = Some(cond),
                Some(r) => {
                    if r.iter().zip(&cond).any(|(a, b)| (a - b).abs() >= CI_TOLERANCE) {
                        return false;
                    }
                }
            }
        }
    }
    true
}
