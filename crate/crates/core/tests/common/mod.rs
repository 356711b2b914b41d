//! Random model generators and brute-force reference implementations shared
//! by the integration suites. Nothing here calls the library's engines: the
//! oracles recompute tables, paths and worlds from the raw diagram parts.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cid_core::hcf::{to_hcf, HcfDiagram, HcfOptions};
use cid_core::{Assignment, Caps, Diagram, NodeKind};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Shape of a random diagram.
#[derive(Debug, Clone)]
pub struct GenSpec {
    pub chance: (usize, usize),
    pub max_states: usize,
    pub decisions: (usize, usize),
    pub max_parents: usize,
    pub parent_prob: f64,
    pub deterministic_prob: f64,
    pub set_decision_prob: f64,
    pub utility: bool,
    pub info_prob: f64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            chance: (1, 5),
            max_states: 3,
            decisions: (1, 2),
            max_parents: 2,
            parent_prob: 0.5,
            deterministic_prob: 0.1,
            set_decision_prob: 0.0,
            utility: false,
            info_prob: 0.0,
        }
    }
}

fn random_row(rng: &mut StdRng, k: usize) -> Vec<f64> {
    let roll: f64 = rng.gen();
    if roll < 0.15 {
        let hot = rng.gen_range(0..k);
        return (0..k).map(|i| if i == hot { 1.0 } else { 0.0 }).collect();
    }
    let mut row: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    if roll < 0.25 {
        let zero = rng.gen_range(0..k);
        row[zero] = 0.0;
    }
    let t: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= t);
    row
}

/// A random valid diagram. Decisions `d0, d1, ...` are binary; chance nodes
/// `x0, x1, ...` have 2..=max_states states and parents among earlier nodes.
pub fn random_diagram(rng: &mut StdRng, g: &GenSpec) -> Diagram {
    let nd = rng.gen_range(g.decisions.0..=g.decisions.1);
    let nc = rng.gen_range(g.chance.0..=g.chance.1);
    let mut b = Diagram::builder();
    let mut names: Vec<(String, usize)> = Vec::new();
    let mut order: Vec<String> = Vec::new();
    for i in 0..nd {
        let n = format!("d{i}");
        b = b.decision(&n, &["a", "b"]);
        names.push((n.clone(), 2));
        order.push(n);
    }
    let mut chance: Vec<String> = Vec::new();
    for i in 0..nc {
        let n = format!("x{i}");
        let k = rng.gen_range(2..=g.max_states);
        let states: Vec<String> = (0..k).map(|s| format!("s{s}")).collect();
        let st: Vec<&str> = states.iter().map(String::as_str).collect();
        let mut parents: Vec<(String, usize)> = Vec::new();
        for (p, c) in &names {
            if parents.len() < g.max_parents && rng.gen_bool(g.parent_prob) {
                parents.push((p.clone(), *c));
            }
        }
        let pn: Vec<&str> = parents.iter().map(|(p, _)| p.as_str()).collect();
        let rows: usize = parents.iter().map(|(_, c)| c).product();
        if rng.gen_bool(g.deterministic_prob) {
            let choice: Vec<usize> = (0..rows).map(|_| rng.gen_range(0..k)).collect();
            b = b.deterministic(&n, &st, &pn, &choice);
        } else {
            let table: Vec<Vec<f64>> = (0..rows).map(|_| random_row(rng, k)).collect();
            b = b.chance(&n, &st, &pn, table);
            if rng.gen_bool(g.set_decision_prob) {
                let s = format!("set_{n}");
                b = b.set_decision(&s, &n);
                order.push(s);
            }
        }
        names.push((n.clone(), k));
        chance.push(n);
    }
    if g.utility && !chance.is_empty() {
        let mut ups: Vec<(String, usize)> = Vec::new();
        for (i, n) in chance.iter().enumerate() {
            let k = names[nd + i].1;
            if ups.len() < 2 && (rng.gen_bool(0.5) || (ups.is_empty() && i + 1 == chance.len())) {
                ups.push((n.clone(), k));
            }
        }
        let count: usize = ups.iter().map(|(_, c)| c).product();
        let values: Vec<f64> = (0..count).map(|_| rng.gen_range(0..100) as f64).collect();
        let un: Vec<&str> = ups.iter().map(|(p, _)| p.as_str()).collect();
        b = b.utility("u", &un, values);
    }
    let order_ref: Vec<&str> = order.iter().map(String::as_str).collect();
    b = b.decision_order(&order_ref).causal(true);
    let mut d = b.build();
    if g.info_prob > 0.0 {
        let fixed = d.fixed_nodes();
        let mut parts = d.parts().clone();
        let decisions: Vec<String> = order.clone();
        for (pos, dec) in decisions.iter().enumerate() {
            for &f in &fixed {
                if rng.gen_bool(g.info_prob) {
                    parts.information_arcs.push(cid_core::Edge::new(d.name(f), dec.clone()));
                }
            }
            if pos > 0 && !decisions[pos - 1].starts_with("set_") && rng.gen_bool(g.info_prob) {
                parts
                    .information_arcs
                    .push(cid_core::Edge::new(decisions[pos - 1].clone(), dec.clone()));
            }
        }
        d = Diagram::from_parts(parts);
    }
    let r = cid_core::validate_diagram(&d);
    assert!(r.is_valid(), "generator produced an invalid diagram: {r}");
    d
}

/// Product of the state counts of the graphical fixed set: an upper bound on
/// the number of worlds.
pub fn world_bound(h: &Diagram) -> u128 {
    h.fixed_nodes()
        .iter()
        .map(|&i| h.node_at(i).variable.card() as u128)
        .product()
}

/// Random diagrams converted to canonical form, regenerated until the world
/// space and every mechanism stay within the given bounds.
pub fn random_hcf(rng: &mut StdRng, g: &GenSpec, max_worlds: u128, max_mechanism: u128) -> (Diagram, HcfDiagram) {
    let opts = HcfOptions {
        caps: Caps {
            mechanism_states: max_mechanism,
            ..Caps::default()
        },
        ..HcfOptions::default()
    };
    loop {
        let d = random_diagram(rng, g);
        let Ok(h) = to_hcf(&d, &opts) else { continue };
        if world_bound(&h.diagram) <= max_worlds {
            return (d, h);
        }
    }
}

// ---------------------------------------------------------------------------
// Reference implementations

pub struct RawNode {
    pub name: String,
    pub card: usize,
    pub kind: char,
    pub parents: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
    pub utility: Vec<f64>,
    pub set_by: Option<usize>,
}

/// The diagram re-read as plain vectors, without the library's indexing code.
pub struct Raw {
    pub nodes: Vec<RawNode>,
    /// Children over relevance and information arcs.
    pub children: Vec<Vec<usize>>,
    /// Parents over relevance arcs only.
    pub rel_parents: Vec<Vec<usize>>,
}

impl Raw {
    pub fn new(d: &Diagram) -> Raw {
        let pos = |n: &str| d.nodes().iter().position(|x| x.variable.name == n).unwrap();
        let mut nodes = Vec::new();
        for node in d.nodes() {
            let (kind, parents, rows, utility) = match &node.kind {
                NodeKind::Chance(t) => (
                    'c',
                    t.parent_order.iter().map(|p| pos(p)).collect(),
                    t.rows.clone(),
                    vec![],
                ),
                NodeKind::Deterministic(t) => (
                    'f',
                    t.parent_order.iter().map(|p| pos(p)).collect(),
                    t.rows.clone(),
                    vec![],
                ),
                NodeKind::Decision { .. } => ('d', vec![], vec![], vec![]),
                NodeKind::Utility(u) => (
                    'u',
                    u.parents.iter().map(|p| pos(p)).collect(),
                    vec![],
                    u.values.clone(),
                ),
            };
            let set_by = d.nodes().iter().position(
                |s| matches!(&s.kind, NodeKind::Decision { set_decision_for: Some(t) } if *t == node.variable.name),
            );
            nodes.push(RawNode {
                name: node.variable.name.clone(),
                card: node.variable.states.len(),
                kind,
                parents,
                rows,
                utility,
                set_by,
            });
        }
        let n = nodes.len();
        let mut children = vec![Vec::new(); n];
        let mut rel_parents = vec![Vec::new(); n];
        for e in d.relevance_arcs() {
            children[pos(&e.from)].push(pos(&e.to));
            rel_parents[pos(&e.to)].push(pos(&e.from));
        }
        for e in d.information_arcs() {
            children[pos(&e.from)].push(pos(&e.to));
        }
        Raw {
            nodes,
            children,
            rel_parents,
        }
    }

    pub fn index(&self, name: &str) -> usize {
        self.nodes.iter().position(|n| n.name == name).unwrap()
    }

    fn row_of(&self, v: usize, full: &[usize]) -> usize {
        let mut idx = 0;
        for &p in &self.nodes[v].parents {
            idx = idx * self.nodes[p].card + full[p];
        }
        idx
    }

    /// `P(v = full[v] | parents)` including the set decision.
    pub fn prob(&self, v: usize, full: &[usize], dec_labels: &dyn Fn(usize, usize) -> Option<usize>) -> f64 {
        if let Some(s) = self.nodes[v].set_by {
            if let Some(k) = dec_labels(s, full[s]) {
                return if k == full[v] { 1.0 } else { 0.0 };
            }
        }
        self.nodes[v].rows[self.row_of(v, full)][full[v]]
    }

    pub fn utility(&self, u: usize, full: &[usize]) -> f64 {
        let mut idx = 0;
        for &p in &self.nodes[u].parents {
            idx = idx * self.nodes[p].card + full[p];
        }
        self.nodes[u].utility[idx]
    }

    pub fn topo(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut indeg = vec![0; n];
        for c in &self.children {
            for &x in c {
                indeg[x] += 1;
            }
        }
        let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut out = Vec::new();
        while let Some(v) = ready.pop() {
            out.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(c);
                }
            }
        }
        assert_eq!(out.len(), n);
        out
    }

    pub fn reachable_from(&self, sources: &[usize]) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = sources.to_vec();
        while let Some(v) = stack.pop() {
            for &c in &self.children[v] {
                if seen.insert(c) {
                    stack.push(c);
                }
            }
        }
        seen
    }

    pub fn decisions(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].kind == 'd').collect()
    }

    pub fn uncertain(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| matches!(self.nodes[i].kind, 'c' | 'f'))
            .collect()
    }
}

/// Decoder from a set decision's alternative index to the forced state.
pub fn set_labels(d: &Diagram) -> impl Fn(usize, usize) -> Option<usize> + '_ {
    move |s, alt| {
        let node = d.node_at(s);
        let label = &node.variable.states[alt];
        let NodeKind::Decision {
            set_decision_for: Some(t),
        } = &node.kind
        else {
            return None;
        };
        let target = d.variable(t).ok()?;
        label.strip_prefix("set=").and_then(|k| target.state_index(k))
    }
}

/// Every decision instance as state-index vectors over `raw.decisions()`.
pub fn decision_vectors(raw: &Raw) -> Vec<Vec<usize>> {
    let ds = raw.decisions();
    let mut out = vec![vec![]];
    for &d in &ds {
        let mut next = Vec::new();
        for v in &out {
            for k in 0..raw.nodes[d].card {
                let mut w = v.clone();
                w.push(k);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

pub fn assignment(d: &Diagram, raw: &Raw, inst: &[usize]) -> Assignment {
    raw.decisions()
        .iter()
        .zip(inst)
        .map(|(&i, &k)| (d.name(i).to_string(), d.node_at(i).variable.states[k].clone()))
        .collect()
}

/// Dense joint over the uncertain nodes (declaration order), recomputed as
/// the plain product of table entries over every instance.
pub fn brute_joint(d: &Diagram, inst: &[usize]) -> Vec<f64> {
    let raw = Raw::new(d);
    let dec = raw.decisions();
    let unc = raw.uncertain();
    let labels = set_labels(d);
    let cards: Vec<usize> = unc.iter().map(|&v| raw.nodes[v].card).collect();
    let total: usize = cards.iter().product();
    let mut full = vec![0usize; raw.nodes.len()];
    for (&v, &k) in dec.iter().zip(inst) {
        full[v] = k;
    }
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        for (j, &v) in unc.iter().enumerate().rev() {
            full[v] = idx % cards[j];
            idx /= cards[j];
        }
        out.push(unc.iter().map(|&v| raw.prob(v, &full, &labels)).product());
    }
    out
}

/// Worlds of a canonical-form diagram, enumerated without the library: the
/// fixed set is recomputed from reachability, fixed nodes are enumerated from
/// their tables, and everything else is propagated from one-hot rows.
pub struct WorldTable {
    pub raw: Raw,
    pub fixed: BTreeSet<usize>,
    pub decisions: Vec<Vec<usize>>,
    /// `(weight, values[k][node])` for every world of positive weight; utility
    /// entries hold the utility value's bits.
    pub worlds: Vec<(f64, Vec<Vec<u64>>)>,
}

impl WorldTable {
    pub fn new(d: &Diagram) -> WorldTable {
        let raw = Raw::new(d);
        let labels = set_labels(d);
        let desc = raw.reachable_from(&raw.decisions());
        let declared = &d.annotations().declared_fixed;
        let fixed: BTreeSet<usize> = raw
            .uncertain()
            .into_iter()
            .filter(|v| !desc.contains(v) || declared.contains(&raw.nodes[*v].name))
            .collect();
        let topo = raw.topo();
        let fixed_order: Vec<usize> = topo.iter().copied().filter(|v| fixed.contains(v)).collect();
        let decisions = decision_vectors(&raw);
        let dec_idx = raw.decisions();

        let mut partial: Vec<(f64, Vec<usize>)> = vec![(1.0, vec![0; raw.nodes.len()])];
        for &v in &fixed_order {
            let mut next = Vec::new();
            for (w, full) in &partial {
                for k in 0..raw.nodes[v].card {
                    let mut f = full.clone();
                    f[v] = k;
                    let p = raw.prob(v, &f, &labels);
                    if p > 0.0 {
                        next.push((w * p, f));
                    }
                }
            }
            partial = next;
        }
        let mut worlds = Vec::new();
        for (w, base) in partial {
            let mut per = Vec::new();
            for inst in &decisions {
                let mut full = base.clone();
                for (&v, &k) in dec_idx.iter().zip(inst) {
                    full[v] = k;
                }
                for &v in &topo {
                    if fixed.contains(&v) || !matches!(raw.nodes[v].kind, 'c' | 'f') {
                        continue;
                    }
                    let hot: Vec<usize> = (0..raw.nodes[v].card)
                        .filter(|&k| {
                            full[v] = k;
                            raw.prob(v, &full, &labels) == 1.0
                        })
                        .collect();
                    assert_eq!(hot.len(), 1, "`{}` is not deterministic", raw.nodes[v].name);
                    full[v] = hot[0];
                }
                let row: Vec<u64> = (0..raw.nodes.len())
                    .map(|v| {
                        if raw.nodes[v].kind == 'u' {
                            raw.utility(v, &full).to_bits()
                        } else {
                            full[v] as u64
                        }
                    })
                    .collect();
                per.push(row);
            }
            worlds.push((w, per));
        }
        WorldTable {
            raw,
            fixed,
            decisions,
            worlds,
        }
    }

    /// Fixed-set membership of `x` given `c`, per world.
    pub fn fixed_given(&self, x: usize, c: &[usize]) -> bool {
        self.worlds.iter().all(|(_, per)| {
            let mut seen: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
            per.iter().all(|row| {
                let key: Vec<u64> = c.iter().map(|&v| row[v]).collect();
                *seen.entry(key).or_insert(row[x]) == row[x]
            })
        })
    }
}

/// `P(query' = state | evidence under factual, counterfactual decisions)`
/// from explicit world enumeration.
pub fn twin_probability(
    d: &Diagram,
    fact: &Assignment,
    evidence: &Assignment,
    cf: &Assignment,
    query: (&str, &str),
) -> f64 {
    let table = WorldTable::new(d);
    let raw = &table.raw;
    let inst_of = |asg: &Assignment| -> usize {
        let dec = raw.decisions();
        let want: Vec<usize> = dec
            .iter()
            .map(|&v| d.node_at(v).variable.state_index(asg.get(d.name(v)).unwrap()).unwrap())
            .collect();
        table.decisions.iter().position(|x| *x == want).unwrap()
    };
    let (kf, kc) = (inst_of(fact), inst_of(cf));
    let ev: Vec<(usize, u64)> = evidence
        .iter()
        .map(|(n, s)| (raw.index(n), d.variable(n).unwrap().state_index(s).unwrap() as u64))
        .collect();
    let qv = raw.index(query.0);
    let qs = d.variable(query.0).unwrap().state_index(query.1).unwrap() as u64;
    let (mut num, mut den) = (0.0, 0.0);
    for (w, per) in &table.worlds {
        if ev.iter().all(|&(v, s)| per[kf][v] == s) {
            den += w;
            if per[kc][qv] == qs {
                num += w;
            }
        }
    }
    num / den
}

/// Every directed path from some source to `target` meets `blocked`
/// (a blocked source blocks its paths). Enumerates simple paths explicitly.
pub fn paths_blocked(raw: &Raw, sources: &[usize], blocked: &BTreeSet<usize>, target: usize) -> bool {
    fn walk(raw: &Raw, v: usize, target: usize, blocked: &BTreeSet<usize>, on_path: &mut Vec<usize>) -> bool {
        if blocked.contains(&v) {
            return true;
        }
        if v == target {
            return false;
        }
        on_path.push(v);
        let mut ok = true;
        for &c in &raw.children[v] {
            if !on_path.contains(&c) && !walk(raw, c, target, blocked, on_path) {
                ok = false;
                break;
            }
        }
        on_path.pop();
        ok
    }
    sources.iter().all(|&s| walk(raw, s, target, blocked, &mut Vec::new()))
}

/// d-separation by enumerating every undirected simple path over relevance
/// arcs and checking each one for an open trail.
pub fn d_separated_by_paths(raw: &Raw, x: usize, y: usize, z: &BTreeSet<usize>) -> bool {
    let n = raw.nodes.len();
    let mut rel_children = vec![Vec::new(); n];
    for (v, ps) in raw.rel_parents.iter().enumerate() {
        for &p in ps {
            rel_children[p].push(v);
        }
    }
    let descendants = |v: usize| -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([v]);
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &c in &rel_children[u] {
                if seen.insert(c) {
                    stack.push(c);
                }
            }
        }
        seen
    };
    let mut path = vec![x];
    fn open(
        raw: &Raw,
        rel_children: &[Vec<usize>],
        path: &mut Vec<usize>,
        y: usize,
        z: &BTreeSet<usize>,
        desc: &dyn Fn(usize) -> BTreeSet<usize>,
    ) -> bool {
        let v = *path.last().unwrap();
        if v == y {
            // check every interior node of the trail
            for i in 1..path.len() - 1 {
                let (a, m, b) = (path[i - 1], path[i], path[i + 1]);
                let collider = raw.rel_parents[m].contains(&a) && raw.rel_parents[m].contains(&b);
                if collider {
                    if desc(m).is_disjoint(z) {
                        return false;
                    }
                } else if z.contains(&m) {
                    return false;
                }
            }
            return true;
        }
        let nbrs: Vec<usize> = raw.rel_parents[v].iter().chain(&rel_children[v]).copied().collect();
        for u in nbrs {
            if path.contains(&u) {
                continue;
            }
            path.push(u);
            let found = open(raw, rel_children, path, y, z, desc);
            path.pop();
            if found {
                return true;
            }
        }
        false
    }
    !open(raw, &rel_children, &mut path, y, z, &descendants)
}

/// All subsets of `pool`.
pub fn subsets(pool: &[usize]) -> Vec<Vec<usize>> {
    (0..1usize << pool.len())
        .map(|m| (0..pool.len()).filter(|i| m >> i & 1 == 1).map(|i| pool[i]).collect())
        .collect()
}
