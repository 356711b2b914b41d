//! Structural queries over diagrams: blocking, minimal blocking sets,
//! d-separation, graphical fixed sets and causes, minimality and set decisions.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{set_decision_states, Diagram, Edge, NodeKind};
use crate::validate::ROW_TOLERANCE;
use crate::Caps;

/// "Does `candidates` block `decisions` from `target`?"
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockingQuery {
    pub candidates: BTreeSet<String>,
    pub decisions: BTreeSet<String>,
    pub target: String,
}

impl BlockingQuery {
    /// Query against every decision of `d`.
    pub fn all_decisions<S: AsRef<str>>(d: &Diagram, candidates: &[S], target: &str) -> Self {
        BlockingQuery {
            candidates: candidates.iter().map(|s| s.as_ref().to_string()).collect(),
            decisions: d.decisions().into_iter().map(|i| d.name(i).to_string()).collect(),
            target: target.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CauseMethod {
    Graphical,
    Oracle,
}

impl fmt::Display for CauseMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CauseMethod::Graphical => "graphical",
            CauseMethod::Oracle => "oracle",
        })
    }
}

/// Minimal cause sets of a target, found by one method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CauseReport {
    pub target: String,
    pub cause_sets: Vec<BTreeSet<String>>,
    pub method: CauseMethod,
    /// Why the list is empty, when it is empty for a reason other than "no minimal set".
    pub reason: Option<String>,
    pub warnings: Vec<String>,
}

pub(crate) fn names_to_indices<S: AsRef<str>>(d: &Diagram, names: impl IntoIterator<Item = S>) -> Result<Vec<usize>> {
    names.into_iter().map(|n| d.index_of(n.as_ref())).collect()
}

fn require_target(d: &Diagram, x: &str) -> Result<usize> {
    let i = d.index_of(x)?;
    match d.node_at(i).kind {
        NodeKind::Decision { .. } => Err(Error::NotUncertain(x.to_string())),
        _ => Ok(i),
    }
}

fn require_decisions<S: AsRef<str>>(d: &Diagram, names: impl IntoIterator<Item = S>) -> Result<Vec<usize>> {
    let idx = names_to_indices(d, names)?;
    for &i in &idx {
        if !d.node_at(i).kind.is_decision() {
            return Err(Error::NotADecision(d.name(i).to_string()));
        }
    }
    Ok(idx)
}

/// True iff every directed path from a node of `decisions` to `target` meets
/// `blocked`. Paths whose source decision is itself blocked count as blocked.
pub(crate) fn blocks_indices(children: &[Vec<usize>], blocked: &[bool], decisions: &[usize], target: usize) -> bool {
    let mut seen = vec![false; children.len()];
    let mut stack: Vec<usize> = decisions.iter().copied().filter(|&s| !blocked[s]).collect();
    while let Some(v) = stack.pop() {
        if v == target {
            return false;
        }
        if seen[v] {
            continue;
        }
        seen[v] = true;
        for &c in &children[v] {
            if !blocked[c] && !seen[c] {
                stack.push(c);
            }
        }
    }
    true
}

/// Whether the candidate set blocks the decisions from the target, following
/// both relevance and information arcs.
pub fn blocks(d: &Diagram, q: &BlockingQuery) -> Result<bool> {
    let x = require_target(d, &q.target)?;
    if q.candidates.contains(&q.target) {
        return Err(Error::TargetInCandidateSet(q.target.clone()));
    }
    let decisions = require_decisions(d, &q.decisions)?;
    let mut blocked = vec![false; d.len()];
    for i in names_to_indices(d, &q.candidates)? {
        blocked[i] = true;
    }
    Ok(blocks_indices(&d.child_lists(), &blocked, &decisions, x))
}

/// Nodes lying on some directed path from `decisions` to `target`, the
/// target excluded. Only these can appear in a minimal blocking set.
fn path_nodes(d: &Diagram, decisions: &[usize], target: usize) -> BTreeSet<usize> {
    let mut from_d = d.descendants_of(decisions);
    from_d.extend(decisions.iter().copied());
    let parents = d.parent_lists();
    let mut anc = BTreeSet::new();
    let mut stack = vec![target];
    while let Some(v) = stack.pop() {
        for &p in &parents[v] {
            if anc.insert(p) {
                stack.push(p);
            }
        }
    }
    from_d.intersection(&anc).copied().collect()
}

/// Inclusion-minimal sets of lexicographically sorted `pool` elements satisfying
/// `accepts`, by increasing size then lexicographic order. Supersets of accepted
/// sets are never tested.
pub(crate) fn minimal_subsets(pool: &[usize], mut accepts: impl FnMut(&[usize]) -> bool) -> Vec<Vec<usize>> {
    let n = pool.len();
    let mut found: Vec<Vec<usize>> = Vec::new();
    for k in 0..=n {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            let set: Vec<usize> = combo.iter().map(|&i| pool[i]).collect();
            let dominated = found.iter().any(|f| f.iter().all(|e| set.contains(e)));
            if !dominated && accepts(&set) {
                found.push(set);
            }
            // advance to the next k-combination
            let mut i = k;
            let advanced = loop {
                if i == 0 {
                    break false;
                }
                i -= 1;
                if combo[i] < n - k + i {
                    combo[i] += 1;
                    for j in i + 1..k {
                        combo[j] = combo[j - 1] + 1;
                    }
                    break true;
                }
            };
            if !advanced {
                break;
            }
        }
    }
    found
}

pub(crate) fn sorted_by_name(d: &Diagram, mut idx: Vec<usize>) -> Vec<usize> {
    idx.sort_by(|&a, &b| d.name(a).cmp(d.name(b)));
    idx
}

pub(crate) fn to_name_set(d: &Diagram, idx: &[usize]) -> BTreeSet<String> {
    idx.iter().map(|&i| d.name(i).to_string()).collect()
}

/// Every inclusion-minimal `C ⊆ (U ∪ D) \ ({x} ∪ exclude)` that blocks
/// `decisions` from `x`, by size then lexicographic order.
pub fn minimal_blocking_sets<S: AsRef<str>>(
    d: &Diagram,
    decisions: &[S],
    x: &str,
    exclude: &[S],
    caps: &Caps,
) -> Result<Vec<BTreeSet<String>>> {
    let target = require_target(d, x)?;
    let dec = require_decisions(d, decisions.iter().map(AsRef::as_ref))?;
    let excluded: BTreeSet<usize> = names_to_indices(d, exclude.iter().map(AsRef::as_ref))?
        .into_iter()
        .collect();
    let pool: Vec<usize> = path_nodes(d, &dec, target)
        .into_iter()
        .filter(|i| !excluded.contains(i))
        .collect();
    if pool.len() > caps.blocking_pool {
        return Err(Error::NodeBudgetExceeded {
            pool: pool.len(),
            cap: caps.blocking_pool,
        });
    }
    let pool = sorted_by_name(d, pool);
    let children = d.child_lists();
    let mut blocked = vec![false; d.len()];
    let sets = minimal_subsets(&pool, |set| {
        blocked.iter_mut().for_each(|b| *b = false);
        for &i in set {
            blocked[i] = true;
        }
        blocks_indices(&children, &blocked, &dec, target)
    });
    Ok(sets.iter().map(|s| to_name_set(d, s)).collect())
}

/// d-separation of `xs` and `ys` given `zs` on the relevance-arc subgraph.
/// Decisions are parentless sources there.
pub fn d_separated<S: AsRef<str>>(d: &Diagram, xs: &[S], ys: &[S], zs: &[S]) -> Result<bool> {
    let x: BTreeSet<usize> = names_to_indices(d, xs.iter().map(AsRef::as_ref))?.into_iter().collect();
    let y: BTreeSet<usize> = names_to_indices(d, ys.iter().map(AsRef::as_ref))?.into_iter().collect();
    let z: BTreeSet<usize> = names_to_indices(d, zs.iter().map(AsRef::as_ref))?.into_iter().collect();
    for (a, b, label) in [(&x, &y, "X and Y"), (&x, &z, "X and Z"), (&y, &z, "Y and Z")] {
        if !a.is_disjoint(b) {
            return Err(Error::OverlappingSets(label.to_string()));
        }
    }
    Ok(d_separated_indices(d, &x, &y, &z))
}

pub(crate) fn relevance_adjacency(d: &Diagram) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut parents = vec![Vec::new(); d.len()];
    let mut children = vec![Vec::new(); d.len()];
    for e in d.relevance_arcs() {
        if let (Ok(a), Ok(b)) = (d.index_of(&e.from), d.index_of(&e.to)) {
            parents[b].push(a);
            children[a].push(b);
        }
    }
    (parents, children)
}

/// Reachability over active trails (the "Bayes ball" traversal).
pub(crate) fn d_separated_indices(d: &Diagram, x: &BTreeSet<usize>, y: &BTreeSet<usize>, z: &BTreeSet<usize>) -> bool {
    let (parents, children) = relevance_adjacency(d);
    let n = d.len();
    // ancestors of Z, including Z: a collider is open iff it is in this set
    let mut z_anc = vec![false; n];
    let mut stack: Vec<usize> = z.iter().copied().collect();
    while let Some(v) = stack.pop() {
        if z_anc[v] {
            continue;
        }
        z_anc[v] = true;
        stack.extend(parents[v].iter().copied());
    }
    let in_z = |v: usize| z.contains(&v);
    // (node, arrived_from_child): true means travelling up
    let mut visited = vec![[false; 2]; n];
    let mut queue: VecDeque<(usize, bool)> = x.iter().map(|&v| (v, true)).collect();
    while let Some((v, up)) = queue.pop_front() {
        if visited[v][up as usize] {
            continue;
        }
        visited[v][up as usize] = true;
        if !in_z(v) && y.contains(&v) {
            return false;
        }
        if up && !in_z(v) {
            for &p in &parents[v] {
                queue.push_back((p, true));
            }
            for &c in &children[v] {
                queue.push_back((c, false));
            }
        } else if !up {
            if !in_z(v) {
                for &c in &children[v] {
                    queue.push_back((c, false));
                }
            }
            if z_anc[v] {
                for &p in &parents[v] {
                    queue.push_back((p, true));
                }
            }
        }
    }
    true
}

/// Graphical conditional fixed set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedSetReport {
    pub given: BTreeSet<String>,
    pub members: BTreeSet<String>,
    /// Set when the diagram is not annotated causal, so blocking is only a
    /// claim about fixed-set membership rather than a guarantee.
    pub claim_only: bool,
}

/// `{x : C blocks D from x}` over chance, deterministic and utility nodes, with
/// `D` every decision. Members of `C` are trivially included.
pub fn graphical_fixed_set<S: AsRef<str>>(d: &Diagram, given: &[S]) -> Result<FixedSetReport> {
    let c = names_to_indices(d, given.iter().map(AsRef::as_ref))?;
    let mut blocked = vec![false; d.len()];
    for &i in &c {
        blocked[i] = true;
    }
    let decisions = d.decisions();
    let children = d.child_lists();
    let members = (0..d.len())
        .filter(|&i| !d.node_at(i).kind.is_decision())
        .filter(|&i| blocked[i] || blocks_indices(&children, &blocked, &decisions, i))
        .map(|i| d.name(i).to_string())
        .collect();
    Ok(FixedSetReport {
        given: to_name_set(d, &c),
        members,
        claim_only: !d.annotations().causal,
    })
}

/// Causes read from the graph: minimal sets blocking every decision from `x`.
///
/// Sound only for causal diagrams that are D-maps; pass `d_map_verified` when
/// [`crate::oracle::oracle_is_d_map`] has confirmed the latter.
pub fn graphical_causes(d: &Diagram, x: &str, d_map_verified: bool, caps: &Caps) -> Result<CauseReport> {
    let target = require_target(d, x)?;
    let mut warnings = Vec::new();
    if !d.annotations().causal {
        warnings.push("diagram is not annotated causal; blocking does not imply fixed-set membership".into());
    }
    if !d_map_verified {
        warnings.push("D-map property not verified; graphical causes may include spurious sets".into());
    }
    let decisions = d.decisions();
    if !d.decision_descendants().contains(&target) {
        return Ok(CauseReport {
            target: x.to_string(),
            cause_sets: Vec::new(),
            method: CauseMethod::Graphical,
            reason: Some(format!("{x} ∈ F(D): no decision precedes it")),
            warnings,
        });
    }
    let names: Vec<&str> = decisions.iter().map(|&i| d.name(i)).collect();
    let cause_sets = minimal_blocking_sets(d, &names, x, &[x], caps)?;
    Ok(CauseReport {
        target: x.to_string(),
        cause_sets,
        method: CauseMethod::Graphical,
        reason: None,
        warnings,
    })
}

/// Relevance arcs whose removal leaves every local distribution unchanged.
///
/// `a -> x` is removable when `x`'s rows (or utility values) agree across all
/// states of `a` with the other parents held fixed. Set-decision arcs are never
/// removable.
pub fn removable_arcs(d: &Diagram) -> Vec<Edge> {
    let mut out = Vec::new();
    for e in d.relevance_arcs() {
        let Ok(node) = d.node(&e.to) else { continue };
        let (parents, rows): (&[String], Vec<&[f64]>) = match &node.kind {
            NodeKind::Chance(t) | NodeKind::Deterministic(t) => {
                (&t.parent_order, t.rows.iter().map(Vec::as_slice).collect())
            }
            NodeKind::Utility(u) => (&u.parents, u.values.chunks(1).collect()),
            NodeKind::Decision { .. } => continue,
        };
        let Some(pos) = parents.iter().position(|p| *p == e.from) else {
            continue;
        };
        let cards: Option<Vec<usize>> = parents.iter().map(|p| d.variable(p).ok().map(|v| v.card())).collect();
        let Some(cards) = cards else { continue };
        if rows_independent_of(&rows, &cards, pos) {
            out.push(e.clone());
        }
    }
    out
}

fn rows_independent_of(rows: &[&[f64]], cards: &[usize], pos: usize) -> bool {
    let stride: usize = cards[pos + 1..].iter().product();
    let block = stride * cards[pos];
    if rows.len() != cards.iter().product::<usize>() {
        return false;
    }
    (0..rows.len()).all(|r| {
        let base = r - (r % block) + (r % stride);
        let first = rows[base];
        let row = rows[r];
        row.len() == first.len() && row.iter().zip(first).all(|(a, b)| (a - b).abs() <= ROW_TOLERANCE)
    })
}

/// Whether `s` is a set decision for `x`: alternatives are `do_nothing` plus
/// `set=k` for every state `k` of `x`, and `x` is its only child.
pub fn is_set_decision(d: &Diagram, s: &str, x: &str) -> Result<bool> {
    let si = d.index_of(s)?;
    if !d.node_at(si).kind.is_decision() {
        return Err(Error::NotADecision(s.to_string()));
    }
    let xi = d.index_of(x)?;
    let want: BTreeSet<String> = set_decision_states(&d.node_at(xi).variable).into_iter().collect();
    let have: BTreeSet<String> = d.node_at(si).variable.states.iter().cloned().collect();
    let children: BTreeSet<usize> = d.children(si).into_iter().collect();
    Ok(want == have && children.len() == 1 && children.contains(&xi))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certification {
    pub certified: bool,
    pub reasons: Vec<String>,
}

/// Certifies a causal network from a minimal causal diagram with a set decision
/// for every chance variable that has a chance child.
pub fn certify_causal_network(d: &Diagram) -> Certification {
    let mut reasons = Vec::new();
    if !d.annotations().causal {
        reasons.push("diagram is not annotated causal".to_string());
    }
    let removable = removable_arcs(d);
    if !removable.is_empty() {
        let arcs: Vec<String> = removable.iter().map(ToString::to_string).collect();
        reasons.push(format!("removable arc: {} (diagram is not minimal)", arcs.join(", ")));
    }
    let missing: Vec<&str> = d
        .uncertain()
        .into_iter()
        .filter(|&i| d.children(i).iter().any(|&c| d.node_at(c).kind.is_uncertain()))
        .filter(|&i| {
            d.decisions()
                .into_iter()
                .all(|s| !is_set_decision(d, d.name(s), d.name(i)).unwrap_or(false))
        })
        .map(|i| d.name(i))
        .collect();
    if !missing.is_empty() {
        reasons.push(format!("missing set decisions for {}", missing.join(", ")));
    }
    Certification {
        certified: reasons.is_empty(),
        reasons,
    }
}
