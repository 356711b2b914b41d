// Index-based view of a validated diagram used by the numerical engines.

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::instances::instance_index;
use crate::model::{Assignment, Diagram, NodeKind, Variable, DO_NOTHING, SET_PREFIX};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind {
    Chance,
    Deterministic,
    Decision,
    Utility,
}

#[derive(Debug, Clone)]
pub(crate) struct Net {
    pub vars: Vec<Variable>,
    pub kinds: Vec<Kind>,
    /// Table parents for chance/deterministic/utility nodes, information parents for decisions.
    pub parents: Vec<Vec<usize>>,
    pub parent_cards: Vec<Vec<usize>>,
    /// Flattened rows (chance/deterministic) or utility values.
    pub tables: Vec<Vec<f64>>,
    /// Set decision of a node and, per alternative, the forced state (`None` = do nothing).
    pub set_by: Vec<Option<(usize, Vec<Option<usize>>)>>,
    pub topo: Vec<usize>,
}

impl Net {
    pub fn new(d: &Diagram) -> Result<Net> {
        let topo = d
            .topological_order()
            .ok_or_else(|| Error::Format("arcs contain a cycle".into()))?;
        let n = d.len();
        let mut net = Net {
            vars: d.nodes().iter().map(|n| n.variable.clone()).collect(),
            kinds: Vec::with_capacity(n),
            parents: Vec::with_capacity(n),
            parent_cards: Vec::with_capacity(n),
            tables: Vec::with_capacity(n),
            set_by: vec![None; n],
            topo,
        };
        for (i, node) in d.nodes().iter().enumerate() {
            let (kind, parents, table) = match &node.kind {
                NodeKind::Chance(t) => (Kind::Chance, t.parent_order.clone(), t.rows.concat()),
                NodeKind::Deterministic(t) => (Kind::Deterministic, t.parent_order.clone(), t.rows.concat()),
                NodeKind::Decision { .. } => {
                    let info = d
                        .information_arcs()
                        .iter()
                        .filter(|e| e.to == node.variable.name)
                        .map(|e| e.from.clone())
                        .collect();
                    (Kind::Decision, info, Vec::new())
                }
                NodeKind::Utility(u) => (Kind::Utility, u.parents.clone(), u.values.clone()),
            };
            let parents = parents.iter().map(|p| d.index_of(p)).collect::<Result<Vec<_>>>()?;
            net.parent_cards
                .push(parents.iter().map(|&p| net.vars[p].card()).collect());
            net.parents.push(parents);
            net.kinds.push(kind);
            net.tables.push(table);
            if node.kind.is_uncertain() {
                if let Some(s) = d.set_decision_of(i) {
                    let forced = net.vars[s]
                        .states
                        .iter()
                        .map(|alt| {
                            if alt == DO_NOTHING {
                                None
                            } else {
                                alt.strip_prefix(SET_PREFIX).and_then(|k| node.variable.state_index(k))
                            }
                        })
                        .collect();
                    net.set_by[i] = Some((s, forced));
                }
            }
        }
        Ok(net)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn card(&self, v: usize) -> usize {
        self.vars[v].card()
    }

    pub fn is_uncertain(&self, v: usize) -> bool {
        matches!(self.kinds[v], Kind::Chance | Kind::Deterministic)
    }

    pub fn uncertain(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.is_uncertain(v)).collect()
    }

    pub fn decisions(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.kinds[v] == Kind::Decision).collect()
    }

    pub fn utility(&self) -> Option<usize> {
        (0..self.len()).find(|&v| self.kinds[v] == Kind::Utility)
    }

    fn row(&self, v: usize, full: &[usize]) -> usize {
        let states: Vec<usize> = self.parents[v].iter().map(|&p| full[p]).collect();
        instance_index(&self.parent_cards[v], &states)
    }

    /// `P(v = state | parents)` read from `full`, composing any set decision.
    pub fn prob(&self, v: usize, full: &[usize], state: usize) -> f64 {
        if let Some((s, forced)) = &self.set_by[v] {
            if let Some(k) = forced[full[*s]] {
                return if k == state { 1.0 } else { 0.0 };
            }
        }
        let card = self.card(v);
        self.tables[v][self.row(v, full) * card + state]
    }

    pub fn utility_value(&self, u: usize, full: &[usize]) -> f64 {
        self.tables[u][self.row(u, full)]
    }

    /// The deterministic successor state of `v` (first state with probability 1).
    pub fn forced_state(&self, v: usize, full: &[usize]) -> Option<usize> {
        (0..self.card(v)).find(|&k| self.prob(v, full, k) > 0.5)
    }

    /// Family factor of an uncertain node: scope = table parents, set decision, node.
    pub fn family_factor(&self, v: usize) -> Factor {
        let mut scope: Vec<usize> = self.parents[v].clone();
        if let Some((s, _)) = &self.set_by[v] {
            scope.push(*s);
        }
        scope.push(v);
        let vars: Vec<Variable> = scope.iter().map(|&i| self.vars[i].clone()).collect();
        let cards: Vec<usize> = vars.iter().map(Variable::card).collect();
        let mut full = vec![0usize; self.len()];
        let values = crate::instances::Odometer::new(&cards)
            .map(|st| {
                for (&i, &s) in scope.iter().zip(&st) {
                    full[i] = s;
                }
                self.prob(v, &full, full[v])
            })
            .collect();
        Factor::from_parts_unchecked(vars, values)
    }

    /// Decision states from an assignment that must bind every decision.
    pub fn decision_states(&self, decisions: &Assignment) -> Result<Vec<Option<usize>>> {
        let mut out = vec![None; self.len()];
        for (name, state) in decisions.iter() {
            let v = self
                .index(name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
            if self.kinds[v] != Kind::Decision {
                return Err(Error::NotADecision(name.to_string()));
            }
            out[v] = Some(self.state_of(v, state)?);
        }
        for d in self.decisions() {
            if out[d].is_none() {
                return Err(Error::MissingDecision(self.vars[d].name.clone()));
            }
        }
        Ok(out)
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn state_of(&self, v: usize, state: &str) -> Result<usize> {
        self.vars[v].state_index(state).ok_or_else(|| Error::UnknownState {
            variable: self.vars[v].name.clone(),
            state: state.to_string(),
        })
    }

    /// Depth-first enumeration of every joint instance of the uncertain nodes
    /// with nonzero probability. `fixed` supplies decision states; a fixed
    /// uncertain node acts as evidence (only that state is visited, and its
    /// probability is still multiplied in). Calls `visit(full, p)` per instance.
    pub fn for_each_support(&self, fixed: &[Option<usize>], mut visit: impl FnMut(&[usize], f64)) {
        let order: Vec<usize> = self.topo.iter().copied().filter(|&v| self.is_uncertain(v)).collect();
        let mut full: Vec<usize> = fixed.iter().map(|s| s.unwrap_or(0)).collect();
        self.dfs(&order, fixed, 0, 1.0, &mut full, &mut visit);
    }

    fn dfs(
        &self,
        order: &[usize],
        fixed: &[Option<usize>],
        depth: usize,
        p: f64,
        full: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize], f64),
    ) {
        if depth == order.len() {
            visit(full, p);
            return;
        }
        let v = order[depth];
        let range = match fixed[v] {
            Some(k) => k..k + 1,
            None => 0..self.card(v),
        };
        for k in range {
            full[v] = k;
            let q = self.prob(v, full, k);
            if q > 0.0 {
                self.dfs(order, fixed, depth + 1, p * q, full, visit);
            }
        }
    }
}
