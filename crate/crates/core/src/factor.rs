//! Nonnegative tables over ordered variable scopes.

use crate::error::{Error, Result};
use crate::instances::{instance_count, Odometer};
use crate::model::Variable;

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    vars: Vec<Variable>,
    values: Vec<f64>,
}

impl Factor {
    pub fn new(vars: Vec<Variable>, values: Vec<f64>) -> Result<Self> {
        let n = instance_count(&vars.iter().map(Variable::card).collect::<Vec<_>>());
        if values.len() != n {
            return Err(Error::Format(format!(
                "factor over {} instances given {} values",
                n,
                values.len()
            )));
        }
        if values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::Format("factor values must be nonnegative".into()));
        }
        Ok(Factor { vars, values })
    }

    /// The factor with empty scope and value 1.
    pub fn unit() -> Self {
        Factor {
            vars: Vec::new(),
            values: vec![1.0],
        }
    }

    pub(crate) fn from_parts_unchecked(vars: Vec<Variable>, values: Vec<f64>) -> Self {
        Factor { vars, values }
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn scope(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn cards(&self) -> Vec<usize> {
        self.vars.iter().map(Variable::card).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.vars[i + 1].card();
        }
        s
    }

    /// Pointwise product over the union of scopes (this factor's variables first).
    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        for v in &other.vars {
            if !vars.iter().any(|w| w.name == v.name) {
                vars.push(v.clone());
            }
        }
        let cards: Vec<usize> = vars.iter().map(Variable::card).collect();
        let map = |f: &Factor| -> Vec<(usize, usize)> {
            let strides = f.strides();
            f.vars
                .iter()
                .zip(strides)
                .map(|(v, s)| (vars.iter().position(|w| w.name == v.name).unwrap(), s))
                .collect()
        };
        let (ma, mb) = (map(self), map(other));
        let mut values = Vec::with_capacity(instance_count(&cards));
        for st in Odometer::new(&cards) {
            let ia: usize = ma.iter().map(|&(p, s)| st[p] * s).sum();
            let ib: usize = mb.iter().map(|&(p, s)| st[p] * s).sum();
            values.push(self.values[ia] * other.values[ib]);
        }
        Factor { vars, values }
    }

    /// Sums `name` out. Unknown names leave the factor unchanged.
    pub fn sum_out(&self, name: &str) -> Factor {
        let Some(pos) = self.position(name) else {
            return self.clone();
        };
        let strides = self.strides();
        let card = self.vars[pos].card();
        let stride = strides[pos];
        let mut vars = self.vars.clone();
        vars.remove(pos);
        let outer = self.values.len() / (card * stride);
        let mut values = Vec::with_capacity(outer * stride);
        for o in 0..outer {
            for i in 0..stride {
                let base = o * card * stride + i;
                values.push((0..card).map(|k| self.values[base + k * stride]).sum());
            }
        }
        Factor { vars, values }
    }

    /// Restricts `name` to one state and drops it from the scope.
    pub fn reduce(&self, name: &str, state: usize) -> Factor {
        let Some(pos) = self.position(name) else {
            return self.clone();
        };
        let strides = self.strides();
        let card = self.vars[pos].card();
        let stride = strides[pos];
        let mut vars = self.vars.clone();
        vars.remove(pos);
        let outer = self.values.len() / (card * stride);
        let mut values = Vec::with_capacity(outer * stride);
        for o in 0..outer {
            for i in 0..stride {
                values.push(self.values[o * card * stride + state * stride + i]);
            }
        }
        Factor { vars, values }
    }

    /// Marginal over `keep`, laid out in the order given.
    pub fn marginal<S: AsRef<str>>(&self, keep: &[S]) -> Factor {
        let mut f = self.clone();
        for v in &self.vars {
            if !keep.iter().any(|k| k.as_ref() == v.name) {
                f = f.sum_out(&v.name);
            }
        }
        f.reorder(keep)
    }

    /// Same table with variables permuted into `order` (names not in scope are skipped).
    pub fn reorder<S: AsRef<str>>(&self, order: &[S]) -> Factor {
        let perm: Vec<usize> = order.iter().filter_map(|n| self.position(n.as_ref())).collect();
        if perm.iter().copied().eq(0..self.vars.len()) {
            return self.clone();
        }
        let vars: Vec<Variable> = perm.iter().map(|&p| self.vars[p].clone()).collect();
        let strides = self.strides();
        let cards: Vec<usize> = vars.iter().map(Variable::card).collect();
        let values = Odometer::new(&cards)
            .map(|st| {
                let idx: usize = perm.iter().zip(&st).map(|(&p, &s)| s * strides[p]).sum();
                self.values[idx]
            })
            .collect();
        Factor { vars, values }
    }

    pub fn normalized(&self) -> Result<Factor> {
        let t = self.total();
        if t.is_nan() || t <= 0.0 {
            return Err(Error::ZeroProbabilityEvidence);
        }
        Ok(Factor {
            vars: self.vars.clone(),
            values: self.values.iter().map(|v| v / t).collect(),
        })
    }

    /// Value at full instance `states` (scope order).
    pub fn at(&self, states: &[usize]) -> f64 {
        let idx: usize = self.strides().iter().zip(states).map(|(s, x)| s * x).sum();
        self.values[idx]
    }

    /// Sum of entries consistent with the given `(name, state label)` pairs.
    pub fn prob(&self, partial: &[(&str, &str)]) -> Result<f64> {
        let mut f = self.clone();
        for (name, state) in partial {
            let pos = f
                .position(name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
            let s = f.vars[pos].state_index(state).ok_or_else(|| Error::UnknownState {
                variable: name.to_string(),
                state: state.to_string(),
            })?;
            f = f.reduce(name, s);
        }
        Ok(f.total())
    }

    /// Largest absolute difference after aligning `other` to this scope;
    /// `None` when the scopes differ as sets.
    pub fn max_abs_diff(&self, other: &Factor) -> Option<f64> {
        if self.vars.len() != other.vars.len() {
            return None;
        }
        let names = self.scope();
        let aligned = other.reorder(&names);
        if aligned.vars != self.vars {
            return None;
        }
        Some(
            self.values
                .iter()
                .zip(&aligned.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}
