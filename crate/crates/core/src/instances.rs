//! Instance enumeration over ordered variable lists.
//!
//! Every table in the crate is laid out in the order produced here: the first
//! variable is most significant and states follow declaration order.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{Assignment, Variable};

/// Separator for parent-instance row keys (`"yes|poor"`).
pub const KEY_SEPARATOR: &str = "|";

/// All instances of `vars`, lexicographic by declared variable then state order.
pub fn enumerate_instances(vars: &[Variable]) -> Result<Vec<Assignment>> {
    let mut seen = BTreeSet::new();
    for v in vars {
        if !seen.insert(v.name.as_str()) {
            return Err(Error::DuplicateVariable(v.name.clone()));
        }
    }
    let cards: Vec<usize> = vars.iter().map(Variable::card).collect();
    Ok(Odometer::new(&cards)
        .map(|states| {
            vars.iter()
                .zip(states)
                .map(|(v, s)| (v.name.clone(), v.states[s].clone()))
                .collect()
        })
        .collect())
}

/// Product of cardinalities, saturating instead of overflowing.
pub fn instance_count(cards: &[usize]) -> usize {
    cards.iter().fold(1usize, |acc, &c| acc.saturating_mul(c))
}

/// Row index of `states` within a table laid out over `cards`.
pub fn instance_index(cards: &[usize], states: &[usize]) -> usize {
    debug_assert_eq!(cards.len(), states.len());
    cards.iter().zip(states).fold(0, |acc, (&c, &s)| acc * c + s)
}

/// Inverse of [`instance_index`].
pub fn instance_states(cards: &[usize], mut index: usize) -> Vec<usize> {
    let mut out = vec![0; cards.len()];
    for (slot, &c) in out.iter_mut().zip(cards).rev() {
        *slot = index % c;
        index /= c;
    }
    out
}

/// `"s1|s2|..."` for an instance of `vars`.
pub fn row_key(vars: &[&Variable], states: &[usize]) -> String {
    vars.iter()
        .zip(states)
        .map(|(v, &s)| v.states[s].as_str())
        .collect::<Vec<_>>()
        .join(KEY_SEPARATOR)
}

/// Mixed-radix counter over `cards`, yielding every instance once.
///
/// A zero-length `cards` yields exactly one (empty) instance; any zero
/// cardinality yields none.
#[derive(Debug, Clone)]
pub struct Odometer {
    cards: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl Odometer {
    pub fn new(cards: &[usize]) -> Self {
        Odometer {
            cards: cards.to_vec(),
            current: vec![0; cards.len()],
            done: cards.contains(&0),
        }
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut i = self.cards.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.current[i] += 1;
            if self.current[i] < self.cards[i] {
                break;
            }
            self.current[i] = 0;
        }
        Some(out)
    }
}
