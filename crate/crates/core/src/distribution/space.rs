use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// Default upper bound on the number of cells in a joint table.
pub const DEFAULT_CELL_LIMIT: usize = 1 << 20;

/// Environment variable overriding [`DEFAULT_CELL_LIMIT`].
pub const CELL_LIMIT_ENV: &str = "IKLKIT_LIMIT_CELLS";

/// The joint-size limit currently in force.
pub fn cell_limit() -> usize {
    std::env::var(CELL_LIMIT_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_CELL_LIMIT)
}

/// Cardinalities of an ordered set of discrete variables.
///
/// Assignments are laid out in row-major order: variable 0 is the most
/// significant digit, the last variable the least.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct VariableSpace {
    cards: Vec<usize>,
    strides: Vec<usize>,
    cells: usize,
}

impl TryFrom<Vec<usize>> for VariableSpace {
    type Error = Error;

    fn try_from(cards: Vec<usize>) -> Result<Self> {
        VariableSpace::new(cards)
    }
}

impl From<VariableSpace> for Vec<usize> {
    fn from(s: VariableSpace) -> Self {
        s.cards
    }
}

impl VariableSpace {
    pub fn new(cards: Vec<usize>) -> Result<Self> {
        Self::with_limit(cards, cell_limit())
    }

    pub fn with_limit(cards: Vec<usize>, limit: usize) -> Result<Self> {
        if cards.is_empty() {
            return input("a variable space needs at least one variable");
        }
        if let Some(i) = cards.iter().position(|&c| c < 2) {
            return input(format!("variable {i} has cardinality {} (< 2)", cards[i]));
        }
        let mut cells = 1usize;
        for &c in &cards {
            cells = cells.checked_mul(c).filter(|&n| n <= limit).ok_or(Error::Capacity {
                what: "joint table cells",
                requested: cards.iter().fold(1usize, |a, &c| a.saturating_mul(c)),
                limit,
            })?;
        }
        let mut strides = vec![1; cards.len()];
        for i in (0..cards.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * cards[i + 1];
        }
        Ok(VariableSpace {
            cards,
            strides,
            cells,
        })
    }

    /// `n` binary variables.
    pub fn binary(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn num_vars(&self) -> usize {
        self.cards.len()
    }

    pub fn cardinality(&self, i: usize) -> usize {
        self.cards[i]
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    pub fn num_cells(&self) -> usize {
        self.cells
    }

    pub fn encode(&self, assignment: &[usize]) -> usize {
        assignment.iter().zip(&self.strides).map(|(x, s)| x * s).sum()
    }

    pub fn decode(&self, mut index: usize, out: &mut [usize]) {
        for i in (0..self.cards.len()).rev() {
            out[i] = index % self.cards[i];
            index /= self.cards[i];
        }
    }

    /// The space of the listed variables, in the order given.
    pub fn subspace(&self, vars: &[usize]) -> Result<VariableSpace> {
        VariableSpace::new(vars.iter().map(|&v| self.cards[v]).collect())
    }

    pub(crate) fn check_var(&self, i: usize) -> Result<()> {
        if i >= self.num_vars() {
            input(format!("variable {i} out of range for {} variables", self.num_vars()))
        } else {
            Ok(())
        }
    }

    /// For every cell, the row-major index of its restriction to `vars`
    /// (first listed variable most significant).
    pub(crate) fn projection(&self, vars: &[usize]) -> Vec<usize> {
        let mut sub_strides = vec![0usize; self.num_vars()];
        let mut s = 1;
        for &v in vars.iter().rev() {
            sub_strides[v] = s;
            s *= self.cards[v];
        }
        let mut out = Vec::with_capacity(self.cells);
        let mut x = vec![0usize; self.num_vars()];
        let mut idx = 0usize;
        for _ in 0..self.cells {
            out.push(idx);
            // odometer increment, keeping idx in sync
            for i in (0..x.len()).rev() {
                x[i] += 1;
                idx += sub_strides[i];
                if x[i] < self.cards[i] {
                    break;
                }
                idx -= sub_strides[i] * x[i];
                x[i] = 0;
            }
        }
        out
    }

    /// Number of joint assignments of `vars`.
    pub(crate) fn count(&self, vars: &[usize]) -> usize {
        vars.iter().map(|&v| self.cards[v]).product()
    }
}

/// Sorted, deduplicated copy of an index list.
pub(crate) fn sorted_set(items: &[usize]) -> Vec<usize> {
    let mut v = items.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}
