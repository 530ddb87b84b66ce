use crate::error::{input, Result};

/// Row sums of a mechanism must be within this distance of one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// A tabular conditional distribution `P(child | parents)`.
///
/// Rows are indexed by the lexicographic assignment of `parents` (first
/// parent most significant); each row holds `child_card` probabilities.
/// Rows extracted from a joint table where the parent assignment has zero
/// probability are flagged undefined and filled uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    child: usize,
    child_card: usize,
    parents: Vec<usize>,
    parent_cards: Vec<usize>,
    table: Vec<f64>,
    undefined: Vec<bool>,
}

impl Mechanism {
    pub fn new(
        child: usize,
        child_card: usize,
        parents: Vec<usize>,
        parent_cards: Vec<usize>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let mut table = Vec::with_capacity(rows.len() * child_card);
        for row in &rows {
            if row.len() != child_card {
                return input(format!(
                    "mechanism of {child}: row has {} entries, expected {child_card}",
                    row.len()
                ));
            }
            table.extend_from_slice(row);
        }
        Self::from_flat(child, child_card, parents, parent_cards, table)
    }

    pub fn from_flat(
        child: usize,
        child_card: usize,
        parents: Vec<usize>,
        parent_cards: Vec<usize>,
        table: Vec<f64>,
    ) -> Result<Self> {
        if parents.len() != parent_cards.len() {
            return input(format!("mechanism of {child}: parent list and cardinalities differ in length"));
        }
        if parents.windows(2).any(|w| w[0] >= w[1]) {
            return input(format!("mechanism of {child}: parents must be strictly ascending"));
        }
        if parents.contains(&child) {
            return input(format!("mechanism of {child}: child listed among its parents"));
        }
        if child_card < 2 || parent_cards.iter().any(|&c| c < 2) {
            return input(format!("mechanism of {child}: cardinalities must be at least 2"));
        }
        let rows: usize = parent_cards.iter().product();
        if table.len() != rows * child_card {
            return input(format!(
                "mechanism of {child}: table has {} entries, expected {} rows of {child_card}",
                table.len(),
                rows
            ));
        }
        for (r, row) in table.chunks(child_card).enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return input(format!("mechanism of {child}: row {r} has a negative or non-finite entry"));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOLERANCE {
                return input(format!("mechanism of {child}: row {r} sums to {s}"));
            }
        }
        Ok(Mechanism {
            child,
            child_card,
            parents,
            parent_cards,
            table,
            undefined: vec![false; rows],
        })
    }

    pub(crate) fn with_undefined(mut self, undefined: Vec<bool>) -> Self {
        debug_assert_eq!(undefined.len(), self.num_rows());
        self.undefined = undefined;
        self
    }

    pub fn uniform(child: usize, child_card: usize, parents: Vec<usize>, parent_cards: Vec<usize>) -> Result<Self> {
        let rows: usize = parent_cards.iter().product();
        let table = vec![1.0 / child_card as f64; rows * child_card];
        Self::from_flat(child, child_card, parents, parent_cards, table)
    }

    /// The hard intervention `delta(child - value)` for every parent row.
    pub fn point_mass(
        child: usize,
        child_card: usize,
        parents: Vec<usize>,
        parent_cards: Vec<usize>,
        value: usize,
    ) -> Result<Self> {
        if value >= child_card {
            return input(format!("hard value {value} out of range for cardinality {child_card}"));
        }
        let rows: usize = parent_cards.iter().product();
        let mut table = vec![0.0; rows * child_card];
        for r in 0..rows {
            table[r * child_card + value] = 1.0;
        }
        Self::from_flat(child, child_card, parents, parent_cards, table)
    }

    pub fn child(&self) -> usize {
        self.child
    }

    pub fn child_card(&self) -> usize {
        self.child_card
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn parent_cards(&self) -> &[usize] {
        &self.parent_cards
    }

    pub fn num_rows(&self) -> usize {
        self.undefined.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.table[r * self.child_card..(r + 1) * self.child_card]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.table.chunks(self.child_card)
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn is_row_defined(&self, r: usize) -> bool {
        !self.undefined[r]
    }

    pub fn undefined_rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.undefined.iter().enumerate().filter(|(_, u)| **u).map(|(r, _)| r)
    }

    /// Row index of the parent configuration inside a full assignment.
    pub fn row_index(&self, assignment: &[usize]) -> usize {
        self.parents
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (&p, &c)| acc * c + assignment[p])
    }

    /// Parent values of row `r`, in the order of `parents()`.
    pub fn row_assignment(&self, mut r: usize) -> Vec<usize> {
        let mut out = vec![0; self.parents.len()];
        for k in (0..self.parents.len()).rev() {
            out[k] = r % self.parent_cards[k];
            r /= self.parent_cards[k];
        }
        out
    }

    /// Largest total-variation distance between corresponding rows.
    pub fn max_row_tv(&self, other: &Mechanism) -> f64 {
        self.rows()
            .zip(other.rows())
            .map(|(a, b)| 0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}
