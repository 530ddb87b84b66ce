use serde::{Deserialize, Serialize};

use super::mechanism::Mechanism;
use super::space::{sorted_set, VariableSpace};
use crate::error::{input, Error, Result};

/// Joint tables must sum to one within this tolerance.
pub const JOINT_SUM_TOLERANCE: f64 = 1e-9;

/// A dense joint distribution over every assignment of a [`VariableSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJoint", into = "RawJoint")]
pub struct JointTable {
    space: VariableSpace,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawJoint {
    space: VariableSpace,
    probabilities: Vec<f64>,
}

impl TryFrom<RawJoint> for JointTable {
    type Error = Error;

    fn try_from(raw: RawJoint) -> Result<Self> {
        JointTable::new(raw.space, raw.probabilities)
    }
}

impl From<JointTable> for RawJoint {
    fn from(t: JointTable) -> Self {
        RawJoint {
            space: t.space,
            probabilities: t.probs,
        }
    }
}

impl JointTable {
    pub fn new(space: VariableSpace, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.num_cells() {
            return input(format!(
                "joint table has {} cells, space needs {}",
                probs.len(),
                space.num_cells()
            ));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return input("joint table has a negative or non-finite entry");
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > JOINT_SUM_TOLERANCE {
            return input(format!("joint table sums to {s}"));
        }
        Ok(JointTable { space, probs })
    }

    /// Trusted constructor for tables built from normalized factors.
    pub(crate) fn from_parts(space: VariableSpace, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), space.num_cells());
        JointTable { space, probs }
    }

    pub fn uniform(space: VariableSpace) -> Self {
        let n = space.num_cells();
        JointTable {
            space,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn space(&self) -> &VariableSpace {
        &self.space
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, assignment: &[usize]) -> f64 {
        self.probs[self.space.encode(assignment)]
    }

    pub(crate) fn check_same_space(&self, other: &JointTable) -> Result<()> {
        if self.space != other.space {
            return input(format!(
                "joint tables over different spaces {:?} and {:?}",
                self.space.cardinalities(),
                other.space.cardinalities()
            ));
        }
        Ok(())
    }

    /// Marginal probabilities of `vars` (in the order given) as a flat
    /// row-major vector.
    pub(crate) fn marginal_vec(&self, vars: &[usize]) -> Vec<f64> {
        let proj = self.space.projection(vars);
        let mut out = vec![0.0; self.space.count(vars)];
        for (p, &k) in self.probs.iter().zip(&proj) {
            out[k] += p;
        }
        out
    }

    /// Sums out every variable not in `keep`. Kept variables retain their
    /// relative order.
    pub fn marginalize(&self, keep: &[usize]) -> Result<JointTable> {
        if keep.is_empty() {
            return input("marginalize needs at least one variable to keep");
        }
        for &v in keep {
            self.space.check_var(v)?;
        }
        let keep = sorted_set(keep);
        let space = self.space.subspace(&keep)?;
        let probs = self.marginal_vec(&keep);
        Ok(JointTable { space, probs })
    }

    /// `P(child | given)` as a mechanism. Zero-probability parent rows are
    /// flagged undefined and filled uniformly.
    pub fn conditional(&self, child: usize, given: &[usize]) -> Result<Mechanism> {
        self.space.check_var(child)?;
        for &v in given {
            self.space.check_var(v)?;
        }
        let given = sorted_set(given);
        if given.contains(&child) {
            return input(format!("child {child} appears in its own conditioning set"));
        }
        let mut vars = given.clone();
        vars.push(child);
        let counts = self.marginal_vec(&vars);
        let card = self.space.cardinality(child);
        let rows = counts.len() / card;
        let mut table = Vec::with_capacity(counts.len());
        let mut undefined = vec![false; rows];
        for (r, row) in counts.chunks(card).enumerate() {
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                table.extend(row.iter().map(|p| p / total));
            } else {
                undefined[r] = true;
                table.extend(std::iter::repeat(1.0 / card as f64).take(card));
            }
        }
        let parent_cards = given.iter().map(|&v| self.space.cardinality(v)).collect();
        Ok(Mechanism::from_flat(child, card, given, parent_cards, table)?.with_undefined(undefined))
    }

    pub fn max_abs_diff(&self, other: &JointTable) -> Result<f64> {
        self.check_same_space(other)?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Half the L1 distance.
    pub fn total_variation(&self, other: &JointTable) -> Result<f64> {
        self.check_same_space(other)?;
        Ok(0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    /// Expectation of a per-assignment statistic.
    pub fn expectation(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.probs.len() {
            return input(format!(
                "statistic has {} values, table has {} cells",
                values.len(),
                self.probs.len()
            ));
        }
        Ok(self.probs.iter().zip(values).map(|(p, v)| p * v).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(cards: &[usize]) -> VariableSpace {
        VariableSpace::new(cards.to_vec()).unwrap()
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(JointTable::new(space(&[2]), vec![0.5, 0.6]).is_err());
        assert!(JointTable::new(space(&[2]), vec![1.0]).is_err());
        assert!(JointTable::new(space(&[2]), vec![-0.5, 1.5]).is_err());
    }

    #[test]
    fn marginalize_examples() {
        let u = JointTable::uniform(space(&[2, 2, 2]));
        assert_eq!(u.marginalize(&[0]).unwrap().probabilities(), &[0.5, 0.5]);
        assert_eq!(u.marginalize(&[0, 1, 2]).unwrap(), u);
        assert!(u.marginalize(&[]).is_err());
        // Kept variables keep their relative order regardless of argument order.
        let p = JointTable::new(space(&[2, 3]), vec![0.1, 0.2, 0.05, 0.3, 0.15, 0.2]).unwrap();
        let m = p.marginalize(&[1, 0]).unwrap();
        assert_eq!(m, p);
        let m1 = p.marginalize(&[1]).unwrap();
        let expected = [0.4, 0.35, 0.25];
        for (a, b) in m1.probabilities().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn conditional_of_independent_joint_is_marginal() {
        // P(X0) = [0.3, 0.7], P(X1) = [0.6, 0.4]
        let probs = vec![0.18, 0.12, 0.42, 0.28];
        let p = JointTable::new(space(&[2, 2]), probs).unwrap();
        let c = p.conditional(1, &[0]).unwrap();
        for row in c.rows() {
            assert!((row[0] - 0.6).abs() < 1e-12 && (row[1] - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_of_copy_is_identity() {
        let p = JointTable::new(space(&[2, 2]), vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let c = p.conditional(1, &[0]).unwrap();
        assert_eq!(c.row(0), &[1.0, 0.0]);
        assert_eq!(c.row(1), &[0.0, 1.0]);
        assert!(p.conditional(1, &[1]).is_err());
    }

    #[test]
    fn zero_rows_are_flagged_and_uniform() {
        let p = JointTable::new(space(&[2, 2]), vec![0.4, 0.6, 0.0, 0.0]).unwrap();
        let c = p.conditional(1, &[0]).unwrap();
        assert!(c.is_row_defined(0));
        assert!(!c.is_row_defined(1));
        assert_eq!(c.row(1), &[0.5, 0.5]);
        assert_eq!(c.undefined_rows().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn distances() {
        let p = JointTable::new(space(&[2]), vec![0.5, 0.5]).unwrap();
        let q = JointTable::new(space(&[2]), vec![0.25, 0.75]).unwrap();
        assert!((p.total_variation(&q).unwrap() - 0.25).abs() < 1e-15);
        assert!((p.max_abs_diff(&q).unwrap() - 0.25).abs() < 1e-15);
        assert!((q.expectation(&[1.0, -1.0]).unwrap() + 0.5).abs() < 1e-15);
        let r = JointTable::uniform(space(&[3]));
        assert!(p.total_variation(&r).is_err());
    }
}
