use crate::distribution::{Cgm, ExtendedNonNegative, JointTable, VariableSpace};
use crate::environment::Environment;
use crate::error::{input, Result};

fn decode(cards: &[usize], mut index: usize) -> Vec<usize> {
    let mut x = vec![0; cards.len()];
    for i in (0..cards.len()).rev() {
        x[i] = index % cards[i];
        index /= cards[i];
    }
    x
}

fn encode(cards: &[usize], vars: &[usize], x: &[usize]) -> usize {
    vars.iter().fold(0, |acc, &v| acc * cards[v] + x[v])
}

fn size(cards: &[usize], vars: &[usize]) -> usize {
    vars.iter().map(|&v| cards[v]).product()
}

/// `P(x)` for every cell, as a product of mechanism lookups.
pub fn brute_force_joint(m: &Cgm) -> Result<JointTable> {
    let cards = m.space().cardinalities().to_vec();
    let cells = m.space().num_cells();
    let mut probs = Vec::with_capacity(cells);
    for index in 0..cells {
        let x = decode(&cards, index);
        let mut p = 1.0;
        for mech in m.mechanisms() {
            let row = encode(&cards, mech.parents(), &x);
            p *= mech.table()[row * mech.child_card() + x[mech.child()]];
        }
        probs.push(p);
    }
    JointTable::new(m.space().clone(), probs)
}

fn log_ratio_sum(weights: &[f64], num: &[f64], den: &[f64]) -> ExtendedNonNegative {
    let mut total = 0.0;
    for ((&w, &a), &b) in weights.iter().zip(num).zip(den) {
        if w <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return ExtendedNonNegative::INFINITY;
        }
        total += w * (a / b).ln();
    }
    ExtendedNonNegative::clamped(total)
}

/// `sum_x p(x) ln(p(x) / q(x))` by a single loop over cells.
pub fn brute_force_kl(p: &JointTable, q: &JointTable) -> Result<ExtendedNonNegative> {
    if p.space() != q.space() {
        return input("distributions live on different variable spaces");
    }
    let probs = p.probabilities();
    Ok(log_ratio_sum(probs, probs, q.probabilities()))
}

fn marginal(space: &VariableSpace, probs: &[f64], vars: &[usize]) -> Vec<f64> {
    let cards = space.cardinalities();
    let mut out = vec![0.0; size(cards, vars)];
    for (index, &p) in probs.iter().enumerate() {
        let x = decode(cards, index);
        out[encode(cards, vars, &x)] += p;
    }
    out
}

/// Every block of the general decomposition, each summed directly over
/// full assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionTerms {
    /// One conditional term per variable, indexed by variable.
    pub terms: Vec<ExtendedNonNegative>,
    pub residual: ExtendedNonNegative,
    pub direct_kl: ExtendedNonNegative,
}

impl DecompositionTerms {
    pub fn sum(&self) -> ExtendedNonNegative {
        self.terms.iter().copied().sum::<ExtendedNonNegative>() + self.residual
    }
}

/// Recomputes `E_{P^e} ln(P^e(x_i | pa_i) / Q(x_i | pa_i))` for every `i`
/// (parents from `q`'s graph), the distance of `P^e` to its Markov
/// projection, and `KL(P^e || Q)`.
pub fn decomposition_terms(env: &Environment, q: &Cgm) -> Result<DecompositionTerms> {
    let space = env.space();
    if space != q.space() {
        return input("environment and model use different variable spaces");
    }
    let cards = space.cardinalities();
    let p = env.distribution().probabilities();
    let cells = p.len();
    let mut conditional = vec![vec![0.0; cells]; cards.len()];
    let mut q_cond = vec![vec![0.0; cells]; cards.len()];
    for (i, mech) in q.mechanisms().iter().enumerate() {
        let pa = mech.parents();
        let mut family = pa.to_vec();
        family.push(i);
        let joint_family = marginal(space, p, &family);
        let joint_parents = marginal(space, p, pa);
        for index in 0..cells {
            let x = decode(cards, index);
            let denom = joint_parents[encode(cards, pa, &x)];
            conditional[i][index] = if denom > 0.0 {
                joint_family[encode(cards, &family, &x)] / denom
            } else {
                0.0
            };
            q_cond[i][index] = mech.table()[encode(cards, pa, &x) * mech.child_card() + x[i]];
        }
    }
    let terms = (0..cards.len())
        .map(|i| log_ratio_sum(p, &conditional[i], &q_cond[i]))
        .collect();
    let factorized: Vec<f64> = (0..cells)
        .map(|index| conditional.iter().map(|c| c[index]).product())
        .collect();
    let residual = log_ratio_sum(p, p, &factorized);
    let direct_kl = brute_force_kl(env.distribution(), &brute_force_joint(q)?)?;
    Ok(DecompositionTerms {
        terms,
        residual,
        direct_kl,
    })
}

/// `|sum of decomposition terms - KL(P^e || Q)|`; zero when both sides are
/// infinite, infinite when exactly one is.
pub fn verify_decomposition(env: &Environment, q: &Cgm) -> Result<f64> {
    let t = decomposition_terms(env, q)?;
    let (a, b) = (t.sum(), t.direct_kl);
    Ok(match (a.is_finite(), b.is_finite()) {
        (true, true) => (a.value() - b.value()).abs(),
        (false, false) => 0.0,
        _ => f64::INFINITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::Mechanism;
    use crate::graph::Dag;

    #[test]
    fn single_variable_joint_copies_mechanism() {
        let space = VariableSpace::new(vec![3]).unwrap();
        let m = Mechanism::new(0, 3, vec![], vec![], vec![vec![0.2, 0.3, 0.5]]).unwrap();
        let cgm = Cgm::new(space, Dag::empty(1).unwrap(), vec![m]).unwrap();
        assert_eq!(brute_force_joint(&cgm).unwrap().probabilities(), &[0.2, 0.3, 0.5]);
    }

    #[test]
    fn uniform_mechanisms_give_uniform_joint() {
        let space = VariableSpace::new(vec![2, 3]).unwrap();
        let g = Dag::new(2, [(0, 1)]).unwrap();
        let mechs = vec![
            Mechanism::uniform(0, 2, vec![], vec![]).unwrap(),
            Mechanism::uniform(1, 3, vec![0], vec![2]).unwrap(),
        ];
        let cgm = Cgm::new(space, g, mechs).unwrap();
        for &p in brute_force_joint(&cgm).unwrap().probabilities() {
            assert!((p - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn kl_conventions() {
        let space = VariableSpace::binary(1).unwrap();
        let p = JointTable::new(space.clone(), vec![1.0, 0.0]).unwrap();
        let q = JointTable::new(space.clone(), vec![0.0, 1.0]).unwrap();
        assert_eq!(brute_force_kl(&p, &p).unwrap(), ExtendedNonNegative::ZERO);
        assert!(brute_force_kl(&p, &q).unwrap().is_infinite());
        let other = JointTable::uniform(VariableSpace::binary(2).unwrap());
        assert!(brute_force_kl(&p, &other).is_err());
    }

    #[test]
    fn complete_graph_has_zero_residual() {
        let space = VariableSpace::binary(3).unwrap();
        let p = JointTable::new(space.clone(), vec![0.1, 0.2, 0.05, 0.15, 0.2, 0.1, 0.12, 0.08]).unwrap();
        let env = Environment::from_distribution("e", [], p.clone()).unwrap();
        let g = Dag::complete(3).unwrap();
        let mechs = (0..3)
            .map(|i| Mechanism::uniform(i, 2, g.parents(i).unwrap().to_vec(), vec![2; i]))
            .collect::<Result<Vec<_>>>()
            .unwrap();
        let q = Cgm::new(space, g, mechs).unwrap();
        let t = decomposition_terms(&env, &q).unwrap();
        assert!(t.residual.value().abs() < 1e-15);
        assert!(verify_decomposition(&env, &q).unwrap() < 1e-12);
    }
}
