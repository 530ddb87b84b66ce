use super::joint::JointTable;
use super::kl::kl;
use super::model::Cgm;
use super::space::sorted_set;
use crate::error::{input, Error, Result};
use crate::graph::Dag;

/// Default variable limit for [`is_faithful`].
pub const DEFAULT_FAITHFULNESS_LIMIT: usize = 7;

/// The model `(prod_i P(X_i | PA_i^g), g)` whose joint is the Markov
/// projection of `p` onto `g`.
pub fn markov_projection_model(p: &JointTable, g: &Dag) -> Result<Cgm> {
    let d = p.space().num_vars();
    if g.num_vars() != d {
        return input(format!("graph has {} variables, distribution has {d}", g.num_vars()));
    }
    let mechanisms = (0..d)
        .map(|i| p.conditional(i, g.pa(i)))
        .collect::<Result<Vec<_>>>()?;
    Cgm::new(p.space().clone(), g.clone(), mechanisms)
}

/// The KL-closest distribution to `p` among those Markovian w.r.t. `g`.
pub fn markov_project(p: &JointTable, g: &Dag) -> Result<JointTable> {
    markov_projection_model(p, g)?.joint()
}

/// Whether `KL(p || markov_project(p, g)) <= tol`.
pub fn is_markov(p: &JointTable, g: &Dag, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return input("tolerance must be positive");
    }
    let projected = markov_project(p, g)?;
    let d = kl(p, &projected)?;
    Ok(d.is_finite() && d.value() <= tol)
}

/// `I(X_i; X_j | X_z)` in nats.
pub fn conditional_mutual_information(p: &JointTable, i: usize, j: usize, z: &[usize]) -> Result<f64> {
    let space = p.space();
    space.check_var(i)?;
    space.check_var(j)?;
    let z = sorted_set(z);
    for &v in &z {
        space.check_var(v)?;
    }
    if i == j || z.contains(&i) || z.contains(&j) {
        return input("mutual information needs distinct, non-overlapping variables");
    }
    let mut vars = z.clone();
    vars.push(i);
    vars.push(j);
    let m = p.marginal_vec(&vars);
    let (ci, cj) = (space.cardinality(i), space.cardinality(j));
    let mut total = 0.0;
    for block in m.chunks(ci * cj) {
        let pz: f64 = block.iter().sum();
        if pz <= 0.0 {
            continue;
        }
        let row_sums: Vec<f64> = block.chunks(cj).map(|r| r.iter().sum()).collect();
        let col_sums: Vec<f64> = (0..cj).map(|b| (0..ci).map(|a| block[a * cj + b]).sum()).collect();
        for a in 0..ci {
            for b in 0..cj {
                let pab = block[a * cj + b];
                if pab > 0.0 {
                    total += pab * (pab * pz / (row_sums[a] * col_sums[b])).ln();
                }
            }
        }
    }
    Ok(total.max(0.0))
}

/// Faithfulness with the default variable limit.
pub fn is_faithful(p: &JointTable, g: &Dag, tol: f64) -> Result<bool> {
    is_faithful_with_limit(p, g, tol, DEFAULT_FAITHFULNESS_LIMIT)
}

/// Every conditional independence of `p` (mutual information at most `tol`)
/// over every pair and every conditioning set must be a d-separation in `g`.
pub fn is_faithful_with_limit(p: &JointTable, g: &Dag, tol: f64, limit: usize) -> Result<bool> {
    let d = p.space().num_vars();
    if d > limit {
        return Err(Error::Capacity {
            what: "faithfulness check (variables)",
            requested: d,
            limit,
        });
    }
    if g.num_vars() != d {
        return input(format!("graph has {} variables, distribution has {d}", g.num_vars()));
    }
    if !(tol > 0.0) {
        return input("tolerance must be positive");
    }
    for i in 0..d {
        for j in i + 1..d {
            let rest: Vec<usize> = (0..d).filter(|&v| v != i && v != j).collect();
            for mask in 0u32..(1 << rest.len()) {
                let z: Vec<usize> = rest
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask & (1 << b) != 0)
                    .map(|(_, &v)| v)
                    .collect();
                if conditional_mutual_information(p, i, j, &z)? <= tol && !g.d_separated(&[i], &[j], &z)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
