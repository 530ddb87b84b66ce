use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::decomposition::{decompose_kl_general, KlDecomposition};
use crate::distribution::{expected_conditional_kl, sorted_set, Cgm, ExtendedNonNegative};
use crate::environment::EnvironmentSet;
use crate::error::{input, Result};
use crate::graph::EdgeSet;

/// One environment's share of an IKL computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentTerms {
    pub label: String,
    pub targets: Vec<usize>,
    /// Intervened terms are listed for reference but excluded from the sum.
    pub decomposition: KlDecomposition,
    pub contribution: ExtendedNonNegative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IklReport {
    pub per_environment: Vec<EnvironmentTerms>,
    pub ikl_value: ExtendedNonNegative,
    pub epsilon: f64,
    /// `ikl_value <= epsilon`.
    pub equivalent: bool,
}

impl IklReport {
    fn from_terms(per_environment: Vec<EnvironmentTerms>, epsilon: f64) -> IklReport {
        let n = per_environment.len() as f64;
        let ikl_value = per_environment
            .iter()
            .map(|e| e.contribution)
            .sum::<ExtendedNonNegative>()
            .scale(1.0 / n);
        IklReport {
            equivalent: ikl_value.is_finite() && ikl_value.value() <= epsilon,
            per_environment,
            ikl_value,
            epsilon,
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return input(format!("epsilon must be a finite nonnegative number, got {epsilon}"));
    }
    Ok(())
}

/// Interventional KL divergence of `q` from the environments: the uniform
/// average over environments of the un-intervened conditional terms plus
/// the Markov-projection residual, conditioning on `q`'s graph.
pub fn ikl(envs: &EnvironmentSet, q: &Cgm, epsilon: f64) -> Result<IklReport> {
    check_epsilon(epsilon)?;
    if envs.space() != q.space() {
        return input("environments and model use different variable spaces");
    }
    let per_environment = envs
        .iter()
        .map(|env| {
            let decomposition = decompose_kl_general(env, q)?;
            Ok(EnvironmentTerms {
                label: env.label().to_string(),
                targets: env.target_list(),
                contribution: decomposition.ikl_contribution(),
                decomposition,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IklReport::from_terms(per_environment, epsilon))
}

/// IKL restricted to an observed subset and to the variables incident to
/// `identified`. Environment distributions and `q` are marginalized to
/// `observed`; each variable conditions on its `q`-parents that are
/// observed. No residual term is included.
pub fn restricted_ikl(
    envs: &EnvironmentSet,
    q: &Cgm,
    identified: &EdgeSet,
    observed: &[usize],
    epsilon: f64,
) -> Result<IklReport> {
    check_epsilon(epsilon)?;
    if envs.space() != q.space() {
        return input("environments and model use different variable spaces");
    }
    let d = q.space().num_vars();
    if identified.num_vars() != d {
        return input(format!("edge set is over {} variables, model has {d}", identified.num_vars()));
    }
    let observed = sorted_set(observed);
    if observed.is_empty() {
        return input("at least one variable must be observed");
    }
    if let Some(&v) = observed.iter().find(|&&v| v >= d) {
        return input(format!("observed variable {v} out of range"));
    }
    let local = |v: usize| observed.binary_search(&v).ok();
    for (a, b) in identified.iter() {
        if local(a).is_none() || local(b).is_none() {
            return input(format!("identified edge ({a}, {b}) leaves the observed subgraph"));
        }
        if !q.graph().adjacent(a, b) {
            return input(format!("identified edge ({a}, {b}) is not in the model's skeleton"));
        }
    }

    let q_obs = q.joint()?.marginalize(&observed)?;
    let vertices = identified.vertices();
    let per_environment = envs
        .iter()
        .map(|env| {
            let p_obs = env.distribution().marginalize(&observed)?;
            let mut unintervened_terms = BTreeMap::new();
            for &i in vertices.iter().filter(|&&i| !env.is_intervened(i)) {
                let parents: Vec<usize> = q.graph().pa(i).iter().filter_map(|&p| local(p)).collect();
                let li = local(i).expect("identified vertices are observed");
                let term = expected_conditional_kl(&p_obs, &p_obs, &q_obs, li, &parents)?;
                unintervened_terms.insert(i, term);
            }
            let total: ExtendedNonNegative = unintervened_terms.values().sum();
            Ok(EnvironmentTerms {
                label: env.label().to_string(),
                targets: env.target_list(),
                decomposition: KlDecomposition {
                    intervened_terms: BTreeMap::new(),
                    unintervened_terms,
                    residual: ExtendedNonNegative::ZERO,
                    total,
                },
                contribution: total,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IklReport::from_terms(per_environment, epsilon))
}
