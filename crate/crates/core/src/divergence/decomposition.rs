use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DEFAULT_EPSILON;
use crate::distribution::{
    expected_conditional_kl_to_mechanism, is_markov, kl, markov_project, Cgm, ExtendedNonNegative, Mechanism,
};
use crate::environment::Environment;
use crate::error::{input, Error, Result};
use crate::graph::Dag;

/// Chain-rule split of `KL(P^e || Q)` into per-variable conditional terms
/// (intervened and un-intervened) plus the distance of `P^e` from its
/// Markov projection onto the conditioning graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlDecomposition {
    pub intervened_terms: BTreeMap<usize, ExtendedNonNegative>,
    pub unintervened_terms: BTreeMap<usize, ExtendedNonNegative>,
    pub residual: ExtendedNonNegative,
    pub total: ExtendedNonNegative,
}

impl KlDecomposition {
    fn assemble(
        env: &Environment,
        terms: Vec<ExtendedNonNegative>,
        residual: ExtendedNonNegative,
    ) -> KlDecomposition {
        let mut intervened_terms = BTreeMap::new();
        let mut unintervened_terms = BTreeMap::new();
        for (i, t) in terms.into_iter().enumerate() {
            if env.is_intervened(i) {
                intervened_terms.insert(i, t);
            } else {
                unintervened_terms.insert(i, t);
            }
        }
        let total = intervened_terms.values().sum::<ExtendedNonNegative>()
            + unintervened_terms.values().sum::<ExtendedNonNegative>()
            + residual;
        KlDecomposition {
            intervened_terms,
            unintervened_terms,
            residual,
            total,
        }
    }

    /// What this environment adds to the IKL sum: un-intervened terms plus
    /// the residual.
    pub fn ikl_contribution(&self) -> ExtendedNonNegative {
        self.unintervened_terms.values().sum::<ExtendedNonNegative>() + self.residual
    }
}

fn check_spaces(env: &Environment, q: &Cgm) -> Result<()> {
    if env.space() != q.space() {
        return input(format!(
            "environment {:?} and model use different variable spaces",
            env.label()
        ));
    }
    Ok(())
}

/// Decomposition against a graph `g` shared by the data-generating model
/// and `q`. Requires both `q`'s joint and `P^e` to be Markovian w.r.t. `g`;
/// the residual is then zero by construction.
pub fn decompose_kl_shared(env: &Environment, q: &Cgm, g: &Dag) -> Result<KlDecomposition> {
    check_spaces(env, q)?;
    let d = q.space().num_vars();
    if g.num_vars() != d {
        return input(format!("graph has {} variables, model has {d}", g.num_vars()));
    }
    let mechanisms: Vec<Mechanism> = if g == q.graph() {
        q.mechanisms().to_vec()
    } else {
        let q_joint = q.joint()?;
        if !is_markov(&q_joint, g, DEFAULT_EPSILON)? {
            return Err(Error::Precondition(
                "model is not Markovian with respect to the shared graph; use the general decomposition".into(),
            ));
        }
        (0..d)
            .map(|i| q_joint.conditional(i, g.pa(i)))
            .collect::<Result<_>>()?
    };
    let p_e = env.distribution();
    if !is_markov(p_e, g, DEFAULT_EPSILON)? {
        return Err(Error::Precondition(format!(
            "environment {:?} is not Markovian with respect to the shared graph; use the general decomposition",
            env.label()
        )));
    }
    let terms = mechanisms
        .iter()
        .map(|m| expected_conditional_kl_to_mechanism(p_e, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(KlDecomposition::assemble(env, terms, ExtendedNonNegative::ZERO))
}

/// Decomposition conditioning on `q`'s own graph, for arbitrary `P^e`.
pub fn decompose_kl_general(env: &Environment, q: &Cgm) -> Result<KlDecomposition> {
    check_spaces(env, q)?;
    let p_e = env.distribution();
    let terms = q
        .mechanisms()
        .iter()
        .map(|m| expected_conditional_kl_to_mechanism(p_e, m))
        .collect::<Result<Vec<_>>>()?;
    let projected = markov_project(p_e, q.graph())?;
    let residual = kl(p_e, &projected)?;
    Ok(KlDecomposition::assemble(env, terms, residual))
}
