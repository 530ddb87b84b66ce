use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::distribution::{expected_conditional_kl, ExtendedNonNegative, JointTable};
use crate::environment::EnvironmentSet;
use crate::error::{input, Result};
use crate::graph::Dag;

/// `E_{P^e(pa)} KL(P^e(X_i | pa) || P(X_i | pa))` for one environment and
/// one un-intervened variable, with `pa` taken from a candidate graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationTerm {
    pub environment: String,
    pub variable: usize,
    pub parents: Vec<usize>,
    pub value: ExtendedNonNegative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphScore {
    pub graph: Dag,
    pub total: ExtendedNonNegative,
    pub max_term: ExtendedNonNegative,
    /// Every testable term is at most epsilon.
    pub zero_score: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationReport {
    /// Terms for the candidate graph itself.
    pub candidate_terms: Vec<OrientationTerm>,
    /// Variables whose candidate parent set is shown to be wrong.
    pub flagged_variables: Vec<usize>,
    /// Every member of the candidate's equivalence class, best first.
    pub ranked: Vec<GraphScore>,
    /// Members with zero score, in ranked order.
    pub survivors: Vec<Dag>,
    pub epsilon: f64,
}

struct TermCache<'a> {
    envs: &'a EnvironmentSet,
    reference: &'a JointTable,
    values: HashMap<(usize, usize, Vec<usize>), ExtendedNonNegative>,
}

impl TermCache<'_> {
    fn terms(&mut self, g: &Dag) -> Result<Vec<OrientationTerm>> {
        let mut out = Vec::new();
        for (e, env) in self.envs.iter().enumerate() {
            for i in (0..g.num_vars()).filter(|&i| !env.is_intervened(i)) {
                let parents = g.pa(i).to_vec();
                let key = (e, i, parents.clone());
                let value = match self.values.get(&key) {
                    Some(v) => *v,
                    None => {
                        let p_e = env.distribution();
                        let v = expected_conditional_kl(p_e, p_e, self.reference, i, &parents)?;
                        self.values.insert(key, v);
                        v
                    }
                };
                out.push(OrientationTerm {
                    environment: env.label().to_string(),
                    variable: i,
                    parents,
                    value,
                });
            }
        }
        Ok(out)
    }
}

/// Tests the model `(P, g_q)` against the environments: any positive
/// un-intervened term flags a wrong parent set, and every member of the
/// Markov equivalence class of `g_q` is rescored by the same terms.
///
/// Members are ranked by total score (ties keep enumeration order);
/// survivors are the members whose terms all vanish.
pub fn orient_edges(
    envs: &EnvironmentSet,
    p_joint: &JointTable,
    g_q: &Dag,
    epsilon: f64,
) -> Result<OrientationReport> {
    if envs.space() != p_joint.space() {
        return input("environments and reference joint use different variable spaces");
    }
    if g_q.num_vars() != p_joint.space().num_vars() {
        return input("graph and reference joint have different numbers of variables");
    }
    if !(epsilon >= 0.0) {
        return input("epsilon must be nonnegative");
    }
    let is_zero = |v: ExtendedNonNegative| v.is_finite() && v.value() <= epsilon;
    let mut cache = TermCache {
        envs,
        reference: p_joint,
        values: HashMap::new(),
    };
    let candidate_terms = cache.terms(g_q)?;
    let mut flagged_variables: Vec<usize> = candidate_terms
        .iter()
        .filter(|t| !is_zero(t.value))
        .map(|t| t.variable)
        .collect();
    flagged_variables.sort_unstable();
    flagged_variables.dedup();

    let mut ranked = Vec::new();
    for graph in g_q.markov_equivalence_class()? {
        let terms = cache.terms(&graph)?;
        let total: ExtendedNonNegative = terms.iter().map(|t| t.value).sum();
        let max_term = terms
            .iter()
            .map(|t| t.value)
            .fold(ExtendedNonNegative::ZERO, |a, b| if b > a { b } else { a });
        ranked.push(GraphScore {
            graph,
            total,
            max_term,
            zero_score: terms.iter().all(|t| is_zero(t.value)),
        });
    }
    ranked.sort_by(|a, b| a.total.partial_cmp(&b.total).expect("scores are never NaN"));
    let survivors = ranked
        .iter()
        .filter(|s| s.zero_score)
        .map(|s| s.graph.clone())
        .collect();
    Ok(OrientationReport {
        candidate_terms,
        flagged_variables,
        ranked,
        survivors,
        epsilon,
    })
}
