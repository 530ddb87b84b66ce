use serde::{Deserialize, Serialize};

use crate::environment::{Environment, EnvironmentSet};
use crate::error::{input, Result};
use crate::graph::{Dag, EdgeSet};

/// Which of the two sufficient conditions witnessed an edge `i -> j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SufficientCondition {
    /// Unblocked path to the tail `i` given `PA_j \ {i}`, with `j` not intervened.
    #[serde(rename = "i")]
    Tail,
    /// Unblocked path to the head `j` given `PA_i`, with `i` not intervened.
    #[serde(rename = "ii")]
    Head,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub environment: String,
    pub condition: SufficientCondition,
    /// Directed path from an intervention target to the endpoint.
    pub path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCondition {
    /// `(i, j)` for the edge `i -> j` of the candidate graph.
    pub edge: (usize, usize),
    pub witness: Option<Witness>,
}

impl EdgeCondition {
    pub fn satisfied(&self) -> bool {
        self.witness.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub per_edge: Vec<EdgeCondition>,
    pub all_satisfied: bool,
    pub identified_edges: EdgeSet,
}

fn witness_for(g: &Dag, env: &Environment, i: usize, j: usize) -> Result<Option<Witness>> {
    let targets = env.target_list();
    if !env.is_intervened(j) {
        let blocking: Vec<usize> = g.pa(j).iter().copied().filter(|&p| p != i).collect();
        if let Some(path) = g.unblocked_directed_path(&targets, i, &blocking)? {
            return Ok(Some(Witness {
                environment: env.label().to_string(),
                condition: SufficientCondition::Tail,
                path,
            }));
        }
    }
    if !env.is_intervened(i) {
        if let Some(path) = g.unblocked_directed_path(&targets, j, g.pa(i))? {
            return Ok(Some(Witness {
                environment: env.label().to_string(),
                condition: SufficientCondition::Head,
                path,
            }));
        }
    }
    Ok(None)
}

/// For every edge of `g_q`, the first environment (in order; condition (i)
/// before (ii)) whose targets satisfy one of the sufficient conditions.
pub fn check_sufficient_conditions(g_q: &Dag, envs: &EnvironmentSet) -> Result<ConditionReport> {
    if g_q.num_vars() != envs.space().num_vars() {
        return input("graph and environments have different numbers of variables");
    }
    let mut per_edge = Vec::with_capacity(g_q.edges().len());
    for &(i, j) in g_q.edges() {
        let mut witness = None;
        for env in envs {
            witness = witness_for(g_q, env, i, j)?;
            if witness.is_some() {
                break;
            }
        }
        per_edge.push(EdgeCondition { edge: (i, j), witness });
    }
    let identified_edges = EdgeSet::new(
        g_q.num_vars(),
        per_edge.iter().filter(|e| e.satisfied()).map(|e| e.edge),
    )?;
    Ok(ConditionReport {
        all_satisfied: per_edge.iter().all(EdgeCondition::satisfied),
        per_edge,
        identified_edges,
    })
}

/// Graphical predictions for a flipped edge, read in the true graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangePrediction {
    /// `P^e(X_j | PA_j^{G_Q})` is predicted to differ from the reference.
    pub changes_j: bool,
    /// `P^e(X_i | PA_i^{G_Q})` is predicted to differ from the reference.
    pub changes_i: bool,
}

/// Sufficient (not necessary) conditions under which the environment shifts
/// the candidate's conditionals at a flipped edge: `edge = (i, j)` is
/// `i -> j` in `g_q` and `j -> i` in `g_p`.
pub fn flipped_edge_change_predicate(
    g_p: &Dag,
    g_q: &Dag,
    env: &Environment,
    edge: (usize, usize),
) -> Result<ChangePrediction> {
    if g_p.skeleton() != g_q.skeleton() {
        return input("graphs must share a skeleton");
    }
    if env.space().num_vars() != g_p.num_vars() {
        return input("environment and graphs have different numbers of variables");
    }
    let (i, j) = edge;
    if !g_q.has_edge(i, j) || !g_p.has_edge(j, i) {
        return input(format!("({i}, {j}) is not an edge flipped between the two graphs"));
    }
    let targets = env.target_list();
    let blocking_j: Vec<usize> = g_q.pa(j).iter().copied().filter(|&p| p != i).collect();
    Ok(ChangePrediction {
        changes_j: g_p.has_unblocked_directed_path(&targets, i, &blocking_j)?,
        changes_i: g_p.has_unblocked_directed_path(&targets, j, g_q.pa(i))?,
    })
}
