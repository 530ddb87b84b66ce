use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distribution::{is_faithful, joint_from_model, Cgm, JointTable, Mechanism, VariableSpace};
use crate::environment::{Environment, EnvironmentSet, Intervention};
use crate::error::{input, Error, Result};
use crate::graph::Dag;

/// Largest model the generators will build.
pub const MAX_ORACLE_VARS: usize = 7;

/// Floor on every generated mechanism entry.
pub const MIN_PROBABILITY: f64 = 1e-3;

const MAX_FAITHFULNESS_FAILURES: usize = 100;
const FAITHFULNESS_TOL: f64 = 1e-9;
const ENVIRONMENT_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub seed: u64,
    pub min_vars: usize,
    pub max_vars: usize,
    pub max_cardinality: usize,
    pub min_shift_tv: f64,
}

impl OracleConfig {
    pub fn new(seed: u64) -> Self {
        OracleConfig {
            seed,
            min_vars: 2,
            max_vars: 5,
            max_cardinality: 3,
            min_shift_tv: 0.05,
        }
    }

    pub fn with_vars(mut self, min_vars: usize, max_vars: usize) -> Self {
        self.min_vars = min_vars;
        self.max_vars = max_vars;
        self
    }

    pub fn with_max_cardinality(mut self, max_cardinality: usize) -> Self {
        self.max_cardinality = max_cardinality;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_vars == 0 || self.min_vars > self.max_vars || self.max_vars > MAX_ORACLE_VARS {
            return input(format!(
                "variable range {}..={} must be nonempty and within 1..={MAX_ORACLE_VARS}",
                self.min_vars, self.max_vars
            ));
        }
        if self.max_cardinality < 2 {
            return input("max_cardinality must be at least 2");
        }
        if !(self.min_shift_tv > 0.0 && self.min_shift_tv < 0.5) {
            return input(format!("min_shift_tv must lie in (0, 0.5), got {}", self.min_shift_tv));
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// A DAG over `n` variables: every pair ordered by a random permutation is
/// joined with probability 1/2.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize) -> Result<Dag> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(0.5) {
                edges.push((order[a], order[b]));
            }
        }
    }
    Dag::new(n, edges)
}

fn random_row<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    let scale = 1.0 - k as f64 * MIN_PROBABILITY;
    let mut row: Vec<f64> = w.iter().map(|x| MIN_PROBABILITY + scale * x / total).collect();
    let excess: f64 = row.iter().sum::<f64>() - 1.0;
    let last = row.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap();
    row[last] -= excess;
    row
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// A replacement row at total variation at least `min_tv` from `row`.
fn shifted_row<R: Rng>(rng: &mut R, row: &[f64], min_tv: f64) -> Vec<f64> {
    for _ in 0..32 {
        let candidate = random_row(rng, row.len());
        if tv(&candidate, row) >= min_tv {
            return candidate;
        }
    }
    // Move mass toward the least likely entry until the distance is reached.
    let (k, &low) = row.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let t = (min_tv / (1.0 - low)).min(1.0);
    let mut out: Vec<f64> = row.iter().map(|p| (1.0 - t) * p).collect();
    out[k] += t;
    let excess: f64 = out.iter().sum::<f64>() - 1.0;
    out[k] -= excess;
    out
}

/// Random mechanisms for every variable of `graph`.
pub fn random_mechanisms<R: Rng>(rng: &mut R, space: &VariableSpace, graph: &Dag) -> Result<Vec<Mechanism>> {
    (0..graph.num_vars())
        .map(|i| {
            let parents = graph.parents(i)?.to_vec();
            let parent_cards: Vec<usize> = parents.iter().map(|&p| space.cardinality(p)).collect();
            let rows = (0..parent_cards.iter().product::<usize>())
                .map(|_| random_row(rng, space.cardinality(i)))
                .collect();
            Mechanism::new(i, space.cardinality(i), parents, parent_cards, rows)
        })
        .collect()
}

fn faithful_model<R: Rng>(
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> Result<(VariableSpace, Dag)>,
) -> Result<Cgm> {
    for _ in 0..MAX_FAITHFULNESS_FAILURES {
        let (space, graph) = draw(rng)?;
        let mechanisms = random_mechanisms(rng, &space, &graph)?;
        let model = Cgm::new(space, graph, mechanisms)?;
        if is_faithful(&joint_from_model(&model)?, model.graph(), FAITHFULNESS_TOL)? {
            return Ok(model);
        }
    }
    Err(Error::Generation(format!(
        "{MAX_FAITHFULNESS_FAILURES} consecutive draws failed the faithfulness filter"
    )))
}

/// A random faithful model: size, cardinalities, graph and mechanisms all
/// drawn from the seed.
pub fn random_cgm(cfg: &OracleConfig) -> Result<Cgm> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    faithful_model(&mut rng, |rng| {
        let n = rng.gen_range(cfg.min_vars..=cfg.max_vars);
        let cards = (0..n).map(|_| rng.gen_range(2..=cfg.max_cardinality)).collect();
        Ok((VariableSpace::new(cards)?, random_dag(rng, n)?))
    })
}

/// Random faithful mechanisms on a fixed graph and space.
pub fn random_faithful_model(cfg: &OracleConfig, space: &VariableSpace, graph: &Dag) -> Result<Cgm> {
    cfg.validate()?;
    if space.num_vars() != graph.num_vars() {
        return input("space and graph have different numbers of variables");
    }
    let mut rng = cfg.rng();
    faithful_model(&mut rng, |_| Ok((space.clone(), graph.clone())))
}

/// A strictly positive random joint table on `space`.
pub fn random_joint(seed: u64, space: &VariableSpace) -> Result<JointTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = random_row(&mut rng, space.num_cells());
    JointTable::new(space.clone(), probs)
}

fn shifted_mechanism<R: Rng>(rng: &mut R, original: &Mechanism, min_tv: f64) -> Result<Mechanism> {
    let rows = original.rows().map(|row| shifted_row(rng, row, min_tv)).collect();
    Mechanism::new(
        original.child(),
        original.child_card(),
        original.parents().to_vec(),
        original.parent_cards().to_vec(),
        rows,
    )
}

/// A copy of `mechanism` with every row moved by at least `min_tv` in total
/// variation.
pub fn perturb_mechanism(seed: u64, mechanism: &Mechanism, min_tv: f64) -> Result<Mechanism> {
    if !(min_tv > 0.0 && min_tv < 0.5) {
        return input(format!("min_tv must lie in (0, 0.5), got {min_tv}"));
    }
    shifted_mechanism(&mut ChaCha8Rng::seed_from_u64(seed), mechanism, min_tv)
}

/// `count` environments of `m`. The first is observational (label `e0`);
/// each later one soft-intervenes on one or two random variables, every row
/// of every replaced mechanism moving by at least `min_shift_tv`.
pub fn random_environment_set(cfg: &OracleConfig, m: &Cgm, count: usize) -> Result<EnvironmentSet> {
    cfg.validate()?;
    if count == 0 {
        return input("environment count must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ ENVIRONMENT_STREAM);
    let d = m.space().num_vars();
    let mut envs = vec![Environment::observational("e0", m)?];
    for e in 1..count {
        let mut vars: Vec<usize> = (0..d).collect();
        vars.shuffle(&mut rng);
        let k = if d > 1 { rng.gen_range(1..=2) } else { 1 };
        let interventions = vars[..k]
            .iter()
            .map(|&t| Ok(Intervention::replace(shifted_mechanism(&mut rng, m.mechanism(t), cfg.min_shift_tv)?)))
            .collect::<Result<Vec<_>>>()?;
        envs.push(Environment::from_interventions(format!("e{e}"), m, interventions)?);
    }
    EnvironmentSet::new(envs)
}

/// The observational environment `e0` followed by one soft intervention on
/// each variable in turn (labels `do0`, `do1`, ...).
pub fn single_target_environment_set(cfg: &OracleConfig, m: &Cgm) -> Result<EnvironmentSet> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ ENVIRONMENT_STREAM);
    let mut envs = vec![Environment::observational("e0", m)?];
    for t in 0..m.space().num_vars() {
        let shifted = shifted_mechanism(&mut rng, m.mechanism(t), cfg.min_shift_tv)?;
        envs.push(Environment::from_interventions(
            format!("do{t}"),
            m,
            vec![Intervention::replace(shifted)],
        )?);
    }
    EnvironmentSet::new(envs)
}
