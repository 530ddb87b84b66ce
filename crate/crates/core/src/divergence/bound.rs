use serde::{Deserialize, Serialize};

use super::ikl::ikl;
use crate::distribution::{kl, Cgm, ExtendedNonNegative};
use crate::environment::{build_shifted_model, EnvironmentSet};
use crate::error::{input, Result};

/// Slack added to inequality checks to absorb floating-point accumulation
/// when both sides are (mathematically) zero.
pub const ROUNDOFF_SLACK: f64 = 1e-12;

/// A per-assignment statistic with values in `[-bound, bound]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedStatistic {
    values: Vec<f64>,
    bound: f64,
}

impl BoundedStatistic {
    pub fn new(values: Vec<f64>, bound: f64) -> Result<Self> {
        if !(bound > 0.0) || !bound.is_finite() {
            return input(format!("statistic bound must be positive and finite, got {bound}"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || v.abs() > bound) {
            return input(format!("statistic value {v} outside [-{bound}, {bound}]"));
        }
        Ok(BoundedStatistic { values, bound })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentDeviation {
    pub label: String,
    /// `|E_{P^e}[f] - E_{Q^e}[f]|`.
    pub deviation: f64,
    pub total_variation: f64,
    pub kl: ExtendedNonNegative,
    pub within_threshold: bool,
    /// `TV <= sqrt(KL / 2)` for this environment.
    pub pinsker_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// The IKL value playing the role of epsilon.
    pub epsilon: ExtendedNonNegative,
    pub rho: f64,
    pub bound: f64,
    /// `bound * sqrt(epsilon) / rho`.
    pub threshold: f64,
    /// `sqrt(2)` times `threshold`: the level at which Markov's inequality
    /// on `|E_P f - E_Q f| <= 2 B TV <= B sqrt(2 KL)` guarantees the
    /// `1 - rho` fraction.
    pub rigorous_threshold: f64,
    /// Fraction of environments within `rigorous_threshold`.
    pub rigorous_fraction_within: f64,
    pub per_environment: Vec<EnvironmentDeviation>,
    pub fraction_within: f64,
    /// `fraction_within >= 1 - rho`.
    pub holds: bool,
    pub mean_total_variation: f64,
    pub mean_kl: ExtendedNonNegative,
    /// Average TV at most `sqrt(average KL)`.
    pub pinsker_chain_holds: bool,
}

/// Compares expectations of `f` under each `P^e` and the matching shifted
/// model `Q^e`, against the deviation threshold implied by the IKL value.
pub fn estimation_bound_report(
    envs: &EnvironmentSet,
    q: &Cgm,
    f: &BoundedStatistic,
    rho: f64,
) -> Result<BoundReport> {
    if !(rho > 0.0 && rho < 1.0) {
        return input(format!("rho must lie in (0, 1), got {rho}"));
    }
    if f.values.len() != q.space().num_cells() {
        return input("statistic length does not match the joint table");
    }
    let epsilon = ikl(envs, q, 0.0)?.ikl_value;
    let threshold = f.bound * epsilon.value().sqrt() / rho;
    let mut per_environment = Vec::with_capacity(envs.len());
    for env in envs {
        let q_e = build_shifted_model(q, env)?.joint()?;
        let p_e = env.distribution();
        let deviation = (p_e.expectation(&f.values)? - q_e.expectation(&f.values)?).abs();
        let total_variation = p_e.total_variation(&q_e)?;
        let divergence = kl(p_e, &q_e)?;
        per_environment.push(EnvironmentDeviation {
            label: env.label().to_string(),
            deviation,
            total_variation,
            kl: divergence,
            within_threshold: deviation <= threshold + ROUNDOFF_SLACK,
            pinsker_holds: total_variation <= (divergence.value() / 2.0).sqrt() + ROUNDOFF_SLACK,
        });
    }
    let n = per_environment.len() as f64;
    let rigorous_threshold = std::f64::consts::SQRT_2 * threshold;
    let rigorous_fraction_within = per_environment
        .iter()
        .filter(|e| e.deviation <= rigorous_threshold + ROUNDOFF_SLACK)
        .count() as f64
        / n;
    let fraction_within = per_environment.iter().filter(|e| e.within_threshold).count() as f64 / n;
    let mean_total_variation = per_environment.iter().map(|e| e.total_variation).sum::<f64>() / n;
    let mean_kl = per_environment.iter().map(|e| e.kl).sum::<ExtendedNonNegative>().scale(1.0 / n);
    Ok(BoundReport {
        epsilon,
        rho,
        bound: f.bound,
        threshold,
        rigorous_threshold,
        rigorous_fraction_within,
        holds: fraction_within >= 1.0 - rho,
        fraction_within,
        pinsker_chain_holds: mean_total_variation <= mean_kl.value().sqrt() + ROUNDOFF_SLACK,
        mean_total_variation,
        mean_kl,
        per_environment,
    })
}
