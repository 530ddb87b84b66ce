//! Interventions, environments and the shifted models built from them.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::distribution::{Cgm, JointTable, Mechanism, VariableSpace};
use crate::error::{input, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum InterventionKind {
    /// Replace the mechanism with the given table (same parents).
    Replace(Mechanism),
    /// Pin the variable to a value: `delta(x_i - value)` for every parent row.
    Hard(usize),
}

/// A mechanism shift on a single variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Intervention {
    target: usize,
    kind: InterventionKind,
}

impl Intervention {
    pub fn replace(mechanism: Mechanism) -> Self {
        Intervention {
            target: mechanism.child(),
            kind: InterventionKind::Replace(mechanism),
        }
    }

    pub fn hard(target: usize, value: usize) -> Self {
        Intervention {
            target,
            kind: InterventionKind::Hard(value),
        }
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn kind(&self) -> &InterventionKind {
        &self.kind
    }

    /// The replacement mechanism this intervention installs in `m`.
    pub fn mechanism_for(&self, m: &Cgm) -> Result<Mechanism> {
        m.space().check_var(self.target)?;
        match &self.kind {
            InterventionKind::Replace(mech) => Ok(mech.clone()),
            InterventionKind::Hard(value) => {
                let old = m.mechanism(self.target);
                Mechanism::point_mass(
                    self.target,
                    old.child_card(),
                    old.parents().to_vec(),
                    old.parent_cards().to_vec(),
                    *value,
                )
            }
        }
    }
}

/// Replaces the mechanisms of the intervened variables; every other
/// mechanism and the graph are left untouched.
pub fn apply_environment(m: &Cgm, interventions: &[Intervention]) -> Result<Cgm> {
    let mut seen = HashSet::new();
    let mut out = m.clone();
    for iv in interventions {
        if !seen.insert(iv.target) {
            return input(format!("variable {} intervened on twice", iv.target));
        }
        out = out.with_mechanism(iv.mechanism_for(m)?)?;
    }
    Ok(out)
}

/// An interventional regime: known targets plus the resulting distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    label: String,
    targets: BTreeSet<usize>,
    interventions: Option<Vec<Intervention>>,
    distribution: JointTable,
}

impl Environment {
    /// An environment known only through its distribution and targets.
    pub fn from_distribution(
        label: impl Into<String>,
        targets: impl IntoIterator<Item = usize>,
        distribution: JointTable,
    ) -> Result<Self> {
        let targets: BTreeSet<usize> = targets.into_iter().collect();
        for &t in &targets {
            distribution.space().check_var(t)?;
        }
        Ok(Environment {
            label: label.into(),
            targets,
            interventions: None,
            distribution,
        })
    }

    /// Generates the environment by applying `interventions` to `model`.
    pub fn from_interventions(
        label: impl Into<String>,
        model: &Cgm,
        interventions: Vec<Intervention>,
    ) -> Result<Self> {
        let shifted = apply_environment(model, &interventions)?;
        Ok(Environment {
            label: label.into(),
            targets: interventions.iter().map(Intervention::target).collect(),
            interventions: Some(interventions),
            distribution: shifted.joint()?,
        })
    }

    /// The unshifted regime of `model`.
    pub fn observational(label: impl Into<String>, model: &Cgm) -> Result<Self> {
        Self::from_interventions(label, model, Vec::new())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn targets(&self) -> &BTreeSet<usize> {
        &self.targets
    }

    pub fn target_list(&self) -> Vec<usize> {
        self.targets.iter().copied().collect()
    }

    pub fn is_intervened(&self, i: usize) -> bool {
        self.targets.contains(&i)
    }

    pub fn interventions(&self) -> Option<&[Intervention]> {
        self.interventions.as_deref()
    }

    pub fn distribution(&self) -> &JointTable {
        &self.distribution
    }

    pub fn space(&self) -> &VariableSpace {
        self.distribution.space()
    }
}

/// A nonempty collection of environments over one variable space, with
/// unique labels.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSet {
    environments: Vec<Environment>,
}

impl EnvironmentSet {
    pub fn new(environments: Vec<Environment>) -> Result<Self> {
        let Some(first) = environments.first() else {
            return input("an environment set needs at least one environment");
        };
        let mut labels = HashSet::new();
        for e in &environments {
            if e.space() != first.space() {
                return input(format!("environment {:?} lives on a different variable space", e.label));
            }
            if !labels.insert(e.label.as_str()) {
                return input(format!("duplicate environment label {:?}", e.label));
            }
        }
        Ok(EnvironmentSet { environments })
    }

    pub fn environments(&self) -> &[Environment] {
        &self.environments
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Environment> {
        self.environments.iter()
    }

    pub fn len(&self) -> usize {
        self.environments.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn space(&self) -> &VariableSpace {
        self.environments[0].space()
    }

    pub fn get(&self, label: &str) -> Option<&Environment> {
        self.environments.iter().find(|e| e.label == label)
    }

    /// Copy with one more environment appended.
    pub fn with(&self, env: Environment) -> Result<Self> {
        let mut envs = self.environments.clone();
        envs.push(env);
        EnvironmentSet::new(envs)
    }
}

impl<'a> IntoIterator for &'a EnvironmentSet {
    type Item = &'a Environment;
    type IntoIter = std::slice::Iter<'a, Environment>;

    fn into_iter(self) -> Self::IntoIter {
        self.environments.iter()
    }
}

/// `Q^e`: `q` with the mechanisms of the targets of `env` replaced by the
/// conditionals `P^e(X_j | PA_j^{G_Q})` read off the environment's
/// distribution.
pub fn build_shifted_model(q: &Cgm, env: &Environment) -> Result<Cgm> {
    if env.space() != q.space() {
        return input(format!("environment {:?} and model use different spaces", env.label));
    }
    let mut shifted = q.clone();
    let mut extracted = Vec::new();
    for &j in &env.targets {
        let mech = env.distribution.conditional(j, q.graph().pa(j))?;
        shifted = shifted.with_mechanism(mech.clone())?;
        extracted.push(mech);
    }
    if extracted.iter().any(|m| m.undefined_rows().next().is_some()) {
        let joint = shifted.joint()?;
        for mech in &extracted {
            let weights = joint.marginal_vec(mech.parents());
            if let Some(r) = mech.undefined_rows().find(|&r| weights[r] > 0.0) {
                return Err(Error::Domain(format!(
                    "environment {:?}: mechanism of {} undefined at parent row {:?}, which the shifted model reaches",
                    env.label,
                    mech.child(),
                    mech.row_assignment(r)
                )));
            }
        }
    }
    Ok(shifted)
}

/// Structural facts about an environment set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// No variable is intervened on in every environment.
    pub intersection_empty: bool,
    /// Some environment has no targets.
    pub has_empty_intervention: bool,
    /// Variables intervened on in every environment.
    pub always_intervened: Vec<usize>,
    /// Per variable, the labels of environments where it is not intervened.
    pub coverage: Vec<Vec<String>>,
}

pub fn validate_environment_set(es: &EnvironmentSet) -> ValidationReport {
    let d = es.space().num_vars();
    let coverage: Vec<Vec<String>> = (0..d)
        .map(|i| {
            es.iter()
                .filter(|e| !e.is_intervened(i))
                .map(|e| e.label.clone())
                .collect()
        })
        .collect();
    let always_intervened: Vec<usize> = (0..d).filter(|&i| coverage[i].is_empty()).collect();
    ValidationReport {
        intersection_empty: always_intervened.is_empty(),
        has_empty_intervention: es.iter().any(|e| e.targets.is_empty()),
        always_intervened,
        coverage,
    }
}
