//! On-disk JSON documents and their conversion to library types.
//!
//! Every document lists its variables (name and cardinality, in index
//! order); everything else refers to variables by name. Probability rows
//! are ordered lexicographically by parent assignment, first parent most
//! significant, and parents are listed in variable-index order.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use iklkit::environment::Intervention;
use iklkit::{Cgm, Dag, Environment, JointTable, Mechanism, VariableSpace};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDecl {
    pub cardinality: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismDecl {
    pub child: String,
    pub parents: Vec<String>,
    pub table: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub edges: Vec<(String, String)>,
    pub mechanisms: Vec<MechanismDecl>,
    pub variables: Vec<VariableDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub probabilities: Vec<f64>,
    pub variables: Vec<VariableDecl>,
}

/// Only the structural part of a document; model files qualify.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub edges: Vec<(String, String)>,
    pub variables: Vec<VariableDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterventionDecl {
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hard: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<f64>>>,
}

/// Either `base` (a model path, relative to this file) with
/// `interventions`, or an explicit `distribution`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interventions: Option<Vec<InterventionDecl>>,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<Vec<String>>,
    pub targets: Vec<String>,
}

/// Variable names and cardinalities shared by every document in a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variables {
    decls: Vec<VariableDecl>,
    index: HashMap<String, usize>,
}

impl Variables {
    pub fn new(decls: Vec<VariableDecl>) -> Result<Self, CliError> {
        let mut index = HashMap::new();
        for (i, d) in decls.iter().enumerate() {
            if index.insert(d.name.clone(), i).is_some() {
                return Err(CliError::input(format!("variable {:?} declared twice", d.name)));
            }
        }
        Ok(Variables { decls, index })
    }

    pub fn from_space(space: &VariableSpace, names: &[String]) -> Result<Self, CliError> {
        Self::new(
            names
                .iter()
                .zip(space.cardinalities())
                .map(|(name, &cardinality)| VariableDecl {
                    name: name.clone(),
                    cardinality,
                })
                .collect(),
        )
    }

    pub fn decls(&self) -> &[VariableDecl] {
        &self.decls
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.decls[i].name
    }

    pub fn resolve(&self, name: &str) -> Result<usize, CliError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| CliError::input(format!("unknown variable {name:?}")))
    }

    pub fn resolve_all(&self, names: &[String]) -> Result<Vec<usize>, CliError> {
        names.iter().map(|n| self.resolve(n)).collect()
    }

    pub fn space(&self) -> Result<VariableSpace, CliError> {
        Ok(VariableSpace::new(self.decls.iter().map(|d| d.cardinality).collect())?)
    }

    pub fn edge_names(&self, g: &Dag) -> Vec<(String, String)> {
        g.edges()
            .iter()
            .map(|&(a, b)| (self.name(a).to_string(), self.name(b).to_string()))
            .collect()
    }

    fn dag(&self, edges: &[(String, String)]) -> Result<Dag, CliError> {
        let edges = edges
            .iter()
            .map(|(a, b)| Ok((self.resolve(a)?, self.resolve(b)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Dag::new(self.len(), edges)?)
    }

    /// Errors unless `other` declares the same names and cardinalities.
    pub fn ensure_same(&self, other: &Variables, what: &str) -> Result<(), CliError> {
        if self.decls != other.decls {
            return Err(CliError::input(format!("{what} declares different variables")));
        }
        Ok(())
    }
}

fn rows_of(m: &Mechanism) -> Vec<Vec<f64>> {
    m.rows().map(<[f64]>::to_vec).collect()
}

fn flatten(rows: Vec<Vec<f64>>) -> Vec<f64> {
    rows.into_iter().flatten().collect()
}

impl ModelFile {
    pub fn from_model(m: &Cgm, vars: &Variables) -> ModelFile {
        ModelFile {
            edges: vars.edge_names(m.graph()),
            mechanisms: m
                .mechanisms()
                .iter()
                .map(|mech| MechanismDecl {
                    child: vars.name(mech.child()).to_string(),
                    parents: mech.parents().iter().map(|&p| vars.name(p).to_string()).collect(),
                    table: rows_of(mech),
                })
                .collect(),
            variables: vars.decls().to_vec(),
        }
    }

    pub fn to_model(&self) -> Result<(Cgm, Variables), CliError> {
        let vars = Variables::new(self.variables.clone())?;
        let space = vars.space()?;
        let graph = vars.dag(&self.edges)?;
        let mut slots: Vec<Option<Mechanism>> = vec![None; vars.len()];
        for decl in &self.mechanisms {
            let child = vars.resolve(&decl.child)?;
            let parents = vars.resolve_all(&decl.parents)?;
            let parent_cards = parents.iter().map(|&p| space.cardinality(p)).collect();
            let mech = Mechanism::new(child, space.cardinality(child), parents, parent_cards, decl.table.clone())?;
            if slots[child].replace(mech).is_some() {
                return Err(CliError::input(format!("two mechanisms for {:?}", decl.child)));
            }
        }
        let mechanisms = slots
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.ok_or_else(|| CliError::input(format!("no mechanism for {:?}", vars.name(i)))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((Cgm::new(space, graph, mechanisms)?, vars))
    }
}

impl DistributionFile {
    pub fn from_joint(p: &JointTable, vars: &Variables) -> DistributionFile {
        DistributionFile {
            probabilities: p.probabilities().to_vec(),
            variables: vars.decls().to_vec(),
        }
    }

    pub fn to_joint(&self) -> Result<(JointTable, Variables), CliError> {
        let vars = Variables::new(self.variables.clone())?;
        let joint = JointTable::new(vars.space()?, self.probabilities.clone())?;
        Ok((joint, vars))
    }
}

impl GraphFile {
    pub fn to_graph(&self) -> Result<(Dag, Variables), CliError> {
        let vars = Variables::new(self.variables.clone())?;
        let g = vars.dag(&self.edges)?;
        Ok((g, vars))
    }
}

pub fn read_document<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("cannot parse {}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> Result<(Cgm, Variables), CliError> {
    read_document::<ModelFile>(path)?.to_model()
}

pub fn load_graph(path: &Path) -> Result<(Dag, Variables), CliError> {
    read_document::<GraphFile>(path)?.to_graph()
}

/// A distribution file, or a model file whose joint is taken.
pub fn load_joint(path: &Path) -> Result<(JointTable, Variables), CliError> {
    let value: Value = read_document(path)?;
    let parse_err = |e: serde_json::Error| CliError::input(format!("cannot parse {}: {e}", path.display()));
    if value.get("mechanisms").is_some() {
        let (m, vars) = serde_json::from_value::<ModelFile>(value).map_err(parse_err)?.to_model()?;
        Ok((m.joint()?, vars))
    } else {
        serde_json::from_value::<DistributionFile>(value).map_err(parse_err)?.to_joint()
    }
}

pub struct LoadedEnvironment {
    pub environment: Environment,
    pub observed: Option<Vec<usize>>,
    pub variables: Variables,
}

pub fn load_environment(path: &Path) -> Result<LoadedEnvironment, CliError> {
    let file: EnvironmentFile = read_document(path)?;
    let context = |msg: String| CliError::input(format!("{}: {msg}", path.display()));
    let (environment, variables) = match (&file.base, &file.distribution) {
        (Some(base), None) => {
            let base_path: PathBuf = path.parent().unwrap_or(Path::new(".")).join(base);
            let (model, vars) = load_model(&base_path)?;
            let interventions = file
                .interventions
                .as_deref()
                .unwrap_or_default()
                .iter()
                .map(|decl| {
                    let target = vars.resolve(&decl.target)?;
                    match (&decl.table, decl.hard) {
                        (Some(table), None) => {
                            let old = model.mechanism(target);
                            Ok(Intervention::replace(Mechanism::from_flat(
                                target,
                                old.child_card(),
                                old.parents().to_vec(),
                                old.parent_cards().to_vec(),
                                flatten(table.clone()),
                            )?))
                        }
                        (None, Some(value)) => Ok(Intervention::hard(target, value)),
                        _ => Err(context(format!(
                            "intervention on {:?} needs exactly one of `table` and `hard`",
                            decl.target
                        ))),
                    }
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let mut declared = vars.resolve_all(&file.targets)?;
            declared.sort_unstable();
            let mut actual: Vec<usize> = interventions.iter().map(Intervention::target).collect();
            actual.sort_unstable();
            if declared != actual {
                return Err(context("`targets` must list exactly the intervened variables".into()));
            }
            (Environment::from_interventions(file.label.clone(), &model, interventions)?, vars)
        }
        (None, Some(dist)) => {
            if file.interventions.is_some() {
                return Err(context("`interventions` needs a `base` model".into()));
            }
            let (joint, vars) = dist.to_joint()?;
            let targets = vars.resolve_all(&file.targets)?;
            (Environment::from_distribution(file.label.clone(), targets, joint)?, vars)
        }
        _ => return Err(context("exactly one of `base` and `distribution` is required".into())),
    };
    let observed = file.observed.as_deref().map(|o| variables.resolve_all(o)).transpose()?;
    Ok(LoadedEnvironment {
        environment,
        observed,
        variables,
    })
}

/// Canonical JSON: keys sorted, two-space indentation, arrays of scalars on
/// one line, floats with 17 significant digits.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let value = serde_json::to_value(value).map_err(|e| CliError::input(e.to_string()))?;
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    Ok(out)
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_number(out: &mut String, n: &serde_json::Number) {
    if n.is_f64() {
        let _ = write!(out, "{:.16e}", n.as_f64().expect("f64 number"));
    } else {
        let _ = write!(out, "{n}");
    }
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.push_str(&"  ".repeat(d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_value(out, item, depth);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, item, depth + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for (k, key) in keys.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*key], depth + 1);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_layout() {
        let v: Value = serde_json::from_str(r#"{"b": [1, 2], "a": {"x": [0.5, [0.25]]}, "c": []}"#).unwrap();
        let text = to_canonical_json(&v).unwrap();
        assert_eq!(
            text,
            "{\n  \"a\": {\n    \"x\": [\n      5.0000000000000000e-1,\n      [2.5000000000000000e-1]\n    ]\n  },\n  \"b\": [1, 2],\n  \"c\": []\n}\n"
        );
    }

    fn sample_model() -> (Cgm, Variables) {
        use iklkit::oracle::{random_cgm, OracleConfig};
        let m = random_cgm(&OracleConfig::new(5).with_vars(4, 4)).unwrap();
        let names: Vec<String> = (0..4).map(|i| format!("V{i}")).collect();
        let vars = Variables::from_space(m.space(), &names).unwrap();
        (m, vars)
    }

    #[test]
    fn model_files_round_trip_byte_exactly() {
        let (m, vars) = sample_model();
        let text = to_canonical_json(&ModelFile::from_model(&m, &vars)).unwrap();
        let parsed: ModelFile = serde_json::from_str(&text).unwrap();
        let (back, back_vars) = parsed.to_model().unwrap();
        assert_eq!(back, m);
        assert_eq!(to_canonical_json(&ModelFile::from_model(&back, &back_vars)).unwrap(), text);
    }

    #[test]
    fn distribution_files_round_trip_byte_exactly() {
        let (m, vars) = sample_model();
        let text = to_canonical_json(&DistributionFile::from_joint(&m.joint().unwrap(), &vars)).unwrap();
        let (joint, back_vars) = serde_json::from_str::<DistributionFile>(&text).unwrap().to_joint().unwrap();
        assert_eq!(joint, m.joint().unwrap());
        assert_eq!(to_canonical_json(&DistributionFile::from_joint(&joint, &back_vars)).unwrap(), text);
    }

    #[test]
    fn environment_files_round_trip_byte_exactly() {
        let text = "{\n  \"base\": \"model.json\",\n  \"interventions\": [\n    {\n      \"hard\": 1,\n      \"target\": \"V2\"\n    }\n  ],\n  \"label\": \"e1\",\n  \"observed\": [\"V1\", \"V2\"],\n  \"targets\": [\"V2\"]\n}\n";
        let parsed: EnvironmentFile = serde_json::from_str(text).unwrap();
        assert_eq!(to_canonical_json(&parsed).unwrap(), text);
    }

    #[test]
    fn graph_loader_accepts_model_files() {
        let (m, vars) = sample_model();
        let text = to_canonical_json(&ModelFile::from_model(&m, &vars)).unwrap();
        let (g, _) = serde_json::from_str::<GraphFile>(&text).unwrap().to_graph().unwrap();
        assert_eq!(&g, m.graph());
    }

    #[test]
    fn rejects_duplicate_and_unknown_names() {
        let dup = vec![
            VariableDecl { cardinality: 2, name: "A".into() },
            VariableDecl { cardinality: 2, name: "A".into() },
        ];
        assert!(Variables::new(dup).is_err());
        let vars = Variables::new(vec![VariableDecl { cardinality: 2, name: "A".into() }]).unwrap();
        assert!(vars.resolve("B").is_err());
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1f64, 1.0 / 3.0, 1e-300, 0.35, 1.0] {
            let text = to_canonical_json(&vec![x]).unwrap();
            let back: Vec<f64> = serde_json::from_str(&text).unwrap();
            assert_eq!(back[0].to_bits(), x.to_bits());
        }
    }
}
