mod format;
mod report;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iklkit::distribution::markov_projection_model;
use iklkit::divergence::{
    check_sufficient_conditions, decompose_kl_general, decompose_kl_shared, ikl, orient_edges, restricted_ikl,
};
use iklkit::environment::{validate_environment_set, Environment, InterventionKind};
use iklkit::oracle::{random_cgm, random_environment_set, OracleConfig};
use iklkit::{EdgeSet, EnvironmentSet};

use crate::format::{
    load_environment, load_graph, load_joint, load_model, to_canonical_json, DistributionFile, EnvironmentFile, InterventionDecl,
    ModelFile, Variables,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Library(#[from] iklkit::Error),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(iklkit::Error::Capacity { .. }) => 3,
            _ => 2,
        }
    }
}

/// Interventional KL divergence between discrete causal graphical models.
#[derive(Debug, Parser)]
#[command(name = "iklkit", version)]
struct Cli {
    /// Divergences at or below this value count as zero.
    #[arg(long, global = true, default_value_t = iklkit::DEFAULT_EPSILON)]
    epsilon: f64,

    /// Emit a machine-readable JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Seed for commands that generate instances.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ModelAndEnvs {
    /// Model file for Q.
    model: PathBuf,
    /// Environment files.
    #[arg(required = true)]
    envs: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// IKL divergence of a model from a set of environments.
    Ikl(ModelAndEnvs),
    /// Per-edge check of the sufficient conditions for structural identification.
    CheckConditions {
        /// Model or graph file for G_Q.
        graph: PathBuf,
        #[arg(required = true)]
        envs: Vec<PathBuf>,
    },
    /// IKL restricted to observed variables and identified edges.
    Restricted {
        #[command(flatten)]
        inputs: ModelAndEnvs,
        /// Identified edges, e.g. `X3->X5,X4->X3`. Defaults to the edges
        /// witnessed by the environments that lie inside the observed set.
        #[arg(long)]
        edges: Option<String>,
        /// Observed variables, e.g. `X2,X3,X5`. Defaults to the list shared
        /// by the environment files, or all variables.
        #[arg(long)]
        observed: Option<String>,
    },
    /// Test a candidate graph against environments and rank its equivalence class.
    Orient {
        /// Distribution (or model) file for the reference joint P.
        joint: PathBuf,
        /// Model or graph file for the candidate graph.
        graph: PathBuf,
        #[arg(required = true)]
        envs: Vec<PathBuf>,
    },
    /// Markov projection of a distribution onto a graph, written as a model file.
    Project {
        /// Distribution (or model) file.
        joint: PathBuf,
        /// Model or graph file.
        graph: PathBuf,
    },
    /// Chain-rule decomposition of KL(P^e || Q) for each environment.
    Decompose {
        #[command(flatten)]
        inputs: ModelAndEnvs,
        /// Condition on the model's graph assuming both sides factorize over it.
        #[arg(long)]
        shared: bool,
    },
    /// Structural facts about an environment set.
    ValidateEnvs {
        #[arg(required = true)]
        envs: Vec<PathBuf>,
    },
    /// Write a random faithful model, its joint, and environments (uses --seed).
    Generate {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        vars: usize,
        #[arg(long, default_value_t = 3)]
        envs: usize,
        #[arg(long, default_value_t = 2)]
        max_cardinality: usize,
    },
}

struct Inputs {
    vars: Variables,
    envs: EnvironmentSet,
    observed: Vec<Option<Vec<usize>>>,
}

fn load_envs(paths: &[PathBuf], vars: Option<&Variables>) -> Result<Inputs, CliError> {
    let mut vars = vars.cloned();
    let mut envs = Vec::new();
    let mut observed = Vec::new();
    for path in paths {
        let loaded = load_environment(path)?;
        match &vars {
            Some(v) => v.ensure_same(&loaded.variables, &path.display().to_string())?,
            None => vars = Some(loaded.variables.clone()),
        }
        envs.push(loaded.environment);
        observed.push(loaded.observed);
    }
    Ok(Inputs {
        vars: vars.expect("at least one environment"),
        envs: EnvironmentSet::new(envs)?,
        observed,
    })
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_edges(text: &str, vars: &Variables) -> Result<EdgeSet, CliError> {
    let pairs = split_list(text)
        .map(|item| {
            let (a, b) = item
                .split_once("->")
                .ok_or_else(|| CliError::input(format!("edge {item:?} is not of the form A->B")))?;
            Ok((vars.resolve(a.trim())?, vars.resolve(b.trim())?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(EdgeSet::new(vars.len(), pairs)?)
}

fn emit<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    print!("{}", to_canonical_json(value)?);
    Ok(())
}

fn with_variables<T: serde::Serialize>(value: &T, vars: &Variables) -> Result<serde_json::Value, CliError> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::input(e.to_string()))?;
    let names: Vec<&str> = (0..vars.len()).map(|i| vars.name(i)).collect();
    if let serde_json::Value::Object(map) = &mut v {
        map.insert("variables".into(), serde_json::json!(names));
    }
    Ok(v)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let eps = cli.epsilon;
    match cli.command {
        Command::Ikl(inputs) => {
            let (q, vars) = load_model(&inputs.model)?;
            let loaded = load_envs(&inputs.envs, Some(&vars))?;
            let report = ikl(&loaded.envs, &q, eps)?;
            if cli.json {
                emit(&with_variables(&report, &vars)?)
            } else {
                report::print_ikl(&report, &vars);
                Ok(())
            }
        }
        Command::CheckConditions { graph, envs } => {
            let (g, vars) = load_graph(&graph)?;
            let loaded = load_envs(&envs, Some(&vars))?;
            let report = check_sufficient_conditions(&g, &loaded.envs)?;
            if cli.json {
                emit(&with_variables(&report, &vars)?)
            } else {
                report::print_conditions(&report, &vars);
                Ok(())
            }
        }
        Command::Restricted { inputs, edges, observed } => {
            let (q, vars) = load_model(&inputs.model)?;
            let loaded = load_envs(&inputs.envs, Some(&vars))?;
            let observed: Vec<usize> = match observed {
                Some(text) => split_list(&text).map(|n| vars.resolve(n)).collect::<Result<_, _>>()?,
                None => {
                    let lists: BTreeSet<Option<Vec<usize>>> = loaded
                        .observed
                        .iter()
                        .map(|o| {
                            o.clone().map(|mut v| {
                                v.sort_unstable();
                                v
                            })
                        })
                        .collect();
                    match lists.into_iter().collect::<Vec<_>>().as_slice() {
                        [Some(list)] => list.clone(),
                        [None] => (0..vars.len()).collect(),
                        _ => {
                            return Err(CliError::input(
                                "environment files disagree on `observed`; pass --observed",
                            ))
                        }
                    }
                }
            };
            let identified = match edges {
                Some(text) => parse_edges(&text, &vars)?,
                None => {
                    let witnessed = check_sufficient_conditions(q.graph(), &loaded.envs)?.identified_edges;
                    let inside = witnessed
                        .iter()
                        .filter(|(a, b)| observed.contains(a) && observed.contains(b));
                    EdgeSet::new(vars.len(), inside)?
                }
            };
            let report = restricted_ikl(&loaded.envs, &q, &identified, &observed, eps)?;
            if cli.json {
                let mut v = with_variables(&report, &vars)?;
                v["identified_edges"] = serde_json::json!(report::oriented_edges(&vars, &identified, q.graph()));
                v["observed"] = serde_json::json!(observed.iter().map(|&i| vars.name(i)).collect::<Vec<_>>());
                emit(&v)
            } else {
                report::print_restricted(&report, &vars, &identified, q.graph(), &observed);
                Ok(())
            }
        }
        Command::Orient { joint, graph, envs } => {
            let (p, vars) = load_joint(&joint)?;
            let (g, graph_vars) = load_graph(&graph)?;
            vars.ensure_same(&graph_vars, &graph.display().to_string())?;
            let loaded = load_envs(&envs, Some(&vars))?;
            let report = orient_edges(&loaded.envs, &p, &g, eps)?;
            if cli.json {
                emit(&with_variables(&report, &vars)?)
            } else {
                report::print_orientation(&report, &vars);
                Ok(())
            }
        }
        Command::Project { joint, graph } => {
            let (p, vars) = load_joint(&joint)?;
            let (g, graph_vars) = load_graph(&graph)?;
            vars.ensure_same(&graph_vars, &graph.display().to_string())?;
            let model = markov_projection_model(&p, &g)?;
            emit(&ModelFile::from_model(&model, &vars))
        }
        Command::Decompose { inputs, shared } => {
            let (q, vars) = load_model(&inputs.model)?;
            let loaded = load_envs(&inputs.envs, Some(&vars))?;
            let decompositions = loaded
                .envs
                .iter()
                .map(|env| {
                    let d = if shared {
                        decompose_kl_shared(env, &q, q.graph())?
                    } else {
                        decompose_kl_general(env, &q)?
                    };
                    Ok((env.label().to_string(), d))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            if cli.json {
                let map: serde_json::Map<String, serde_json::Value> = decompositions
                    .iter()
                    .map(|(label, d)| (label.clone(), serde_json::to_value(d).expect("serializable")))
                    .collect();
                emit(&with_variables(&map, &vars)?)
            } else {
                report::print_decompositions(&decompositions, &vars);
                Ok(())
            }
        }
        Command::ValidateEnvs { envs } => {
            let loaded = load_envs(&envs, None)?;
            let report = validate_environment_set(&loaded.envs);
            if cli.json {
                emit(&with_variables(&report, &loaded.vars)?)
            } else {
                report::print_validation(&report, &loaded.vars);
                Ok(())
            }
        }
        Command::Generate {
            out,
            vars,
            envs,
            max_cardinality,
        } => generate(&out, cli.seed, vars, envs, max_cardinality),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn generate(out: &Path, seed: u64, n: usize, count: usize, max_cardinality: usize) -> Result<(), CliError> {
    let cfg = OracleConfig::new(seed)
        .with_vars(n, n)
        .with_max_cardinality(max_cardinality);
    let model = random_cgm(&cfg)?;
    let names: Vec<String> = (1..=n).map(|i| format!("X{i}")).collect();
    let vars = Variables::from_space(model.space(), &names)?;
    let envs = random_environment_set(&cfg, &model, count)?;
    fs::create_dir_all(out).map_err(|e| CliError::input(format!("cannot create {}: {e}", out.display())))?;
    write_file(&out.join("model.json"), &to_canonical_json(&ModelFile::from_model(&model, &vars))?)?;
    for env in &envs {
        let file = environment_file(env, &vars, "model.json");
        let path = out.join(format!("{}.json", env.label()));
        write_file(&path, &to_canonical_json(&file)?)?;
        println!("{}", path.display());
    }
    let joint = DistributionFile::from_joint(&model.joint()?, &vars);
    write_file(&out.join("joint.json"), &to_canonical_json(&joint)?)?;
    println!("{}", out.join("model.json").display());
    println!("{}", out.join("joint.json").display());
    Ok(())
}

fn environment_file(env: &Environment, vars: &Variables, base: &str) -> EnvironmentFile {
    let interventions = env
        .interventions()
        .unwrap_or_default()
        .iter()
        .map(|iv| {
            let target = vars.name(iv.target()).to_string();
            match iv.kind() {
                InterventionKind::Replace(m) => InterventionDecl {
                    target,
                    hard: None,
                    table: Some(m.rows().map(<[f64]>::to_vec).collect()),
                },
                InterventionKind::Hard(value) => InterventionDecl {
                    target,
                    hard: Some(*value),
                    table: None,
                },
            }
        })
        .collect();
    EnvironmentFile {
        base: Some(base.to_string()),
        distribution: None,
        interventions: Some(interventions),
        label: env.label().to_string(),
        observed: None,
        targets: env.target_list().iter().map(|&t| vars.name(t).to_string()).collect(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("iklkit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
