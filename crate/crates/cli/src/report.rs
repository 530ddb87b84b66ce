//! Plain-text rendering of reports. Divergences are in nats.

use iklkit::divergence::{ConditionReport, IklReport, KlDecomposition, OrientationReport, SufficientCondition};
use iklkit::environment::ValidationReport;
use iklkit::{Dag, EdgeSet, ExtendedNonNegative};

use crate::format::Variables;

const SIGNIFICANT: i32 = 12;

/// `x` with 12 significant digits, trailing zeros dropped.
pub fn nats(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_infinite() {
        return "inf".into();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..=6).contains(&exponent) {
        let decimals = (SIGNIFICANT - 1 - exponent).max(0) as usize;
        let text = format!("{x:.decimals$}");
        if text.contains('.') {
            text.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            text
        }
    } else {
        let text = format!("{:.*e}", (SIGNIFICANT - 1) as usize, x);
        let (mantissa, exp) = text.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

fn enn(x: ExtendedNonNegative) -> String {
    nats(x.value())
}

/// Unordered pairs rendered in the orientation they have in `g`.
pub fn oriented_edges(vars: &Variables, edges: &EdgeSet, g: &Dag) -> Vec<String> {
    edges
        .iter()
        .map(|(a, b)| {
            let (from, to) = if g.has_edge(b, a) { (b, a) } else { (a, b) };
            format!("{}->{}", vars.name(from), vars.name(to))
        })
        .collect()
}

fn names(vars: &Variables, items: &[usize]) -> String {
    let list: Vec<&str> = items.iter().map(|&i| vars.name(i)).collect();
    format!("{{{}}}", list.join(", "))
}

fn print_terms(d: &KlDecomposition, vars: &Variables, with_residual: bool) {
    for i in 0..vars.len() {
        if let Some(t) = d.unintervened_terms.get(&i) {
            println!("  {:<12} {}", vars.name(i), enn(*t));
        } else if let Some(t) = d.intervened_terms.get(&i) {
            println!("  {:<12} {}  (intervened, excluded)", vars.name(i), enn(*t));
        }
    }
    if with_residual {
        println!("  {:<12} {}", "residual", enn(d.residual));
    }
}

fn verdict(report: &IklReport) -> &'static str {
    if report.equivalent {
        "equivalent"
    } else {
        "not equivalent"
    }
}

pub fn print_ikl(report: &IklReport, vars: &Variables) {
    for env in &report.per_environment {
        println!("environment {}  targets {}", env.label, names(vars, &env.targets));
        print_terms(&env.decomposition, vars, true);
        println!("  {:<12} {}", "contribution", enn(env.contribution));
    }
    println!(
        "IKL {} nats over {} environments (epsilon {}): {}",
        enn(report.ikl_value),
        report.per_environment.len(),
        nats(report.epsilon),
        verdict(report)
    );
}

pub fn print_restricted(report: &IklReport, vars: &Variables, identified: &EdgeSet, g: &Dag, observed: &[usize]) {
    println!("observed {}", names(vars, observed));
    println!("identified edges {{{}}}", oriented_edges(vars, identified, g).join(", "));
    for env in &report.per_environment {
        println!("environment {}  targets {}", env.label, names(vars, &env.targets));
        print_terms(&env.decomposition, vars, false);
        println!("  {:<12} {}", "contribution", enn(env.contribution));
    }
    println!(
        "restricted IKL {} nats (epsilon {}): {}",
        enn(report.ikl_value),
        nats(report.epsilon),
        verdict(report)
    );
}

pub fn print_conditions(report: &ConditionReport, vars: &Variables) {
    println!("{:<16} {:<12} {:<14} {:<9} path", "edge", "status", "environment", "condition");
    for edge in &report.per_edge {
        let (i, j) = edge.edge;
        let label = format!("{} -> {}", vars.name(i), vars.name(j));
        match &edge.witness {
            Some(w) => {
                let condition = match w.condition {
                    SufficientCondition::Tail => "(i)",
                    SufficientCondition::Head => "(ii)",
                };
                let path: Vec<&str> = w.path.iter().map(|&v| vars.name(v)).collect();
                println!(
                    "{label:<16} {:<12} {:<14} {condition:<9} {}",
                    "witnessed",
                    w.environment,
                    path.join(" -> ")
                );
            }
            None => println!("{label:<16} {:<12} {:<14} {:<9} -", "unwitnessed", "-", "-"),
        }
    }
    let identified: Vec<String> = report
        .per_edge
        .iter()
        .filter(|e| e.satisfied())
        .map(|e| format!("{}->{}", vars.name(e.edge.0), vars.name(e.edge.1)))
        .collect();
    println!("identified edges {{{}}}", identified.join(", "));
    println!("all edges witnessed: {}", if report.all_satisfied { "yes" } else { "no" });
}

pub fn print_orientation(report: &OrientationReport, vars: &Variables) {
    for term in report.candidate_terms.iter().filter(|t| t.value.value() > report.epsilon) {
        println!(
            "positive term: environment {}  {} | {}  {}",
            term.environment,
            vars.name(term.variable),
            names(vars, &term.parents),
            enn(term.value)
        );
    }
    println!("flagged variables {}", names(vars, &report.flagged_variables));
    println!("ranked equivalence class ({} members):", report.ranked.len());
    for (rank, score) in report.ranked.iter().enumerate() {
        let edges: Vec<String> = vars
            .edge_names(&score.graph)
            .into_iter()
            .map(|(a, b)| format!("{a}->{b}"))
            .collect();
        println!(
            "  {:>2}. total {}  max {}  {}  [{}]",
            rank + 1,
            enn(score.total),
            enn(score.max_term),
            if score.zero_score { "survivor" } else { "excluded" },
            edges.join(", ")
        );
    }
    println!("survivors: {}", report.survivors.len());
}

pub fn print_decompositions(items: &[(String, KlDecomposition)], vars: &Variables) {
    for (label, d) in items {
        println!("environment {label}");
        print_terms(d, vars, true);
        println!("  {:<12} {}", "total", enn(d.total));
    }
}

pub fn print_validation(report: &ValidationReport, vars: &Variables) {
    println!(
        "intersection of targets empty: {}",
        if report.intersection_empty { "yes" } else { "no" }
    );
    println!(
        "contains an empty intervention: {}",
        if report.has_empty_intervention { "yes" } else { "no" }
    );
    if !report.always_intervened.is_empty() {
        println!("always intervened {}", names(vars, &report.always_intervened));
    }
    for (i, labels) in report.coverage.iter().enumerate() {
        println!("  {:<12} un-intervened in [{}]", vars.name(i), labels.join(", "));
    }
}
