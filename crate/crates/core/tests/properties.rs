use iklkit::distribution::{
    conditional_mutual_information, is_faithful, is_markov, joint_from_model, kl, markov_project,
    markov_projection_model, Cgm, VariableSpace,
};
use iklkit::divergence::{
    check_sufficient_conditions, decompose_kl_general, ikl, orient_edges, restricted_ikl,
};
use iklkit::environment::{build_shifted_model, EnvironmentSet};
use iklkit::graph::{topological_sort, Dag, EdgeSet};
use iklkit::oracle::{
    decomposition_terms, random_cgm, random_dag, random_environment_set, random_faithful_model, random_joint,
    random_mechanisms, single_target_environment_set, verify_decomposition, OracleConfig,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dag(seed: u64, n: usize) -> Dag {
    random_dag(&mut ChaCha8Rng::seed_from_u64(seed), n).unwrap()
}

fn model_on(seed: u64, space: &VariableSpace, g: &Dag) -> Cgm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Cgm::new(space.clone(), g.clone(), random_mechanisms(&mut rng, space, g).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn topological_order_respects_edges(seed in any::<u64>(), n in 1usize..8) {
        let g = dag(seed, n);
        let order = topological_sort(n, g.edges()).unwrap();
        let pos: Vec<usize> = (0..n).map(|v| order.iter().position(|&o| o == v).unwrap()).collect();
        for &(a, b) in g.edges() {
            prop_assert!(pos[a] < pos[b]);
        }
    }

    #[test]
    fn equivalence_class_members_are_equivalent(seed in any::<u64>(), n in 1usize..6) {
        let g = dag(seed, n);
        let class = g.markov_equivalence_class().unwrap();
        prop_assert!(class.contains(&g));
        for member in &class {
            prop_assert!(member.is_markov_equivalent(&g).unwrap());
            prop_assert_eq!(member.skeleton(), g.skeleton());
            prop_assert_eq!(member.markov_equivalence_class().unwrap().len(), class.len());
        }
    }

    #[test]
    fn d_separation_is_symmetric_and_matches_independence(seed in 0u64..10_000) {
        let m = random_cgm(&OracleConfig::new(seed)).unwrap();
        let p = m.joint().unwrap();
        let n = m.space().num_vars();
        for a in 0..n {
            for b in a + 1..n {
                let z: Vec<usize> = (0..n).filter(|&v| v != a && v != b && (v + a + seed as usize) % 2 == 0).collect();
                let sep = m.graph().d_separated(&[a], &[b], &z).unwrap();
                prop_assert_eq!(sep, m.graph().d_separated(&[b], &[a], &z).unwrap());
                let cmi = conditional_mutual_information(&p, a, b, &z).unwrap();
                prop_assert_eq!(sep, cmi <= 1e-9, "({}, {} | {:?}) cmi {}", a, b, z, cmi);
            }
        }
    }

    #[test]
    fn joint_tables_are_normalized(seed in 0u64..10_000) {
        let m = random_cgm(&OracleConfig::new(seed)).unwrap();
        let p = joint_from_model(&m).unwrap();
        let total: f64 = p.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let keep: Vec<usize> = (0..m.space().num_vars()).step_by(2).collect();
        let marginal = p.marginalize(&keep).unwrap();
        prop_assert!((marginal.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kl_is_nonnegative_and_zero_on_identity(seed in any::<u64>(), cards in prop::collection::vec(2usize..4, 1..4)) {
        let space = VariableSpace::new(cards).unwrap();
        let p = random_joint(seed, &space).unwrap();
        let q = random_joint(seed.wrapping_add(1), &space).unwrap();
        prop_assert!(kl(&p, &q).unwrap().value() >= 0.0);
        prop_assert_eq!(kl(&p, &p).unwrap().value(), 0.0);
    }

    #[test]
    fn projection_is_markov_idempotent_and_optimal(seed in any::<u64>(), cards in prop::collection::vec(2usize..4, 2..5)) {
        let space = VariableSpace::new(cards.clone()).unwrap();
        let p = random_joint(seed, &space).unwrap();
        let g = dag(seed, cards.len());
        let proj = markov_project(&p, &g).unwrap();
        prop_assert!(is_markov(&proj, &g, 1e-9).unwrap());
        prop_assert!(markov_project(&proj, &g).unwrap().max_abs_diff(&proj).unwrap() <= 1e-12);
        let r = model_on(seed ^ 0xabc, &space, &g).joint().unwrap();
        let to_r = kl(&p, &r).unwrap().value();
        let to_proj = kl(&p, &proj).unwrap().value();
        prop_assert!(to_proj <= to_r + 1e-12);
        if g.v_structures().is_empty() {
            // Family marginals survive the projection, so the KL splits exactly.
            prop_assert!((to_r - to_proj - kl(&proj, &r).unwrap().value()).abs() < 1e-9);
        }
    }

    #[test]
    fn environments_stay_markov_to_the_true_graph(seed in 0u64..10_000) {
        let cfg = OracleConfig::new(seed);
        let m = random_cgm(&cfg).unwrap();
        for env in &random_environment_set(&cfg, &m, 4).unwrap() {
            prop_assert!(is_markov(env.distribution(), m.graph(), 1e-9).unwrap());
        }
    }

    #[test]
    fn general_decomposition_matches_oracle(seed in 0u64..10_000) {
        let cfg = OracleConfig::new(seed);
        let p = random_cgm(&cfg).unwrap();
        let n = p.space().num_vars();
        let q = model_on(seed + 1, p.space(), &dag(seed + 2, n));
        for env in &random_environment_set(&cfg, &p, 3).unwrap() {
            prop_assert!(verify_decomposition(env, &q).unwrap() <= 1e-9);
            let dec = decompose_kl_general(env, &q).unwrap();
            let oracle = decomposition_terms(env, &q).unwrap();
            prop_assert!((dec.total.value() - oracle.direct_kl.value()).abs() <= 1e-9);
            prop_assert!((dec.residual.value() - oracle.residual.value()).abs() <= 1e-9);
        }
    }

    #[test]
    fn complete_graph_has_no_residual(seed in 0u64..10_000) {
        let cfg = OracleConfig::new(seed);
        let p = random_cgm(&cfg).unwrap();
        let q = model_on(seed, p.space(), &Dag::complete(p.space().num_vars()).unwrap());
        for env in &random_environment_set(&cfg, &p, 3).unwrap() {
            prop_assert!(decompose_kl_general(env, &q).unwrap().residual.value() <= 1e-12);
        }
    }

    #[test]
    fn ikl_matches_mean_shifted_kl(seed in 0u64..10_000) {
        let cfg = OracleConfig::new(seed);
        let p = random_cgm(&cfg).unwrap();
        let q = model_on(seed + 3, p.space(), &dag(seed + 4, p.space().num_vars()));
        let envs = random_environment_set(&cfg, &p, 5).unwrap();
        let report = ikl(&envs, &q, 1e-9).unwrap();
        let mean = envs
            .iter()
            .map(|e| kl(e.distribution(), &build_shifted_model(&q, e).unwrap().joint().unwrap()).unwrap().value())
            .sum::<f64>()
            / envs.len() as f64;
        prop_assert!((report.ikl_value.value() - mean).abs() <= 1e-9);
        let contributions: f64 = report.per_environment.iter().map(|e| e.contribution.value()).sum();
        prop_assert!((report.ikl_value.value() - contributions / envs.len() as f64).abs() <= 1e-12);
    }

    #[test]
    fn observational_environment_lower_bounds_ikl(seed in 0u64..10_000) {
        let cfg = OracleConfig::new(seed);
        let p = random_cgm(&cfg).unwrap();
        let q = model_on(seed + 5, p.space(), p.graph());
        let envs = random_environment_set(&cfg, &p, 4).unwrap();
        let value = ikl(&envs, &q, 1e-9).unwrap().ikl_value.value();
        let direct = kl(&p.joint().unwrap(), &q.joint().unwrap()).unwrap().value();
        prop_assert!(value + 1e-12 >= direct / envs.len() as f64);
        prop_assert!(value > 0.0);
    }

    #[test]
    fn shared_graph_equivalence_tracks_joint_equality(seed in 0u64..10_000) {
        let cfg = OracleConfig::new(seed);
        let p = random_cgm(&cfg).unwrap();
        let envs = random_environment_set(&cfg, &p, 3).unwrap();
        prop_assert!(ikl(&envs, &p, 1e-9).unwrap().equivalent);
        let q = random_faithful_model(&OracleConfig::new(seed + 1), p.space(), p.graph()).unwrap();
        let differs = p.joint().unwrap().max_abs_diff(&q.joint().unwrap()).unwrap() > 1e-6;
        prop_assert_eq!(differs, !ikl(&envs, &q, 1e-9).unwrap().equivalent);
    }

    #[test]
    fn adding_environments_never_loses_identified_edges(seed in 0u64..10_000) {
        let cfg = OracleConfig::new(seed);
        let p = random_cgm(&cfg).unwrap();
        let envs = random_environment_set(&cfg, &p, 5).unwrap();
        let mut previous = EdgeSet::new(p.space().num_vars(), []).unwrap();
        for k in 1..=envs.len() {
            let prefix = EnvironmentSet::new(envs.environments()[..k].to_vec()).unwrap();
            let report = check_sufficient_conditions(p.graph(), &prefix).unwrap();
            prop_assert!(previous.is_subset(&report.identified_edges));
            prop_assert_eq!(report.all_satisfied, report.identified_edges.len() == p.graph().edges().len());
            previous = report.identified_edges;
        }
    }

    #[test]
    fn restricted_ikl_is_sound_for_identified_edges(seed in 0u64..2_000) {
        let cfg = OracleConfig::new(seed).with_vars(3, 5);
        let p = random_cgm(&cfg).unwrap();
        let class = p.graph().markov_equivalence_class().unwrap();
        let envs = single_target_environment_set(&cfg, &p).unwrap();
        let all: Vec<usize> = (0..p.space().num_vars()).collect();
        for g_q in &class {
            let q = markov_projection_model(&p.joint().unwrap(), g_q).unwrap();
            let identified = check_sufficient_conditions(g_q, &envs).unwrap().identified_edges;
            let value = restricted_ikl(&envs, &q, &identified, &all, 1e-9).unwrap().ikl_value.value();
            let agree = identified.iter().all(|(a, b)| g_q.has_edge(a, b) == p.graph().has_edge(a, b));
            prop_assert_eq!(value <= 1e-9, agree, "graph {:?} value {}", g_q, value);
            if value > 1e-9 {
                let differing = identified
                    .vertices()
                    .into_iter()
                    .any(|v| g_q.parents(v).unwrap() != p.graph().parents(v).unwrap());
                prop_assert!(differing);
            }
        }
    }

    #[test]
    fn true_graph_survives_orientation(seed in 0u64..2_000) {
        let cfg = OracleConfig::new(seed).with_vars(2, 5);
        let p = random_cgm(&cfg).unwrap();
        let envs = random_environment_set(&cfg, &p, 3).unwrap();
        let report = orient_edges(&envs, &p.joint().unwrap(), p.graph(), 1e-9).unwrap();
        prop_assert!(report.survivors.contains(p.graph()));
        prop_assert!(report.flagged_variables.is_empty());
    }

    #[test]
    fn generators_are_deterministic(seed in any::<u64>()) {
        let cfg = OracleConfig::new(seed);
        let a = random_cgm(&cfg).unwrap();
        prop_assert_eq!(&a, &random_cgm(&cfg).unwrap());
        prop_assert_eq!(
            random_environment_set(&cfg, &a, 3).unwrap(),
            random_environment_set(&cfg, &a, 3).unwrap()
        );
    }
}

#[test]
fn generic_models_are_faithful() {
    // Mechanisms drawn without the generator's faithfulness filter.
    let mut passed = 0;
    for seed in 0..1000u64 {
        let n = 2 + (seed % 4) as usize;
        let space = VariableSpace::new(vec![2 + (seed % 2) as usize; n]).unwrap();
        let m = model_on(seed, &space, &dag(seed, n));
        if is_faithful(&m.joint().unwrap(), m.graph(), 1e-9).unwrap() {
            passed += 1;
        }
    }
    assert!(passed >= 990, "{passed} of 1000 faithful");
}
