use bayesrec::model::{Instance, Ranking};
use bayesrec::policies::{run_loglog_search, run_policy, run_poly_search, PolicyError, PolicyKind, PolicyRun};
use bayesrec::rng::rng_from_seed;
use bayesrec::sampling::{random_instance, InstanceFamily};
use bayesrec::Environment;

fn instance() -> Instance {
    Instance::from_omega(vec![0.3, 0.3, 0.4], &[0.6, -0.3, -1.2]).unwrap()
}

#[test]
fn baselines_have_closed_form_regret() {
    let inst = instance();
    let horizon = 5_000;
    let opt = bayesrec::solve_threshold(&inst).value;
    for (kind, expected) in [(PolicyKind::NoInfo, horizon as f64 * opt), (PolicyKind::Hindsight, 0.0)] {
        let mut env = Environment::new(inst.clone(), horizon, 1).unwrap();
        let run = run_policy(&mut env, kind).unwrap();
        assert!(matches!(run, PolicyRun::Baseline(_)));
        assert!((run.trace().regret - expected).abs() < 1e-9 * horizon as f64, "{kind}");
        assert_eq!(run.trace().rounds_used, horizon);
    }
}

#[test]
fn policy_names_parse() {
    for kind in PolicyKind::ALL {
        assert_eq!(kind.name().parse::<PolicyKind>().unwrap(), kind);
    }
    assert_eq!("Full_Reveal".parse::<PolicyKind>().unwrap(), PolicyKind::FullReveal);
    assert!("greedy".parse::<PolicyKind>().is_err());
}

#[test]
fn loglog_commits_near_the_optimum() {
    let mut rng = rng_from_seed(4);
    for m in [2, 3, 4] {
        let inst = random_instance(&mut rng, &InstanceFamily::baseline(m));
        let horizon = 100_000;
        let mut env = Environment::new(inst.clone(), horizon, 8).unwrap();
        let report = run_loglog_search(&mut env).unwrap();
        let t = &report.trace;
        assert!(t.exploration_completed);
        assert!(t.committed_value >= t.oracle_value - 1.0 / horizon as f64);
        assert!(report.diagnostics.surviving.contains(&Ranking::by_bang_per_buck(&inst)));
        assert_eq!(t.rounds_used, horizon);
    }
}

#[test]
fn loglog_rejects_large_instances() {
    let m = 8;
    let mut omega = vec![-1.0; m];
    omega[0] = 1.0;
    let inst = Instance::from_omega(vec![1.0 / m as f64; m], &omega).unwrap();
    let mut env = Environment::new(inst, 100, 0).unwrap();
    assert!(matches!(
        run_policy(&mut env, PolicyKind::LogLog),
        Err(PolicyError::PermutationCapExceeded { m: 8, cap: 7 })
    ));
}

#[test]
fn poly_commits_near_the_optimum() {
    let inst = instance();
    let horizon = 100_000;
    let mut env = Environment::new(inst, horizon, 21).unwrap();
    let report = run_poly_search(&mut env);
    let t = &report.trace;
    assert!(report.diagnostics.solver_succeeded);
    assert!(t.committed_value >= t.oracle_value - 10.0 / horizon as f64);
    assert!(t.lp_queries > 0);
    assert_eq!(report.diagnostics.retained, vec![0, 1, 2]);
}

#[test]
fn short_horizons_stop_cleanly() {
    for horizon in [1, 2, 5, 30] {
        for kind in [PolicyKind::LogLog, PolicyKind::Poly] {
            let mut env = Environment::new(instance(), horizon, 3).unwrap();
            let run = run_policy(&mut env, kind).unwrap();
            assert_eq!(run.trace().rounds_used, horizon);
            assert!(run.trace().regret <= horizon as f64 * run.trace().oracle_value + 1e-12);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    for kind in [PolicyKind::LogLog, PolicyKind::Poly] {
        let go = || {
            let mut env = Environment::new(instance(), 20_000, 77).unwrap();
            run_policy(&mut env, kind).unwrap().into_trace()
        };
        assert_eq!(go(), go());
    }
}
