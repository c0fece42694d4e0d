use bayesrec::env::{recompute_regret, EnvError, Scheme};
use bayesrec::model::{DirectScheme, GeneralScheme, Instance};
use bayesrec::{Environment, Verdict};

fn instance() -> Instance {
    Instance::builder(vec![0.3, 0.3, 0.4], vec![2.0, -1.0, -3.0])
        .user_belief(vec![0.25, 0.35, 0.4])
        .platform_value(vec![1.0, 0.6, 0.8])
        .build()
        .unwrap()
}

fn scripted_run(seed: u64) -> Environment {
    let mut env = Environment::new(instance(), 500, seed).unwrap().with_outcome_log();
    let half = DirectScheme::new(vec![1.0, 0.5, 0.1]).unwrap();
    let general = GeneralScheme::new(vec![vec![0.2, 0.3, 0.5], vec![0.5, 0.5, 0.0], vec![0.9, 0.0, 0.1]]).unwrap();
    for _ in 0..50 {
        env.play_round(&Scheme::Direct(half.clone())).unwrap();
    }
    env.check_persu(&half);
    env.play_round(&Scheme::General(general)).unwrap();
    let remaining = env.remaining();
    env.play_rounds(&DirectScheme::zeros(3), remaining).unwrap();
    env
}

#[test]
fn same_seed_same_log() {
    let (a, b) = (scripted_run(9), scripted_run(9));
    assert_eq!(a.outcome_log(), b.outcome_log());
    let (mut x, mut y) = (Vec::new(), Vec::new());
    a.write_commit_log(&mut x).unwrap();
    b.write_commit_log(&mut y).unwrap();
    assert_eq!(x, y);
    assert_ne!(a.outcome_log(), scripted_run(10).outcome_log());
}

#[test]
fn ledger_matches_offline_recomputation() {
    let env = scripted_run(3);
    let offline = recompute_regret(env.hidden_instance(), env.hidden_optimum().value, env.transcript());
    assert!((offline - env.stackelberg_regret()).abs() <= 1e-9);
    assert_eq!(env.rounds_used(), 500);
    assert_eq!(env.transcript().iter().map(|r| r.rounds).sum::<u64>(), 500);
}

#[test]
fn horizon_is_enforced() {
    assert!(matches!(Environment::new(instance(), 0, 1), Err(EnvError::EmptyHorizon)));
    let mut env = Environment::new(instance(), 2, 1).unwrap();
    let s = Scheme::Direct(DirectScheme::zeros(3));
    env.play_round(&s).unwrap();
    env.play_round(&s).unwrap();
    assert!(matches!(env.play_round(&s), Err(EnvError::HorizonExhausted { horizon: 2 })));
    let probe = env.check_persu(&DirectScheme::new(vec![1.0, 0.0, 0.0]).unwrap());
    assert_eq!(probe.verdict, Verdict::RoundExhausted);
    assert!(matches!(
        env.play_round(&Scheme::Direct(DirectScheme::zeros(2))),
        Err(EnvError::SchemeMismatch { .. }) | Err(EnvError::HorizonExhausted { .. })
    ));
}

#[test]
fn probes_agree_with_ground_truth() {
    let mut env = Environment::new(instance(), 100_000, 5).unwrap();
    let yes = DirectScheme::new(vec![1.0, 0.5, 0.0]).unwrap();
    let no = DirectScheme::new(vec![1.0, 1.0, 1.0]).unwrap();
    for _ in 0..200 {
        assert_eq!(env.check_persu(&yes).verdict, Verdict::Persuasive);
        assert_eq!(env.check_persu(&no).verdict, Verdict::NotPersuasive);
    }
}

#[test]
fn realized_regret_tracks_expected() {
    let mut env = Environment::new(instance(), 200_000, 11).unwrap();
    env.play_rounds(&DirectScheme::new(vec![1.0, 0.2, 0.0]).unwrap(), 200_000).unwrap();
    let gap = (env.realized_regret() - env.stackelberg_regret()).abs();
    assert!(gap < 5.0 * (200_000f64).sqrt(), "gap {gap}");
}
