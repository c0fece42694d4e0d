use bayesrec::hindsight::{solve_bruteforce, solve_bruteforce_restricted, solve_threshold, OracleError};
use bayesrec::model::{is_persuasive, Instance};
use bayesrec::rng::rng_from_seed;
use bayesrec::sampling::{random_instance, InstanceFamily};

#[test]
fn threshold_matches_enumeration_across_families() {
    let mut rng = rng_from_seed(17);
    for m in 2..=8 {
        for extended in [false, true] {
            let mut family = InstanceFamily::baseline(m);
            family.misspecified_belief = extended;
            family.value_range = extended.then_some((0.0, 1.0));
            for _ in 0..60 {
                let inst = random_instance(&mut rng, &family);
                let a = solve_threshold(&inst);
                let b = solve_bruteforce(&inst).unwrap();
                assert!((a.value - b.value).abs() <= 1e-9, "{inst:?}");
                assert!(is_persuasive(&inst, &a.scheme));
            }
        }
    }
}

#[test]
fn restricted_enumeration_pins_other_states() {
    let inst = Instance::from_omega(vec![0.2, 0.3, 0.5], &[0.4, -0.1, -0.9]).unwrap();
    let full = solve_bruteforce(&inst).unwrap();
    let restricted = solve_bruteforce_restricted(&inst, &[0, 2]).unwrap();
    assert_eq!(restricted.scheme.probs()[1], 0.0);
    assert!(restricted.value <= full.value);
    let only_positive = solve_bruteforce_restricted(&inst, &[0]).unwrap();
    assert!((only_positive.value - 0.2).abs() < 1e-12);
    assert!(matches!(
        solve_bruteforce_restricted(&inst, &[3]),
        Err(OracleError::StateOutOfRange { state: 3, m: 3 })
    ));
}

#[test]
fn enumeration_rejects_large_instances() {
    let m = 13;
    let mut omega = vec![-1.0; m];
    omega[0] = 1.0;
    let inst = Instance::from_omega(vec![1.0 / m as f64; m], &omega).unwrap();
    assert!(matches!(solve_bruteforce(&inst), Err(OracleError::TooManyStates { .. })));
    assert!(solve_threshold(&inst).value > 0.0);
}
