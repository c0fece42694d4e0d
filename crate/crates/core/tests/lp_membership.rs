use bayesrec::lp::{
    maximize, query_budget, separation_from_membership, HalfspaceOracle, KnownRegion, LpError, LpQuery,
    LpStatus, MembershipOracle, OracleAbort, Separation,
};

fn query(objective: Vec<f64>, interior: Vec<f64>, radius: f64) -> LpQuery {
    let d = objective.len();
    LpQuery {
        objective,
        known_region: KnownRegion::unit_box(d),
        interior_point: interior,
        inner_radius: radius,
        outer_radius: (d as f64).sqrt(),
        precision: 1e-4,
        confidence: 1e-4,
    }
}

#[test]
fn two_dimensional_halfspace() {
    let q = query(vec![0.5, 0.5], vec![0.5, 0.1], 0.05);
    let mut oracle = HalfspaceOracle {
        normal: vec![1.0, -2.0],
        offset: 0.0,
    };
    let res = maximize(&q, &mut oracle).unwrap();
    assert_eq!(res.status, LpStatus::Converged);
    assert!((res.value - 0.75).abs() <= 1e-4 + 1e-9);
    assert!(res.oracle_queries <= query_budget(2, q.outer_radius, 1e-4, 1e-4, 0.05));
    assert!(res.value <= res.upper_bound + 1e-12);
}

#[test]
fn closures_are_oracles() {
    let q = query(vec![1.0, 1.0, 1.0], vec![0.2, 0.2, 0.2], 0.1);
    let mut ball = |x: &[f64]| x.iter().sum::<f64>() <= 1.5;
    let res = maximize(&q, &mut ball).unwrap();
    assert!((res.value - 1.5).abs() <= 1e-4 + 1e-9, "{res:?}");
}

#[test]
fn rejected_interior_and_aborts() {
    let q = query(vec![1.0, 0.0], vec![0.5, 0.5], 0.1);
    let mut never = |_: &[f64]| false;
    assert_eq!(maximize(&q, &mut never).unwrap().status, LpStatus::InteriorRejected);

    struct Flaky(u32);
    impl MembershipOracle for Flaky {
        fn is_member(&mut self, x: &[f64]) -> Result<bool, OracleAbort> {
            self.0 += 1;
            if self.0 > 3 {
                return Err(OracleAbort("out of rounds".into()));
            }
            Ok(x[0] <= 0.7)
        }
    }
    let res = maximize(&q, &mut Flaky(0)).unwrap();
    assert_eq!(res.status, LpStatus::OracleAborted);
    assert!(res.point[0] <= 0.7);
}

#[test]
fn malformed_queries_are_rejected() {
    let mut oracle = |_: &[f64]| true;
    let mut q = query(vec![1.0, 0.0], vec![0.5], 0.1);
    assert!(matches!(maximize(&q, &mut oracle), Err(LpError::DimensionMismatch { .. })));
    q.interior_point = vec![0.5, 0.5];
    q.inner_radius = 5.0;
    assert!(matches!(maximize(&q, &mut oracle), Err(LpError::InvalidRadii { .. })));
    q.inner_radius = 0.1;
    q.precision = 0.0;
    assert!(matches!(maximize(&q, &mut oracle), Err(LpError::InvalidTolerance { .. })));
}

#[test]
fn separation_recovers_the_boundary() {
    let mut oracle = HalfspaceOracle {
        normal: vec![-1.0, 0.0],
        offset: -0.6,
    };
    match separation_from_membership(&mut oracle, &[0.2, 0.5], &[0.9, 0.5], 1e-9).unwrap() {
        Separation::Boundary { boundary, cut, .. } => {
            assert!((boundary[0] - 0.6).abs() < 1e-8);
            assert!(cut.excess(&[0.9, 0.5]) > 0.0);
            assert!(cut.excess(&[0.2, 0.5]) < 0.0);
        }
        other => panic!("expected a boundary, got {other:?}"),
    }
    assert!(matches!(
        separation_from_membership(&mut oracle, &[0.2, 0.5], &[0.3, 0.5], 1e-9).unwrap(),
        Separation::Inside { queries: 1 }
    ));
}
