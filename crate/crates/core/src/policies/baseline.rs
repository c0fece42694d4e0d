use crate::env::Environment;
use crate::model::DirectScheme;

use super::{PolicyKind, RegretTrace, Tracker};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// Never recommend.
    NoInfo,
    /// Recommend exactly the states with `ω(i) ≥ 0`; reads the hidden gaps.
    FullReveal,
    /// The hindsight optimum; reads the hidden solution.
    Hindsight,
}

/// Commits one fixed scheme for the whole horizon.
pub fn run_baseline(env: &mut Environment, kind: Baseline) -> RegretTrace {
    let scheme = match kind {
        Baseline::NoInfo => DirectScheme::zeros(env.num_states()),
        Baseline::FullReveal => DirectScheme::new(
            env.hidden_instance()
                .omega()
                .iter()
                .map(|&w| if w >= 0.0 { 1.0 } else { 0.0 })
                .collect(),
        )
        .expect("indicator entries"),
        Baseline::Hindsight => env.hidden_optimum().scheme.clone(),
    };
    let policy = match kind {
        Baseline::NoInfo => PolicyKind::NoInfo,
        Baseline::FullReveal => PolicyKind::FullReveal,
        Baseline::Hindsight => PolicyKind::Hindsight,
    };
    let mut tracker = Tracker::new(env, &["exploit"]);
    tracker.exploit(env, &scheme, 0);
    tracker.finish(env, policy, scheme, true, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Instance;

    fn env(horizon: u64) -> Environment {
        Environment::new(Instance::new(vec![0.5, 0.5], vec![2.0, -4.0]).unwrap(), horizon, 7).unwrap()
    }

    #[test]
    fn baseline_regrets() {
        let t = run_baseline(&mut env(1000), Baseline::NoInfo);
        assert!((t.regret - 750.0).abs() < 1e-9);
        let t = run_baseline(&mut env(1000), Baseline::Hindsight);
        assert!(t.regret.abs() < 1e-9);
        let t = run_baseline(&mut env(1000), Baseline::FullReveal);
        assert!((t.regret - 250.0).abs() < 1e-9);
        assert_eq!(t.rounds_used, 1000);
    }
}
