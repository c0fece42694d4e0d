//! The optimal persuasive scheme in hindsight, computed two independent ways.
//!
//! The hindsight program maximizes `Σ λ(i)v(i)π(i)` over `π ∈ [0,1]^m`
//! subject to `Σ ω(i)π(i) ≥ 0`. It is a fractional knapsack with a zero
//! budget: [`solve_threshold`] solves it greedily in bang-per-buck order,
//! [`solve_bruteforce`] enumerates the vertices of the feasible polytope.

use thiserror::Error;

use crate::model::{bang_per_buck_order, DirectScheme, Instance, PERSUASION_TOL};

/// Largest state count accepted by the vertex enumeration.
pub const BRUTEFORCE_MAX_STATES: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("vertex enumeration supports at most {max} states, got {m}")]
    TooManyStates { m: usize, max: usize },
    #[error("state {state} is out of range for {m} states")]
    StateOutOfRange { state: usize, m: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HindsightSolution {
    pub scheme: DirectScheme,
    /// The state holding the (possibly) fractional entry; every other entry is 0 or 1.
    pub threshold_state: usize,
    pub value: f64,
}

fn value_of(inst: &Instance, probs: &[f64]) -> f64 {
    probs
        .iter()
        .enumerate()
        .map(|(i, p)| inst.value_weight(i) * p)
        .sum()
}

/// Greedy threshold solution.
///
/// States are taken in bang-per-buck order while the running IC slack
/// `Σ ω(i)π(i)` stays nonnegative; the first state that would overdraw it
/// receives exactly the remaining slack. Zero-weight states with negative
/// `ω` add no value and are never taken.
pub fn solve_threshold(inst: &Instance) -> HindsightSolution {
    let omega = inst.omega();
    let mut probs = vec![0.0; inst.num_states()];
    let mut slack = 0.0;
    let mut threshold = None;
    let mut last_taken = 0;
    for state in bang_per_buck_order(inst) {
        let w = omega[state];
        if w < 0.0 && inst.value_weight(state) <= 0.0 {
            break;
        }
        if slack + w >= 0.0 {
            probs[state] = 1.0;
            slack += w;
            last_taken = state;
        } else {
            probs[state] = slack / -w;
            threshold = Some(state);
            break;
        }
    }
    let value = value_of(inst, &probs);
    HindsightSolution {
        scheme: DirectScheme::new(probs).expect("greedy entries lie in [0, 1]"),
        threshold_state: threshold.unwrap_or(last_taken),
        value,
    }
}

/// Vertex enumeration over all states.
pub fn solve_bruteforce(inst: &Instance) -> Result<HindsightSolution, OracleError> {
    let all: Vec<usize> = (0..inst.num_states()).collect();
    solve_bruteforce_restricted(inst, &all)
}

/// Vertex enumeration with every state outside `retained` pinned to 0.
///
/// For each choice of fractional coordinate `k` (or none) and each binary
/// assignment of the other retained states, `π(k)` is solved from
/// `Σ ω(i)π(i) = 0`; feasible points are scored by `Σ λ(i)v(i)π(i)`.
pub fn solve_bruteforce_restricted(
    inst: &Instance,
    retained: &[usize],
) -> Result<HindsightSolution, OracleError> {
    let m = inst.num_states();
    let mut free: Vec<usize> = retained.to_vec();
    free.sort_unstable();
    free.dedup();
    if let Some(&state) = free.iter().find(|&&s| s >= m) {
        return Err(OracleError::StateOutOfRange { state, m });
    }
    if free.len() > BRUTEFORCE_MAX_STATES {
        return Err(OracleError::TooManyStates {
            m: free.len(),
            max: BRUTEFORCE_MAX_STATES,
        });
    }
    let omega = inst.omega();
    let mut best: Option<(f64, Vec<f64>, Option<usize>)> = None;
    let mut probs = vec![0.0; m];
    let candidates = std::iter::once(None).chain(free.iter().map(|&k| Some(k)));
    for fractional in candidates {
        if fractional.is_some_and(|k| omega[k] == 0.0) {
            continue;
        }
        let others: Vec<usize> = free.iter().copied().filter(|&s| Some(s) != fractional).collect();
        for mask in 0u32..(1u32 << others.len()) {
            probs.iter_mut().for_each(|p| *p = 0.0);
            for (bit, &s) in others.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    probs[s] = 1.0;
                }
            }
            let (gain, scale) = others.iter().fold((0.0, 0.0), |(g, a), &s| {
                (g + omega[s] * probs[s], a + omega[s].abs() * probs[s])
            });
            match fractional {
                None => {
                    if gain < -PERSUASION_TOL * scale {
                        continue;
                    }
                }
                Some(k) => {
                    let x = -gain / omega[k];
                    if !(-1e-12..=1.0 + 1e-12).contains(&x) {
                        continue;
                    }
                    probs[k] = x.clamp(0.0, 1.0);
                }
            }
            let value = value_of(inst, &probs);
            if best.as_ref().map_or(true, |(v, _, _)| value > *v) {
                best = Some((value, probs.clone(), fractional));
            }
        }
    }
    let (value, probs, fractional) = best.expect("the all-zeros vertex is always feasible");
    let threshold_state = fractional.unwrap_or_else(|| {
        bang_per_buck_order(inst)
            .into_iter()
            .filter(|&s| probs[s] == 1.0)
            .last()
            .unwrap_or(0)
    });
    Ok(HindsightSolution {
        scheme: DirectScheme::new(probs).expect("vertex entries lie in [0, 1]"),
        threshold_state,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ic_slack, is_persuasive};

    #[test]
    fn two_state_example() {
        let inst = Instance::from_omega(vec![0.5, 0.5], &[1.0, -2.0]).unwrap();
        let sol = solve_threshold(&inst);
        assert_eq!(sol.scheme.probs(), &[1.0, 0.5]);
        assert_eq!(sol.threshold_state, 1);
        assert!((sol.value - 0.75).abs() < 1e-15);
        let brute = solve_bruteforce(&inst).unwrap();
        assert!((brute.value - 0.75).abs() < 1e-15);
    }

    #[test]
    fn pricing_style_example() {
        let eps = 0.01;
        let inst = Instance::new(vec![eps, 1.0 - eps], vec![1.0, -eps / 0.5]).unwrap();
        let sol = solve_threshold(&inst);
        assert!((sol.scheme.probs()[1] - 0.5 / 0.99).abs() < 1e-12);
        assert!((sol.value - 0.51).abs() < 1e-12);
    }

    #[test]
    fn ties_give_identical_value() {
        let third = 1.0 / 3.0;
        let inst = Instance::from_omega(vec![third, third, third], &[1.0, -3.0, -3.0]).unwrap();
        let sol = solve_threshold(&inst);
        assert!((sol.scheme.probs()[0] - 1.0).abs() < 1e-15);
        assert!((sol.scheme.probs()[1] - third).abs() < 1e-12);
        assert_eq!(sol.scheme.probs()[2], 0.0);
        assert!((sol.value - 4.0 / 9.0).abs() < 1e-12);
        let reordered = Instance::from_omega(vec![third, third, third], &[-3.0, 1.0, -3.0]).unwrap();
        assert!((solve_threshold(&reordered).value - 4.0 / 9.0).abs() < 1e-12);
        assert!((solve_bruteforce(&inst).unwrap().value - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn bruteforce_example() {
        let inst = Instance::from_omega(vec![0.9, 0.1], &[0.1, -0.2]).unwrap();
        let sol = solve_bruteforce(&inst).unwrap();
        assert!((sol.scheme.probs()[1] - 0.5).abs() < 1e-12);
        assert!((sol.value - 0.95).abs() < 1e-12);
        assert!((solve_threshold(&inst).value - 0.95).abs() < 1e-12);
    }

    #[test]
    fn bruteforce_rejects_large_instances() {
        let m = 13;
        let mut gap = vec![-1.0; m];
        gap[0] = 1.0;
        let inst = Instance::new(vec![1.0 / m as f64; m], gap).unwrap();
        assert_eq!(
            solve_bruteforce(&inst),
            Err(OracleError::TooManyStates { m: 13, max: 12 })
        );
    }

    #[test]
    fn free_states_are_taken_and_costly_free_states_skipped() {
        let inst = Instance::builder(vec![0.25, 0.25, 0.25, 0.25], vec![1.0, -2.0, 0.5, -1.0])
            .platform_value(vec![0.5, 1.0, 0.0, 0.0])
            .build()
            .unwrap();
        let sol = solve_threshold(&inst);
        assert_eq!(sol.scheme.probs()[2], 1.0);
        assert_eq!(sol.scheme.probs()[3], 0.0);
        assert!(is_persuasive(&inst, &sol.scheme));
        assert!(ic_slack(&inst, &sol.scheme).abs() < 1e-12);
        assert!((sol.value - solve_bruteforce(&inst).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn restricted_enumeration_pins_excluded_states() {
        let inst = Instance::from_omega(vec![0.25; 4], &[0.5, -0.1, 0.2, -1.0]).unwrap();
        let sol = solve_bruteforce_restricted(&inst, &[1, 3]).unwrap();
        assert_eq!(sol.value, 0.0);
        let sol = solve_bruteforce_restricted(&inst, &[0, 1]).unwrap();
        assert!((sol.value - 0.5).abs() < 1e-12);
    }
}
