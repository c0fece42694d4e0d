//! The `poly(m log T)` search: anchor pairs, retained states, then a
//! membership-oracle LP per anchor pair.

use std::collections::HashMap;

use crate::env::{Environment, Verdict};
use crate::lp::{self, Halfspace, KnownRegion, LpQuery, LpStatus, MembershipOracle, OracleAbort};
use crate::model::{
    make_interior_candidate, make_phase1_scheme, make_phase2_scheme, DirectScheme, Instance,
};

use super::{PolicyKind, RegretTrace, Tracker};

const PHASE_ONE: usize = 0;
const PHASE_TWO: usize = 1;
const PHASE_THREE: usize = 2;
const EXPLOIT: usize = 3;

/// One anchor pair's LP run.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub pair: (usize, usize),
    pub interior: DirectScheme,
    /// `None` when the query was malformed.
    pub status: Option<LpStatus>,
    pub queries: u64,
    pub point: Option<DirectScheme>,
    /// Passed the final persuasiveness probe.
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyDiagnostics {
    /// `U̲` when phase I found a persuasive pair.
    pub phase1_lower: Option<f64>,
    /// Anchor pairs `(i, j)` whose `π^I` was persuasive at `U̲`.
    pub pairs: Vec<(usize, usize)>,
    /// Retained states `S̃`, sorted.
    pub retained: Vec<usize>,
    pub candidates: Vec<Candidate>,
    /// Every LP run whose interior point the oracle accepted converged, and at least one did.
    pub solver_succeeded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyReport {
    pub trace: RegretTrace,
    pub diagnostics: PolyDiagnostics,
}

/// Membership oracle answering with one persuasiveness probe per query.
struct ProbeOracle<'a> {
    env: &'a mut Environment,
    tracker: &'a mut Tracker,
}

impl MembershipOracle for ProbeOracle<'_> {
    fn is_member(&mut self, x: &[f64]) -> Result<bool, OracleAbort> {
        let scheme = DirectScheme::new(x.to_vec()).map_err(|e| OracleAbort(e.to_string()))?;
        match self.tracker.check(self.env, &scheme, PHASE_THREE) {
            Verdict::Persuasive => Ok(true),
            Verdict::NotPersuasive => Ok(false),
            Verdict::RoundExhausted => Err(OracleAbort("horizon exhausted".into())),
        }
    }
}

fn probe(tracker: &mut Tracker, env: &mut Environment, scheme: &DirectScheme, phase: usize) -> Option<bool> {
    match tracker.check(env, scheme, phase) {
        Verdict::Persuasive => Some(true),
        Verdict::NotPersuasive => Some(false),
        Verdict::RoundExhausted => None,
    }
}

/// The LP over the retained states for one anchor pair.
pub(crate) fn restricted_query(
    inst: &Instance,
    retained: &[usize],
    lower_bound: f64,
    interior: &DirectScheme,
    horizon: u64,
) -> LpQuery {
    let m = inst.num_states();
    let weights = inst.value_weights();
    let mut upper = vec![0.0; m];
    for &k in retained {
        upper[k] = 1.0;
    }
    let t = horizon as f64;
    let tolerance = (1.0 / t).min(0.5);
    LpQuery {
        objective: weights.clone(),
        known_region: KnownRegion {
            lower: vec![0.0; m],
            upper,
            inequalities: vec![Halfspace {
                normal: weights.iter().map(|w| -w).collect(),
                offset: -lower_bound / 16.0,
            }],
        },
        interior_point: interior.probs().to_vec(),
        inner_radius: 1.0 / (16.0 * (m * m) as f64 * t),
        outer_radius: (m as f64).sqrt(),
        precision: tolerance,
        confidence: tolerance,
    }
}

/// Runs the pair search to the horizon.
///
/// Phase I halves `U̲` from `1/2` while `U̲ ≥ 1/(m²T)`, probing `π^I` for
/// every ordered pair whose `j` entry is attainable. Phase II probes `π^II`
/// for each anchor pair and each other state to build `S̃`. Phase III runs
/// the membership-oracle LP from `π^(0)` for each anchor pair, re-probes
/// each returned point, and commits the verified point of largest value.
pub fn run_poly_search(env: &mut Environment) -> PolyReport {
    let m = env.num_states();
    let horizon = env.horizon();
    let inst = env.instance_for_constructions().clone();
    let mut tracker = Tracker::new(env, &["phase1", "phase2", "phase3", "exploit"]);
    let mut exhausted = false;
    let mut pairs = Vec::new();
    let mut retained: Vec<usize> = Vec::new();
    let mut candidates = Vec::new();
    let mut lp_queries = 0;

    let floor = 1.0 / ((m * m) as f64 * horizon as f64);
    let mut lower_bound = 0.5;
    let mut cache: HashMap<Vec<u64>, bool> = HashMap::new();
    let mut phase1_lower = None;
    'halving: while lower_bound >= floor {
        let mut passed = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let Ok(scheme) = make_phase1_scheme(&inst, i, j, lower_bound) else {
                    continue;
                };
                let key: Vec<u64> = scheme.probs().iter().map(|p| p.to_bits()).collect();
                let verdict = match cache.get(&key) {
                    Some(&v) => v,
                    None => match probe(&mut tracker, env, &scheme, PHASE_ONE) {
                        Some(v) => {
                            cache.insert(key, v);
                            v
                        }
                        None => {
                            exhausted = true;
                            break 'halving;
                        }
                    },
                };
                if verdict {
                    passed.push((i, j));
                }
            }
        }
        if !passed.is_empty() {
            pairs = passed;
            phase1_lower = Some(lower_bound);
            break;
        }
        lower_bound /= 2.0;
    }

    let mut solver_succeeded = false;
    if let (Some(lb), false) = (phase1_lower, exhausted) {
        'phase2: for &(i, j) in &pairs {
            for s in [i, j] {
                if !retained.contains(&s) {
                    retained.push(s);
                }
            }
            for k in 0..m {
                if k == i || k == j || retained.contains(&k) {
                    continue;
                }
                let scheme = make_phase2_scheme(&inst, i, j, lb, k, horizon)
                    .expect("anchor pairs are attainable at half the lower bound");
                match probe(&mut tracker, env, &scheme, PHASE_TWO) {
                    Some(true) => retained.push(k),
                    Some(false) => {}
                    None => {
                        exhausted = true;
                        break 'phase2;
                    }
                }
            }
        }
        retained.sort_unstable();

        if !exhausted {
            solver_succeeded = true;
            let mut any_converged = false;
            for &(i, j) in &pairs {
                let interior = make_interior_candidate(&inst, i, j, lb, &retained, horizon)
                    .expect("anchor pairs lie in the retained set");
                let query = restricted_query(&inst, &retained, lb, &interior, horizon);
                let mut oracle = ProbeOracle {
                    env: &mut *env,
                    tracker: &mut tracker,
                };
                let mut candidate = Candidate {
                    pair: (i, j),
                    interior,
                    status: None,
                    queries: 0,
                    point: None,
                    verified: false,
                };
                if let Ok(res) = lp::maximize(&query, &mut oracle) {
                    lp_queries += res.oracle_queries;
                    candidate.status = Some(res.status);
                    candidate.queries = res.oracle_queries;
                    if res.status == LpStatus::OracleAborted {
                        exhausted = true;
                    }
                    if res.status != LpStatus::InteriorRejected && !exhausted {
                        candidate.point = DirectScheme::new(res.point).ok();
                    }
                }
                match candidate.status {
                    Some(LpStatus::Converged) => any_converged = true,
                    Some(LpStatus::InteriorRejected) => {}
                    _ => solver_succeeded = false,
                }
                if let Some(point) = &candidate.point {
                    match probe(&mut tracker, env, point, PHASE_THREE) {
                        Some(v) => candidate.verified = v,
                        None => exhausted = true,
                    }
                }
                candidates.push(candidate);
                if exhausted {
                    break;
                }
            }
            solver_succeeded &= any_converged;
        }
    }

    let weights = inst.value_weights();
    let value = |s: &DirectScheme| -> f64 { s.probs().iter().zip(&weights).map(|(p, w)| p * w).sum() };
    let committed = if exhausted {
        tracker.last_persuasive().cloned()
    } else {
        candidates
            .iter()
            .filter(|c| c.verified)
            .filter_map(|c| c.point.clone())
            .max_by(|a, b| value(a).total_cmp(&value(b)))
            .or_else(|| tracker.best_persuasive().cloned())
    }
    .unwrap_or_else(|| DirectScheme::zeros(m));
    tracker.exploit(env, &committed, EXPLOIT);
    let trace = tracker.finish(env, PolicyKind::Poly, committed, !exhausted, lp_queries);
    PolyReport {
        trace,
        diagnostics: PolyDiagnostics {
            phase1_lower,
            pairs,
            retained,
            candidates,
            solver_succeeded,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_state_run_commits_near_the_optimum() {
        let inst = Instance::new(vec![0.3, 0.3, 0.4], vec![2.0, -1.0, -3.0]).unwrap();
        let mut env = Environment::new(inst, 100_000, 11).unwrap();
        let report = run_poly_search(&mut env);
        let t = &report.trace;
        assert_eq!(t.rounds_used, 100_000);
        assert!(report.diagnostics.pairs.iter().any(|&(i, _)| i == 0));
        if report.diagnostics.solver_succeeded {
            assert!(t.committed_value >= t.oracle_value - 10.0 / 100_000.0, "{t:?}");
        }
    }

    #[test]
    fn excludes_a_hugely_negative_state() {
        let horizon = 1000;
        let inst = Instance::from_omega(vec![1.0 / 3.0; 3], &[1.0, -2.0, -1e4 * horizon as f64]).unwrap();
        let mut env = Environment::new(inst, horizon, 5).unwrap();
        let report = run_poly_search(&mut env);
        assert!(!report.diagnostics.retained.contains(&2));
    }
}
