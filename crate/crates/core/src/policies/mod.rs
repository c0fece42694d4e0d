//! Online policies driving an [`Environment`] to its horizon.
//!
//! Policies see the prior, the platform values and the horizon. They learn
//! about the user only through [`Environment::check_persu`] and the rounds
//! they commit to; the hidden instance is read only when a trace is
//! assembled for reporting.

mod baseline;
mod loglog;
mod poly;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{Environment, Verdict};
use crate::model::{expected_platform_utility, DirectScheme};

pub use baseline::{run_baseline, Baseline};
pub use loglog::{run_loglog_search, IntervalStep, LogLogDiagnostics, LogLogReport, PERMUTATION_CAP};
pub use poly::{run_poly_search, Candidate, PolyDiagnostics, PolyReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("{m} states give {m}! orders, above the cap of {cap} states")]
    PermutationCapExceeded { m: usize, cap: usize },
    #[error("unknown policy {0:?}; expected loglog, poly, no-info, full-reveal or hindsight")]
    UnknownPolicy(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "loglog")]
    LogLog,
    #[serde(rename = "poly")]
    Poly,
    #[serde(rename = "no-info")]
    NoInfo,
    #[serde(rename = "full-reveal")]
    FullReveal,
    /// Oracle-assisted; for debugging and calibration only.
    #[serde(rename = "hindsight")]
    Hindsight,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::LogLog,
        PolicyKind::Poly,
        PolicyKind::NoInfo,
        PolicyKind::FullReveal,
        PolicyKind::Hindsight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::LogLog => "loglog",
            PolicyKind::Poly => "poly",
            PolicyKind::NoInfo => "no-info",
            PolicyKind::FullReveal => "full-reveal",
            PolicyKind::Hindsight => "hindsight",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| PolicyError::UnknownPolicy(s.to_string()))
    }
}

/// Rounds and persuasiveness probes spent in one phase of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseStat {
    pub name: &'static str,
    pub rounds: u64,
    pub checks: u64,
}

/// Outcome of one policy run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub policy: PolicyKind,
    pub horizon: u64,
    pub rounds_used: u64,
    /// Expected Stackelberg regret.
    pub regret: f64,
    pub realized_regret: f64,
    /// `U(π*)`.
    pub oracle_value: f64,
    /// The scheme used in the exploiting phase.
    pub committed: DirectScheme,
    /// `U(π†)`.
    pub committed_value: f64,
    /// False when the horizon ran out before exploration finished.
    pub exploration_completed: bool,
    pub phases: Vec<PhaseStat>,
    /// Membership queries made by the LP solver (poly only).
    pub lp_queries: u64,
}

impl RegretTrace {
    pub fn checks(&self) -> u64 {
        self.phases.iter().map(|p| p.checks).sum()
    }
}

/// Everything a run reports, including policy-specific diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyRun {
    LogLog(LogLogReport),
    Poly(PolyReport),
    Baseline(RegretTrace),
}

impl PolicyRun {
    pub fn trace(&self) -> &RegretTrace {
        match self {
            PolicyRun::LogLog(r) => &r.trace,
            PolicyRun::Poly(r) => &r.trace,
            PolicyRun::Baseline(t) => t,
        }
    }

    pub fn into_trace(self) -> RegretTrace {
        match self {
            PolicyRun::LogLog(r) => r.trace,
            PolicyRun::Poly(r) => r.trace,
            PolicyRun::Baseline(t) => t,
        }
    }
}

pub fn run_policy(env: &mut Environment, kind: PolicyKind) -> Result<PolicyRun, PolicyError> {
    Ok(match kind {
        PolicyKind::LogLog => PolicyRun::LogLog(run_loglog_search(env)?),
        PolicyKind::Poly => PolicyRun::Poly(run_poly_search(env)),
        PolicyKind::NoInfo => PolicyRun::Baseline(run_baseline(env, Baseline::NoInfo)),
        PolicyKind::FullReveal => PolicyRun::Baseline(run_baseline(env, Baseline::FullReveal)),
        PolicyKind::Hindsight => PolicyRun::Baseline(run_baseline(env, Baseline::Hindsight)),
    })
}

/// Per-phase accounting plus the persuasive schemes verified so far.
pub(crate) struct Tracker {
    phases: Vec<PhaseStat>,
    value_weights: Vec<f64>,
    last_persuasive: Option<DirectScheme>,
    best_persuasive: Option<(f64, DirectScheme)>,
}

impl Tracker {
    pub(crate) fn new(env: &Environment, phases: &[&'static str]) -> Self {
        Self {
            phases: phases
                .iter()
                .map(|&name| PhaseStat {
                    name,
                    rounds: 0,
                    checks: 0,
                })
                .collect(),
            value_weights: env.value_weights(),
            last_persuasive: None,
            best_persuasive: None,
        }
    }

    pub(crate) fn check(&mut self, env: &mut Environment, scheme: &DirectScheme, phase: usize) -> Verdict {
        let res = env.check_persu(scheme);
        let stat = &mut self.phases[phase];
        stat.rounds += res.rounds_used;
        stat.checks += 1;
        if res.verdict == Verdict::Persuasive {
            let value: f64 = scheme.probs().iter().zip(&self.value_weights).map(|(p, w)| p * w).sum();
            if self.best_persuasive.as_ref().is_none_or(|(best, _)| value > *best) {
                self.best_persuasive = Some((value, scheme.clone()));
            }
            self.last_persuasive = Some(scheme.clone());
        }
        res.verdict
    }

    pub(crate) fn last_persuasive(&self) -> Option<&DirectScheme> {
        self.last_persuasive.as_ref()
    }

    pub(crate) fn best_persuasive(&self) -> Option<&DirectScheme> {
        self.best_persuasive.as_ref().map(|(_, s)| s)
    }

    /// Plays `scheme` for every remaining round.
    pub(crate) fn exploit(&mut self, env: &mut Environment, scheme: &DirectScheme, phase: usize) {
        let n = env
            .play_rounds(scheme, env.remaining())
            .expect("policy schemes match the instance dimension");
        self.phases[phase].rounds += n;
    }

    pub(crate) fn finish(
        self,
        env: &Environment,
        policy: PolicyKind,
        committed: DirectScheme,
        exploration_completed: bool,
        lp_queries: u64,
    ) -> RegretTrace {
        let committed_value = expected_platform_utility(env.hidden_instance(), &committed);
        RegretTrace {
            policy,
            horizon: env.horizon(),
            rounds_used: env.rounds_used(),
            regret: env.stackelberg_regret(),
            realized_regret: env.realized_regret(),
            oracle_value: env.hidden_optimum().value,
            committed,
            committed_value,
            exploration_completed,
            phases: self.phases,
            lp_queries,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_round_trips_through_strings() {
        for kind in PolicyKind::ALL {
            assert_eq!(kind.name().parse::<PolicyKind>().unwrap(), kind);
        }
        assert_eq!("no_info".parse::<PolicyKind>().unwrap(), PolicyKind::NoInfo);
        assert!("greedy".parse::<PolicyKind>().is_err());
    }
}
