//! The round-consuming simulator.
//!
//! Each round samples a state from the prior, a signal from the committed
//! scheme, and the user's best response under the user's own belief. The
//! environment charges the exact expected regret `U* − U(π_t)` of the
//! committed scheme to its ledger and keeps a run-length transcript of
//! committed schemes. The hindsight optimum stays inside the environment.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hindsight::{solve_threshold, HindsightSolution};
use crate::model::{
    direct_responses, expected_platform_utility, expected_platform_utility_general,
    general_responses, Action, DirectScheme, GeneralScheme, Instance,
};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("horizon of {horizon} rounds is exhausted")]
    HorizonExhausted { horizon: u64 },
    #[error("horizon must be at least one round")]
    EmptyHorizon,
    #[error("scheme covers {found} states, instance has {expected}")]
    SchemeMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    Direct(DirectScheme),
    General(GeneralScheme),
}

impl Scheme {
    fn num_states(&self) -> usize {
        match self {
            Scheme::Direct(s) => s.num_states(),
            Scheme::General(s) => s.num_states(),
        }
    }

    pub fn as_direct(&self) -> Option<&DirectScheme> {
        match self {
            Scheme::Direct(s) => Some(s),
            Scheme::General(_) => None,
        }
    }
}

impl From<DirectScheme> for Scheme {
    fn from(s: DirectScheme) -> Self {
        Scheme::Direct(s)
    }
}

impl From<GeneralScheme> for Scheme {
    fn from(s: GeneralScheme) -> Self {
        Scheme::General(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOutcome {
    pub state: usize,
    pub signal: usize,
    pub action: Action,
    /// Realized platform gain `v(θ)·1{action = 1}`.
    pub payoff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Persuasive,
    NotPersuasive,
    RoundExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PersuCheckResult {
    pub verdict: Verdict,
    pub rounds_used: u64,
}

/// Consecutive rounds committed to the same scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct CommitRun {
    pub scheme: Scheme,
    pub rounds: u64,
    pub per_round_regret: f64,
}

/// One logged round; `run` indexes the transcript entry whose scheme was committed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    pub run: usize,
    pub outcome: RoundOutcome,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Per-round expected regret of committing to a scheme with expected payoff `utility`.
pub fn per_round_regret(optimum: f64, utility: f64) -> f64 {
    (optimum - utility).max(0.0)
}

/// A scheme with its responses and regret precomputed.
struct Prepared<'a> {
    scheme: &'a Scheme,
    responses: Vec<Action>,
    regret: f64,
}

pub struct Environment {
    inst: Instance,
    optimum: HindsightSolution,
    horizon: u64,
    round: u64,
    rng: ChaCha8Rng,
    state_cdf: Vec<f64>,
    realized_payoff: f64,
    regret: CompensatedSum,
    transcript: Vec<CommitRun>,
    log: Option<Vec<RoundRecord>>,
}

impl Environment {
    pub fn new(inst: Instance, horizon: u64, seed: u64) -> Result<Self, EnvError> {
        if horizon == 0 {
            return Err(EnvError::EmptyHorizon);
        }
        let optimum = solve_threshold(&inst);
        let mut state_cdf: Vec<f64> = inst
            .prior()
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        let last = inst.prior().iter().rposition(|&p| p > 0.0).expect("prior has support");
        state_cdf[last..].iter_mut().for_each(|c| *c = f64::INFINITY);
        Ok(Self {
            inst,
            optimum,
            horizon,
            round: 1,
            rng: rng_from_seed(seed),
            state_cdf,
            realized_payoff: 0.0,
            regret: CompensatedSum::default(),
            transcript: Vec::new(),
            log: None,
        })
    }

    /// Keeps a per-round outcome log (needed for the commit-log CSV).
    pub fn with_outcome_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Index of the next round, starting at 1.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn rounds_used(&self) -> u64 {
        self.round - 1
    }

    pub fn remaining(&self) -> u64 {
        self.horizon + 1 - self.round
    }

    pub fn num_states(&self) -> usize {
        self.inst.num_states()
    }

    /// The platform's prior; known to policies.
    pub fn prior(&self) -> &[f64] {
        self.inst.prior()
    }

    /// The platform's per-state values; known to policies.
    pub fn platform_value(&self) -> &[f64] {
        self.inst.platform_value()
    }

    /// Value weights `λ(i)v(i)`; known to policies.
    pub fn value_weights(&self) -> Vec<f64> {
        self.inst.value_weights()
    }

    /// Scheme constructions need the instance's public part; they only read `λ` and `v`.
    pub(crate) fn instance_for_constructions(&self) -> &Instance {
        &self.inst
    }

    /// Oracle-side access for regret accounting and verification. Policies do not call this.
    pub fn hidden_instance(&self) -> &Instance {
        &self.inst
    }

    /// Oracle-side access for regret accounting and verification. Policies do not call this.
    pub fn hidden_optimum(&self) -> &HindsightSolution {
        &self.optimum
    }

    /// Expected Stackelberg regret accumulated so far.
    pub fn stackelberg_regret(&self) -> f64 {
        self.regret.value()
    }

    /// `rounds_used · U* − realized payoff`, the Monte-Carlo counterpart of the ledger.
    pub fn realized_regret(&self) -> f64 {
        self.rounds_used() as f64 * self.optimum.value - self.realized_payoff
    }

    pub fn realized_payoff(&self) -> f64 {
        self.realized_payoff
    }

    pub fn transcript(&self) -> &[CommitRun] {
        &self.transcript
    }

    pub fn outcome_log(&self) -> Option<&[RoundRecord]> {
        self.log.as_deref()
    }

    fn prepare<'a>(&self, scheme: &'a Scheme) -> Result<Prepared<'a>, EnvError> {
        let m = self.inst.num_states();
        if scheme.num_states() != m {
            return Err(EnvError::SchemeMismatch {
                expected: m,
                found: scheme.num_states(),
            });
        }
        let (responses, utility) = match scheme {
            Scheme::Direct(s) => (
                direct_responses(&self.inst, s).to_vec(),
                expected_platform_utility(&self.inst, s),
            ),
            Scheme::General(s) => (
                general_responses(&self.inst, s),
                expected_platform_utility_general(&self.inst, s),
            ),
        };
        Ok(Prepared {
            scheme,
            responses,
            regret: per_round_regret(self.optimum.value, utility),
        })
    }

    /// Index of the transcript run for `scheme`, opening a new run if the scheme changed.
    fn open_run(&mut self, prepared: &Prepared) -> usize {
        match self.transcript.last() {
            Some(run) if run.scheme == *prepared.scheme => {}
            _ => self.transcript.push(CommitRun {
                scheme: prepared.scheme.clone(),
                rounds: 0,
                per_round_regret: prepared.regret,
            }),
        }
        self.transcript.len() - 1
    }

    fn sample_index(u: f64, cdf: &[f64]) -> usize {
        cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
    }

    fn step(&mut self, prepared: &Prepared, run: usize) -> RoundOutcome {
        let state = Self::sample_index(self.rng.gen::<f64>(), &self.state_cdf);
        let signal = match prepared.scheme {
            Scheme::Direct(s) => usize::from(self.rng.gen::<f64>() < s.probs()[state]),
            Scheme::General(s) => {
                let u = self.rng.gen::<f64>();
                let row = s.row(state);
                let mut acc = 0.0;
                let last = row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1);
                (0..row.len())
                    .find(|&k| {
                        acc += row[k];
                        k == last || (row[k] > 0.0 && u < acc)
                    })
                    .unwrap_or(last)
            }
        };
        let action = prepared.responses[signal];
        let payoff = if action.is_accept() {
            self.inst.platform_value()[state]
        } else {
            0.0
        };
        let outcome = RoundOutcome {
            state,
            signal,
            action,
            payoff,
        };
        if let Some(log) = self.log.as_mut() {
            log.push(RoundRecord {
                round: self.round,
                run,
                outcome,
            });
        }
        self.transcript[run].rounds += 1;
        self.realized_payoff += payoff;
        self.regret.add(prepared.regret);
        self.round += 1;
        outcome
    }

    /// Plays one round under `scheme`.
    pub fn play_round(&mut self, scheme: &Scheme) -> Result<RoundOutcome, EnvError> {
        if self.remaining() == 0 {
            return Err(EnvError::HorizonExhausted {
                horizon: self.horizon,
            });
        }
        let prepared = self.prepare(scheme)?;
        let run = self.open_run(&prepared);
        Ok(self.step(&prepared, run))
    }

    /// Plays up to `rounds` rounds under a fixed direct scheme; returns the number played.
    pub fn play_rounds(&mut self, scheme: &DirectScheme, rounds: u64) -> Result<u64, EnvError> {
        let scheme = Scheme::Direct(scheme.clone());
        let prepared = self.prepare(&scheme)?;
        let n = rounds.min(self.remaining());
        if n == 0 {
            return Ok(0);
        }
        let run = self.open_run(&prepared);
        if self.log.is_some() {
            for _ in 0..n {
                self.step(&prepared, run);
            }
            return Ok(n);
        }
        let Scheme::Direct(direct) = prepared.scheme else {
            unreachable!()
        };
        let probs = direct.probs();
        let values = self.inst.platform_value();
        let [on_zero, on_one] = [prepared.responses[0], prepared.responses[1]];
        let mut payoff = 0.0;
        for _ in 0..n {
            let state = Self::sample_index(self.rng.gen::<f64>(), &self.state_cdf);
            let signal_one = self.rng.gen::<f64>() < probs[state];
            let action = if signal_one { on_one } else { on_zero };
            if action.is_accept() {
                payoff += values[state];
            }
        }
        self.transcript[run].rounds += n;
        self.realized_payoff += payoff;
        self.regret.add(prepared.regret * n as f64);
        self.round += n;
        Ok(n)
    }

    /// Probes whether a direct scheme is persuasive by playing it until the
    /// signal-1 response is revealed: `(σ=1, a=1)` certifies persuasive,
    /// `(σ=1, a=0)` or `(σ=0, a=1)` certifies not persuasive.
    pub fn check_persu(&mut self, scheme: &DirectScheme) -> PersuCheckResult {
        let scheme = Scheme::Direct(scheme.clone());
        let prepared = match self.prepare(&scheme) {
            Ok(p) => p,
            Err(_) => panic!("check_persu called with a scheme of the wrong dimension"),
        };
        let mut rounds_used = 0;
        if self.remaining() == 0 {
            return PersuCheckResult {
                verdict: Verdict::RoundExhausted,
                rounds_used,
            };
        }
        let run = self.open_run(&prepared);
        loop {
            if self.remaining() == 0 {
                return PersuCheckResult {
                    verdict: Verdict::RoundExhausted,
                    rounds_used,
                };
            }
            let out = self.step(&prepared, run);
            rounds_used += 1;
            let verdict = match (out.signal, out.action) {
                (1, Action::Accept) => Some(Verdict::Persuasive),
                (1, Action::Decline) | (0, Action::Accept) => Some(Verdict::NotPersuasive),
                _ => None,
            };
            if let Some(verdict) = verdict {
                return PersuCheckResult {
                    verdict,
                    rounds_used,
                };
            }
        }
    }

    /// Writes the per-round log as CSV:
    /// `round,p1..pm,state,signal,action,payoff,per_round_expected_regret`.
    ///
    /// Requires [`Environment::with_outcome_log`]; general schemes write the
    /// probability of signal 1 in the scheme columns.
    pub fn write_commit_log<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let m = self.inst.num_states();
        let mut header = vec!["round".to_string()];
        header.extend((1..=m).map(|i| format!("p{i}")));
        header.extend(
            ["state", "signal", "action", "payoff", "per_round_expected_regret"].map(String::from),
        );
        w.write_record(&header)?;
        for rec in self.log.as_deref().unwrap_or(&[]) {
            let run = &self.transcript[rec.run];
            let mut row = vec![rec.round.to_string()];
            match &run.scheme {
                Scheme::Direct(s) => row.extend(s.probs().iter().map(f64::to_string)),
                Scheme::General(s) => row.extend((0..m).map(|i| {
                    let p = if s.signal_count() > 1 { s.prob(i, 1) } else { 0.0 };
                    p.to_string()
                })),
            }
            row.push((rec.outcome.state + 1).to_string());
            row.push(rec.outcome.signal.to_string());
            row.push(rec.outcome.action.index().to_string());
            row.push(rec.outcome.payoff.to_string());
            row.push(run.per_round_regret.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Offline recomputation of the regret ledger from a transcript and an instance.
pub fn recompute_regret(inst: &Instance, optimum: f64, transcript: &[CommitRun]) -> f64 {
    let mut total = CompensatedSum::default();
    for run in transcript {
        let utility = match &run.scheme {
            Scheme::Direct(s) => expected_platform_utility(inst, s),
            Scheme::General(s) => expected_platform_utility_general(inst, s),
        };
        total.add(per_round_regret(optimum, utility) * run.rounds as f64);
    }
    total.value()
}
