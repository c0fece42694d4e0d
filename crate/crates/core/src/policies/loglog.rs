//! The `O(m!·log log T)` search over total orders of the states.

use crate::env::{Environment, Verdict};
use crate::model::{make_rank_scheme, DirectScheme, Instance, Ranking};

use super::{PolicyError, PolicyKind, RegretTrace, Tracker};

/// Largest state count the order search accepts (`7! = 5040` orders).
pub const PERMUTATION_CAP: usize = 7;

const PHASE_ONE: usize = 0;
const PHASE_TWO: usize = 1;
const EXPLOIT: usize = 2;

/// One iteration of the interval refinement, recorded at its start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalStep {
    pub lower: f64,
    pub upper: f64,
    pub eps: f64,
    pub levels: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLogDiagnostics {
    /// `U̲` when the halving phase found a persuasive level.
    pub phase1_lower: Option<f64>,
    pub intervals: Vec<IntervalStep>,
    /// Orders still live when exploration stopped, in lexicographic order.
    pub surviving: Vec<Ranking>,
    /// Number of levels at which the live set was filtered.
    pub filters: usize,
    /// The level `L` of the committed scheme, if exploration completed.
    pub committed_level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLogReport {
    pub trace: RegretTrace,
    pub diagnostics: LogLogDiagnostics,
}

enum Level {
    Passed,
    Failed,
    Exhausted,
}

struct Search<'a> {
    inst: Instance,
    live: Vec<Ranking>,
    tracker: &'a mut Tracker,
    filters: usize,
}

impl Search<'_> {
    /// Probes `π^(r,u)` for every live order, one probe per distinct scheme,
    /// and keeps the orders whose scheme is persuasive.
    fn test_level(&mut self, env: &mut Environment, target: f64, phase: usize) -> Level {
        let mut seen: Vec<(DirectScheme, bool)> = Vec::new();
        let mut keep = vec![false; self.live.len()];
        for (slot, rank) in self.live.iter().enumerate() {
            let Ok(scheme) = make_rank_scheme(&self.inst, rank, target) else {
                continue;
            };
            let verdict = match seen.iter().find(|(s, _)| *s == scheme) {
                Some((_, v)) => *v,
                None => {
                    let v = match self.tracker.check(env, &scheme, phase) {
                        Verdict::Persuasive => true,
                        Verdict::NotPersuasive => false,
                        Verdict::RoundExhausted => return Level::Exhausted,
                    };
                    seen.push((scheme, v));
                    v
                }
            };
            keep[slot] = verdict;
        }
        if !keep.contains(&true) {
            return Level::Failed;
        }
        let mut flags = keep.into_iter();
        self.live.retain(|_| flags.next().unwrap_or(false));
        self.filters += 1;
        Level::Passed
    }
}

/// Runs the order search to the horizon.
///
/// Phase I halves `U̲` from `1/2` until some live order's `π^(r,U̲)` is
/// persuasive (stopping below `1/T²`). Phase II refines `[L, R] = [U̲, 2U̲]`
/// on grids of step `εL`, with `ε` squaring each iteration, until
/// `R − L < 1/T`. The first surviving order's `π^(r,L)` is then played for
/// the remaining rounds. If the horizon runs out during exploration the most
/// recently verified persuasive scheme is committed instead.
pub fn run_loglog_search(env: &mut Environment) -> Result<LogLogReport, PolicyError> {
    let m = env.num_states();
    if m > PERMUTATION_CAP {
        return Err(PolicyError::PermutationCapExceeded {
            m,
            cap: PERMUTATION_CAP,
        });
    }
    let horizon = env.horizon() as f64;
    let mut tracker = Tracker::new(env, &["phase1", "phase2", "exploit"]);
    let mut search = Search {
        inst: env.instance_for_constructions().clone(),
        live: Ranking::all(m),
        tracker: &mut tracker,
        filters: 0,
    };
    let mut intervals = Vec::new();
    let mut exhausted = false;

    let floor = 1.0 / (horizon * horizon);
    let mut lower_bound = 0.5;
    let phase1_lower = loop {
        if lower_bound < floor {
            break None;
        }
        match search.test_level(env, lower_bound, PHASE_ONE) {
            Level::Passed => break Some(lower_bound),
            Level::Failed => lower_bound /= 2.0,
            Level::Exhausted => {
                exhausted = true;
                break None;
            }
        }
    };

    let mut committed_level = None;
    if let Some(start) = phase1_lower {
        let (mut lo, mut hi, mut delta) = (start, 2.0 * start, 1.0f64);
        'refine: while hi - lo >= 1.0 / horizon {
            let eps = delta / 2.0;
            if eps * lo <= 0.0 {
                break;
            }
            let levels = ((hi - lo) / (eps * lo)).floor() as u64;
            intervals.push(IntervalStep {
                lower: lo,
                upper: hi,
                eps,
                levels,
            });
            let mut failed = None;
            for level in 1..=levels {
                let target = lo + level as f64 * eps * lo;
                match search.test_level(env, target, PHASE_TWO) {
                    Level::Passed => {}
                    Level::Failed => {
                        failed = Some(level);
                        break;
                    }
                    Level::Exhausted => {
                        exhausted = true;
                        break 'refine;
                    }
                }
            }
            match failed {
                Some(level) => {
                    hi = lo + level as f64 * eps * lo;
                    lo += (level - 1) as f64 * eps * lo;
                }
                None => lo += levels as f64 * eps * lo,
            }
            delta = eps * eps;
        }
        if !exhausted {
            committed_level = Some(lo);
        }
    }

    let Search {
        inst, live, filters, ..
    } = search;
    let committed = match committed_level {
        Some(level) => make_rank_scheme(&inst, &live[0], level)
            .expect("the committed level was verified for every surviving order"),
        None => tracker
            .last_persuasive()
            .cloned()
            .unwrap_or_else(|| DirectScheme::zeros(m)),
    };
    tracker.exploit(env, &committed, EXPLOIT);
    let trace = tracker.finish(env, PolicyKind::LogLog, committed, !exhausted, 0);
    Ok(LogLogReport {
        trace,
        diagnostics: LogLogDiagnostics {
            phase1_lower,
            intervals,
            surviving: live,
            filters,
            committed_level,
        },
    })
}
