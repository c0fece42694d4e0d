//! Randomized property batteries. Each check records the first failing
//! input it meets as a counterexample.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::env::{Environment, Verdict};
use crate::hindsight::{solve_bruteforce, solve_bruteforce_restricted, solve_threshold};
use crate::lp::{self, query_budget, HalfspaceOracle, KnownRegion, LpQuery, LpStatus};
use crate::model::{
    best_response, direct_responses, expected_platform_utility, expected_platform_utility_general, ic_slack,
    is_persuasive, make_interior_candidate, make_rank_scheme, posterior, recommend_probability,
    recommended_value, GeneralScheme, Instance, Ranking,
};
use crate::policies::{run_loglog_search, run_poly_search};
use crate::reductions::{check_bayes_plausible, decompose_binary_support};
use crate::rng::{derive_labeled, rng_from_seed};
use crate::sampling::{
    random_direct_scheme, random_discrete_distribution, random_instance, random_simplex, InstanceFamily,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub trials: u64,
    /// Summary on success, the first counterexample on failure.
    pub detail: String,
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} {} ({} trials): {}", self.name, self.trials, self.detail)
    }
}

struct Tally {
    name: &'static str,
    trials: u64,
    failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            trials: 0,
            failure: None,
        }
    }

    fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(witness());
        }
    }

    fn fail(&mut self, witness: String) {
        self.check(false, || witness);
    }

    fn finish(self, summary: impl Into<String>) -> PropertyResult {
        PropertyResult {
            name: self.name.to_string(),
            passed: self.failure.is_none(),
            trials: self.trials,
            detail: self.failure.unwrap_or_else(|| summary.into()),
        }
    }
}

fn describe(inst: &Instance) -> String {
    format!(
        "prior {:?}, omega {:?}, value {:?}",
        inst.prior(),
        inst.omega(),
        inst.platform_value()
    )
}

/// A random instance with some variety in beliefs and platform values.
fn varied_instance(rng: &mut ChaCha8Rng, m: usize) -> Instance {
    let mut family = InstanceFamily::baseline(m);
    family.misspecified_belief = rng.gen_bool(0.5);
    if rng.gen_bool(0.5) {
        family.value_range = Some((0.1, 1.0));
    }
    if rng.gen_bool(0.3) {
        family.omega_range = (1e-3, 10.0);
    }
    random_instance(rng, &family)
}

// ---- model -------------------------------------------------------------

/// `Σ ω(i)π(i) ≥ 0` agrees with the best response to the signal-1 posterior.
pub fn persuasion_equivalence(seed: u64, trials: u64) -> PropertyResult {
    let mut rng = rng_from_seed(seed);
    let mut tally = Tally::new("persuasion_equivalence");
    while tally.trials < trials {
        let m = rng.gen_range(2..=6);
        let inst = varied_instance(&mut rng, m);
        let scheme = random_direct_scheme(&mut rng, m);
        let Ok(post) = posterior(&inst, &scheme.to_general(), 1) else {
            continue;
        };
        let by_posterior = best_response(&inst, &post).is_accept();
        let by_slack = is_persuasive(&inst, &scheme);
        tally.check(by_posterior == by_slack, || {
            format!("{}; scheme {:?}", describe(&inst), scheme.probs())
        });
    }
    tally.finish("posterior best response matches the weighted-gap test")
}

/// `π^(r,u)` has recommended value `u` and a 1…1,f,0…0 profile along `r`.
pub fn rank_scheme_shape(seed: u64, trials: u64) -> PropertyResult {
    let mut rng = rng_from_seed(seed);
    let mut tally = Tally::new("rank_scheme_shape");
    for _ in 0..trials {
        let m = rng.gen_range(2..=6);
        let inst = varied_instance(&mut rng, m);
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut rng);
        let rank = Ranking::new(order.clone()).expect("shuffled identity is a permutation");
        let target = rng.gen::<f64>() * inst.total_value_weight();
        let Ok(scheme) = make_rank_scheme(&inst, &rank, target) else {
            tally.fail(format!("{}; target {target} rejected", describe(&inst)));
            continue;
        };
        let along: Vec<f64> = order.iter().map(|&s| scheme.probs()[s]).collect();
        let fractional = along.iter().filter(|p| **p > 0.0 && **p < 1.0).count();
        let monotone = along.windows(2).all(|w| w[0] >= w[1]);
        let value_ok = (recommended_value(&inst, &scheme) - target).abs() <= 1e-12;
        tally.check(value_ok && monotone && fractional <= 1, || {
            format!("{}; order {order:?}, target {target}, scheme {:?}", describe(&inst), scheme.probs())
        });
    }
    tally.finish("value matches the target and entries fall along the order")
}

/// Persuasive direct schemes earn `Σ λvπ`, and signal 0 is declined.
pub fn direct_utility_identity(seed: u64, trials: u64) -> PropertyResult {
    let mut rng = rng_from_seed(seed);
    let mut tally = Tally::new("direct_utility_identity");
    while tally.trials < trials {
        let m = rng.gen_range(2..=6);
        let inst = varied_instance(&mut rng, m);
        let scheme = random_direct_scheme(&mut rng, m);
        let [on_zero, _] = direct_responses(&inst, &scheme);
        let u = expected_platform_utility(&inst, &scheme);
        if is_persuasive(&inst, &scheme) {
            let ok = !on_zero.is_accept() && (u - recommended_value(&inst, &scheme)).abs() <= 1e-12;
            tally.check(ok, || format!("{}; scheme {:?}, utility {u}", describe(&inst), scheme.probs()));
        } else if !on_zero.is_accept() {
            tally.check(u == 0.0, || format!("{}; scheme {:?}, utility {u}", describe(&inst), scheme.probs()));
        }
    }
    tally.finish("persuasive schemes earn their recommended value, others earn nothing")
}

/// No scheme with more signals beats the hindsight optimum.
pub fn general_scheme_bound(seed: u64, trials: u64) -> PropertyResult {
    let mut rng = rng_from_seed(seed);
    let mut tally = Tally::new("general_scheme_bound");
    for _ in 0..trials {
        let m = rng.gen_range(2..=5);
        let inst = varied_instance(&mut rng, m);
        let signals = rng.gen_range(2..=4);
        let table: Vec<Vec<f64>> = (0..m).map(|_| random_simplex(&mut rng, signals)).collect();
        let scheme = GeneralScheme::new(table.clone()).expect("rows lie on the simplex");
        let u = expected_platform_utility_general(&inst, &scheme);
        let best = solve_threshold(&inst).value;
        tally.check(u <= best + 1e-12, || {
            format!("{}; table {table:?} earns {u} > {best}", describe(&inst))
        });
    }
    tally.finish("multi-signal schemes stay below the direct optimum")
}

// ---- oracle ------------------------------------------------------------

/// The greedy threshold solution matches vertex enumeration.
pub fn oracle_agreement(seed: u64, per_m: u64, sizes: &[usize]) -> PropertyResult {
    let mut rng = rng_from_seed(seed);
    let mut tally = Tally::new("oracle_agreement");
    let mut worst: f64 = 0.0;
    for &m in sizes {
        for _ in 0..per_m {
            let inst = varied_instance(&mut rng, m);
            let greedy = solve_threshold(&inst);
            let exact = solve_bruteforce(&inst).expect("sizes stay within the enumeration cap");
            let gap = (greedy.value - exact.value).abs();
            worst = worst.max(gap);
            tally.check(gap <= 1e-9, || {
                format!("{}; threshold {} vs enumeration {}", describe(&inst), greedy.value, exact.value)
            });
        }
    }
    tally.finish(format!("largest gap {worst:e}"))
}

/// The optimum is persuasive, has at most one fractional entry, and binds
/// the constraint when it has one.
pub fn oracle_structure(seed: u64, trials: u64) -> PropertyResult {
    let mut rng = rng_from_seed(seed);
    let mut tally = Tally::new("oracle_structure");
    for _ in 0..trials {
        let m = rng.gen_range(2..=8);
        let inst = varied_instance(&mut rng, m);
        let sol = solve_threshold(&inst);
        let probs = sol.scheme.probs();
        let fractional = probs.iter().filter(|p| **p > 0.0 && **p < 1.0).count();
        let scale: f64 = inst.omega().iter().map(|w| w.abs()).sum();
        let slack = ic_slack(&inst, &sol.scheme);
        let tight = fractional == 0 || slack.abs() <= 1e-9 * scale;
        let ok = is_persuasive(&inst, &sol.scheme) && fractional <= 1 && tight;
        tally.check(ok, || format!("{}; optimum {probs:?}, slack {slack:e}", describe(&inst)));
    }
    tally.finish("persuasive, at most one fractional entry, binding when fractional")
}

/// Rescaling the utility gap by a positive factor leaves the optimum unchanged.
pub fn oracle_scale_invariance(seed: u64, trials: u64) -> PropertyResult {
    let mut rng = rng_from_seed(seed);
    let mut tally = Tally::new("oracle_scale_invariance");
    for _ in 0..trials {
        let m = rng.gen_range(2..=6);
        let inst = varied_instance(&mut rng, m);
        let c = 10f64.powf(rng.gen_range(-3.0..3.0));
        let gap: Vec<f64> = inst.utility_gap().iter().map(|d| d * c).collect();
        let scaled = Instance::builder(inst.prior().to_vec(), gap)
            .user_belief(inst.user_belief().to_vec())
            .platform_value(inst.platform_value().to_vec())
            .build();
        let Ok(scaled) = scaled else {
            continue;
        };
        let a = solve_threshold(&inst).value;
        let b = solve_threshold(&scaled).value;
        tally.check((a - b).abs() <= 1e-9, || format!("{}; factor {c}: {a} vs {b}", describe(&inst)));
    }
    tally.finish("optimum unchanged under positive rescaling")
}

// ---- checkpersu --------------------------------------------------------

/// Probe verdicts agree with the ground-truth persuasiveness test.
pub fn checkpersu_soundness(seed: u64, calls: u64) -> PropertyResult {
    let mut rng = rng_from_seed(seed);
    let mut tally = Tally::new("checkpersu_soundness");
    while tally.trials < calls {
        let m = rng.gen_range(2..=6);
        let inst = varied_instance(&mut rng, m);
        let mut env = Environment::new(inst.clone(), 1_000_000, rng.gen()).expect("valid environment");
        for _ in 0..10 {
            let scheme = random_direct_scheme(&mut rng, m);
            if recommend_probability(&inst, &scheme) < 0.01 {
                continue;
            }
            let res = env.check_persu(&scheme);
            if res.verdict == Verdict::RoundExhausted {
                break;
            }
            let truth = is_persuasive(&inst, &scheme);
            tally.check((res.verdict == Verdict::Persuasive) == truth, || {
                format!("{}; scheme {:?}, verdict {:?}", describe(&inst), scheme.probs(), res.verdict)
            });
        }
    }
    tally.finish("every verdict matched")
}

/// Mean probe cost stays within `1/Σλπ` plus three standard errors.
pub fn checkpersu_cost(seed: u64, schemes: u64, repeats: u64) -> PropertyResult {
    let mut rng = rng_from_seed(seed);
    let mut tally = Tally::new("checkpersu_cost");
    let mut worst_ratio: f64 = 0.0;
    while tally.trials < schemes {
        let m = rng.gen_range(2..=6);
        let inst = varied_instance(&mut rng, m);
        let scheme = random_direct_scheme(&mut rng, m);
        let p = recommend_probability(&inst, &scheme);
        if p < 0.05 {
            continue;
        }
        let mut env = Environment::new(inst.clone(), u64::MAX / 2, rng.gen()).expect("valid environment");
        let costs: Vec<f64> = (0..repeats).map(|_| env.check_persu(&scheme).rounds_used as f64).collect();
        let n = costs.len() as f64;
        let mean = costs.iter().sum::<f64>() / n;
        let sd = (costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let bound = 1.0 / p + 3.0 * sd / n.sqrt();
        worst_ratio = worst_ratio.max(mean * p);
        tally.check(mean <= bound, || {
            format!("{}; scheme {:?}: mean cost {mean} > {bound}", describe(&inst), scheme.probs())
        });
    }
    tally.finish(format!("largest mean·Σλπ {worst_ratio:.4}"))
}

// ---- decompose ---------------------------------------------------------

/// Random distributions decompose, and the mixture is re-verified independently.
pub fn decomposition_roundtrip(seed: u64, trials: u64) -> PropertyResult {
    let mut rng = rng_from_seed(seed);
    let mut tally = Tally::new("decomposition_roundtrip");
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (values, probs) = random_discrete_distribution(&mut rng, 8);
        let witness = || format!("values {values:?}, probs {probs:?}");
        let d = match decompose_binary_support(&values, &probs) {
            Ok(d) => d,
            Err(e) => {
                tally.fail(format!("{}: {e}", witness()));
                continue;
            }
        };
        let mean: f64 = values.iter().zip(&probs).map(|(x, p)| x * p).sum();
        let mut err = (d.weights.iter().sum::<f64>() - 1.0).abs();
        for c in &d.components {
            err = err.max((c.mean() - mean).abs());
            if c.values.len() > 2 || !check_bayes_plausible(mean, &c.values, &c.probs).unwrap_or(false) {
                err = f64::INFINITY;
            }
        }
        for (k, &x) in values.iter().enumerate() {
            let mass: f64 = d
                .components
                .iter()
                .zip(&d.weights)
                .map(|(c, w)| w * c.values.iter().zip(&c.probs).filter(|(v, _)| **v == x).map(|(_, q)| q).sum::<f64>())
                .sum();
            err = err.max((mass - probs[k]).abs());
        }
        worst = worst.max(err);
        tally.check(err <= 1e-9 && d.weights.iter().all(|&w| w >= 0.0), witness);
    }
    tally.finish(format!("largest error {worst:e}"))
}

/// The three-point example from the documentation.
pub fn decomposition_example() -> PropertyResult {
    let mut tally = Tally::new("decomposition_example");
    match decompose_binary_support(&[0.1, 0.6, 0.9], &[0.5, 0.3, 0.2]) {
        Ok(d) => {
            let ok = d.components.len() == 2
                && (d.weights[0] - 0.15 / 0.31).abs() <= 1e-12
                && (d.weights[1] - 0.16 / 0.31).abs() <= 1e-12
                && (d.components[0].probs[1] - 0.62).abs() <= 1e-12
                && (d.components[1].probs[1] - 0.3875).abs() <= 1e-12;
            tally.check(ok, || format!("{d:?}"));
        }
        Err(e) => tally.fail(e.to_string()),
    }
    tally.finish("weights 0.15/0.31 and 0.16/0.31")
}

// ---- solver ------------------------------------------------------------

/// A restricted persuasion LP with an exactly known interior ball.
struct SolverProblem {
    inst: Instance,
    retained: Vec<usize>,
    query: LpQuery,
}

fn solver_problem(rng: &mut ChaCha8Rng, m: usize, tolerance: f64) -> SolverProblem {
    let inst = random_instance(rng, &InstanceFamily::baseline(m));
    let omega = inst.omega();
    let anchor = (0..m).max_by(|&a, &b| omega[a].total_cmp(&omega[b])).expect("m ≥ 2");
    let mut retained: Vec<usize> = (0..m).filter(|&k| k == anchor || rng.gen_bool(0.7)).collect();
    retained.sort_unstable();
    let spread: f64 = retained.iter().filter(|&&k| k != anchor).map(|&k| omega[k].abs()).sum();
    let small = if spread > 0.0 { (omega[anchor] / (4.0 * spread)).min(0.01) } else { 0.01 };
    let weights = inst.value_weights();
    let mut x0 = vec![0.0; m];
    for &k in &retained {
        x0[k] = small;
    }
    x0[anchor] = 0.5;
    let norm_on = |v: &[f64]| retained.iter().map(|&k| v[k] * v[k]).sum::<f64>().sqrt();
    let floor = 0.5 * lp::dot(&weights, &x0);
    let mut radius = retained
        .iter()
        .map(|&k| x0[k].min(1.0 - x0[k]))
        .fold(f64::INFINITY, f64::min);
    radius = radius.min(lp::dot(omega, &x0) / norm_on(omega));
    radius = radius.min((lp::dot(&weights, &x0) - floor) / norm_on(&weights));
    let mut upper = vec![0.0; m];
    for &k in &retained {
        upper[k] = 1.0;
    }
    let query = LpQuery {
        objective: weights.clone(),
        known_region: KnownRegion {
            lower: vec![0.0; m],
            upper,
            inequalities: vec![lp::Halfspace {
                normal: weights.iter().map(|w| -w).collect(),
                offset: -floor,
            }],
        },
        interior_point: x0,
        inner_radius: 0.99 * radius,
        outer_radius: (m as f64).sqrt(),
        precision: tolerance,
        confidence: tolerance,
    };
    SolverProblem { inst, retained, query }
}

/// The membership-oracle LP against an exact halfspace oracle: value within
/// `ε + 1e-9` of enumeration, queries within budget, and no cut that
/// excludes the true maximizer.
pub fn solver_accuracy(seed: u64, problems: u64, tolerance: f64) -> Vec<PropertyResult> {
    let mut rng = rng_from_seed(seed);
    let mut value = Tally::new("solver_value");
    let mut budget = Tally::new("solver_query_budget");
    let mut cuts = Tally::new("solver_cut_validity");
    let mut worst_gap: f64 = 0.0;
    let mut most_queries: f64 = 0.0;
    for _ in 0..problems {
        let m = rng.gen_range(2..=5);
        let problem = solver_problem(&mut rng, m, tolerance);
        let q = &problem.query;
        let mut oracle = HalfspaceOracle {
            normal: problem.inst.omega().to_vec(),
            offset: 0.0,
        };
        let witness = || format!("{}; retained {:?}", describe(&problem.inst), problem.retained);
        let res = match lp::maximize(q, &mut oracle) {
            Ok(res) => res,
            Err(e) => {
                value.fail(format!("{}: {e}", witness()));
                continue;
            }
        };
        let exact = solve_bruteforce_restricted(&problem.inst, &problem.retained)
            .expect("at most five states");
        let gap = exact.value - res.value;
        worst_gap = worst_gap.max(gap);
        value.check(
            res.status == LpStatus::Converged && gap <= tolerance + 1e-9 && gap >= -1e-9,
            || format!("{}: {:?} value {} vs {}", witness(), res.status, res.value, exact.value),
        );
        let cap = query_budget(m, q.outer_radius, q.precision, q.confidence, q.inner_radius);
        most_queries = most_queries.max(res.oracle_queries as f64 / cap as f64);
        budget.check(res.oracle_queries <= cap, || {
            format!("{}: {} queries > {cap}", witness(), res.oracle_queries)
        });
        let excess = res
            .cuts
            .iter()
            .map(|h| h.excess(exact.scheme.probs()))
            .fold(f64::NEG_INFINITY, f64::max);
        cuts.check(excess <= 1e-9, || format!("{}: a cut excludes the optimum by {excess:e}", witness()));
    }
    vec![
        value.finish(format!("largest shortfall {worst_gap:e}")),
        budget.finish(format!("largest queries/budget {most_queries:.3}")),
        cuts.finish("no cut excluded the maximizer"),
    ]
}

// ---- lemmas ------------------------------------------------------------

/// Invariants of the order search on completed runs. Instances come from
/// `family` with `m` cycling through `sizes`.
pub fn loglog_invariants(
    seed: u64,
    runs: u64,
    sizes: &[usize],
    horizon: u64,
    family: &InstanceFamily,
) -> Vec<PropertyResult> {
    let mut rng = rng_from_seed(seed);
    let mut bracket = Tally::new("loglog_bracket");
    let mut survives = Tally::new("loglog_optimal_order_survives");
    let mut near = Tally::new("loglog_commits_near_optimum");
    let mut shrink = Tally::new("loglog_interval_shrinks");
    let t = horizon as f64;
    for run in 0..runs {
        let family = InstanceFamily {
            m: sizes[run as usize % sizes.len()],
            ..family.clone()
        };
        let inst = random_instance(&mut rng, &family);
        let mut env = Environment::new(inst.clone(), horizon, rng.gen()).expect("valid environment");
        let report = run_loglog_search(&mut env).expect("sizes stay within the permutation cap");
        let d = &report.diagnostics;
        let opt = report.trace.oracle_value;
        if !report.trace.exploration_completed {
            continue;
        }
        let witness = || describe(&inst);
        if let Some(lb) = d.phase1_lower {
            bracket.check(lb <= opt * (1.0 + 1e-12) && opt <= 2.0 * lb * (1.0 + 1e-12), || {
                format!("{}: lower {lb}, optimum {opt}", witness())
            });
        }
        let best = Ranking::by_bang_per_buck(&inst);
        survives.check(d.surviving.contains(&best), || {
            format!("{}: {:?} eliminated", witness(), best.order())
        });
        near.check(report.trace.committed_value >= opt - 1.0 / t, || {
            format!("{}: committed {} vs optimum {opt}", witness(), report.trace.committed_value)
        });
        for step in &d.intervals {
            shrink.check(
                step.upper - step.lower <= (2.0 * step.eps).sqrt() * step.lower * (1.0 + 1e-9),
                || format!("{}: step {step:?}", witness()),
            );
        }
    }
    vec![
        bracket.finish("U̲ ≤ U* ≤ 2U̲"),
        survives.finish("bang-per-buck order always survived"),
        near.finish("committed value within 1/T of the optimum"),
        shrink.finish("R − L ≤ √(2ε)·L at every refinement"),
    ]
}

/// Results of the pair-search invariant checks.
pub struct PolyChecks {
    pub results: Vec<PropertyResult>,
    /// `(regret, within 10/T of the optimum)` per run whose solver succeeded.
    pub solver_runs: Vec<(f64, bool)>,
    /// Regret of every run, grouped by state count.
    pub regrets: Vec<(usize, f64)>,
}

/// Invariants of the pair search: the halving bound, an anchor pair at the
/// largest weighted gap, the retained-state dichotomy, and the interior ball.
pub fn poly_invariants(seed: u64, instances: u64, seeds: u64, sizes: &[usize], horizon: u64) -> PolyChecks {
    let mut rng = rng_from_seed(seed);
    let mut lower = Tally::new("poly_lower_bound");
    let mut anchor = Tally::new("poly_anchor_pair");
    let mut dichotomy = Tally::new("poly_retained_dichotomy");
    let mut ball = Tally::new("poly_interior_ball");
    let mut solver_runs = Vec::new();
    let mut regrets = Vec::new();
    let t = horizon as f64;
    for n in 0..instances {
        let m = sizes[n as usize % sizes.len()];
        let inst = random_instance(&mut rng, &InstanceFamily::baseline(m));
        let omega = inst.omega();
        let top = omega.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mf = m as f64;
        let mut ball_rng = rng_from_seed(derive_labeled(seed, &format!("ball-{n}")));
        for _ in 0..seeds {
            let mut env = Environment::new(inst.clone(), horizon, rng.gen()).expect("valid environment");
            let report = run_poly_search(&mut env);
            let d = &report.diagnostics;
            let opt = report.trace.oracle_value;
            regrets.push((m, report.trace.regret));
            if d.solver_succeeded {
                solver_runs.push((report.trace.regret, report.trace.committed_value >= opt - 10.0 / t));
            }
            let witness = || describe(&inst);
            let Some(lb) = d.phase1_lower else {
                continue;
            };
            if opt >= 1.0 / t {
                lower.check(lb >= opt / (mf * mf) * (1.0 - 1e-12), || {
                    format!("{}: lower {lb}, optimum {opt}", witness())
                });
                anchor.check(d.pairs.iter().any(|&(i, _)| omega[i] == top), || {
                    format!("{}: pairs {:?}", witness(), d.pairs)
                });
            }
            if d.candidates.is_empty() && !report.trace.exploration_completed {
                continue;
            }
            for k in 0..m {
                let kept = d.retained.contains(&k);
                let ok = if kept {
                    omega[k] >= -mf * t * top
                } else {
                    omega[k] < -(mf * t / 3.0) * top
                };
                dichotomy.check(ok, || {
                    format!("{}: state {k} retained={kept} with omega {}", witness(), omega[k])
                });
            }
            for &(i, j) in d.pairs.iter().filter(|&&(i, _)| omega[i] == top) {
                let Ok(center) = make_interior_candidate(&inst, i, j, lb, &d.retained, horizon) else {
                    ball.fail(format!("{}: no interior point for ({i}, {j})", witness()));
                    continue;
                };
                let r = 1.0 / (16.0 * mf * mf * t);
                let dim = d.retained.len();
                let weights = inst.value_weights();
                for _ in 0..200 {
                    let offset = loop {
                        let v: Vec<f64> = (0..dim).map(|_| ball_rng.gen_range(-1.0..1.0)).collect();
                        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                            break v;
                        }
                    };
                    let mut x = center.probs().to_vec();
                    for (slot, &k) in d.retained.iter().enumerate() {
                        x[k] += r * offset[slot];
                    }
                    let in_box = x.iter().all(|p| (0.0..=1.0).contains(p));
                    let slack: f64 = x.iter().zip(omega).map(|(p, w)| p * w).sum();
                    let scale: f64 = x.iter().zip(omega).map(|(p, w)| p * w.abs()).sum();
                    let value: f64 = x.iter().zip(&weights).map(|(p, w)| p * w).sum();
                    let ok = in_box && slack >= -1e-12 * scale && value >= lb / 16.0;
                    ball.check(ok, || format!("{}: pair ({i}, {j}) point {x:?}", witness()));
                }
            }
        }
    }
    let hits = solver_runs.iter().filter(|(_, ok)| *ok).count();
    PolyChecks {
        results: vec![
            lower.finish("U̲ ≥ U*/m² whenever U* ≥ 1/T"),
            anchor.finish("a pair anchored at the largest weighted gap was always found"),
            dichotomy.finish("retained states above −mT·max ω, excluded below −(mT/3)·max ω"),
            ball.finish(format!("interior balls feasible; {hits}/{} solver runs within 10/T", solver_runs.len())),
        ],
        solver_runs,
        regrets,
    }
}

// ---- suites ------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Model,
    Oracle,
    CheckPersu,
    Decompose,
    Solver,
    Lemmas,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Model,
        Suite::Oracle,
        Suite::CheckPersu,
        Suite::Decompose,
        Suite::Solver,
        Suite::Lemmas,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Model => "model",
            Suite::Oracle => "oracle",
            Suite::CheckPersu => "checkpersu",
            Suite::Decompose => "decompose",
            Suite::Solver => "solver",
            Suite::Lemmas => "lemmas",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.to_ascii_lowercase();
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == wanted)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                format!("unknown suite {s:?}; expected one of {}", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub results: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

/// Runs a suite at its default sizes.
pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let sub = |label: &str| derive_labeled(seed, label);
    let results = match suite {
        Suite::Model => vec![
            persuasion_equivalence(sub("equivalence"), 10_000),
            rank_scheme_shape(sub("rank"), 2_000),
            direct_utility_identity(sub("utility"), 2_000),
            general_scheme_bound(sub("general"), 2_000),
        ],
        Suite::Oracle => vec![
            oracle_agreement(sub("agreement"), 200, &[2, 3, 4, 5, 6]),
            oracle_structure(sub("structure"), 2_000),
            oracle_scale_invariance(sub("scale"), 1_000),
        ],
        Suite::CheckPersu => vec![
            checkpersu_soundness(sub("soundness"), 10_000),
            checkpersu_cost(sub("cost"), 30, 400),
        ],
        Suite::Decompose => vec![
            decomposition_example(),
            decomposition_roundtrip(sub("roundtrip"), 1_000),
        ],
        Suite::Solver => solver_accuracy(sub("solver"), 50, 1e-4),
        Suite::Lemmas => {
            let mut out = loglog_invariants(sub("loglog"), 40, &[2, 3], 10_000, &InstanceFamily::baseline(2));
            out.extend(poly_invariants(sub("poly"), 6, 3, &[3, 4], 10_000).results);
            out
        }
    };
    SuiteReport { suite, results }
}
