//! Linear maximization over a convex region known only through a membership oracle.
//!
//! The region is `K ∩ F`: `K` is a known polytope (box bounds plus explicit
//! linear inequalities) and `F` is an unknown convex set answered by the
//! oracle. Given an interior point `x0` with `B(x0, r) ⊆ K ∩ F ⊆ B(x0, R)`,
//! [`maximize`] runs an outer-approximation cutting-plane loop:
//!
//! 1. maximize the objective over `K` intersected with the cuts learned so far;
//! 2. query the optimum `x_k`; if it is a member, it is optimal;
//! 3. otherwise bisect `[x0, x_k]` to a boundary point. The inside end is a
//!    verified member, and `c·x_k` bounds the optimum, so the loop stops once
//!    the gap is at most `ε`;
//! 4. otherwise fit a supporting plane of `F` through `d` boundary points
//!    found by bisecting rays that fan out around the first one, shift it
//!    outward by the fitting error, and add it as a cut.
//!
//! Bisection runs to `tol = r·ε/(4R)`. A boundary point is then off by at
//! most `tol` along its ray. A fitted plane tilts by at most
//! `tol/σ`, where `σ` is the spread of the fitted points, so its offset across
//! the region is off by at most `tol·D/σ`. The outward shift covers both, so
//! cuts never remove feasible points, and the remaining objective loss is
//! `O(tol·‖c‖·R/r) ≤ ε`.
//!
//! Near a corner of `K` the fanned rays land close together, `σ` is small and
//! the shifted plane may no longer separate `x_k`. The bracket is then
//! tightened by a factor of 1000 and the plane refitted, down to a tolerance
//! of `1e-15`. If no refit separates `x_k`, the run reports
//! [`LpStatus::Stalled`] with the best verified point.
//!
//! Queries are capped by [`query_budget`], `C·d²·ln³(dR/(εδr))` with `C = 1`
//! and natural log.

mod explicit;
mod separation;

pub use separation::{separation_from_membership, Separation};

use thiserror::Error;

use separation::{bisect, fit_cut, Counter, Stop};

/// Constant `C` in the query budget `C·d²·ln³(dR/(εδr))`.
pub const BUDGET_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("oracle aborted: {0}")]
pub struct OracleAbort(pub String);

/// A membership predicate for the unknown convex set.
pub trait MembershipOracle {
    fn is_member(&mut self, x: &[f64]) -> Result<bool, OracleAbort>;
}

impl<F: FnMut(&[f64]) -> bool> MembershipOracle for F {
    fn is_member(&mut self, x: &[f64]) -> Result<bool, OracleAbort> {
        Ok(self(x))
    }
}

/// `{x : normal·x ≤ offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    /// `normal·x − offset`; positive outside.
    pub fn excess(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.excess(x) <= tol
    }
}

/// Exact halfspace oracle `{x : normal·x ≥ offset}`, for debugging and tests.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceOracle {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl MembershipOracle for HalfspaceOracle {
    fn is_member(&mut self, x: &[f64]) -> Result<bool, OracleAbort> {
        Ok(dot(&self.normal, x) >= self.offset)
    }
}

/// Box bounds plus explicit inequalities. Coordinates with `lower == upper` are pinned.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownRegion {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub inequalities: Vec<Halfspace>,
}

impl KnownRegion {
    pub fn unit_box(dim: usize) -> Self {
        Self {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
            inequalities: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn free_coordinates(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.upper[i] > self.lower[i]).collect()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *v >= lo - tol && *v <= hi + tol)
            && self.inequalities.iter().all(|h| h.contains(x, tol))
    }

    /// Largest `t ≥ 0` with `x + t·dir` in the region.
    fn max_step(&self, x: &[f64], dir: &[f64]) -> f64 {
        let mut t = f64::INFINITY;
        for i in 0..self.dim() {
            if dir[i] > 0.0 {
                t = t.min((self.upper[i] - x[i]) / dir[i]);
            } else if dir[i] < 0.0 {
                t = t.min((self.lower[i] - x[i]) / dir[i]);
            }
        }
        for h in &self.inequalities {
            let rate = dot(&h.normal, dir);
            if rate > 0.0 {
                t = t.min((h.offset - dot(&h.normal, x)) / rate);
            }
        }
        t.max(0.0)
    }

    fn clamp(&self, x: &mut [f64]) {
        for i in 0..self.dim() {
            x[i] = x[i].clamp(self.lower[i], self.upper[i]);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpQuery {
    pub objective: Vec<f64>,
    pub known_region: KnownRegion,
    pub interior_point: Vec<f64>,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub precision: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    /// The gap between the returned point and the outer approximation is at most `ε`.
    Converged,
    /// The query budget or iteration cap ran out first.
    BudgetExceeded,
    /// The oracle rejected the interior point.
    InteriorRejected,
    /// The oracle aborted (for a round-consuming oracle: the horizon ran out).
    OracleAborted,
    /// A learned cut failed to separate the current optimum.
    Stalled,
    /// The explicit LP over the outer approximation could not be solved.
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    /// The best point the oracle confirmed as a member (the interior point at worst).
    pub point: Vec<f64>,
    pub value: f64,
    /// Objective value of the last outer approximation.
    pub upper_bound: f64,
    pub oracle_queries: u64,
    pub succeeded: bool,
    pub status: LpStatus,
    pub cuts: Vec<Halfspace>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("{field} has length {found}, expected {expected}")]
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("radii must satisfy 0 < inner ≤ outer, got inner {inner} and outer {outer}")]
    InvalidRadii { inner: f64, outer: f64 },
    #[error("{name} must lie in (0, 1), got {value}")]
    InvalidTolerance { name: &'static str, value: f64 },
    #[error("{0} contains a non-finite value")]
    NonFinite(&'static str),
    #[error("box bounds are inverted at coordinate {0}")]
    InvertedBounds(usize),
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Finest bisection tolerance used when refitting a cut.
const MIN_FIT_TOL: f64 = 1e-15;
/// Smallest violation a cut must show at the candidate to move the explicit LP.
const MIN_SEPARATION: f64 = 1e-8;

/// Query budget `C·d²·ln³(dR/(εδr))`.
pub fn query_budget(dim: usize, outer: f64, precision: f64, confidence: f64, inner: f64) -> u64 {
    let d = dim.max(1) as f64;
    let ratio = (d * outer / (precision * confidence * inner)).max(std::f64::consts::E);
    (BUDGET_CONSTANT * d * d * ratio.ln().powi(3)).ceil() as u64
}

/// Bisection tolerance `r·ε/(4R)`, floored at `1e-15`.
pub fn bisection_tolerance(inner: f64, outer: f64, precision: f64) -> f64 {
    (inner * precision / (4.0 * outer)).max(1e-15)
}

fn validate(q: &LpQuery) -> Result<(), LpError> {
    let dim = q.objective.len();
    for (field, len) in [
        ("interior_point", q.interior_point.len()),
        ("lower", q.known_region.lower.len()),
        ("upper", q.known_region.upper.len()),
    ] {
        if len != dim {
            return Err(LpError::DimensionMismatch {
                field,
                expected: dim,
                found: len,
            });
        }
    }
    if let Some(h) = q.known_region.inequalities.iter().find(|h| h.normal.len() != dim) {
        return Err(LpError::DimensionMismatch {
            field: "inequality",
            expected: dim,
            found: h.normal.len(),
        });
    }
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    if !finite(&q.objective) {
        return Err(LpError::NonFinite("objective"));
    }
    if !finite(&q.interior_point) {
        return Err(LpError::NonFinite("interior_point"));
    }
    if !finite(&q.known_region.lower) || !finite(&q.known_region.upper) {
        return Err(LpError::NonFinite("box bounds"));
    }
    if let Some(i) = (0..dim).find(|&i| q.known_region.lower[i] > q.known_region.upper[i]) {
        return Err(LpError::InvertedBounds(i));
    }
    if !(q.inner_radius > 0.0 && q.inner_radius <= q.outer_radius && q.outer_radius.is_finite()) {
        return Err(LpError::InvalidRadii {
            inner: q.inner_radius,
            outer: q.outer_radius,
        });
    }
    for (name, value) in [("precision", q.precision), ("confidence", q.confidence)] {
        if !(value > 0.0 && value < 1.0) {
            return Err(LpError::InvalidTolerance { name, value });
        }
    }
    Ok(())
}

/// Maximizes `objective·x` over the known region intersected with the oracle's set.
pub fn maximize<O: MembershipOracle + ?Sized>(
    q: &LpQuery,
    oracle: &mut O,
) -> Result<LpResult, LpError> {
    validate(q)?;
    let dim = q.objective.len();
    let budget = query_budget(dim, q.outer_radius, q.precision, q.confidence, q.inner_radius);
    let tol = bisection_tolerance(q.inner_radius, q.outer_radius, q.precision);
    let region = &q.known_region;
    let free = region.free_coordinates();
    let c = &q.objective;
    let mut counter = Counter::new(oracle, budget);
    let x0 = q.interior_point.clone();

    let mut best = x0.clone();
    let mut best_value = dot(c, &x0);
    let mut upper_bound = f64::INFINITY;
    let mut cuts: Vec<Halfspace> = Vec::new();

    let status = 'run: {
        match counter.ask(&x0) {
            Ok(true) => {}
            Ok(false) => break 'run LpStatus::InteriorRejected,
            Err(stop) => break 'run stop.status(),
        }
        if free.is_empty() {
            upper_bound = best_value;
            break 'run LpStatus::Converged;
        }
        let box_diameter = free
            .iter()
            .map(|&i| (region.upper[i] - region.lower[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        let diameter = box_diameter.min(2.0 * q.outer_radius);
        let max_iterations = 60 * free.len() + 60;
        for _ in 0..max_iterations {
            let Some(candidate) = explicit::maximize_outer(c, region, &free, &cuts, &x0) else {
                break 'run LpStatus::NumericalFailure;
            };
            upper_bound = dot(c, &candidate);
            if upper_bound - best_value <= q.precision {
                break 'run LpStatus::Converged;
            }
            match counter.ask(&candidate) {
                Ok(true) => {
                    best_value = upper_bound;
                    best = candidate;
                    break 'run LpStatus::Converged;
                }
                Ok(false) => {}
                Err(stop) => break 'run stop.status(),
            }
            let (inside, outside) = match bisect(&mut counter, &x0, &candidate, tol) {
                Ok(ends) => ends,
                Err(stop) => break 'run stop.status(),
            };
            if dot(c, &inside) > best_value {
                best_value = dot(c, &inside);
                best = inside.clone();
            }
            if upper_bound - best_value <= q.precision {
                break 'run LpStatus::Converged;
            }
            // A cut that misses the candidate is refitted from a tighter bracket,
            // which shrinks its outward margin.
            let (mut inside, mut outside, mut fit_tol) = (inside, outside, tol);
            let cut = loop {
                let cut = match fit_cut(&mut counter, region, &free, &x0, &inside, &outside, fit_tol, diameter) {
                    Ok(Some(cut)) => cut,
                    Ok(None) => naive_cut(&outside, &candidate),
                    Err(stop) => break 'run stop.status(),
                };
                if cut.excess(&candidate) > MIN_SEPARATION || fit_tol <= MIN_FIT_TOL {
                    break cut;
                }
                fit_tol = (fit_tol * 1e-3).max(MIN_FIT_TOL);
                (inside, outside) = match bisect(&mut counter, &inside, &outside, fit_tol) {
                    Ok(ends) => ends,
                    Err(stop) => break 'run stop.status(),
                };
                if dot(c, &inside) > best_value {
                    best_value = dot(c, &inside);
                    best = inside.clone();
                }
            };
            if cut.excess(&candidate) <= MIN_SEPARATION {
                break 'run LpStatus::Stalled;
            }
            cuts.push(cut);
        }
        LpStatus::BudgetExceeded
    };

    debug_assert!(region.contains(&best, 1e-9));
    Ok(LpResult {
        value: best_value,
        point: best,
        upper_bound,
        oracle_queries: counter.queries(),
        succeeded: status == LpStatus::Converged,
        status,
        cuts,
    })
}

/// Cut through `boundary` with normal toward the rejected `candidate`.
fn naive_cut(boundary: &[f64], candidate: &[f64]) -> Halfspace {
    let normal: Vec<f64> = candidate.iter().zip(boundary).map(|(y, b)| y - b).collect();
    let offset = dot(&normal, boundary);
    Halfspace { normal, offset }
}

impl Stop {
    fn status(&self) -> LpStatus {
        match self {
            Stop::Abort(_) => LpStatus::OracleAborted,
            Stop::Budget => LpStatus::BudgetExceeded,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box_query(objective: Vec<f64>, x0: Vec<f64>, r: f64) -> LpQuery {
        let dim = objective.len();
        LpQuery {
            objective,
            known_region: KnownRegion::unit_box(dim),
            interior_point: x0,
            inner_radius: r,
            outer_radius: (dim as f64).sqrt(),
            precision: 1e-6,
            confidence: 1e-6,
        }
    }

    #[test]
    fn halfspace_example() {
        let q = box_query(vec![0.5, 0.5], vec![0.6, 0.25], 0.01);
        let mut oracle = HalfspaceOracle {
            normal: vec![1.0, -2.0],
            offset: 0.0,
        };
        let res = maximize(&q, &mut oracle).unwrap();
        assert!(res.succeeded, "{res:?}");
        assert!(res.value >= 0.75 - 1e-6);
        assert!(res.point[0] - 2.0 * res.point[1] >= 0.0);
        assert!(res.oracle_queries <= query_budget(2, 2f64.sqrt(), 1e-6, 1e-6, 0.01));
        for cut in &res.cuts {
            assert!(cut.contains(&[1.0, 0.5], 0.0));
        }
    }

    #[test]
    fn never_binding_constraint_returns_box_vertex() {
        let q = box_query(vec![0.2, -0.3, 0.5], vec![0.5, 0.5, 0.5], 0.1);
        let mut always = |_: &[f64]| true;
        let res = maximize(&q, &mut always).unwrap();
        assert!(res.succeeded);
        assert!((res.value - 0.7).abs() < 1e-6);
        assert_eq!(res.oracle_queries, 2);
    }

    #[test]
    fn ball_region_stays_in_ball() {
        let x0 = vec![0.5, 0.5];
        let r = 0.05;
        let centre = x0.clone();
        let mut ball = move |x: &[f64]| distance(x, &centre) <= r;
        let q = box_query(vec![1.0, 1.0], x0.clone(), r);
        let res = maximize(&q, &mut ball).unwrap();
        assert!(distance(&res.point, &x0) <= r + 1e-12);
        assert!(res.value >= 1.0);
    }

    #[test]
    fn rejected_interior_point() {
        let q = box_query(vec![1.0], vec![0.5], 0.1);
        let mut never = |_: &[f64]| false;
        let res = maximize(&q, &mut never).unwrap();
        assert_eq!(res.status, LpStatus::InteriorRejected);
        assert!(!res.succeeded);
        assert_eq!(res.point, vec![0.5]);
    }

    #[test]
    fn aborting_oracle_is_reported() {
        struct Abort;
        impl MembershipOracle for Abort {
            fn is_member(&mut self, _: &[f64]) -> Result<bool, OracleAbort> {
                Err(OracleAbort("no rounds left".into()))
            }
        }
        let q = box_query(vec![1.0], vec![0.5], 0.1);
        let res = maximize(&q, &mut Abort).unwrap();
        assert_eq!(res.status, LpStatus::OracleAborted);
    }

    #[test]
    fn malformed_queries_are_rejected() {
        let mut q = box_query(vec![1.0, 1.0], vec![0.5], 0.1);
        assert!(matches!(
            maximize(&q, &mut |_: &[f64]| true),
            Err(LpError::DimensionMismatch { .. })
        ));
        q.interior_point = vec![0.5, 0.5];
        q.inner_radius = 10.0;
        assert!(matches!(
            maximize(&q, &mut |_: &[f64]| true),
            Err(LpError::InvalidRadii { .. })
        ));
        q.inner_radius = 0.1;
        q.precision = 0.0;
        assert!(matches!(
            maximize(&q, &mut |_: &[f64]| true),
            Err(LpError::InvalidTolerance { .. })
        ));
    }

    #[test]
    fn pinned_coordinates_stay_pinned() {
        let mut q = box_query(vec![0.5, 0.5, 0.9], vec![0.6, 0.25, 0.0], 0.01);
        q.known_region.upper[2] = 0.0;
        let mut oracle = HalfspaceOracle {
            normal: vec![1.0, -2.0, 5.0],
            offset: 0.0,
        };
        let res = maximize(&q, &mut oracle).unwrap();
        assert!(res.succeeded);
        assert_eq!(res.point[2], 0.0);
        assert!((res.value - 0.75).abs() <= 1e-6);
    }

    #[test]
    fn budget_grows_polylogarithmically() {
        let small = query_budget(3, 1.7, 1e-3, 1e-3, 1e-3);
        let large = query_budget(3, 1.7, 1e-6, 1e-6, 1e-6);
        assert!(large > small);
        assert!(large < 20 * small);
        assert_eq!(bisection_tolerance(0.01, 1.0, 1e-6), 0.01 * 1e-6 / 4.0);
    }
}
