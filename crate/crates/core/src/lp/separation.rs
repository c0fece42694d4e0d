//! Boundary location by bisection, and cut synthesis from boundary points.

use nalgebra::DMatrix;

use super::{distance, dot, Halfspace, KnownRegion, MembershipOracle, OracleAbort};

pub(super) enum Stop {
    Abort(#[allow(dead_code)] OracleAbort),
    Budget,
}

/// Counts oracle queries and enforces the budget.
pub(super) struct Counter<'a, O: ?Sized> {
    oracle: &'a mut O,
    queries: u64,
    budget: u64,
}

impl<'a, O: MembershipOracle + ?Sized> Counter<'a, O> {
    pub(super) fn new(oracle: &'a mut O, budget: u64) -> Self {
        Self {
            oracle,
            queries: 0,
            budget,
        }
    }

    pub(super) fn queries(&self) -> u64 {
        self.queries
    }

    pub(super) fn ask(&mut self, x: &[f64]) -> Result<bool, Stop> {
        if self.queries >= self.budget {
            return Err(Stop::Budget);
        }
        self.queries += 1;
        self.oracle.is_member(x).map_err(Stop::Abort)
    }
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Bisects `[inside, outside]` until the bracket is shorter than `tol`.
///
/// Uses `⌈log2(|outside − inside| / tol)⌉` queries and returns the bracket ends.
pub(super) fn bisect<O: MembershipOracle + ?Sized>(
    counter: &mut Counter<O>,
    inside: &[f64],
    outside: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>), Stop> {
    let length = distance(inside, outside);
    let (mut lo, mut hi) = (0.0, 1.0);
    while (hi - lo) * length > tol {
        let mid = 0.5 * (lo + hi);
        if counter.ask(&lerp(inside, outside, mid))? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lerp(inside, outside, lo), lerp(inside, outside, hi)))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Separation {
    Inside {
        queries: u64,
    },
    Boundary {
        /// Midpoint of the final bracket.
        boundary: Vec<f64>,
        inside: Vec<f64>,
        outside: Vec<f64>,
        /// Halfspace through `boundary` with normal along `y − boundary`; it cuts away `y`.
        cut: Halfspace,
        queries: u64,
    },
}

/// Queries `y`; if it is not a member, bisects `[x0, y]` to tolerance `tol`.
///
/// The returned cut uses the probe direction as its normal. It separates
/// `y` from `x0`, but it supports the set only when the probe meets the
/// boundary orthogonally; [`super::maximize`] fits its cuts through several
/// boundary points instead.
pub fn separation_from_membership<O: MembershipOracle + ?Sized>(
    oracle: &mut O,
    x0: &[f64],
    y: &[f64],
    tol: f64,
) -> Result<Separation, OracleAbort> {
    let mut counter = Counter::new(oracle, u64::MAX);
    let unwrap = |stop: Stop| match stop {
        Stop::Abort(e) => e,
        Stop::Budget => unreachable!("unbounded budget"),
    };
    if counter.ask(y).map_err(unwrap)? {
        return Ok(Separation::Inside { queries: 1 });
    }
    let (inside, outside) = bisect(&mut counter, x0, y, tol).map_err(unwrap)?;
    let boundary = lerp(&inside, &outside, 0.5);
    let mut normal: Vec<f64> = y.iter().zip(&boundary).map(|(a, b)| a - b).collect();
    let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        normal.iter_mut().for_each(|v| *v /= norm);
    }
    let offset = dot(&normal, &boundary);
    Ok(Separation::Boundary {
        boundary,
        inside,
        outside,
        cut: Halfspace { normal, offset },
        queries: counter.queries(),
    })
}

/// Orthonormal basis of the complement of `dir` in `R^d`.
fn complement_basis(dir: &[f64]) -> Vec<Vec<f64>> {
    let d = dir.len();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut basis: Vec<Vec<f64>> = vec![dir.iter().map(|v| v / norm).collect()];
    for k in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        for b in &basis {
            let proj = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis.remove(0);
    basis
}

/// Fits a supporting plane of the oracle set near the boundary bracket `(inside, outside)`.
///
/// Boundary points come from bisecting rays from `x0` through
/// `boundary + ρ·u` for each direction `u` orthogonal to `boundary − x0`,
/// extended to the edge of the known region. Returns `None` when no usable
/// set of points is found.
#[allow(clippy::too_many_arguments)]
pub(super) fn fit_cut<O: MembershipOracle + ?Sized>(
    counter: &mut Counter<O>,
    region: &KnownRegion,
    free: &[usize],
    x0: &[f64],
    inside: &[f64],
    outside: &[f64],
    tol: f64,
    diameter: f64,
) -> Result<Option<Halfspace>, Stop> {
    let d = free.len();
    let dim = x0.len();
    let restrict = |x: &[f64]| -> Vec<f64> { free.iter().map(|&i| x[i]).collect() };
    let boundary = lerp(inside, outside, 0.5);
    let x0_free = restrict(x0);
    let b_free = restrict(&boundary);
    let dir0: Vec<f64> = b_free.iter().zip(&x0_free).map(|(b, x)| b - x).collect();
    let reach = dir0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if reach == 0.0 {
        return Ok(None);
    }
    let mut outer_points = vec![restrict(outside)];
    for u in complement_basis(&dir0) {
        let mut found = None;
        'search: for shrink in 0..16 {
            let rho = 0.5 * reach * 0.25f64.powi(shrink);
            for sign in [1.0, -1.0] {
                let mut target = x0.to_vec();
                for (k, &i) in free.iter().enumerate() {
                    target[i] = boundary[i] + sign * rho * u[k];
                }
                let dir: Vec<f64> = target.iter().zip(x0).map(|(t, x)| t - x).collect();
                let step = region.max_step(x0, &dir);
                if !step.is_finite() || step * reach < tol {
                    continue;
                }
                let mut exit: Vec<f64> = x0.iter().zip(&dir).map(|(x, v)| x + step * v).collect();
                region.clamp(&mut exit);
                if !counter.ask(&exit)? {
                    let (_, out) = bisect(counter, x0, &exit, tol)?;
                    found = Some(restrict(&out));
                    break 'search;
                }
            }
        }
        match found {
            Some(p) => outer_points.push(p),
            None => return Ok(None),
        }
    }

    let (normal, spread) = if d == 1 {
        (vec![dir0[0].signum()], f64::INFINITY)
    } else {
        let base = &outer_points[0];
        let mut m = DMatrix::<f64>::zeros(d, d);
        for (row, p) in outer_points.iter().skip(1).enumerate() {
            for k in 0..d {
                m[(row, k)] = p[k] - base[k];
            }
        }
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let largest = svd.singular_values[order[d - 1]];
        let spread = svd.singular_values[order[1]];
        if spread <= 1e-12 * largest.max(1e-300) {
            return Ok(None);
        }
        ((0..d).map(|k| v_t[(order[0], k)]).collect::<Vec<f64>>(), spread)
    };
    let mut normal = normal;
    let toward_x0: f64 = normal
        .iter()
        .zip(x0_free.iter().zip(&b_free))
        .map(|(g, (x, b))| g * (x - b))
        .sum();
    if toward_x0 > 0.0 {
        normal.iter_mut().for_each(|g| *g = -*g);
    }
    let noise = tol.max(1e-12);
    let margin = noise * (1.0 + 2.0 * diameter * (d as f64).sqrt() / spread);
    let offset = outer_points
        .iter()
        .map(|p| dot(&normal, p))
        .fold(f64::NEG_INFINITY, f64::max)
        + margin;
    if dot(&normal, &x0_free) >= offset {
        return Ok(None);
    }
    let mut full = vec![0.0; dim];
    for (k, &i) in free.iter().enumerate() {
        full[i] = normal[k];
    }
    // Pinned coordinates are equal across all points, so they shift the offset only.
    let pinned_shift: f64 = (0..dim)
        .filter(|i| !free.contains(i))
        .map(|i| full[i] * x0[i])
        .sum();
    Ok(Some(Halfspace {
        normal: full,
        offset: offset + pinned_shift,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::HalfspaceOracle;

    #[test]
    fn one_dimensional_bisection() {
        let mut oracle = HalfspaceOracle {
            normal: vec![1.0, 0.0],
            offset: 0.5,
        };
        let sep = separation_from_membership(&mut oracle, &[1.0, 0.3], &[0.0, 0.3], 1e-6).unwrap();
        let Separation::Boundary {
            boundary,
            cut,
            queries,
            ..
        } = sep
        else {
            panic!("expected a boundary")
        };
        assert!((boundary[0] - 0.5).abs() <= 1e-6);
        assert!(cut.normal[0] < 0.0);
        assert!(cut.excess(&[0.0, 0.3]) > 0.0);
        assert!(queries <= 21);
    }

    #[test]
    fn inside_point_costs_one_query() {
        let mut oracle = HalfspaceOracle {
            normal: vec![1.0],
            offset: 0.0,
        };
        assert_eq!(
            separation_from_membership(&mut oracle, &[1.0], &[0.5], 1e-6).unwrap(),
            Separation::Inside { queries: 1 }
        );
    }

    #[test]
    fn complement_is_orthonormal() {
        let dir = [0.3, -0.4, 0.5, 0.1];
        let basis = complement_basis(&dir);
        assert_eq!(basis.len(), 3);
        for (a, u) in basis.iter().enumerate() {
            assert!(dot(u, &dir).abs() < 1e-12);
            for (b, w) in basis.iter().enumerate() {
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((dot(u, w) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fitted_cut_recovers_a_tilted_plane() {
        let normal = [0.3, -0.8, 0.5];
        let mut oracle = HalfspaceOracle {
            normal: normal.to_vec(),
            offset: -0.1,
        };
        let region = KnownRegion::unit_box(3);
        let x0 = [0.5, 0.3, 0.4];
        let y = [0.1, 0.9, 0.2];
        let mut counter = Counter::new(&mut oracle, u64::MAX);
        let (inside, outside) = bisect(&mut counter, &x0, &y, 1e-12).ok().unwrap();
        let cut = fit_cut(&mut counter, &region, &[0, 1, 2], &x0, &inside, &outside, 1e-12, 2.0)
            .ok()
            .unwrap()
            .unwrap();
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        let cos = -dot(&cut.normal, &normal) / norm;
        assert!(cos > 1.0 - 1e-9, "cos = {cos}");
        assert!(cut.excess(&y) > 0.0);
        assert!(cut.excess(&x0) < 0.0);
    }
}
