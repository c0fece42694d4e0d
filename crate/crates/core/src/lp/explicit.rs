//! The explicit LP over the outer approximation, solved with `microlp`.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::{dot, Halfspace, KnownRegion};

/// Adds `h` restricted to the free coordinates; pinned coordinates take their value from `pinned`.
fn add_row(
    problem: &mut Problem,
    vars: &[microlp::Variable],
    free: &[usize],
    h: &Halfspace,
    pinned: &[f64],
) {
    let mut fixed_part = dot(&h.normal, pinned);
    let coeffs: Vec<f64> = free.iter().map(|&i| h.normal[i]).collect();
    for &i in free {
        fixed_part -= h.normal[i] * pinned[i];
    }
    let norm = coeffs.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    let terms: Vec<(microlp::Variable, f64)> = vars
        .iter()
        .zip(&coeffs)
        .filter(|(_, a)| **a != 0.0)
        .map(|(v, a)| (*v, a / norm))
        .collect();
    problem.add_constraint(terms.as_slice(), ComparisonOp::Le, (h.offset - fixed_part) / norm);
}

/// Maximizes `c·x` over the known region and the cuts; `None` if the solver fails.
pub(super) fn maximize_outer(
    c: &[f64],
    region: &KnownRegion,
    free: &[usize],
    cuts: &[Halfspace],
    pinned: &[f64],
) -> Option<Vec<f64>> {
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<microlp::Variable> = free
        .iter()
        .map(|&i| problem.add_var(c[i], (region.lower[i], region.upper[i])))
        .collect();
    let mut base = pinned.to_vec();
    for i in 0..region.dim() {
        if !free.contains(&i) {
            base[i] = region.lower[i];
        }
    }
    for h in region.inequalities.iter().chain(cuts) {
        add_row(&mut problem, &vars, free, h, &base);
    }
    let solution = problem.solve().ok()?.into_solution().ok()?;
    let mut x = base;
    for (&i, v) in free.iter().zip(&vars) {
        x[i] = solution.var_value(*v);
    }
    region.clamp(&mut x);
    x.iter().all(|v| v.is_finite()).then_some(x)
}
