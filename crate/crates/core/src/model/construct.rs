//! Scheme constructions used by the search policies.

use std::cmp::Ordering;

use super::{DirectScheme, Instance, ModelError, Result, SIMPLEX_TOL};

/// A total order over states, listed from highest to lowest rank.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ranking(Vec<usize>);

impl Ranking {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let m = order.len();
        let mut seen = vec![false; m];
        for &s in &order {
            if s >= m || seen[s] {
                return Err(ModelError::InvalidConstruction(format!(
                    "{order:?} is not a permutation of 0..{m}"
                )));
            }
            seen[s] = true;
        }
        Ok(Self(order))
    }

    pub fn identity(m: usize) -> Self {
        Self((0..m).collect())
    }

    /// All `m!` orders in lexicographic order.
    pub fn all(m: usize) -> Vec<Ranking> {
        let mut current: Vec<usize> = (0..m).collect();
        let mut out = vec![Ranking(current.clone())];
        while next_permutation(&mut current) {
            out.push(Ranking(current.clone()));
        }
        out
    }

    pub fn order(&self) -> &[usize] {
        &self.0
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Bang-per-buck key `ω(i)/(λ(i)v(i))`; zero-weight states map to `±∞` by the sign of `ω`.
fn bang_per_buck(inst: &Instance, state: usize) -> f64 {
    let w = inst.value_weight(state);
    let gap = inst.omega()[state];
    if w > 0.0 {
        gap / w
    } else if gap >= 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

/// States sorted by bang-per-buck, descending; ties keep index order.
pub fn bang_per_buck_order(inst: &Instance) -> Vec<usize> {
    let keys: Vec<f64> = (0..inst.num_states()).map(|i| bang_per_buck(inst, i)).collect();
    let mut order: Vec<usize> = (0..inst.num_states()).collect();
    order.sort_by(|&a, &b| keys[b].partial_cmp(&keys[a]).unwrap_or(Ordering::Equal));
    order
}

impl Ranking {
    /// The true bang-per-buck order of an instance.
    pub fn by_bang_per_buck(inst: &Instance) -> Self {
        Self(bang_per_buck_order(inst))
    }
}

fn unattainable(target: f64, reason: impl Into<String>) -> ModelError {
    ModelError::UnattainableTarget {
        target,
        reason: reason.into(),
    }
}

/// `π^(r,u)`: fill states in rank order until the recommended value `Σ λ(i)v(i)π(i)` reaches `u`.
///
/// The threshold is the first positive-weight state whose prefix reaches
/// `u`; it receives the fractional remainder, states above it 1 and states
/// below it 0. `u = 0` gives the all-zeros scheme.
pub fn make_rank_scheme(inst: &Instance, rank: &Ranking, target: f64) -> Result<DirectScheme> {
    let m = inst.num_states();
    if rank.order().len() != m {
        return Err(ModelError::DimensionMismatch {
            field: "rank",
            expected: m,
            found: rank.order().len(),
        });
    }
    let total = inst.total_value_weight();
    if !target.is_finite() || target < 0.0 {
        return Err(unattainable(target, "target must be nonnegative"));
    }
    if target > total + SIMPLEX_TOL {
        return Err(unattainable(target, format!("exceeds the total value weight {total}")));
    }
    let mut probs = vec![0.0; m];
    if target == 0.0 {
        return Ok(DirectScheme(probs));
    }
    let last_positive = rank
        .order()
        .iter()
        .rposition(|&s| inst.value_weight(s) > 0.0)
        .ok_or_else(|| unattainable(target, "every state has zero value weight"))?;
    let mut prefix = 0.0;
    for (pos, &s) in rank.order().iter().enumerate() {
        let w = inst.value_weight(s);
        if w <= 0.0 {
            probs[s] = 1.0;
            continue;
        }
        if prefix + w >= target || pos == last_positive {
            probs[s] = ((target - prefix) / w).clamp(0.0, 1.0);
            break;
        }
        probs[s] = 1.0;
        prefix += w;
    }
    Ok(DirectScheme(probs))
}

fn check_weight(inst: &Instance, state: usize, needed: f64) -> Result<f64> {
    let w = inst.value_weight(state);
    if !needed.is_finite() || needed < 0.0 {
        return Err(unattainable(needed, "lower bound must be nonnegative"));
    }
    if w <= 0.0 || needed > w {
        return Err(unattainable(
            needed,
            format!("state {state} has value weight {w}"),
        ));
    }
    Ok(w)
}

/// `π^I`: recommend state `i` always and state `j` at the rate that adds value `lower_bound`.
pub fn make_phase1_scheme(
    inst: &Instance,
    i: usize,
    j: usize,
    lower_bound: f64,
) -> Result<DirectScheme> {
    inst.check_state(i)?;
    inst.check_state(j)?;
    let mut probs = vec![0.0; inst.num_states()];
    if i == j {
        check_weight(inst, i, lower_bound)?;
    } else {
        let w = check_weight(inst, j, lower_bound)?;
        probs[j] = lower_bound / w;
    }
    probs[i] = 1.0;
    Ok(DirectScheme(probs))
}

/// `π^II`: halve the `j` entry of `π^I` and probe state `k` at rate `3/(2mT)`.
pub fn make_phase2_scheme(
    inst: &Instance,
    i: usize,
    j: usize,
    lower_bound: f64,
    probe: usize,
    horizon: u64,
) -> Result<DirectScheme> {
    inst.check_state(i)?;
    inst.check_state(j)?;
    inst.check_state(probe)?;
    if probe == i || probe == j {
        return Err(ModelError::InvalidConstruction(format!(
            "probe state {probe} must differ from the pair ({i}, {j})"
        )));
    }
    let m = inst.num_states();
    let mut probs = vec![0.0; m];
    let w = check_weight(inst, j, lower_bound / 2.0)?;
    if i != j {
        probs[j] = lower_bound / (2.0 * w);
    }
    probs[i] = 1.0;
    probs[probe] = (3.0 / (2.0 * m as f64 * horizon as f64)).min(1.0);
    Ok(DirectScheme(probs))
}

/// `π^(0)`: the interior starting point of the restricted program over `retained`.
pub fn make_interior_candidate(
    inst: &Instance,
    i: usize,
    j: usize,
    lower_bound: f64,
    retained: &[usize],
    horizon: u64,
) -> Result<DirectScheme> {
    inst.check_state(i)?;
    inst.check_state(j)?;
    for &k in retained {
        inst.check_state(k)?;
    }
    if !retained.contains(&i) || !retained.contains(&j) {
        return Err(ModelError::InvalidConstruction(format!(
            "pair ({i}, {j}) must lie in the retained set {retained:?}"
        )));
    }
    let m = inst.num_states() as f64;
    let scale = m * m * horizon as f64;
    let mut probs = vec![0.0; inst.num_states()];
    for &k in retained {
        probs[k] = 1.0 / (8.0 * scale);
    }
    let w = check_weight(inst, j, lower_bound / 8.0)?;
    if i != j {
        probs[j] = lower_bound / (8.0 * w);
    }
    probs[i] = 0.5 + 1.0 / (16.0 * scale);
    Ok(DirectScheme(probs))
}
