//! Splitting a discrete distribution on `[0, 1]` into a mixture of
//! distributions with the same mean and at most two support points.

use super::ReductionError;

/// Distance below which a support value is treated as the mean itself.
const ATOM_TOL: f64 = 1e-12;
/// Tolerance of the self-checks run before a decomposition is returned.
const CHECK_TOL: f64 = 1e-9;

/// A distribution with one or two support points.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

impl Component {
    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(x, p)| x * p).sum()
    }

    pub fn prob_of(&self, value: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .filter(|(x, _)| **x == value)
            .map(|(_, p)| p)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub mean: f64,
    pub components: Vec<Component>,
    /// Mixture weights, one per component.
    pub weights: Vec<f64>,
    /// Largest residual of the pair-coefficient equations.
    pub system_residual: f64,
}

impl Decomposition {
    /// Mixture probability of `value`.
    pub fn mixture_prob(&self, value: f64) -> f64 {
        self.components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * c.prob_of(value))
            .sum()
    }
}

fn check_distribution(values: &[f64], probs: &[f64]) -> Result<(), ReductionError> {
    let bad = |msg: String| Err(ReductionError::NotADistribution(msg));
    if values.is_empty() {
        return bad("empty support".into());
    }
    if values.len() != probs.len() {
        return bad(format!("{} values but {} probabilities", values.len(), probs.len()));
    }
    if let Some(x) = values.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return bad(format!("support value {x} lies outside [0, 1]"));
    }
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return bad(format!("probability {p} is negative or not finite"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > CHECK_TOL {
        return bad(format!("probabilities sum to {total}"));
    }
    Ok(())
}

/// One side of the mean: support values with their remaining mass.
struct Side {
    values: Vec<f64>,
    mass: Vec<f64>,
}

/// Solves `Σ_j (λ − x₋ʲ) f̂_ij = q₊ⁱ` and `Σ_i (x₊ⁱ − λ) f̂_ij = q₋ʲ` with
/// `f̂ ≥ 0`, peeling off the last point of one side at a time.
fn solve_pair_weights(mean: f64, high: &Side, low: &Side) -> Vec<Vec<f64>> {
    let mut f = vec![vec![0.0; low.values.len()]; high.values.len()];
    let mut q_high = high.mass.clone();
    let mut q_low = low.mass.clone();
    let (mut n1, mut n2) = (high.values.len(), low.values.len());
    while n1 >= 2 && n2 >= 2 {
        let (i, j) = (n1 - 1, n2 - 1);
        let up = high.values[i] - mean;
        let down = mean - low.values[j];
        if up * q_high[i] >= down * q_low[j] {
            f[i][j] = q_low[j] / up;
            q_high[i] = (q_high[i] - f[i][j] * down).max(0.0);
            n2 -= 1;
        } else {
            f[i][j] = q_high[i] / down;
            q_low[j] = (q_low[j] - f[i][j] * up).max(0.0);
            n1 -= 1;
        }
    }
    if n1 == 1 {
        let up = high.values[0] - mean;
        for j in 0..n2 {
            f[0][j] = q_low[j] / up;
        }
    } else {
        let down = mean - low.values[0];
        for i in 0..n1 {
            f[i][0] = q_high[i] / down;
        }
    }
    f
}

/// Writes a discrete distribution as a mixture of distributions with the
/// same mean and at most two support points.
///
/// Support points within `1e-12` of the mean form a singleton component.
/// Every other component pairs a point `x₊ ≥ λ` with a point `x₋ < λ` and
/// puts probability `(λ − x₋)/(x₊ − x₋)` on `x₊`. Mean preservation,
/// support size and mixture consistency are checked to `1e-9` before
/// returning.
pub fn decompose_binary_support(values: &[f64], probs: &[f64]) -> Result<Decomposition, ReductionError> {
    check_distribution(values, probs)?;
    for (a, x) in values.iter().enumerate() {
        if values[..a].contains(x) {
            return Err(ReductionError::NotADistribution(format!("support value {x} repeats")));
        }
    }
    let mean: f64 = values.iter().zip(probs).map(|(x, p)| x * p).sum();
    let mut components = Vec::new();
    let mut weights = Vec::new();

    let mut order: Vec<usize> = (0..values.len()).filter(|&k| probs[k] > 0.0).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut high = Side {
        values: Vec::new(),
        mass: Vec::new(),
    };
    let mut low = Side {
        values: Vec::new(),
        mass: Vec::new(),
    };
    for k in order {
        let (x, p) = (values[k], probs[k]);
        if (x - mean).abs() <= ATOM_TOL {
            components.push(Component {
                values: vec![x],
                probs: vec![1.0],
            });
            weights.push(p);
        } else if x > mean {
            high.values.push(x);
            high.mass.push(p);
        } else {
            low.values.push(x);
            low.mass.push(p);
        }
    }

    let mut system_residual: f64 = 0.0;
    if !high.values.is_empty() || !low.values.is_empty() {
        if high.values.is_empty() || low.values.is_empty() {
            return Err(ReductionError::EmptySide { mean });
        }
        let f = solve_pair_weights(mean, &high, &low);
        for i in 0..high.values.len() {
            let row: f64 = (0..low.values.len()).map(|j| (mean - low.values[j]) * f[i][j]).sum();
            system_residual = system_residual.max((row - high.mass[i]).abs());
        }
        for j in 0..low.values.len() {
            let col: f64 = (0..high.values.len()).map(|i| (high.values[i] - mean) * f[i][j]).sum();
            system_residual = system_residual.max((col - low.mass[j]).abs());
        }
        for (i, &xh) in high.values.iter().enumerate() {
            for (j, &xl) in low.values.iter().enumerate() {
                if f[i][j] <= 0.0 {
                    continue;
                }
                let up = (mean - xl) / (xh - xl);
                components.push(Component {
                    values: vec![xl, xh],
                    probs: vec![1.0 - up, up],
                });
                weights.push(f[i][j] * (xh - xl));
            }
        }
    }

    let decomposition = Decomposition {
        mean,
        components,
        weights,
        system_residual,
    };
    verify(&decomposition, values, probs)?;
    Ok(decomposition)
}

fn verify(d: &Decomposition, values: &[f64], probs: &[f64]) -> Result<(), ReductionError> {
    let fail = |property, error| Err(ReductionError::VerificationFailed { property, error });
    if d.system_residual > CHECK_TOL {
        return fail("linear system", d.system_residual);
    }
    let total: f64 = d.weights.iter().sum();
    if (total - 1.0).abs() > CHECK_TOL || d.weights.iter().any(|&w| w < 0.0) {
        return fail("mixture weight", (total - 1.0).abs());
    }
    for c in &d.components {
        if c.values.len() > 2 {
            return fail("binary support", c.values.len() as f64);
        }
        let gap = (c.mean() - d.mean).abs();
        if gap > CHECK_TOL {
            return fail("mean preservation", gap);
        }
    }
    for (&x, &p) in values.iter().zip(probs) {
        let gap = (d.mixture_prob(x) - p).abs();
        if gap > CHECK_TOL {
            return fail("consistency", gap);
        }
    }
    Ok(())
}

/// Whether a distribution of posteriors averages back to the prior, within `1e-10`.
pub fn check_bayes_plausible(
    prior_mass: f64,
    posterior_values: &[f64],
    posterior_probs: &[f64],
) -> Result<bool, ReductionError> {
    check_distribution(posterior_values, posterior_probs)?;
    let mean: f64 = posterior_values.iter().zip(posterior_probs).map(|(x, p)| x * p).sum();
    Ok((mean - prior_mass).abs() <= 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let d = decompose_binary_support(&[0.1, 0.6, 0.9], &[0.5, 0.3, 0.2]).unwrap();
        assert!((d.mean - 0.41).abs() < 1e-15);
        assert_eq!(d.components.len(), 2);
        assert!((d.weights[0] - 0.15 / 0.31).abs() < 1e-12);
        assert!((d.weights[1] - 0.16 / 0.31).abs() < 1e-12);
        assert_eq!(d.components[0].values, vec![0.1, 0.6]);
        assert!((d.components[0].probs[1] - 0.62).abs() < 1e-12);
        assert!((d.components[1].probs[1] - 0.3875).abs() < 1e-12);
    }

    #[test]
    fn binary_input_is_one_component() {
        let d = decompose_binary_support(&[0.2, 0.8], &[0.5, 0.5]).unwrap();
        assert_eq!(d.components.len(), 1);
        assert!((d.weights[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_mass_is_a_singleton() {
        let d = decompose_binary_support(&[0.3], &[1.0]).unwrap();
        assert_eq!(
            d.components,
            vec![Component {
                values: vec![0.3],
                probs: vec![1.0]
            }]
        );
    }

    #[test]
    fn atom_at_the_mean_splits_off() {
        let d = decompose_binary_support(&[0.0, 0.5, 1.0], &[0.25, 0.5, 0.25]).unwrap();
        assert_eq!(d.components.len(), 2);
        assert!(d.weights.iter().any(|&w| (w - 0.5).abs() < 1e-12));
    }

    #[test]
    fn both_peeling_branches() {
        let values = [0.05, 0.15, 0.3, 0.7, 0.8, 0.95];
        let probs = [0.3, 0.1, 0.1, 0.1, 0.1, 0.3];
        decompose_binary_support(&values, &probs).unwrap();
        let probs = [0.05, 0.1, 0.35, 0.3, 0.15, 0.05];
        decompose_binary_support(&values, &probs).unwrap();
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(
            decompose_binary_support(&[0.2, 0.8], &[0.5, 0.6]),
            Err(ReductionError::NotADistribution(_))
        ));
        assert!(matches!(
            decompose_binary_support(&[0.2, 1.5], &[0.5, 0.5]),
            Err(ReductionError::NotADistribution(_))
        ));
        assert!(matches!(
            decompose_binary_support(&[0.2, 0.2], &[0.5, 0.5]),
            Err(ReductionError::NotADistribution(_))
        ));
    }

    #[test]
    fn bayes_plausibility_examples() {
        assert!(check_bayes_plausible(0.5, &[0.5], &[1.0]).unwrap());
        assert!(!check_bayes_plausible(0.5, &[0.0, 1.0], &[0.3, 0.7]).unwrap());
        let d = decompose_binary_support(&[0.1, 0.6, 0.9], &[0.5, 0.3, 0.2]).unwrap();
        for c in &d.components {
            assert!(check_bayes_plausible(0.41, &c.values, &c.probs).unwrap());
        }
    }
}
