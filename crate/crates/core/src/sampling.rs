//! Random instance, scheme and distribution generators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{DirectScheme, Instance};

/// A random-instance family.
///
/// Weighted gaps have magnitudes uniform in `omega_range`, at least one
/// positive and one negative sign, and are redrawn until they sum below zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFamily {
    pub m: usize,
    #[serde(default = "default_omega_range")]
    pub omega_range: (f64, f64),
    /// Draw the user's belief independently of the platform prior.
    #[serde(default)]
    pub misspecified_belief: bool,
    /// Draw platform values uniformly from this range instead of all ones.
    #[serde(default)]
    pub value_range: Option<(f64, f64)>,
}

fn default_omega_range() -> (f64, f64) {
    (0.05, 1.0)
}

impl InstanceFamily {
    pub fn baseline(m: usize) -> Self {
        Self {
            m,
            omega_range: default_omega_range(),
            misspecified_belief: false,
            value_range: None,
        }
    }
}

/// Uniform draw from the probability simplex, with every entry at least `1e-3 / m`.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-3 / m as f64).collect();
    let total: f64 = raw.iter().sum();
    let mut out: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let drift = 1.0 - out.iter().sum::<f64>();
    let largest = (0..m)
        .max_by(|&a, &b| out[a].total_cmp(&out[b]))
        .expect("nonempty simplex");
    out[largest] += drift;
    out
}

pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, family: &InstanceFamily) -> Instance {
    assert!(family.m >= 2, "valid instances need at least two states");
    let (lo, hi) = family.omega_range;
    loop {
        let prior = random_simplex(rng, family.m);
        let belief = if family.misspecified_belief {
            random_simplex(rng, family.m)
        } else {
            prior.clone()
        };
        let positive = rng.gen_range(0..family.m);
        let negative = (positive + rng.gen_range(1..family.m)) % family.m;
        let omega: Vec<f64> = (0..family.m)
            .map(|i| {
                let magnitude = rng.gen_range(lo..=hi);
                let sign = if i == positive {
                    1.0
                } else if i == negative || rng.gen_bool(0.5) {
                    -1.0
                } else {
                    1.0
                };
                sign * magnitude
            })
            .collect();
        if omega.iter().sum::<f64>() >= 0.0 {
            continue;
        }
        let gap = omega.iter().zip(&belief).map(|(w, b)| w / b).collect();
        let mut builder = Instance::builder(prior, gap).user_belief(belief);
        if let Some((vlo, vhi)) = family.value_range {
            builder = builder.platform_value((0..family.m).map(|_| rng.gen_range(vlo..=vhi)).collect());
        }
        if let Ok(inst) = builder.build() {
            return inst;
        }
    }
}

/// A direct scheme with entries uniform in `[0, 1]`, some snapped to 0 or 1.
pub fn random_direct_scheme<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DirectScheme {
    let probs = (0..m)
        .map(|_| match rng.gen_range(0..6) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen::<f64>(),
        })
        .collect();
    DirectScheme::new(probs).expect("entries lie in [0, 1]")
}

/// A discrete distribution on distinct values in `[0, 1]` with support size in `1..=max_support`.
pub fn random_discrete_distribution<R: Rng + ?Sized>(
    rng: &mut R,
    max_support: usize,
) -> (Vec<f64>, Vec<f64>) {
    let n = rng.gen_range(1..=max_support);
    let mut values: Vec<f64> = Vec::with_capacity(n);
    while values.len() < n {
        let x = if rng.gen_range(0..8) == 0 {
            f64::from(rng.gen_range(0..=1u8))
        } else {
            rng.gen::<f64>()
        };
        if values.iter().all(|v| (v - x).abs() > 1e-6) {
            values.push(x);
        }
    }
    let probs = random_simplex(rng, n);
    (values, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn generated_instances_are_valid() {
        let mut rng = rng_from_seed(3);
        for m in 2..=6 {
            for _ in 0..50 {
                let family = InstanceFamily {
                    m,
                    omega_range: (0.01, 2.0),
                    misspecified_belief: true,
                    value_range: Some((0.1, 1.0)),
                };
                let inst = random_instance(&mut rng, &family);
                assert_eq!(inst.num_states(), m);
                assert!(inst.omega().iter().sum::<f64>() < 0.0);
            }
        }
    }

    #[test]
    fn simplex_sums_to_one() {
        let mut rng = rng_from_seed(5);
        for m in 1..10 {
            let v = random_simplex(&mut rng, m);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(v.iter().all(|&x| x > 0.0));
        }
    }
}
