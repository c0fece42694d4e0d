//! A buyer with private value `v*` against posted prices, embedded as a
//! two-state recommendation instance.

use crate::env::{CommitRun, Scheme};
use crate::model::{DirectScheme, Instance};

use super::ReductionError;

/// Sale test slack: a price within this of `v*` sells.
const SALE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingInstance {
    horizon: u64,
    value: f64,
}

impl PricingInstance {
    /// Requires `T ≥ 2` and `0 < v* ≤ 1/2`.
    pub fn new(value: f64, horizon: u64) -> Result<Self, ReductionError> {
        if horizon < 2 {
            return Err(ReductionError::InvalidPricing(format!(
                "horizon must be at least 2, got {horizon}"
            )));
        }
        if !(value > 0.0 && value <= 0.5) {
            return Err(ReductionError::InvalidPricing(format!(
                "buyer value must lie in (0, 1/2], got {value}"
            )));
        }
        Ok(Self { horizon, value })
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// `ε = 1/T`.
    pub fn epsilon(&self) -> f64 {
        1.0 / self.horizon as f64
    }
}

/// Two states with prior `(ε, 1−ε)`, gaps `(1, −ε/v*)` and unit values.
///
/// The hindsight optimum is `(1, v*/(1−ε))` with value `v* + ε`. Fails only
/// at `T = 2, v* = 1/2`, where the gaps sum to zero.
pub fn build_pricing_instance(p: &PricingInstance) -> Result<Instance, ReductionError> {
    let eps = p.epsilon();
    Instance::new(vec![eps, 1.0 - eps], vec![1.0, -eps / p.value])
        .map_err(|e| ReductionError::InvalidPricing(e.to_string()))
}

/// Price `(1−ε)·π‡(2)` posted for a two-state scheme.
///
/// The scheme is first normalized so state 1 is always recommended: if
/// `π(1) > 0` and `π(2) ≤ π(1)`, `π‡(2) = π(2)/π(1)`; otherwise the two
/// signals swap roles and `π‡(2) = (1−π(2))/(1−π(1))`.
pub fn price_for_scheme(p: &PricingInstance, scheme: &DirectScheme) -> Result<f64, ReductionError> {
    let [a, b] = scheme.probs() else {
        return Err(ReductionError::DegenerateScheme(format!(
            "expected 2 states, got {}",
            scheme.num_states()
        )));
    };
    let normalized = if *a > 0.0 && b <= a {
        b / a
    } else {
        (1.0 - b) / (1.0 - a)
    };
    Ok((1.0 - p.epsilon()) * normalized.clamp(0.0, 1.0))
}

pub fn prices_from_schemes(
    p: &PricingInstance,
    schemes: &[DirectScheme],
) -> Result<Vec<f64>, ReductionError> {
    schemes.iter().map(|s| price_for_scheme(p, s)).collect()
}

/// Pricing outcome of replaying a recommendation transcript as posted prices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingLedger {
    pub rounds: u64,
    pub sales: u64,
    pub revenue: f64,
    /// `Σ_t (v* − p_t·1{p_t ≤ v*})`.
    pub regret: f64,
}

pub fn pricing_ledger(p: &PricingInstance, transcript: &[CommitRun]) -> Result<PricingLedger, ReductionError> {
    let mut ledger = PricingLedger {
        rounds: 0,
        sales: 0,
        revenue: 0.0,
        regret: 0.0,
    };
    for run in transcript {
        let Scheme::Direct(scheme) = &run.scheme else {
            return Err(ReductionError::DegenerateScheme("general schemes have no price".into()));
        };
        let price = price_for_scheme(p, scheme)?;
        let n = run.rounds as f64;
        ledger.rounds += run.rounds;
        if price <= p.value + SALE_TOL {
            ledger.sales += run.rounds;
            ledger.revenue += n * price;
            ledger.regret += n * (p.value - price).max(0.0);
        } else {
            ledger.regret += n * p.value;
        }
    }
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hindsight::solve_threshold;

    #[test]
    fn built_instance_optimum() {
        let p = PricingInstance::new(0.5, 100).unwrap();
        let inst = build_pricing_instance(&p).unwrap();
        assert!((inst.omega()[0] - 0.01).abs() < 1e-15);
        assert!((inst.omega()[1] + 0.0198).abs() < 1e-15);
        let sol = solve_threshold(&inst);
        assert!((sol.value - 0.51).abs() < 1e-12);
        assert!((sol.scheme.probs()[1] - 50.0 / 99.0).abs() < 1e-12);
    }

    #[test]
    fn price_examples() {
        let p = PricingInstance::new(0.5, 100).unwrap();
        let price = price_for_scheme(&p, &DirectScheme::new(vec![1.0, 0.5]).unwrap()).unwrap();
        assert!((price - 0.495).abs() < 1e-15);
        let best = DirectScheme::new(vec![1.0, 0.5 / 0.99]).unwrap();
        assert!((price_for_scheme(&p, &best).unwrap() - 0.5).abs() < 1e-15);
        let never = price_for_scheme(&p, &DirectScheme::zeros(2)).unwrap();
        assert!(never > 0.5);
        let relabelled = price_for_scheme(&p, &DirectScheme::new(vec![0.5, 0.25]).unwrap()).unwrap();
        assert!((relabelled - 0.495).abs() < 1e-15);
        assert!(price_for_scheme(&p, &DirectScheme::zeros(3)).is_err());
    }

    #[test]
    fn rejects_invalid_instances() {
        assert!(PricingInstance::new(0.6, 100).is_err());
        assert!(PricingInstance::new(0.0, 100).is_err());
        assert!(PricingInstance::new(0.3, 1).is_err());
        assert!(build_pricing_instance(&PricingInstance::new(0.5, 2).unwrap()).is_err());
    }
}
