//! The dynamic-pricing reduction, the binary-support decomposition of a
//! posterior distribution, and the Bayes-plausibility check.

mod decompose;
mod pricing;

use thiserror::Error;

pub use decompose::{check_bayes_plausible, decompose_binary_support, Component, Decomposition};
pub use pricing::{
    build_pricing_instance, price_for_scheme, prices_from_schemes, pricing_ledger, PricingInstance,
    PricingLedger,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("invalid pricing instance: {0}")]
    InvalidPricing(String),
    #[error("scheme cannot be mapped to a price: {0}")]
    DegenerateScheme(String),
    #[error("not a distribution: {0}")]
    NotADistribution(String),
    #[error("all remaining mass lies on one side of the mean {mean}")]
    EmptySide { mean: f64 },
    #[error("decomposition failed its {property} check (error {error:e})")]
    VerificationFailed { property: &'static str, error: f64 },
}
