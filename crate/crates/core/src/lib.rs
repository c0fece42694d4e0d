//! Online Bayesian recommendation.
//!
//! A platform repeatedly commits to a signaling scheme, a Bayesian user
//! best-responds to the realized recommendation, and the platform pays
//! Stackelberg regret against the best persuasive scheme in hindsight.
//! The crate provides the problem model, two hindsight oracles, a seeded
//! round simulator with a persuasiveness probe, the two online search
//! policies plus baselines, a membership-oracle LP solver, the pricing
//! reduction and posterior decomposition, and an experiment harness.

pub mod env;
pub mod harness;
pub mod hindsight;
pub mod lp;
pub mod model;
pub mod policies;
pub mod reductions;
pub mod rng;
pub mod sampling;

pub use env::{Environment, PersuCheckResult, RoundOutcome, Verdict};
pub use hindsight::{solve_bruteforce, solve_threshold, HindsightSolution};
pub use model::{
    best_response, expected_platform_utility, is_persuasive, omega, posterior, validate_instance,
    Action, DirectScheme, GeneralScheme, Instance, ModelError, Posterior, Ranking,
};
