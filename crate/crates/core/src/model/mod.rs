//! Problem primitives shared by every other module: instances, signaling
//! schemes, Bayes posteriors, user best responses and platform utility.

mod construct;
mod file;

pub use construct::{
    bang_per_buck_order, make_interior_candidate, make_phase1_scheme, make_phase2_scheme,
    make_rank_scheme, Ranking,
};
pub use file::{load_instance, parse_instance, InstanceFile};

use thiserror::Error;

/// Tolerance for probability vectors summing to one and entries lying in `[0, 1]`.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Relative tolerance of every persuasiveness and best-response test.
///
/// A signal induces action 1 when `Σ ω(i)π(i,σ) ≥ −PERSUASION_TOL · Σ |ω(i)|π(i,σ)`.
pub const PERSUASION_TOL: f64 = 1e-12;

/// Largest accepted magnitude of a weighted utility gap `ω(i)`.
pub const OMEGA_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{which} is not a probability vector: {reason}")]
    PriorNotSimplex { which: &'static str, reason: String },
    #[error("assumption one violated: no state has a positive weighted utility gap")]
    AssumptionOneViolated,
    #[error("assumption two violated: weighted utility gaps sum to {sum}, must be negative")]
    AssumptionTwoViolated { sum: f64 },
    #[error("{field} has length {found}, expected {expected}")]
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("platform value {value} of state {state} is outside [0, 1]")]
    ValueOutOfRange { state: usize, value: f64 },
    #[error("utility gap of state {state} is not finite")]
    NonFiniteGap { state: usize },
    #[error("weighted utility gap {value} of state {state} exceeds the magnitude limit {OMEGA_LIMIT:e}")]
    OmegaOutOfRange { state: usize, value: f64 },
    #[error("signal {signal} has zero probability under the user's belief")]
    ZeroProbabilitySignal { signal: usize },
    #[error("target {target} is unattainable: {reason}")]
    UnattainableTarget { target: f64, reason: String },
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("state {state} is out of range for {m} states")]
    StateOutOfRange { state: usize, m: usize },
    #[error("invalid construction: {0}")]
    InvalidConstruction(String),
    #[error("instance file {path}: {reason}")]
    InstanceFile { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// User action: `Decline` is action 0, `Accept` is action 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Decline,
    Accept,
}

impl Action {
    pub fn index(self) -> usize {
        match self {
            Action::Decline => 0,
            Action::Accept => 1,
        }
    }

    pub fn is_accept(self) -> bool {
        self == Action::Accept
    }
}

/// A validated problem instance.
///
/// `prior` is the platform's prior over states, `user_belief` the user's
/// (possibly misspecified) prior, `utility_gap` the user's gain from action
/// 1 per state and `platform_value` the platform's gain when the user takes
/// action 1 per state.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    prior: Vec<f64>,
    user_belief: Vec<f64>,
    utility_gap: Vec<f64>,
    platform_value: Vec<f64>,
    omega: Vec<f64>,
}

/// Builder for [`Instance`]; `build` runs [`validate_instance`].
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    prior: Vec<f64>,
    utility_gap: Vec<f64>,
    user_belief: Option<Vec<f64>>,
    platform_value: Option<Vec<f64>>,
}

impl InstanceBuilder {
    pub fn user_belief(mut self, belief: Vec<f64>) -> Self {
        self.user_belief = Some(belief);
        self
    }

    pub fn platform_value(mut self, value: Vec<f64>) -> Self {
        self.platform_value = Some(value);
        self
    }

    pub fn build(self) -> Result<Instance> {
        let m = self.prior.len();
        let user_belief = self.user_belief.unwrap_or_else(|| self.prior.clone());
        let platform_value = self.platform_value.unwrap_or_else(|| vec![1.0; m]);
        let omega = self
            .utility_gap
            .iter()
            .zip(&user_belief)
            .map(|(d, b)| d * b)
            .collect();
        let inst = Instance {
            prior: self.prior,
            user_belief,
            utility_gap: self.utility_gap,
            platform_value,
            omega,
        };
        validate_instance(&inst)?;
        Ok(inst)
    }
}

impl Instance {
    /// Baseline model: the user shares the platform prior and every state is worth 1.
    pub fn new(prior: Vec<f64>, utility_gap: Vec<f64>) -> Result<Self> {
        Self::builder(prior, utility_gap).build()
    }

    pub fn builder(prior: Vec<f64>, utility_gap: Vec<f64>) -> InstanceBuilder {
        InstanceBuilder {
            prior,
            utility_gap,
            user_belief: None,
            platform_value: None,
        }
    }

    /// Baseline-model instance with prescribed weighted gaps; requires a full-support prior.
    ///
    /// The gaps are recovered as `ω(i)/λ(i)`, so the stored `ω` may differ
    /// from the input in the last bit.
    pub fn from_omega(prior: Vec<f64>, omega: &[f64]) -> Result<Self> {
        if omega.len() != prior.len() {
            return Err(ModelError::DimensionMismatch {
                field: "omega",
                expected: prior.len(),
                found: omega.len(),
            });
        }
        if let Some(i) = prior.iter().position(|&p| p <= 0.0) {
            return Err(ModelError::PriorNotSimplex {
                which: "prior",
                reason: format!("entry {i} must be positive to recover the utility gap"),
            });
        }
        let gap = omega.iter().zip(&prior).map(|(w, p)| w / p).collect();
        Self::new(prior, gap)
    }

    pub fn num_states(&self) -> usize {
        self.prior.len()
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn user_belief(&self) -> &[f64] {
        &self.user_belief
    }

    pub fn utility_gap(&self) -> &[f64] {
        &self.utility_gap
    }

    pub fn platform_value(&self) -> &[f64] {
        &self.platform_value
    }

    /// Weighted utility gaps `ω(i) = d(i)·λ†(i)`.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Value weight `λ(i)·v(i)` of a state.
    pub fn value_weight(&self, state: usize) -> f64 {
        self.prior[state] * self.platform_value[state]
    }

    pub fn value_weights(&self) -> Vec<f64> {
        (0..self.num_states()).map(|i| self.value_weight(i)).collect()
    }

    /// `Σ λ(i)v(i)`, the largest attainable recommended value.
    pub fn total_value_weight(&self) -> f64 {
        (0..self.num_states()).map(|i| self.value_weight(i)).sum()
    }

    pub(crate) fn check_state(&self, state: usize) -> Result<()> {
        if state < self.num_states() {
            Ok(())
        } else {
            Err(ModelError::StateOutOfRange {
                state,
                m: self.num_states(),
            })
        }
    }
}

fn check_simplex(which: &'static str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(ModelError::PriorNotSimplex {
            which,
            reason: "no entries".into(),
        });
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite() || *x < 0.0) {
        return Err(ModelError::PriorNotSimplex {
            which,
            reason: format!("entry {i} is {} (must be finite and nonnegative)", v[i]),
        });
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(ModelError::PriorNotSimplex {
            which,
            reason: format!("entries sum to {sum}"),
        });
    }
    Ok(())
}

/// Checks every instance invariant; the error names the first failing condition.
pub fn validate_instance(inst: &Instance) -> Result<()> {
    let m = inst.prior.len();
    for (field, len) in [
        ("user_belief", inst.user_belief.len()),
        ("utility_gap", inst.utility_gap.len()),
        ("platform_value", inst.platform_value.len()),
    ] {
        if len != m {
            return Err(ModelError::DimensionMismatch {
                field,
                expected: m,
                found: len,
            });
        }
    }
    check_simplex("prior", &inst.prior)?;
    check_simplex("user_belief", &inst.user_belief)?;
    for (state, &value) in inst.platform_value.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(ModelError::ValueOutOfRange { state, value });
        }
    }
    if let Some(state) = inst.utility_gap.iter().position(|d| !d.is_finite()) {
        return Err(ModelError::NonFiniteGap { state });
    }
    if let Some(state) = inst.omega.iter().position(|w| w.abs() > OMEGA_LIMIT) {
        return Err(ModelError::OmegaOutOfRange {
            state,
            value: inst.omega[state],
        });
    }
    if !inst.omega.iter().any(|&w| w > 0.0) {
        return Err(ModelError::AssumptionOneViolated);
    }
    let sum: f64 = inst.omega.iter().sum();
    if sum >= 0.0 {
        return Err(ModelError::AssumptionTwoViolated { sum });
    }
    Ok(())
}

/// `ω(i) = utility_gap(i) · user_belief(i)`.
pub fn omega(inst: &Instance) -> Vec<f64> {
    inst.omega.clone()
}

/// Direct scheme: `p(i)` is the probability of recommending action 1 in state `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectScheme(Vec<f64>);

impl DirectScheme {
    /// Entries within `SIMPLEX_TOL` outside `[0, 1]` are clamped; others are rejected.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let mut probs = probs;
        for (i, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -SIMPLEX_TOL || *p > 1.0 + SIMPLEX_TOL {
                return Err(ModelError::InvalidScheme(format!(
                    "entry {i} is {p}, outside [0, 1]"
                )));
            }
            *p = p.clamp(0.0, 1.0);
        }
        Ok(Self(probs))
    }

    /// The no-information scheme: never recommends action 1.
    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn num_states(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// The equivalent two-signal general scheme (signal 0 = "recommend 0").
    pub fn to_general(&self) -> GeneralScheme {
        GeneralScheme {
            table: self.0.iter().map(|&p| vec![1.0 - p, p]).collect(),
        }
    }
}

/// General scheme: row `i` is the signal distribution in state `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralScheme {
    table: Vec<Vec<f64>>,
}

impl GeneralScheme {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let signals = table.first().map_or(0, Vec::len);
        if signals == 0 {
            return Err(ModelError::InvalidScheme("no signals".into()));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != signals {
                return Err(ModelError::InvalidScheme(format!(
                    "row {i} has {} signals, expected {signals}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(ModelError::InvalidScheme(format!("row {i} has a negative entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > SIMPLEX_TOL {
                return Err(ModelError::InvalidScheme(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { table })
    }

    pub fn signal_count(&self) -> usize {
        self.table[0].len()
    }

    pub fn num_states(&self) -> usize {
        self.table.len()
    }

    pub fn prob(&self, state: usize, signal: usize) -> f64 {
        self.table[state][signal]
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.table[state]
    }
}

/// The user's belief over states after a signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior(Vec<f64>);

impl Posterior {
    pub fn new(belief: Vec<f64>) -> Result<Self> {
        check_simplex("posterior", &belief)?;
        Ok(Self(belief))
    }

    pub fn belief(&self) -> &[f64] {
        &self.0
    }
}

/// Bayes posterior of the user (prior `λ†`) after observing `signal`.
pub fn posterior(inst: &Instance, scheme: &GeneralScheme, signal: usize) -> Result<Posterior> {
    let m = inst.num_states();
    if scheme.num_states() != m {
        return Err(ModelError::DimensionMismatch {
            field: "scheme",
            expected: m,
            found: scheme.num_states(),
        });
    }
    if signal >= scheme.signal_count() {
        return Err(ModelError::InvalidScheme(format!(
            "signal {signal} out of range for {} signals",
            scheme.signal_count()
        )));
    }
    let joint: Vec<f64> = (0..m)
        .map(|i| inst.user_belief[i] * scheme.prob(i, signal))
        .collect();
    let marginal: f64 = joint.iter().sum();
    if marginal <= 0.0 {
        return Err(ModelError::ZeroProbabilitySignal { signal });
    }
    Ok(Posterior(joint.into_iter().map(|x| x / marginal).collect()))
}

/// Best response to a posterior; indifference resolves to `Accept`.
pub fn best_response(inst: &Instance, post: &Posterior) -> Action {
    let (mut gain, mut scale) = (0.0, 0.0);
    for (q, d) in post.0.iter().zip(&inst.utility_gap) {
        gain += q * d;
        scale += q * d.abs();
    }
    if gain >= -PERSUASION_TOL * scale {
        Action::Accept
    } else {
        Action::Decline
    }
}

/// Response to a signal whose per-state likelihoods are `column`.
///
/// Equivalent to `best_response(posterior(..))` whenever the signal has
/// positive probability under `λ†`. A zero-probability signal makes the
/// weighted sum exactly zero, which resolves to `Accept`.
pub(crate) fn response_to_column(omega: &[f64], column: impl Iterator<Item = f64>) -> Action {
    let (mut gain, mut scale) = (0.0, 0.0);
    for (w, p) in omega.iter().zip(column) {
        gain += w * p;
        scale += w.abs() * p;
    }
    if gain >= -PERSUASION_TOL * scale {
        Action::Accept
    } else {
        Action::Decline
    }
}

/// `Σ ω(i)π(i)`: nonnegative exactly for persuasive schemes.
pub fn ic_slack(inst: &Instance, scheme: &DirectScheme) -> f64 {
    inst.omega.iter().zip(scheme.probs()).map(|(w, p)| w * p).sum()
}

/// Whether the recommendation "action 1" is followed, i.e. `Σ ω(i)π(i) ≥ 0` up to tolerance.
pub fn is_persuasive(inst: &Instance, scheme: &DirectScheme) -> bool {
    response_to_column(&inst.omega, scheme.probs().iter().copied()).is_accept()
}

/// `Σ λ(i)v(i)π(i)`: the platform's value when every recommendation is followed.
pub fn recommended_value(inst: &Instance, scheme: &DirectScheme) -> f64 {
    scheme
        .probs()
        .iter()
        .enumerate()
        .map(|(i, p)| inst.value_weight(i) * p)
        .sum()
}

/// Probability `Σ λ(i)π(i)` that a direct scheme emits the action-1 signal.
pub fn recommend_probability(inst: &Instance, scheme: &DirectScheme) -> f64 {
    inst.prior.iter().zip(scheme.probs()).map(|(l, p)| l * p).sum()
}

/// Actions the user takes after signal 0 and signal 1 of a direct scheme.
pub fn direct_responses(inst: &Instance, scheme: &DirectScheme) -> [Action; 2] {
    [
        response_to_column(&inst.omega, scheme.probs().iter().map(|p| 1.0 - p)),
        response_to_column(&inst.omega, scheme.probs().iter().copied()),
    ]
}

/// Expected per-round platform payoff `U(π)`, evaluating both signals.
pub fn expected_platform_utility(inst: &Instance, scheme: &DirectScheme) -> f64 {
    let [on_zero, on_one] = direct_responses(inst, scheme);
    scheme
        .probs()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let followed = if on_one.is_accept() { p } else { 0.0 }
                + if on_zero.is_accept() { 1.0 - p } else { 0.0 };
            inst.value_weight(i) * followed
        })
        .sum()
}

/// Actions the user takes after each signal of a general scheme.
pub fn general_responses(inst: &Instance, scheme: &GeneralScheme) -> Vec<Action> {
    (0..scheme.signal_count())
        .map(|s| response_to_column(&inst.omega, (0..scheme.num_states()).map(|i| scheme.prob(i, s))))
        .collect()
}

/// Expected per-round platform payoff of a general scheme.
pub fn expected_platform_utility_general(inst: &Instance, scheme: &GeneralScheme) -> f64 {
    let responses = general_responses(inst, scheme);
    (0..inst.num_states())
        .map(|i| {
            let followed: f64 = responses
                .iter()
                .enumerate()
                .filter(|(_, a)| a.is_accept())
                .map(|(s, _)| scheme.prob(i, s))
                .sum();
            inst.value_weight(i) * followed
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> Instance {
        Instance::new(vec![0.5, 0.5], vec![2.0, -4.0]).unwrap()
    }

    #[test]
    fn validation_examples() {
        let inst = two_state();
        assert_eq!(inst.omega(), &[1.0, -2.0]);
        assert_eq!(
            Instance::new(vec![0.5, 0.5], vec![-2.0, -4.0]),
            Err(ModelError::AssumptionOneViolated)
        );
        assert!(matches!(
            Instance::new(vec![0.5, 0.5], vec![2.0, -1.0]),
            Err(ModelError::AssumptionTwoViolated { .. })
        ));
        assert!(matches!(
            Instance::new(vec![0.5, 0.6], vec![2.0, -4.0]),
            Err(ModelError::PriorNotSimplex { which: "prior", .. })
        ));
        assert!(matches!(
            Instance::builder(vec![0.5, 0.5], vec![2.0, -4.0])
                .user_belief(vec![0.5, 0.4])
                .build(),
            Err(ModelError::PriorNotSimplex { which: "user_belief", .. })
        ));
        assert!(matches!(
            Instance::builder(vec![0.5, 0.5], vec![2.0, -4.0])
                .platform_value(vec![1.5, 1.0])
                .build(),
            Err(ModelError::ValueOutOfRange { state: 0, .. })
        ));
        assert!(matches!(
            Instance::new(vec![0.5, 0.5], vec![1.0, -1e14]),
            Err(ModelError::OmegaOutOfRange { state: 1, .. })
        ));
        assert_eq!(
            Instance::new(vec![], vec![]).unwrap_err(),
            ModelError::PriorNotSimplex {
                which: "prior",
                reason: "no entries".into()
            }
        );
    }

    #[test]
    fn omega_examples() {
        let inst = Instance::new(vec![0.01, 0.99], vec![1.0, -0.01 / 0.5]).unwrap();
        let w = omega(&inst);
        assert!((w[0] - 0.01).abs() < 1e-15);
        assert!((w[1] + 0.0198).abs() < 1e-15);
        let zero = Instance::new(vec![0.5, 0.5], vec![0.0, 0.0]);
        assert_eq!(zero, Err(ModelError::AssumptionOneViolated));
    }

    #[test]
    fn posterior_examples() {
        let inst = two_state();
        let post = posterior(&inst, &DirectScheme::new(vec![1.0, 0.5]).unwrap().to_general(), 1).unwrap();
        assert!((post.belief()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((post.belief()[1] - 1.0 / 3.0).abs() < 1e-15);

        let inst3 = Instance::new(vec![0.2, 0.3, 0.5], vec![1.0, -1.0, -1.0]).unwrap();
        let post = posterior(&inst3, &DirectScheme::new(vec![1.0, 0.5, 0.0]).unwrap().to_general(), 1).unwrap();
        let expected = [0.2 / 0.35, 0.15 / 0.35, 0.0];
        for (a, b) in post.belief().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }

        let column = GeneralScheme::new(vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let post = posterior(&inst3, &column, 0).unwrap();
        assert_eq!(post.belief(), &[0.0, 1.0, 0.0]);
        let post = posterior(&inst3, &column, 1).unwrap();
        assert!((post.belief()[0] - 0.2 / 0.7).abs() < 1e-15);

        let never = DirectScheme::zeros(2).to_general();
        assert_eq!(
            posterior(&inst, &never, 1),
            Err(ModelError::ZeroProbabilitySignal { signal: 1 })
        );
    }

    #[test]
    fn best_response_examples() {
        let inst = two_state();
        let resp = |b: Vec<f64>| best_response(&inst, &Posterior::new(b).unwrap());
        assert_eq!(resp(vec![2.0 / 3.0, 1.0 / 3.0]), Action::Accept);
        assert_eq!(resp(vec![0.5, 0.5]), Action::Decline);
        assert_eq!(resp(vec![1.0, 0.0]), Action::Accept);
    }

    #[test]
    fn persuasiveness_examples() {
        let inst = two_state();
        let p = |v: Vec<f64>| DirectScheme::new(v).unwrap();
        assert!(is_persuasive(&inst, &p(vec![1.0, 0.4])));
        assert!(!is_persuasive(&inst, &p(vec![1.0, 0.6])));
        assert!(is_persuasive(&inst, &p(vec![1.0, 0.5])));
    }

    #[test]
    fn utility_examples() {
        let inst = two_state();
        let p = |v: Vec<f64>| DirectScheme::new(v).unwrap();
        assert!((expected_platform_utility(&inst, &p(vec![1.0, 0.5])) - 0.75).abs() < 1e-15);
        assert_eq!(expected_platform_utility(&inst, &DirectScheme::zeros(2)), 0.0);
        assert_eq!(expected_platform_utility(&inst, &p(vec![1.0, 0.6])), 0.0);
        let general = p(vec![1.0, 0.5]).to_general();
        assert!((expected_platform_utility_general(&inst, &general) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn scheme_validation() {
        assert!(DirectScheme::new(vec![1.0 + 1e-13, -1e-13]).is_ok());
        assert!(DirectScheme::new(vec![1.1]).is_err());
        assert!(DirectScheme::new(vec![f64::NAN]).is_err());
        assert!(GeneralScheme::new(vec![vec![0.5, 0.4]]).is_err());
        assert!(GeneralScheme::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
    }
}
