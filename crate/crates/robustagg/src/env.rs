//! Binary-state information structures with conditionally independent expert signals.
//!
//! An environment has two candidate states `theta1 <= theta2` (each a Bernoulli mean
//! for the outcome), a prior `lambda2` on the high state, and one binary signal per
//! expert whose conditional law is given by its low-signal probabilities under each
//! state. Everything downstream (reports, joint signal probabilities, the omniscient
//! Bayesian benchmark) is computed from this seven-parameter form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Joint signal probabilities below this threshold are treated as zero: the profile
/// carries no regret weight and its posterior is undefined.
pub const ZERO_PROBABILITY_THRESHOLD: f64 = 1e-15;

/// Weights of a mixture must sum to 1 within this tolerance.
pub const MIXTURE_WEIGHT_TOLERANCE: f64 = 1e-12;

/// One expert's binary signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signal {
    Low,
    High,
}

impl Signal {
    /// Both signals, in enumeration order.
    pub const ALL: [Signal; 2] = [Signal::Low, Signal::High];
}

/// One signal per expert.
pub type SignalProfile = (Signal, Signal);

/// The four profiles in row-major (s1, s2) order: LL, LH, HL, HH.
pub const ALL_PROFILES: [SignalProfile; 4] = [
    (Signal::Low, Signal::Low),
    (Signal::Low, Signal::High),
    (Signal::High, Signal::Low),
    (Signal::High, Signal::High),
];

/// Compact label for a profile, e.g. "LH" for (Low, High).
pub fn profile_label(profile: SignalProfile) -> &'static str {
    match profile {
        (Signal::Low, Signal::Low) => "LL",
        (Signal::Low, Signal::High) => "LH",
        (Signal::High, Signal::Low) => "HL",
        (Signal::High, Signal::High) => "HH",
    }
}

/// Expert identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expert {
    One,
    Two,
}

/// Errors raised by environment construction and queries.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    /// A field lies outside [0, 1].
    #[error("field {field} = {value} is outside [0, 1]")]
    FieldRange { field: &'static str, value: f64 },
    /// States are not sorted: theta1 > theta2.
    #[error("states out of order: theta1 = {theta1} > theta2 = {theta2}")]
    StateOrder { theta1: f64, theta2: f64 },
    /// The requested signal (or profile) never occurs; the caller must skip it.
    #[error("signal or profile has zero probability")]
    ZeroProbabilitySignal,
    /// theta1 = theta2, so the unit rescaling is undefined.
    #[error("degenerate state space: theta1 = theta2 = {theta}")]
    DegenerateStateSpace { theta: f64 },
    /// Mixture weights do not sum to 1 within tolerance.
    #[error("mixture weights sum to {sum}, expected 1 within {MIXTURE_WEIGHT_TOLERANCE:e}")]
    WeightSum { sum: f64 },
    /// A mixture weight is negative.
    #[error("mixture component {index} has negative weight {weight}")]
    NegativeWeight { index: usize, weight: f64 },
}

fn check_unit(field: &'static str, value: f64) -> Result<(), EnvError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(EnvError::FieldRange { field, value })
    }
}

/// A binary-state environment with two conditionally independent binary-signal experts.
///
/// `p*_low` is the chance expert i sees the low signal in state `theta1`;
/// `q*_low` is the same chance in state `theta2`. High-signal probabilities are the
/// complements, so each conditional row sums to 1 by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEnv")]
pub struct BinaryCIEnvironment {
    theta1: f64,
    theta2: f64,
    lambda2: f64,
    p1_low: f64,
    p2_low: f64,
    q1_low: f64,
    q2_low: f64,
}

#[derive(Deserialize)]
struct RawEnv {
    theta1: f64,
    theta2: f64,
    lambda2: f64,
    p1_low: f64,
    p2_low: f64,
    q1_low: f64,
    q2_low: f64,
}

impl TryFrom<RawEnv> for BinaryCIEnvironment {
    type Error = EnvError;

    fn try_from(raw: RawEnv) -> Result<Self, EnvError> {
        BinaryCIEnvironment::new(
            raw.theta1, raw.theta2, raw.lambda2, raw.p1_low, raw.p2_low, raw.q1_low, raw.q2_low,
        )
    }
}

impl BinaryCIEnvironment {
    /// Validate and construct an environment.
    ///
    /// Arguments follow the canonical parameter order
    /// (theta1, theta2, lambda2, p1_low, p2_low, q1_low, q2_low).
    pub fn new(
        theta1: f64,
        theta2: f64,
        lambda2: f64,
        p1_low: f64,
        p2_low: f64,
        q1_low: f64,
        q2_low: f64,
    ) -> Result<Self, EnvError> {
        check_unit("theta1", theta1)?;
        check_unit("theta2", theta2)?;
        check_unit("lambda2", lambda2)?;
        check_unit("p1_low", p1_low)?;
        check_unit("p2_low", p2_low)?;
        check_unit("q1_low", q1_low)?;
        check_unit("q2_low", q2_low)?;
        if theta1 > theta2 {
            return Err(EnvError::StateOrder { theta1, theta2 });
        }
        Ok(Self { theta1, theta2, lambda2, p1_low, p2_low, q1_low, q2_low })
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn p1_low(&self) -> f64 {
        self.p1_low
    }

    pub fn p2_low(&self) -> f64 {
        self.p2_low
    }

    pub fn q1_low(&self) -> f64 {
        self.q1_low
    }

    pub fn q2_low(&self) -> f64 {
        self.q2_low
    }

    /// Prior mean of the state: (1-lambda2)*theta1 + lambda2*theta2.
    pub fn prior_mean(&self) -> f64 {
        (1.0 - self.lambda2) * self.theta1 + self.lambda2 * self.theta2
    }

    /// True when theta1 = theta2, in which case every forecast question is trivial.
    pub fn is_degenerate(&self) -> bool {
        self.theta1 == self.theta2
    }

    /// P(signal | state) for one expert; `high_state` selects theta2's row.
    fn signal_prob(&self, expert: Expert, signal: Signal, high_state: bool) -> f64 {
        let low = match (expert, high_state) {
            (Expert::One, false) => self.p1_low,
            (Expert::Two, false) => self.p2_low,
            (Expert::One, true) => self.q1_low,
            (Expert::Two, true) => self.q2_low,
        };
        match signal {
            Signal::Low => low,
            Signal::High => 1.0 - low,
        }
    }

    /// Marginal probability that the expert observes the signal.
    pub fn signal_marginal(&self, expert: Expert, signal: Signal) -> f64 {
        (1.0 - self.lambda2) * self.signal_prob(expert, signal, false)
            + self.lambda2 * self.signal_prob(expert, signal, true)
    }

    /// The expert's posterior mean of the state after observing the signal.
    pub fn report(&self, expert: Expert, signal: Signal) -> Result<f64, EnvError> {
        let w1 = (1.0 - self.lambda2) * self.signal_prob(expert, signal, false);
        let w2 = self.lambda2 * self.signal_prob(expert, signal, true);
        let total = w1 + w2;
        if total < ZERO_PROBABILITY_THRESHOLD {
            return Err(EnvError::ZeroProbabilitySignal);
        }
        Ok((w1 * self.theta1 + w2 * self.theta2) / total)
    }

    /// Joint probability of a signal profile under conditional independence.
    pub fn joint_signal_prob(&self, profile: SignalProfile) -> f64 {
        let (s1, s2) = profile;
        (1.0 - self.lambda2)
            * self.signal_prob(Expert::One, s1, false)
            * self.signal_prob(Expert::Two, s2, false)
            + self.lambda2
                * self.signal_prob(Expert::One, s1, true)
                * self.signal_prob(Expert::Two, s2, true)
    }

    /// Joint probability of a signal profile conditional on one state;
    /// `high_state` selects theta2.
    pub fn joint_signal_prob_in_state(&self, profile: SignalProfile, high_state: bool) -> f64 {
        let (s1, s2) = profile;
        self.signal_prob(Expert::One, s1, high_state)
            * self.signal_prob(Expert::Two, s2, high_state)
    }

    /// The omniscient Bayesian forecast after observing both signals.
    pub fn bayes_forecast(&self, profile: SignalProfile) -> Result<f64, EnvError> {
        let (s1, s2) = profile;
        let w1 = (1.0 - self.lambda2)
            * self.signal_prob(Expert::One, s1, false)
            * self.signal_prob(Expert::Two, s2, false);
        let w2 = self.lambda2
            * self.signal_prob(Expert::One, s1, true)
            * self.signal_prob(Expert::Two, s2, true);
        let total = w1 + w2;
        if total < ZERO_PROBABILITY_THRESHOLD {
            return Err(EnvError::ZeroProbabilitySignal);
        }
        Ok((w1 * self.theta1 + w2 * self.theta2) / total)
    }

    /// Affine reduction to the unit state space {0, 1}.
    ///
    /// Returns `(unit_env, delta, offset)` with `delta = theta2 - theta1` and
    /// `offset = theta1`; signal probabilities and the prior carry over unchanged,
    /// and reports satisfy `x = offset + delta * p` where `p` is the unit-env report.
    pub fn rescale_to_unit(&self) -> Result<(BinaryCIEnvironment, f64, f64), EnvError> {
        if self.is_degenerate() {
            return Err(EnvError::DegenerateStateSpace { theta: self.theta1 });
        }
        let unit = BinaryCIEnvironment {
            theta1: 0.0,
            theta2: 1.0,
            lambda2: self.lambda2,
            p1_low: self.p1_low,
            p2_low: self.p2_low,
            q1_low: self.q1_low,
            q2_low: self.q2_low,
        };
        Ok((unit, self.theta2 - self.theta1, self.theta1))
    }
}

/// One weighted component of a mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub env: BinaryCIEnvironment,
}

/// A finite mixture of environments (an adversary's mixed strategy).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixture")]
pub struct MixtureEnvironment {
    components: Vec<MixtureComponent>,
}

#[derive(Deserialize)]
struct RawMixture {
    components: Vec<MixtureComponent>,
}

impl TryFrom<RawMixture> for MixtureEnvironment {
    type Error = EnvError;

    fn try_from(raw: RawMixture) -> Result<Self, EnvError> {
        MixtureEnvironment::new(raw.components)
    }
}

impl MixtureEnvironment {
    /// Validate weights (nonnegative, summing to 1) and construct a mixture.
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self, EnvError> {
        for (index, c) in components.iter().enumerate() {
            if !(c.weight >= 0.0) {
                return Err(EnvError::NegativeWeight { index, weight: c.weight });
            }
        }
        let sum: f64 = components.iter().map(|c| c.weight).sum();
        if (sum - 1.0).abs() > MIXTURE_WEIGHT_TOLERANCE {
            return Err(EnvError::WeightSum { sum });
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }
}

/// An information structure in which expert 2 observes the state through a binary
/// signal and expert 1 observes only a garbled copy of expert 2's signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBlackwellEnv")]
pub struct BlackwellEnvironment {
    theta1: f64,
    theta2: f64,
    lambda2: f64,
    r_low: f64,
    r_high: f64,
    #[serde(rename = "g_LL")]
    g_ll: f64,
    #[serde(rename = "g_HL")]
    g_hl: f64,
}

#[derive(Deserialize)]
struct RawBlackwellEnv {
    theta1: f64,
    theta2: f64,
    lambda2: f64,
    r_low: f64,
    r_high: f64,
    #[serde(rename = "g_LL")]
    g_ll: f64,
    #[serde(rename = "g_HL")]
    g_hl: f64,
}

impl TryFrom<RawBlackwellEnv> for BlackwellEnvironment {
    type Error = EnvError;

    fn try_from(raw: RawBlackwellEnv) -> Result<Self, EnvError> {
        BlackwellEnvironment::new(
            raw.theta1, raw.theta2, raw.lambda2, raw.r_low, raw.r_high, raw.g_ll, raw.g_hl,
        )
    }
}

impl BlackwellEnvironment {
    /// Validate and construct.
    ///
    /// `r_low`/`r_high` are the informed expert's low-signal chances in states
    /// theta1/theta2; `g_ll`/`g_hl` are the garbling rows P(s1 = Low | s2 = Low)
    /// and P(s1 = Low | s2 = High).
    pub fn new(
        theta1: f64,
        theta2: f64,
        lambda2: f64,
        r_low: f64,
        r_high: f64,
        g_ll: f64,
        g_hl: f64,
    ) -> Result<Self, EnvError> {
        check_unit("theta1", theta1)?;
        check_unit("theta2", theta2)?;
        check_unit("lambda2", lambda2)?;
        check_unit("r_low", r_low)?;
        check_unit("r_high", r_high)?;
        check_unit("g_LL", g_ll)?;
        check_unit("g_HL", g_hl)?;
        if theta1 > theta2 {
            return Err(EnvError::StateOrder { theta1, theta2 });
        }
        Ok(Self { theta1, theta2, lambda2, r_low, r_high, g_ll, g_hl })
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn r_low(&self) -> f64 {
        self.r_low
    }

    pub fn r_high(&self) -> f64 {
        self.r_high
    }

    pub fn g_ll(&self) -> f64 {
        self.g_ll
    }

    pub fn g_hl(&self) -> f64 {
        self.g_hl
    }

    /// Prior mean of the state.
    pub fn prior_mean(&self) -> f64 {
        (1.0 - self.lambda2) * self.theta1 + self.lambda2 * self.theta2
    }

    /// P(s1 = Low | s2).
    fn garble_low(&self, informed: Signal) -> f64 {
        match informed {
            Signal::Low => self.g_ll,
            Signal::High => self.g_hl,
        }
    }

    /// The equivalent conditionally independent view of this structure.
    ///
    /// Expert 2 keeps `r_low`/`r_high`; expert 1's state-conditional low-signal
    /// chance is the garbling applied to expert 2's conditional row. The joint
    /// law differs from the CI product (the signals are correlated through s2),
    /// so this view is only valid for marginal quantities such as reports.
    fn marginal_env(&self) -> BinaryCIEnvironment {
        let p1_low = self.g_ll * self.r_low + self.g_hl * (1.0 - self.r_low);
        let q1_low = self.g_ll * self.r_high + self.g_hl * (1.0 - self.r_high);
        BinaryCIEnvironment {
            theta1: self.theta1,
            theta2: self.theta2,
            lambda2: self.lambda2,
            p1_low,
            p2_low: self.r_low,
            q1_low,
            q2_low: self.r_high,
        }
    }

    /// The expert's posterior mean of the state after observing the signal.
    pub fn report(&self, expert: Expert, signal: Signal) -> Result<f64, EnvError> {
        self.marginal_env().report(expert, signal)
    }

    /// Joint probability of a profile: sum over states of
    /// lambda(theta) * pi2(s2|theta) * g(s1|s2).
    pub fn joint_signal_prob(&self, profile: SignalProfile) -> f64 {
        let (s1, s2) = profile;
        let g = match s1 {
            Signal::Low => self.garble_low(s2),
            Signal::High => 1.0 - self.garble_low(s2),
        };
        let pi_low = match s2 {
            Signal::Low => self.r_low,
            Signal::High => 1.0 - self.r_low,
        };
        let pi_high = match s2 {
            Signal::Low => self.r_high,
            Signal::High => 1.0 - self.r_high,
        };
        ((1.0 - self.lambda2) * pi_low + self.lambda2 * pi_high) * g
    }
}
