//! Aggregation rules that map two probability reports to one forecast.
//!
//! Every rule lives behind the [`AggregatorSpec`] enumeration and is dispatched by
//! [`AggregatorSpec::aggregate`]. All rules are pure functions of the two reports
//! (some additionally of a prior-mean proxy); boundary reports are resolved by the
//! conventions documented on each variant rather than by errors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ratio-form rules clamp reports into [CLAMP, 1 - CLAMP] so products of
/// complementary terms keep denominators strictly positive.
pub const REPORT_CLAMP: f64 = 1e-12;

/// Disagreement threshold beyond which the precision-weighted rule switches to
/// square-root precision weights.
pub const PRECISION_SQRT_THRESHOLD: f64 = 0.4;

/// Errors raised by aggregator parameter validation and precision queries.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregatorError {
    /// A rule parameter lies outside its documented range.
    #[error("parameter {parameter} = {value} is outside [{low}, {high}]")]
    ParameterRange { parameter: &'static str, value: f64, low: f64, high: f64 },
    /// precision(x) is infinite at x in {0, 1}.
    #[error("precision is unbounded at boundary forecast {value}")]
    BoundaryForecast { value: f64 },
}

/// How a rule obtains its prior-mean proxy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuPolicy {
    /// The arithmetic mean of the two reports, (x1 + x2) / 2.
    ArithmeticMean,
    /// A supplied prior mean.
    Known(f64),
}

/// An aggregation rule with its parameters.
///
/// The JSON form is internally tagged by `rule`, e.g.
/// `{"rule": "log_odds", "alpha": 0.585}` or
/// `{"rule": "kww", "lambda": 0.8, "mu_policy": {"known": 0.5}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum AggregatorSpec {
    /// logit(f) = alpha * (logit(x1) + logit(x2)).
    LogOdds { alpha: f64 },
    /// logit(f) = alpha * (logit(x1) + logit(x2)) - gamma * logit(mu).
    GenLogOdds { alpha: f64, gamma: f64, mu: f64 },
    /// (x1 + x2) / 2.
    SimpleAverage,
    /// The fixed-prior Bayesian form g(mu_hat, x1, x2) with mu_hat from the policy.
    AveragePrior { mu_policy: MuPolicy },
    /// g(ep(x1, x2), x1, x2) with the empirical prior proxy
    /// ep(x1, x2) = 0.49 (x1 + x2) + 0.02 * I(x1 + x2 > 1).
    HeuristicPrior,
    /// Prior-weighted product rule with exponent 2 * lambda - 1 on the proxy.
    Kww { lambda: f64, mu_policy: MuPolicy },
    /// Precision-weighted average with phi(x) = 1 / (x (1 - x)); square-root
    /// weights when |x1 - x2| > 0.4.
    PrecisionWeighted,
    /// Ignores both reports.
    Constant { c: f64 },
    /// Returns x2 unchanged: the reference rule when expert 2's signal refines
    /// expert 1's. Intentionally asymmetric, unlike every other variant.
    #[serde(rename = "follow_expert_2")]
    FollowExpert2,
}

/// Natural logarithm of the odds, with the extended-real convention
/// logit(0) = -inf and logit(1) = +inf.
pub fn logit(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        (p / (1.0 - p)).ln()
    }
}

/// Inverse logit, stable on both tails.
pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Forecast precision phi(x) = 1 / (x (1 - x)).
pub fn precision(x: f64) -> Result<f64, AggregatorError> {
    if x <= 0.0 || x >= 1.0 {
        return Err(AggregatorError::BoundaryForecast { value: x });
    }
    Ok(1.0 / (x * (1.0 - x)))
}

fn clamp_report(x: f64) -> f64 {
    x.clamp(REPORT_CLAMP, 1.0 - REPORT_CLAMP)
}

/// Weighted logit sum in extended reals, returned through the sigmoid.
///
/// Terms with zero weight are dropped. Infinite terms of one sign dominate
/// (output 0 or 1); opposite infinities cancel to a 0.5 output.
fn weighted_logit_aggregate(terms: &[(f64, f64)]) -> f64 {
    let mut sum = 0.0;
    let mut pos_inf = false;
    let mut neg_inf = false;
    for &(weight, p) in terms {
        if weight == 0.0 {
            continue;
        }
        let term = weight * logit(p);
        if term == f64::INFINITY {
            pos_inf = true;
        } else if term == f64::NEG_INFINITY {
            neg_inf = true;
        } else {
            sum += term;
        }
    }
    match (pos_inf, neg_inf) {
        (true, true) => 0.5,
        (true, false) => 1.0,
        (false, true) => 0.0,
        (false, false) => sigmoid(sum),
    }
}

/// The fixed-prior Bayesian form: posterior of a unit state space under prior
/// mean `mu` and independent reports x1, x2. Inputs are clamped to the interior.
fn fixed_prior_bayes(mu: f64, x1: f64, x2: f64) -> f64 {
    let x1 = clamp_report(x1);
    let x2 = clamp_report(x2);
    let mu = clamp_report(mu);
    let num = x1 * x2 * (1.0 - mu);
    num / (num + (1.0 - x1) * (1.0 - x2) * mu)
}

/// Empirical prior proxy ep(x1, x2) = 0.49 (x1 + x2) + 0.02 * I(x1 + x2 > 1).
fn empirical_prior(x1: f64, x2: f64) -> f64 {
    0.49 * (x1 + x2) + if x1 + x2 > 1.0 { 0.02 } else { 0.0 }
}

fn precision_weighted(x1: f64, x2: f64) -> f64 {
    if x1 == x2 {
        // Equal weights average to the common report; skip the roundoff.
        return x1;
    }
    let extreme1 = x1 == 0.0 || x1 == 1.0;
    let extreme2 = x2 == 0.0 || x2 == 1.0;
    // An extreme report is infinitely precise: follow it; two conflicting
    // extreme reports cancel.
    match (extreme1, extreme2) {
        (true, true) => return 0.5,
        (true, false) => return x1,
        (false, true) => return x2,
        (false, false) => {}
    }
    let phi1 = 1.0 / (x1 * (1.0 - x1));
    let phi2 = 1.0 / (x2 * (1.0 - x2));
    let (w1, w2) = if (x1 - x2).abs() > PRECISION_SQRT_THRESHOLD {
        (phi1.sqrt(), phi2.sqrt())
    } else {
        (phi1, phi2)
    };
    (w1 * x1 + w2 * x2) / (w1 + w2)
}

impl MuPolicy {
    fn resolve(&self, x1: f64, x2: f64) -> f64 {
        match *self {
            MuPolicy::ArithmeticMean => (x1 + x2) / 2.0,
            MuPolicy::Known(mu) => mu,
        }
    }
}

impl AggregatorSpec {
    /// Check that every parameter lies in its documented range.
    pub fn validate(&self) -> Result<(), AggregatorError> {
        let check = |parameter: &'static str, value: f64, low: f64, high: f64| {
            if value.is_finite() && value >= low && value <= high {
                Ok(())
            } else {
                Err(AggregatorError::ParameterRange { parameter, value, low, high })
            }
        };
        match *self {
            AggregatorSpec::LogOdds { alpha } => check("alpha", alpha, 0.0, 1.0),
            AggregatorSpec::GenLogOdds { alpha, gamma, mu } => {
                check("alpha", alpha, 0.0, 1.0)?;
                check("gamma", gamma, -1.0, 1.0)?;
                check("mu", mu, 0.0, 1.0)
            }
            AggregatorSpec::SimpleAverage
            | AggregatorSpec::HeuristicPrior
            | AggregatorSpec::PrecisionWeighted
            | AggregatorSpec::FollowExpert2 => Ok(()),
            AggregatorSpec::AveragePrior { mu_policy } => match mu_policy {
                MuPolicy::Known(mu) => check("mu", mu, 0.0, 1.0),
                MuPolicy::ArithmeticMean => Ok(()),
            },
            AggregatorSpec::Kww { lambda, mu_policy } => {
                check("lambda", lambda, 0.0, 1.0)?;
                match mu_policy {
                    MuPolicy::Known(mu) => check("mu", mu, 0.0, 1.0),
                    MuPolicy::ArithmeticMean => Ok(()),
                }
            }
            AggregatorSpec::Constant { c } => check("c", c, 0.0, 1.0),
        }
    }

    /// Combine two reports into one forecast.
    pub fn aggregate(&self, x1: f64, x2: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&x1) && (0.0..=1.0).contains(&x2));
        match *self {
            AggregatorSpec::LogOdds { alpha } => {
                weighted_logit_aggregate(&[(alpha, x1), (alpha, x2)])
            }
            AggregatorSpec::GenLogOdds { alpha, gamma, mu } => {
                // The prior slot is a rule parameter, not an expert report, so the
                // boundary-infinity conventions do not apply to it; like the other
                // prior-proxy rules it is clamped, keeping the correction finite
                // even when the supplied mean sits exactly at 0 or 1.
                weighted_logit_aggregate(&[(alpha, x1), (alpha, x2), (-gamma, clamp_report(mu))])
            }
            AggregatorSpec::SimpleAverage => (x1 + x2) / 2.0,
            AggregatorSpec::AveragePrior { mu_policy } => {
                fixed_prior_bayes(mu_policy.resolve(x1, x2), x1, x2)
            }
            AggregatorSpec::HeuristicPrior => fixed_prior_bayes(empirical_prior(x1, x2), x1, x2),
            AggregatorSpec::Kww { lambda, mu_policy } => {
                let x1 = clamp_report(x1);
                let x2 = clamp_report(x2);
                let mu = clamp_report(mu_policy.resolve(x1, x2));
                let exponent = 2.0 * lambda - 1.0;
                let favor = (1.0 - mu).powf(exponent) * x1 * x2;
                let against = mu.powf(exponent) * (1.0 - x1) * (1.0 - x2);
                favor / (favor + against)
            }
            AggregatorSpec::PrecisionWeighted => precision_weighted(x1, x2),
            AggregatorSpec::Constant { c } => c,
            AggregatorSpec::FollowExpert2 => x2,
        }
    }

    /// Whether this rule's output depends on a supplied prior mean, i.e. the
    /// environment's mean must be visible to evaluate it honestly.
    pub fn requires_prior_mean(&self) -> bool {
        matches!(
            *self,
            AggregatorSpec::GenLogOdds { .. }
                | AggregatorSpec::AveragePrior { mu_policy: MuPolicy::Known(_) }
                | AggregatorSpec::Kww { mu_policy: MuPolicy::Known(_), .. }
        )
    }

    /// Rebind every supplied-prior slot to `mu`, leaving other parameters alone.
    pub fn with_prior_mean(&self, mu: f64) -> Self {
        match *self {
            AggregatorSpec::GenLogOdds { alpha, gamma, .. } => {
                AggregatorSpec::GenLogOdds { alpha, gamma, mu }
            }
            AggregatorSpec::AveragePrior { mu_policy: MuPolicy::Known(_) } => {
                AggregatorSpec::AveragePrior { mu_policy: MuPolicy::Known(mu) }
            }
            AggregatorSpec::Kww { lambda, mu_policy: MuPolicy::Known(_) } => {
                AggregatorSpec::Kww { lambda, mu_policy: MuPolicy::Known(mu) }
            }
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_log_odds_neutral_inputs() {
        for alpha in [0.0, 0.3, 0.585, 1.0] {
            let spec = AggregatorSpec::LogOdds { alpha };
            assert_eq!(spec.aggregate(0.5, 0.5), 0.5);
        }
    }

    #[test]
    fn test_log_odds_zero_alpha() {
        let spec = AggregatorSpec::LogOdds { alpha: 0.0 };
        for (x1, x2) in [(0.0, 0.0), (0.0, 1.0), (0.3, 0.9), (1.0, 1.0)] {
            assert_eq!(spec.aggregate(x1, x2), 0.5);
        }
    }

    #[test]
    fn test_log_odds_unit_alpha_odds_product() {
        // Odds 8 from each report multiply to 64.
        let spec = AggregatorSpec::LogOdds { alpha: 1.0 };
        let out = spec.aggregate(8.0 / 9.0, 8.0 / 9.0);
        assert!((out - 64.0 / 65.0).abs() < 1e-12);
    }

    #[test]
    fn test_log_odds_boundary_conventions() {
        let spec = AggregatorSpec::LogOdds { alpha: 0.585 };
        assert_eq!(spec.aggregate(0.0, 1.0), 0.5);
        assert_eq!(spec.aggregate(1.0, 0.0), 0.5);
        assert_eq!(spec.aggregate(1.0, 0.3), 1.0);
        assert_eq!(spec.aggregate(0.0, 0.3), 0.0);
        assert_eq!(spec.aggregate(0.0, 0.0), 0.0);
        assert_eq!(spec.aggregate(1.0, 1.0), 1.0);
    }

    #[test]
    fn test_log_odds_worst_instance_reports_interior() {
        let spec = AggregatorSpec::LogOdds { alpha: 0.585 };
        let out = spec.aggregate(0.21097, 0.87002);
        assert!(out > 0.0 && out < 1.0);
        // logit identity on finite inputs
        let expect = 0.585 * (logit(0.21097) + logit(0.87002));
        assert!((logit(out) - expect).abs() < 1e-9);
    }

    #[test]
    fn test_gen_log_odds_logit_identity() {
        let spec = AggregatorSpec::GenLogOdds { alpha: 0.656089, gamma: 0.498268, mu: 0.49908 };
        let out = spec.aggregate(0.18165, 0.7957);
        let expect = 0.656089 * (logit(0.18165) + logit(0.7957)) - 0.498268 * logit(0.49908);
        assert!((logit(out) - expect).abs() < 1e-9);
    }

    #[test]
    fn test_gen_log_odds_prior_mean_alias() {
        // alpha = 0, gamma = -1 outputs the prior mean regardless of reports.
        let spec = AggregatorSpec::GenLogOdds { alpha: 0.0, gamma: -1.0, mu: 0.3137 };
        assert!((spec.aggregate(0.9, 0.05) - 0.3137).abs() < 1e-12);
    }

    #[test]
    fn test_gen_log_odds_boundary_prior_stays_finite() {
        // A prior mean of exactly 0 or 1 is clamped rather than fed to the
        // logit, so boundary reports still dominate: when every signal points
        // at the low state the forecast follows them instead of collapsing to
        // the 0.5 cancellation value.
        let spec = AggregatorSpec::GenLogOdds { alpha: 0.656089, gamma: 0.498268, mu: 0.0 };
        assert_eq!(spec.aggregate(0.0, 0.0), 0.0);
        let spec = AggregatorSpec::GenLogOdds { alpha: 0.656089, gamma: 0.498268, mu: 1.0 };
        assert_eq!(spec.aggregate(1.0, 1.0), 1.0);
        // Interior reports with a boundary prior give an interior forecast.
        let spec = AggregatorSpec::GenLogOdds { alpha: 0.5, gamma: 0.25, mu: 0.0 };
        let out = spec.aggregate(0.3, 0.6);
        assert!(out > 0.0 && out < 1.0);
    }

    #[test]
    fn test_logit_values() {
        assert_eq!(logit(0.5), 0.0);
        assert!((logit(5.0 / 6.0) - 5.0_f64.ln()).abs() < 1e-15);
        assert_eq!(logit(0.0), f64::NEG_INFINITY);
        assert_eq!(logit(1.0), f64::INFINITY);
    }

    #[test]
    fn test_precision_values() {
        assert_eq!(precision(0.5).unwrap(), 4.0);
        assert!((precision(0.2).unwrap() - 6.25).abs() < 1e-12);
        assert!((precision(0.9).unwrap() - 100.0 / 9.0).abs() < 1e-12);
        assert_eq!(precision(0.0), Err(AggregatorError::BoundaryForecast { value: 0.0 }));
        assert_eq!(precision(1.0), Err(AggregatorError::BoundaryForecast { value: 1.0 }));
    }

    #[test]
    fn test_heuristic_prior_example() {
        let spec = AggregatorSpec::HeuristicPrior;
        let out = spec.aggregate(0.3, 0.4);
        // ep(0.3, 0.4) = 0.49 * 0.7 = 0.343; no indicator bump below sum 1.
        let mu = 0.343;
        let expect = 0.3 * 0.4 * (1.0 - mu) / (0.3 * 0.4 * (1.0 - mu) + 0.7 * 0.6 * mu);
        assert!((out - expect).abs() < 1e-12);
    }

    #[test]
    fn test_heuristic_prior_indicator_strictness() {
        // At x1 + x2 = 1 exactly the bump must not apply.
        let at = empirical_prior(0.4, 0.6);
        let above = empirical_prior(0.4, 0.6 + 1e-9);
        assert!((at - 0.49).abs() < 1e-12);
        assert!(above > 0.5);
    }

    #[test]
    fn test_precision_weighted_unanimity() {
        let spec = AggregatorSpec::PrecisionWeighted;
        for p in [0.0, 0.2, 0.5, 0.8, 1.0] {
            assert_eq!(spec.aggregate(p, p), p);
        }
    }

    #[test]
    fn test_precision_weighted_boundary_policy() {
        let spec = AggregatorSpec::PrecisionWeighted;
        assert_eq!(spec.aggregate(0.0, 1.0), 0.5);
        assert_eq!(spec.aggregate(1.0, 0.3), 1.0);
        assert_eq!(spec.aggregate(0.3, 0.0), 0.0);
    }

    #[test]
    fn test_precision_weighted_branch_threshold() {
        let spec = AggregatorSpec::PrecisionWeighted;
        // |x1 - x2| = 0.4 exactly stays on the plain-precision branch.
        let phi = |x: f64| 1.0 / (x * (1.0 - x));
        let (x1, x2) = (0.3, 0.7);
        let plain = (phi(x1) * x1 + phi(x2) * x2) / (phi(x1) + phi(x2));
        assert!((spec.aggregate(x1, x2) - plain).abs() < 1e-15);
        // Just beyond the threshold the square-root branch takes over.
        let (y1, y2) = (0.29, 0.71);
        let sqrt_w = (phi(y1).sqrt() * y1 + phi(y2).sqrt() * y2) / (phi(y1).sqrt() + phi(y2).sqrt());
        assert!((spec.aggregate(y1, y2) - sqrt_w).abs() < 1e-15);
    }

    #[test]
    fn test_kww_half_lambda_is_uniform_prior() {
        // Exponent 0 removes the prior proxy entirely.
        let spec = AggregatorSpec::Kww { lambda: 0.5, mu_policy: MuPolicy::ArithmeticMean };
        let (x1, x2) = (0.3, 0.8);
        let expect = x1 * x2 / (x1 * x2 + (1.0 - x1) * (1.0 - x2));
        assert!((spec.aggregate(x1, x2) - expect).abs() < 1e-12);
    }

    #[test]
    fn test_follow_expert_2() {
        let spec = AggregatorSpec::FollowExpert2;
        assert_eq!(spec.aggregate(0.9, 0.25), 0.25);
    }

    #[test]
    fn test_validation_ranges() {
        assert!(AggregatorSpec::LogOdds { alpha: 0.585 }.validate().is_ok());
        assert!(AggregatorSpec::LogOdds { alpha: 1.2 }.validate().is_err());
        assert!(AggregatorSpec::GenLogOdds { alpha: 0.5, gamma: -1.0, mu: 0.5 }
            .validate()
            .is_ok());
        assert!(AggregatorSpec::GenLogOdds { alpha: 0.5, gamma: -1.5, mu: 0.5 }
            .validate()
            .is_err());
        assert!(AggregatorSpec::Constant { c: 2.0 }.validate().is_err());
    }

    #[test]
    fn test_spec_json_round_trip() {
        let spec = AggregatorSpec::LogOdds { alpha: 0.585 };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"rule":"log_odds","alpha":0.585}"#);
        assert_eq!(serde_json::from_str::<AggregatorSpec>(&json).unwrap(), spec);

        let kww: AggregatorSpec =
            serde_json::from_str(r#"{"rule":"kww","lambda":0.8,"mu_policy":{"known":0.5}}"#)
                .unwrap();
        assert_eq!(kww, AggregatorSpec::Kww { lambda: 0.8, mu_policy: MuPolicy::Known(0.5) });

        let arith: AggregatorSpec =
            serde_json::from_str(r#"{"rule":"average_prior","mu_policy":"arithmetic_mean"}"#)
                .unwrap();
        assert_eq!(arith, AggregatorSpec::AveragePrior { mu_policy: MuPolicy::ArithmeticMean });
    }

    #[test]
    fn test_with_prior_mean_rebinds_known_slots() {
        let spec = AggregatorSpec::Kww { lambda: 0.8, mu_policy: MuPolicy::Known(0.1) };
        assert_eq!(
            spec.with_prior_mean(0.7),
            AggregatorSpec::Kww { lambda: 0.8, mu_policy: MuPolicy::Known(0.7) }
        );
        let arith = AggregatorSpec::Kww { lambda: 0.8, mu_policy: MuPolicy::ArithmeticMean };
        assert_eq!(arith.with_prior_mean(0.7), arith);
        assert!(!arith.requires_prior_mean());
        assert!(spec.requires_prior_mean());
        assert!(AggregatorSpec::GenLogOdds { alpha: 1.0, gamma: 1.0, mu: 0.2 }
            .requires_prior_mean());
    }
}
