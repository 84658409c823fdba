//! Expected regret of an aggregator against the full-information posterior.
//!
//! Regret on an environment is the probability-weighted squared distance between
//! the aggregator's forecast and the posterior mean, summed over signal profiles.
//! The module also exposes the outcome-level definition (which subtracts realized
//! squared losses) so the two routes can be compared, mixture evaluation, and the
//! pointwise-optimal responder for mixtures.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregators::AggregatorSpec;
use crate::env::{
    BinaryCIEnvironment, BlackwellEnvironment, Expert, MixtureEnvironment, SignalProfile,
    ALL_PROFILES, ZERO_PROBABILITY_THRESHOLD,
};

/// Report pairs within this distance (per coordinate) are treated as the same
/// pair when grouping mixture profiles.
pub const REPORT_MATCH_TOLERANCE: f64 = 1e-9;

/// Distinct report pairs closer than this (per coordinate) indicate a badly
/// conditioned mixture and abort responder construction.
pub const AMBIGUITY_GUARD_BAND: f64 = 1e-6;

/// Errors raised while grouping mixture report pairs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegretError {
    /// Two report pairs are too far apart to merge yet too close to be
    /// meaningfully distinct.
    #[error(
        "report pairs ({x1a}, {x2a}) and ({x1b}, {x2b}) are distinct at tolerance \
         {REPORT_MATCH_TOLERANCE} but closer than {AMBIGUITY_GUARD_BAND}"
    )]
    AmbiguousReportMatching { x1a: f64, x2a: f64, x1b: f64, x2b: f64 },
    /// A mixture profile's report pair has no entry in the supplied table.
    #[error("no response-table entry matches report pair ({x1}, {x2})")]
    UnmatchedReportPair { x1: f64, x2: f64 },
}

/// Compensated (Kahan) accumulator; keeps profile sums accurate to the
/// certificate tolerances.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, term: f64) {
        let y = term - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum
    }
}

/// One signal profile's contribution to expected regret.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegretRow {
    pub profile: SignalProfile,
    pub joint_prob: f64,
    pub x1: f64,
    pub x2: f64,
    pub bayes_target: f64,
    pub aggregator_output: f64,
    /// Regret contribution factor: (output - bayes)^2, or 0 by convention on
    /// a degenerate (theta1 = theta2) environment.
    pub squared_error: f64,
}

/// Expected regret broken down by signal profile.
///
/// `total` equals the probability-weighted sum of `squared_error` over `rows`,
/// and the `joint_prob` column sums to 1 (both within 1e-12). Profiles below
/// [`ZERO_PROBABILITY_THRESHOLD`] are omitted; they carry no weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub total: f64,
    pub rows: Vec<RegretRow>,
}

impl RegretReport {
    /// CSV rendering with one line per profile.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("profile,prob,x1,x2,bayes,output,sq_error\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                crate::env::profile_label(row.profile),
                row.joint_prob,
                row.x1,
                row.x2,
                row.bayes_target,
                row.aggregator_output,
                row.squared_error,
            ));
        }
        out
    }
}

/// Expected regret of an arbitrary forecast function over one environment.
///
/// This is the shared evaluation core: the forecast may come from an
/// [`AggregatorSpec`], a response table, or a closure under test. A degenerate
/// environment (theta1 = theta2) poses no forecasting problem and contributes
/// zero regret by convention.
pub fn expected_regret_with<F>(env: &BinaryCIEnvironment, forecast: F) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    if env.is_degenerate() {
        return 0.0;
    }
    let mut total = KahanSum::default();
    for profile in ALL_PROFILES {
        let prob = env.joint_signal_prob(profile);
        if prob < ZERO_PROBABILITY_THRESHOLD {
            continue;
        }
        let x1 = env.report(Expert::One, profile.0).expect("profile has positive probability");
        let x2 = env.report(Expert::Two, profile.1).expect("profile has positive probability");
        let bayes = env.bayes_forecast(profile).expect("profile has positive probability");
        let err = forecast(x1, x2) - bayes;
        total.add(prob * err * err);
    }
    total.total()
}

/// Expected regret of an aggregator, without the per-profile breakdown.
pub fn expected_regret_total(spec: &AggregatorSpec, env: &BinaryCIEnvironment) -> f64 {
    expected_regret_with(env, |x1, x2| spec.aggregate(x1, x2))
}

/// Expected regret of an aggregator with the per-profile breakdown.
pub fn expected_regret(spec: &AggregatorSpec, env: &BinaryCIEnvironment) -> RegretReport {
    let mut total = KahanSum::default();
    let mut rows = Vec::with_capacity(ALL_PROFILES.len());
    for profile in ALL_PROFILES {
        let prob = env.joint_signal_prob(profile);
        if prob < ZERO_PROBABILITY_THRESHOLD {
            continue;
        }
        let x1 = env.report(Expert::One, profile.0).expect("profile has positive probability");
        let x2 = env.report(Expert::Two, profile.1).expect("profile has positive probability");
        let bayes = env.bayes_forecast(profile).expect("profile has positive probability");
        let output = spec.aggregate(x1, x2);
        let err = output - bayes;
        let squared_error = if env.is_degenerate() { 0.0 } else { err * err };
        total.add(prob * squared_error);
        rows.push(RegretRow {
            profile,
            joint_prob: prob,
            x1,
            x2,
            bayes_target: bayes,
            aggregator_output: output,
            squared_error,
        });
    }
    RegretReport { total: total.total(), rows }
}

/// Expected regret through the outcome-level loss definition.
///
/// Enumerates states, signal profiles, and binary outcomes, and sums
/// `prob * [(f - outcome)^2 - (bayes - outcome)^2]`. The cross terms cancel
/// against the posterior, so this agrees with [`expected_regret`] to 1e-12.
pub fn expected_regret_via_outcomes(spec: &AggregatorSpec, env: &BinaryCIEnvironment) -> f64 {
    if env.is_degenerate() {
        return 0.0;
    }
    let states = [
        (1.0 - env.lambda2(), env.theta1(), false),
        (env.lambda2(), env.theta2(), true),
    ];
    let mut total = KahanSum::default();
    for profile in ALL_PROFILES {
        let joint = env.joint_signal_prob(profile);
        if joint < ZERO_PROBABILITY_THRESHOLD {
            continue;
        }
        let x1 = env.report(Expert::One, profile.0).expect("profile has positive probability");
        let x2 = env.report(Expert::Two, profile.1).expect("profile has positive probability");
        let bayes = env.bayes_forecast(profile).expect("profile has positive probability");
        let f = spec.aggregate(x1, x2);
        for (state_weight, theta, high_state) in states {
            let prob = state_weight * env.joint_signal_prob_in_state(profile, high_state);
            if prob < ZERO_PROBABILITY_THRESHOLD {
                continue;
            }
            // Outcome 1 with probability theta, outcome 0 otherwise.
            for (outcome_prob, outcome) in [(theta, 1.0), (1.0 - theta, 0.0)] {
                let f_loss = (f - outcome) * (f - outcome);
                let b_loss = (bayes - outcome) * (bayes - outcome);
                total.add(prob * outcome_prob * (f_loss - b_loss));
            }
        }
    }
    total.total()
}

/// Mixture regret: the weighted sum of per-component expected regret.
pub fn mixture_regret(spec: &AggregatorSpec, mix: &MixtureEnvironment) -> f64 {
    let mut total = KahanSum::default();
    for component in mix.components() {
        total.add(component.weight * expected_regret_total(spec, &component.env));
    }
    total.total()
}

/// Mixture regret of an arbitrary forecast function.
pub fn mixture_regret_with<F>(mix: &MixtureEnvironment, forecast: F) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let mut total = KahanSum::default();
    for component in mix.components() {
        total.add(component.weight * expected_regret_with(&component.env, &forecast));
    }
    total.total()
}

/// One responder entry: the forecast assigned to a report pair, along with the
/// pair's total probability under the mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseEntry {
    pub x1: f64,
    pub x2: f64,
    pub forecast: f64,
    pub probability: f64,
}

/// The pointwise-optimal response to a mixture: per report pair, the
/// probability-weighted average of the components' posterior targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseTable {
    entries: Vec<ResponseEntry>,
}

impl ResponseTable {
    pub fn entries(&self) -> &[ResponseEntry] {
        &self.entries
    }

    /// Look up the forecast for a report pair, matching each coordinate within
    /// [`REPORT_MATCH_TOLERANCE`].
    pub fn forecast(&self, x1: f64, x2: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| (e.x1 - x1).abs() <= REPORT_MATCH_TOLERANCE
                && (e.x2 - x2).abs() <= REPORT_MATCH_TOLERANCE)
            .map(|e| e.forecast)
    }

    /// Copy of the table with one entry's forecast replaced.
    pub fn with_forecast(&self, index: usize, forecast: f64) -> ResponseTable {
        let mut entries = self.entries.clone();
        entries[index].forecast = forecast;
        ResponseTable { entries }
    }
}

struct ReportGroup {
    x1_mass: f64,
    x2_mass: f64,
    bayes_mass: f64,
    probability: f64,
    x1_seed: f64,
    x2_seed: f64,
}

/// Build the pointwise-optimal responder for a mixture.
///
/// Signal profiles across components are grouped by their realized report
/// pairs (each coordinate matched within [`REPORT_MATCH_TOLERANCE`]); each
/// group's forecast is the probability-weighted average of posterior targets,
/// which is the unconstrained minimizer of mixture regret. Distinct groups
/// closer than [`AMBIGUITY_GUARD_BAND`] abort with
/// [`RegretError::AmbiguousReportMatching`].
pub fn optimal_pointwise_response(
    mix: &MixtureEnvironment,
) -> Result<ResponseTable, RegretError> {
    let mut groups: Vec<ReportGroup> = Vec::new();
    for component in mix.components() {
        // Degenerate components contribute zero regret regardless of the
        // forecast, so they carry no weight in the responder either.
        if component.env.is_degenerate() {
            continue;
        }
        for profile in ALL_PROFILES {
            let joint = component.env.joint_signal_prob(profile);
            if joint < ZERO_PROBABILITY_THRESHOLD {
                continue;
            }
            let prob = component.weight * joint;
            if prob < ZERO_PROBABILITY_THRESHOLD {
                continue;
            }
            let x1 = component
                .env
                .report(Expert::One, profile.0)
                .expect("profile has positive probability");
            let x2 = component
                .env
                .report(Expert::Two, profile.1)
                .expect("profile has positive probability");
            let bayes = component
                .env
                .bayes_forecast(profile)
                .expect("profile has positive probability");
            match groups.iter_mut().find(|g| {
                (g.x1_seed - x1).abs() <= REPORT_MATCH_TOLERANCE
                    && (g.x2_seed - x2).abs() <= REPORT_MATCH_TOLERANCE
            }) {
                Some(group) => {
                    group.x1_mass += prob * x1;
                    group.x2_mass += prob * x2;
                    group.bayes_mass += prob * bayes;
                    group.probability += prob;
                }
                None => groups.push(ReportGroup {
                    x1_mass: prob * x1,
                    x2_mass: prob * x2,
                    bayes_mass: prob * bayes,
                    probability: prob,
                    x1_seed: x1,
                    x2_seed: x2,
                }),
            }
        }
    }

    let mut entries: Vec<ResponseEntry> = groups
        .iter()
        .map(|g| ResponseEntry {
            x1: g.x1_mass / g.probability,
            x2: g.x2_mass / g.probability,
            forecast: g.bayes_mass / g.probability,
            probability: g.probability,
        })
        .collect();
    entries.sort_by(|a, b| (a.x1, a.x2).partial_cmp(&(b.x1, b.x2)).expect("finite reports"));

    for (i, a) in entries.iter().enumerate() {
        for b in entries.iter().skip(i + 1) {
            let dist = (a.x1 - b.x1).abs().max((a.x2 - b.x2).abs());
            if dist < AMBIGUITY_GUARD_BAND {
                return Err(RegretError::AmbiguousReportMatching {
                    x1a: a.x1,
                    x2a: a.x2,
                    x1b: b.x1,
                    x2b: b.x2,
                });
            }
        }
    }

    Ok(ResponseTable { entries })
}

/// Mixture regret of a response table; errors if some realized report pair has
/// no entry.
pub fn mixture_regret_with_table(
    mix: &MixtureEnvironment,
    table: &ResponseTable,
) -> Result<f64, RegretError> {
    let mut total = KahanSum::default();
    for component in mix.components() {
        if component.env.is_degenerate() {
            continue;
        }
        for profile in ALL_PROFILES {
            let joint = component.env.joint_signal_prob(profile);
            if joint < ZERO_PROBABILITY_THRESHOLD {
                continue;
            }
            let x1 = component
                .env
                .report(Expert::One, profile.0)
                .expect("profile has positive probability");
            let x2 = component
                .env
                .report(Expert::Two, profile.1)
                .expect("profile has positive probability");
            let bayes = component
                .env
                .bayes_forecast(profile)
                .expect("profile has positive probability");
            let forecast = table
                .forecast(x1, x2)
                .ok_or(RegretError::UnmatchedReportPair { x1, x2 })?;
            let err = forecast - bayes;
            total.add(component.weight * joint * err * err);
        }
    }
    Ok(total.total())
}

/// Regret on a nested-information environment: the informed expert's report is
/// the posterior, so regret is the squared distance from the forecast to x2.
/// Degenerate state spaces contribute zero by the same convention as above.
pub fn blackwell_regret(spec: &AggregatorSpec, env: &BlackwellEnvironment) -> f64 {
    if env.theta1() == env.theta2() {
        return 0.0;
    }
    let mut total = KahanSum::default();
    for profile in ALL_PROFILES {
        let prob = env.joint_signal_prob(profile);
        if prob < ZERO_PROBABILITY_THRESHOLD {
            continue;
        }
        let x1 = env.report(Expert::One, profile.0).expect("profile has positive probability");
        let x2 = env.report(Expert::Two, profile.1).expect("profile has positive probability");
        let err = spec.aggregate(x1, x2) - x2;
        total.add(prob * err * err);
    }
    total.total()
}

/// Evaluate one aggregator over many environments in parallel; output order
/// matches input order.
pub fn batch_expected_regret(spec: &AggregatorSpec, envs: &[BinaryCIEnvironment]) -> Vec<f64> {
    envs.par_iter().map(|env| expected_regret_total(spec, env)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregators::MuPolicy;
    use crate::env::MixtureComponent;

    fn env(
        theta1: f64,
        theta2: f64,
        lambda2: f64,
        p1: f64,
        p2: f64,
        q1: f64,
        q2: f64,
    ) -> BinaryCIEnvironment {
        BinaryCIEnvironment::new(theta1, theta2, lambda2, p1, p2, q1, q2).unwrap()
    }

    fn bayes_anchor(env: &BinaryCIEnvironment) -> AggregatorSpec {
        AggregatorSpec::GenLogOdds { alpha: 1.0, gamma: 1.0, mu: env.prior_mean() }
    }

    #[test]
    fn test_bayes_rule_has_zero_regret_on_unit_envs() {
        let e = env(0.0, 1.0, 0.35, 0.8, 0.65, 0.2, 0.4);
        let report = expected_regret(&bayes_anchor(&e), &e);
        assert!(report.total.abs() < 1e-12);
    }

    #[test]
    fn test_constant_half_regret_is_variance_of_bayes() {
        // Against a fixed forecast c, regret is E[(c - bayes)^2].
        let e = env(0.0, 1.0, 0.5, 0.75, 0.75, 0.25, 0.25);
        let spec = AggregatorSpec::Constant { c: 0.5 };
        let direct = expected_regret_total(&spec, &e);
        let manual = expected_regret_with(&e, |_, _| 0.5);
        assert_eq!(direct, manual);
        assert!(direct > 0.0);
    }

    #[test]
    fn test_worst_instance_regret_for_log_odds() {
        let e = env(
            0.21097,
            1.0,
            0.5673928747956352,
            0.7413286213160788,
            0.7413286213160788,
            0.0,
            0.0,
        );
        assert!((e.report(Expert::One, crate::env::Signal::Low).unwrap() - 0.21097).abs() < 1e-9);
        assert!((e.report(Expert::One, crate::env::Signal::High).unwrap() - 0.87002).abs() < 1e-9);
        assert!((e.prior_mean() - 0.65866).abs() < 1e-5);
        let spec = AggregatorSpec::LogOdds { alpha: 0.585 };
        let total = expected_regret_total(&spec, &e);
        assert!((total - 0.025512).abs() < 1e-5);
    }

    #[test]
    fn test_report_invariants() {
        let e = env(0.1, 0.9, 0.4, 0.7, 0.55, 0.2, 0.35);
        let spec = AggregatorSpec::LogOdds { alpha: 0.585 };
        let report = expected_regret(&spec, &e);
        let prob_sum: f64 = report.rows.iter().map(|r| r.joint_prob).sum();
        assert!((prob_sum - 1.0).abs() < 1e-12);
        let weighted: f64 = report.rows.iter().map(|r| r.joint_prob * r.squared_error).sum();
        assert!((report.total - weighted).abs() < 1e-12);
    }

    #[test]
    fn test_outcome_route_matches_profile_route() {
        let e = env(0.13, 0.88, 0.44, 0.81, 0.57, 0.12, 0.33);
        for spec in [
            AggregatorSpec::LogOdds { alpha: 0.585 },
            AggregatorSpec::SimpleAverage,
            AggregatorSpec::PrecisionWeighted,
            AggregatorSpec::Kww { lambda: 0.8, mu_policy: MuPolicy::ArithmeticMean },
        ] {
            let by_profiles = expected_regret_total(&spec, &e);
            let by_outcomes = expected_regret_via_outcomes(&spec, &e);
            assert!((by_profiles - by_outcomes).abs() < 1e-12);
        }
    }

    #[test]
    fn test_outcome_route_zero_for_bayes_anchor() {
        let e = env(0.0, 1.0, 0.61, 0.66, 0.77, 0.31, 0.05);
        assert!(expected_regret_via_outcomes(&bayes_anchor(&e), &e).abs() < 1e-12);
    }

    #[test]
    fn test_outcome_route_degenerate_states() {
        let e = env(0.3, 0.3, 0.5, 0.9, 0.8, 0.1, 0.2);
        let spec = AggregatorSpec::Constant { c: 0.3 };
        assert!(expected_regret_via_outcomes(&spec, &e).abs() < 1e-15);
    }

    #[test]
    fn test_degenerate_states_are_zero_regret_for_any_rule() {
        // With theta1 = theta2 there is nothing to forecast; every rule is
        // charged zero regret even when its output differs from the state.
        let e = env(0.4, 0.4, 0.5, 0.9, 0.8, 0.1, 0.2);
        let spec = AggregatorSpec::LogOdds { alpha: 0.0 };
        assert_eq!(expected_regret_total(&spec, &e), 0.0);
        assert_eq!(expected_regret_via_outcomes(&spec, &e), 0.0);
        let report = expected_regret(&spec, &e);
        assert_eq!(report.total, 0.0);
        assert!(report.rows.iter().all(|r| r.squared_error == 0.0));
        assert!(report.rows.iter().any(|r| r.aggregator_output == 0.5));
    }

    #[test]
    fn test_single_component_mixture_matches_direct() {
        let e = env(0.05, 0.95, 0.5, 0.7, 0.7, 0.3, 0.3);
        let mix = MixtureEnvironment::new(vec![MixtureComponent { weight: 1.0, env: e.clone() }])
            .unwrap();
        let spec = AggregatorSpec::SimpleAverage;
        assert!((mixture_regret(&spec, &mix) - expected_regret_total(&spec, &e)).abs() < 1e-15);
    }

    fn two_point_mixture() -> MixtureEnvironment {
        // Both components realize report values {1/6, 5/6} for both experts.
        let a = env(0.0, 5.0 / 6.0, 0.5, 1.0, 1.0, 0.25, 0.25);
        let b = env(1.0 / 6.0, 1.0, 0.5, 0.75, 0.75, 0.0, 0.0);
        MixtureEnvironment::new(vec![
            MixtureComponent { weight: 0.5, env: a },
            MixtureComponent { weight: 0.5, env: b },
        ])
        .unwrap()
    }

    #[test]
    fn test_two_point_mixture_responder_values() {
        let mix = two_point_mixture();
        let table = optimal_pointwise_response(&mix).unwrap();
        assert_eq!(table.entries().len(), 4);
        let lo = 1.0 / 6.0;
        let hi = 5.0 / 6.0;
        assert!((table.forecast(lo, lo).unwrap() - 7.0 / 78.0).abs() < 1e-12);
        assert!((table.forecast(lo, hi).unwrap() - 0.5).abs() < 1e-12);
        assert!((table.forecast(hi, lo).unwrap() - 0.5).abs() < 1e-12);
        assert!((table.forecast(hi, hi).unwrap() - 71.0 / 78.0).abs() < 1e-12);
    }

    #[test]
    fn test_two_point_mixture_responder_regret() {
        let mix = two_point_mixture();
        let table = optimal_pointwise_response(&mix).unwrap();
        let value = mixture_regret_with_table(&mix, &table).unwrap();
        assert!((value - 31.0 / 1326.0).abs() < 1e-12);
    }

    #[test]
    fn test_responder_is_a_regret_minimizer() {
        let mix = two_point_mixture();
        let table = optimal_pointwise_response(&mix).unwrap();
        let base = mixture_regret_with_table(&mix, &table).unwrap();
        for index in 0..table.entries().len() {
            for delta in [-1e-3, 1e-3] {
                let forecast = table.entries()[index].forecast + delta;
                let perturbed = table.with_forecast(index, forecast);
                let value = mixture_regret_with_table(&mix, &perturbed).unwrap();
                assert!(value >= base - 1e-15);
            }
        }
    }

    #[test]
    fn test_single_component_responder_returns_bayes_targets() {
        let e = env(0.1, 0.8, 0.45, 0.7, 0.6, 0.2, 0.3);
        let mix =
            MixtureEnvironment::new(vec![MixtureComponent { weight: 1.0, env: e.clone() }])
                .unwrap();
        let table = optimal_pointwise_response(&mix).unwrap();
        for profile in ALL_PROFILES {
            let x1 = e.report(Expert::One, profile.0).unwrap();
            let x2 = e.report(Expert::Two, profile.1).unwrap();
            let bayes = e.bayes_forecast(profile).unwrap();
            assert!((table.forecast(x1, x2).unwrap() - bayes).abs() < 1e-12);
        }
    }

    #[test]
    fn test_nearby_report_pairs_are_ambiguous() {
        let a = env(0.0, 1.0, 0.5, 0.75, 0.75, 0.25, 0.25);
        let b = env(0.0, 1.0 - 1e-7, 0.5, 0.75, 0.75, 0.25, 0.25);
        let mix = MixtureEnvironment::new(vec![
            MixtureComponent { weight: 0.5, env: a },
            MixtureComponent { weight: 0.5, env: b },
        ])
        .unwrap();
        assert!(matches!(
            optimal_pointwise_response(&mix),
            Err(RegretError::AmbiguousReportMatching { .. })
        ));
    }

    #[test]
    fn test_mixture_linearity_under_component_split() {
        let a = env(0.0, 0.9, 0.4, 0.8, 0.7, 0.2, 0.1);
        let b = env(0.1, 1.0, 0.6, 0.6, 0.9, 0.3, 0.4);
        let spec = AggregatorSpec::PrecisionWeighted;
        let joined = MixtureEnvironment::new(vec![
            MixtureComponent { weight: 0.6, env: a.clone() },
            MixtureComponent { weight: 0.4, env: b.clone() },
        ])
        .unwrap();
        let split = MixtureEnvironment::new(vec![
            MixtureComponent { weight: 0.3, env: a.clone() },
            MixtureComponent { weight: 0.3, env: a },
            MixtureComponent { weight: 0.4, env: b },
        ])
        .unwrap();
        assert!((mixture_regret(&spec, &joined) - mixture_regret(&spec, &split)).abs() < 1e-12);
    }

    #[test]
    fn test_blackwell_identity_garbling_zero_regret() {
        let e = BlackwellEnvironment::new(0.0, 1.0, 0.5, 0.8, 0.3, 1.0, 0.0).unwrap();
        let spec = AggregatorSpec::PrecisionWeighted;
        assert!(blackwell_regret(&spec, &e).abs() < 1e-15);
    }

    #[test]
    fn test_blackwell_follow_informed_expert_zero_regret() {
        let e = BlackwellEnvironment::new(0.0, 1.0, 0.35, 0.9, 0.2, 0.7, 0.4).unwrap();
        assert!(blackwell_regret(&AggregatorSpec::FollowExpert2, &e).abs() < 1e-15);
    }

    #[test]
    fn test_blackwell_uniform_garbling_simple_average() {
        // The informed report reveals the state; the garbled report is flat 1/2,
        // so the average misses by 1/4 on every profile.
        let e = BlackwellEnvironment::new(0.0, 1.0, 0.5, 1.0, 0.0, 0.5, 0.5).unwrap();
        let value = blackwell_regret(&AggregatorSpec::SimpleAverage, &e);
        assert!((value - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn test_batch_matches_serial() {
        let envs = vec![
            env(0.0, 1.0, 0.5, 0.75, 0.75, 0.25, 0.25),
            env(0.1, 0.9, 0.3, 0.8, 0.6, 0.2, 0.4),
            env(0.2, 0.7, 0.6, 0.9, 0.5, 0.1, 0.5),
        ];
        let spec = AggregatorSpec::LogOdds { alpha: 0.585 };
        let batch = batch_expected_regret(&spec, &envs);
        let serial: Vec<f64> = envs.iter().map(|e| expected_regret_total(&spec, e)).collect();
        assert_eq!(batch, serial);
    }

    #[test]
    fn test_report_json_and_csv() {
        let e = env(0.0, 1.0, 0.5, 0.75, 0.75, 0.25, 0.25);
        let report = expected_regret(&AggregatorSpec::SimpleAverage, &e);
        let json = serde_json::to_string(&report).unwrap();
        let back: RegretReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        let csv = report.to_csv();
        assert!(csv.starts_with("profile,prob,x1,x2,bayes,output,sq_error\n"));
        assert_eq!(csv.lines().count(), 1 + report.rows.len());
        assert!(csv.contains("LL,"));
    }
}
