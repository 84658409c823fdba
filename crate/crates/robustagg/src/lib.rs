//! Worst-case regret analysis for prior-free aggregation of expert forecasts.
//!
//! The crate models binary-state environments in which two experts observe
//! conditionally independent (or nested) binary signals and report posteriors.
//! An aggregator turns the two reports into one forecast; its quality on an
//! environment is the expected squared distance to the full-information
//! posterior. The remaining modules search environment families for the
//! worst case and check closed-form certificates of optimality.

/// Version of this library, mirrored into run manifests by downstream tools.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod aggregators;
pub mod certificates;
pub mod env;
pub mod regret;
pub mod search;

pub use aggregators::{logit, precision, sigmoid, AggregatorError, AggregatorSpec, MuPolicy};
pub use certificates::{
    build_known_marginal_certificate, build_unknown_state_certificate, build_xor_certificate,
    lower_bound_gap_report, verify_certificate, BoundLadder, BoundRow, BoundSource,
    CertificateError, ClosedFormValue, ExpectedBayes, ExpectedForecast, FieldCheck,
    JointStructure, MixtureCertificate, UpperBounds, VerificationReport, CERTIFICATE_TOLERANCE,
};
pub use regret::{
    batch_expected_regret, blackwell_regret, expected_regret, expected_regret_total,
    expected_regret_via_outcomes, expected_regret_with, mixture_regret, mixture_regret_with,
    mixture_regret_with_table, optimal_pointwise_response, RegretError, RegretReport, RegretRow,
    ResponseEntry, ResponseTable, AMBIGUITY_GUARD_BAND, REPORT_MATCH_TOLERANCE,
};
pub use search::{
    blackwell_worst_case, optimize_aggregator, param_grid, sweep_alpha, worst_case_regret,
    AggregatorFamily, OptimizedAggregator, RefineStep, SearchConfig, SearchDomain, SearchError,
    SearchResult, Stage1Candidate, SweepPoint, INTERIOR_MARGIN, STAGE2_TOP_K,
};
pub use env::{
    profile_label, BinaryCIEnvironment, BlackwellEnvironment, EnvError, Expert,
    MixtureComponent, MixtureEnvironment, Signal, SignalProfile, ALL_PROFILES,
    MIXTURE_WEIGHT_TOLERANCE, ZERO_PROBABILITY_THRESHOLD,
};
