//! Two-stage worst-case-regret search over environment parameters.
//!
//! Stage 1 runs many seeded derivative-free simplex maximizations from random
//! interior starting points of the free parameter box. Stage 2 polishes the top
//! candidates with iterated coordinate-wise grid refinement until no coordinate
//! improves. Every reported value is an exactly re-evaluated regret of a
//! concrete environment, so the search under-reports the supremum, never the
//! reverse. Runs are deterministic for a fixed seed, worker count aside.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregators::AggregatorSpec;
use crate::env::{BinaryCIEnvironment, BlackwellEnvironment};
use crate::regret::{blackwell_regret, expected_regret_total};

/// Stage-1 starting points keep at least this distance from the box boundary.
pub const INTERIOR_MARGIN: f64 = 1e-9;

/// Number of stage-1 candidates carried into stage-2 refinement.
pub const STAGE2_TOP_K: usize = 5;

/// Hard cap on stage-2 passes; unreachable in practice, guards against float
/// creep producing endless hairline improvements.
const MAX_REFINE_PASSES: usize = 10_000;

/// Which environment parameters are free during the search, and whether the
/// aggregator may observe the environment's prior mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchDomain {
    /// All seven parameters free.
    UnknownState,
    /// States pinned to theta1 = 0, theta2 = 1; signal parameters free.
    KnownZeroOne,
    /// All seven parameters free, and rules with a supplied-prior slot are
    /// rebound to each candidate environment's prior mean.
    KnownMarginalMean,
}

/// Tuning for the two-stage search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Stage-1 simplex searches.
    pub n_starts: usize,
    /// Iteration budget per simplex search.
    pub local_iters: usize,
    /// Stage-2 grid spacing.
    pub refine_step: f64,
    /// Stage-2 scan radius per coordinate.
    pub refine_radius: f64,
    /// Seed for the start-point sampler.
    pub rng_seed: u64,
    /// Worker-pool size for stage-1 starts.
    pub n_workers: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            n_starts: 256,
            local_iters: 2000,
            refine_step: 1e-5,
            refine_radius: 1e-3,
            rng_seed: 0,
            n_workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// Errors raised by search entry points.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    /// The aggregator needs the environment's prior mean but the domain hides it.
    #[error("aggregator requires a known prior mean, which domain {domain:?} does not expose")]
    InfeasibleDomain { domain: SearchDomain },
    /// n_starts must be at least 1.
    #[error("search needs at least one start")]
    NoStarts,
    /// n_workers must be at least 1.
    #[error("worker pool needs at least one worker")]
    NoWorkers,
    /// refine_step must be positive and no larger than refine_radius.
    #[error("refine step {step} must be positive and at most the radius {radius}")]
    RefineStep { step: f64, radius: f64 },
    /// The sweep grid has no points.
    #[error("alpha grid is empty")]
    EmptyGrid,
    /// A sweep grid point lies outside [0, 1].
    #[error("alpha {alpha} is outside [0, 1]")]
    GridRange { alpha: f64 },
    /// The outer optimization grid step must be positive.
    #[error("outer grid step {step} must be positive")]
    OuterGridStep { step: f64 },
}

impl SearchConfig {
    fn validate(&self) -> Result<(), SearchError> {
        if self.n_starts == 0 {
            return Err(SearchError::NoStarts);
        }
        if self.n_workers == 0 {
            return Err(SearchError::NoWorkers);
        }
        if !(self.refine_step > 0.0 && self.refine_step <= self.refine_radius) {
            return Err(SearchError::RefineStep {
                step: self.refine_step,
                radius: self.refine_radius,
            });
        }
        Ok(())
    }
}

/// One stage-1 survivor: its endpoint environment, the stage-1 value, and the
/// value after stage-2 refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage1Candidate<E> {
    pub env: E,
    pub value: f64,
    pub refined_value: f64,
}

/// One stage-2 pass of the winning candidate: pass index and best value so far.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineStep {
    pub step: usize,
    pub value: f64,
}

/// Outcome of a worst-case search.
///
/// `value` is the re-evaluated regret at `argmax_env` and dominates every
/// candidate's refined value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult<E> {
    pub value: f64,
    pub argmax_env: E,
    pub stage1_candidates: Vec<Stage1Candidate<E>>,
    pub refine_trace: Vec<RefineStep>,
}

/// One sweep grid point with its worst-case value and attaining environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub worst_case_regret: f64,
    pub argmax_env: BinaryCIEnvironment,
}

/// Parametric families the outer optimization can tune.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregatorFamily {
    LogOdds,
    GeneralizedLogOdds,
}

/// Minimizing parameters of an outer optimization and the value they attain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizedAggregator {
    pub alpha: f64,
    /// Present only for the generalized family.
    pub gamma: Option<f64>,
    pub worst_case_regret: f64,
}

/// Parameter vector [theta1, theta2, lambda2, p1_low, p2_low, q1_low, q2_low]
/// (for nested-information searches: [theta1, theta2, lambda2, r_low, r_high,
/// g_LL, g_HL]).
type Params = [f64; 7];

#[derive(Debug, Clone, Copy)]
pub(crate) struct ParamBox {
    lo: Params,
    hi: Params,
}

impl ParamBox {
    pub(crate) fn new(lo: Params, hi: Params) -> Self {
        ParamBox { lo, hi }
    }

    fn unit() -> Self {
        ParamBox { lo: [0.0; 7], hi: [1.0; 7] }
    }

    fn clamp(&self, mut p: Params) -> Params {
        for i in 0..7 {
            p[i] = p[i].clamp(self.lo[i], self.hi[i]);
        }
        p
    }

    fn free_coords(&self) -> impl Iterator<Item = usize> + '_ {
        (0..7).filter(|&i| self.hi[i] > self.lo[i])
    }
}

fn domain_bounds(domain: SearchDomain) -> ParamBox {
    match domain {
        SearchDomain::UnknownState | SearchDomain::KnownMarginalMean => ParamBox::unit(),
        SearchDomain::KnownZeroOne => ParamBox::new(
            [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        ),
    }
}

/// Relabel the states so theta1 <= theta2; the distribution is unchanged.
fn canonicalize_ci(mut p: Params) -> Params {
    if p[0] > p[1] {
        p.swap(0, 1);
        p[2] = 1.0 - p[2];
        p.swap(3, 5);
        p.swap(4, 6);
    }
    p
}

fn canonicalize_blackwell(mut p: Params) -> Params {
    if p[0] > p[1] {
        p.swap(0, 1);
        p[2] = 1.0 - p[2];
        p.swap(3, 4);
    }
    p
}

fn build_ci(p: &Params) -> BinaryCIEnvironment {
    BinaryCIEnvironment::new(p[0], p[1], p[2], p[3], p[4], p[5], p[6])
        .expect("clamped canonical parameters form a valid environment")
}

fn build_blackwell(p: &Params) -> BlackwellEnvironment {
    BlackwellEnvironment::new(p[0], p[1], p[2], p[3], p[4], p[5], p[6])
        .expect("clamped canonical parameters form a valid environment")
}

fn sample_start(rng: &mut ChaCha8Rng, bounds: &ParamBox) -> Params {
    let mut p = [0.0; 7];
    for i in 0..7 {
        let (lo, hi) = (bounds.lo[i], bounds.hi[i]);
        let span = hi - lo;
        if span <= 0.0 {
            p[i] = lo;
            continue;
        }
        // Mix near-face and interior starts: worst cases often sit on faces.
        let margin = INTERIOR_MARGIN.min(span / 2.0);
        let u: f64 = rng.gen();
        p[i] = if u < 0.1 {
            lo + margin
        } else if u >= 0.9 {
            hi - margin
        } else {
            lo + ((u - 0.1) / 0.8) * span
        };
    }
    p
}

fn simplex_diameter(simplex: &[(Params, f64)]) -> f64 {
    let base = simplex[0].0;
    simplex[1..]
        .iter()
        .flat_map(|(v, _)| (0..7).map(move |i| (v[i] - base[i]).abs()))
        .fold(0.0, f64::max)
}

/// Point c + t * (w - c), clamped into the box by the caller.
fn along(c: &Params, w: &Params, t: f64) -> Params {
    let mut p = [0.0; 7];
    for i in 0..7 {
        p[i] = c[i] + t * (w[i] - c[i]);
    }
    p
}

/// Derivative-free simplex maximization (reflection, expansion, contraction,
/// shrink), projected into the box at every evaluation.
fn simplex_maximize<O>(
    objective: &O,
    bounds: &ParamBox,
    start: Params,
    max_iters: usize,
) -> (Params, f64)
where
    O: Fn(&Params) -> f64,
{
    let free: Vec<usize> = bounds.free_coords().collect();
    let p0 = bounds.clamp(start);
    if free.is_empty() {
        return (p0, objective(&p0));
    }
    let n = free.len();
    let mut simplex: Vec<(Params, f64)> = Vec::with_capacity(n + 1);
    simplex.push((p0, objective(&p0)));
    for &c in &free {
        let mut p = p0;
        let h = 0.05 * (bounds.hi[c] - bounds.lo[c]);
        p[c] = if p[c] + h <= bounds.hi[c] { p[c] + h } else { p[c] - h };
        let p = bounds.clamp(p);
        simplex.push((p, objective(&p)));
    }
    let by_value_desc =
        |a: &(Params, f64), b: &(Params, f64)| b.1.partial_cmp(&a.1).expect("regret is not NaN");

    for _ in 0..max_iters {
        simplex.sort_by(by_value_desc);
        let spread = simplex[0].1 - simplex[n].1;
        if spread <= 1e-15 * (1.0 + simplex[0].1.abs()) && simplex_diameter(&simplex) <= 1e-12 {
            break;
        }
        let mut centroid = [0.0; 7];
        for (v, _) in &simplex[..n] {
            for i in 0..7 {
                centroid[i] += v[i];
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }
        let worst = simplex[n].0;
        let reflected = bounds.clamp(along(&centroid, &worst, -1.0));
        let fr = objective(&reflected);
        if fr > simplex[0].1 {
            let expanded = bounds.clamp(along(&centroid, &worst, -2.0));
            let fe = objective(&expanded);
            simplex[n] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr > simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let outside = fr > simplex[n].1;
            let t = if outside { -0.5 } else { 0.5 };
            let contracted = bounds.clamp(along(&centroid, &worst, t));
            let fc = objective(&contracted);
            let accept = if outside { fc >= fr } else { fc > simplex[n].1 };
            if accept {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let p = bounds.clamp(along(&best, &v.0, 0.5));
                    *v = (p, objective(&p));
                }
            }
        }
    }
    simplex.sort_by(by_value_desc);
    simplex[0]
}

/// Iterated coordinate-wise grid refinement around a candidate.
fn refine<O>(
    objective: &O,
    bounds: &ParamBox,
    start: Params,
    config: &SearchConfig,
) -> (Params, f64, Vec<RefineStep>)
where
    O: Fn(&Params) -> f64,
{
    let mut center = bounds.clamp(start);
    let mut best = objective(&center);
    let mut trace = vec![RefineStep { step: 0, value: best }];
    let offsets = (config.refine_radius / config.refine_step).floor() as i64;
    for pass in 1..=MAX_REFINE_PASSES {
        let mut improved = false;
        let free: Vec<usize> = bounds.free_coords().collect();
        for c in free {
            let base = center;
            let mut scan_best = best;
            let mut scan_arg = center;
            for j in -offsets..=offsets {
                if j == 0 {
                    continue;
                }
                let mut p = base;
                p[c] = (base[c] + j as f64 * config.refine_step)
                    .clamp(bounds.lo[c], bounds.hi[c]);
                if p[c] == base[c] {
                    continue;
                }
                let v = objective(&p);
                if v > scan_best {
                    scan_best = v;
                    scan_arg = p;
                }
            }
            if scan_best > best {
                best = scan_best;
                center = scan_arg;
                improved = true;
            }
        }
        trace.push(RefineStep { step: pass, value: best });
        if !improved {
            break;
        }
    }
    (center, best, trace)
}

/// The shared two-stage driver, generic over the environment family.
fn run_two_stage<E, C, B, O>(
    bounds: ParamBox,
    canonicalize: C,
    build: B,
    objective: O,
    config: &SearchConfig,
) -> Result<SearchResult<E>, SearchError>
where
    C: Fn(Params) -> Params + Sync,
    B: Fn(&Params) -> E + Sync,
    O: Fn(&Params) -> f64 + Sync,
    E: Send,
{
    config.validate()?;
    let eval = |p: &Params| objective(&canonicalize(bounds.clamp(*p)));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.n_workers)
        .build()
        .expect("worker pool");
    let stage1: Vec<(Params, f64)> = pool.install(|| {
        (0..config.n_starts)
            .into_par_iter()
            .map(|i| {
                let stream = (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed ^ stream);
                let start = sample_start(&mut rng, &bounds);
                simplex_maximize(&eval, &bounds, start, config.local_iters)
            })
            .collect()
    });

    let mut order: Vec<usize> = (0..stage1.len()).collect();
    order.sort_by(|&a, &b| {
        stage1[b].1.partial_cmp(&stage1[a].1).expect("regret is not NaN").then(a.cmp(&b))
    });
    order.truncate(STAGE2_TOP_K.min(order.len()));

    let mut candidates = Vec::with_capacity(order.len());
    let mut winner: Option<(Params, f64, Vec<RefineStep>)> = None;
    for &index in &order {
        let (params, stage1_value) = stage1[index];
        let (refined_params, refined_value, trace) = refine(&eval, &bounds, params, config);
        candidates.push(Stage1Candidate {
            env: build(&canonicalize(bounds.clamp(params))),
            value: stage1_value,
            refined_value,
        });
        let better = winner.as_ref().map_or(true, |w| refined_value > w.1);
        if better {
            winner = Some((refined_params, refined_value, trace));
        }
    }
    let (best_params, _, trace) = winner.expect("at least one start");

    // Re-derive the reported value from the reported environment so the two
    // can never disagree.
    let final_params = canonicalize(bounds.clamp(best_params));
    let argmax_env = build(&final_params);
    let value = objective(&final_params);
    Ok(SearchResult { value, argmax_env, stage1_candidates: candidates, refine_trace: trace })
}

fn require_mu_feasible(spec: &AggregatorSpec, domain: SearchDomain) -> Result<(), SearchError> {
    if spec.requires_prior_mean() && domain != SearchDomain::KnownMarginalMean {
        return Err(SearchError::InfeasibleDomain { domain });
    }
    Ok(())
}

pub(crate) fn worst_case_core(
    spec: &AggregatorSpec,
    domain: SearchDomain,
    bounds: ParamBox,
    config: &SearchConfig,
) -> Result<SearchResult<BinaryCIEnvironment>, SearchError> {
    require_mu_feasible(spec, domain)?;
    let rebind = domain == SearchDomain::KnownMarginalMean;
    let objective = move |p: &Params| {
        let env = build_ci(p);
        if rebind {
            let bound = spec.with_prior_mean(env.prior_mean());
            expected_regret_total(&bound, &env)
        } else {
            expected_regret_total(spec, &env)
        }
    };
    run_two_stage(bounds, canonicalize_ci, build_ci, objective, config)
}

/// Worst-case expected regret of one aggregator over a domain.
pub fn worst_case_regret(
    spec: &AggregatorSpec,
    domain: SearchDomain,
    config: &SearchConfig,
) -> Result<SearchResult<BinaryCIEnvironment>, SearchError> {
    worst_case_core(spec, domain, domain_bounds(domain), config)
}

/// Worst-case regret of the one-parameter logit rule at each grid point.
pub fn sweep_alpha(
    domain: SearchDomain,
    alphas: &[f64],
    config: &SearchConfig,
) -> Result<Vec<SweepPoint>, SearchError> {
    if alphas.is_empty() {
        return Err(SearchError::EmptyGrid);
    }
    for &alpha in alphas {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(SearchError::GridRange { alpha });
        }
    }
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let result = worst_case_regret(&AggregatorSpec::LogOdds { alpha }, domain, config)?;
        out.push(SweepPoint {
            alpha,
            worst_case_regret: result.value,
            argmax_env: result.argmax_env,
        });
    }
    Ok(out)
}

/// Evenly spaced grid over [`lo`, `hi`] with spacing `step`, always including
/// both endpoints. The final interval is shortened when `step` does not divide
/// the range evenly.
pub fn param_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step - 1e-9).ceil().max(0.0) as usize;
    let mut points: Vec<f64> = (0..=count).map(|i| (lo + i as f64 * step).min(hi)).collect();
    if points.last().map_or(true, |&last| last < hi) {
        points.push(hi);
    }
    points.dedup();
    points
}

pub(crate) fn optimize_core(
    family: AggregatorFamily,
    domain: SearchDomain,
    bounds: ParamBox,
    outer_grid: f64,
    config: &SearchConfig,
) -> Result<OptimizedAggregator, SearchError> {
    if !(outer_grid > 0.0) {
        return Err(SearchError::OuterGridStep { step: outer_grid });
    }
    let alphas = param_grid(0.0, 1.0, outer_grid);
    let gammas = match family {
        AggregatorFamily::LogOdds => vec![None],
        AggregatorFamily::GeneralizedLogOdds => {
            param_grid(-1.0, 1.0, outer_grid).into_iter().map(Some).collect()
        }
    };
    let mut best: Option<OptimizedAggregator> = None;
    for &alpha in &alphas {
        for &gamma in &gammas {
            let spec = match gamma {
                None => AggregatorSpec::LogOdds { alpha },
                // The mu slot is rebound to each candidate's prior mean.
                Some(g) => AggregatorSpec::GenLogOdds { alpha, gamma: g, mu: 0.5 },
            };
            let result = worst_case_core(&spec, domain, bounds, config)?;
            // Strict improvement keeps the smallest (alpha, gamma) on ties.
            let better = best.as_ref().map_or(true, |b| result.value < b.worst_case_regret);
            if better {
                best = Some(OptimizedAggregator {
                    alpha,
                    gamma,
                    worst_case_regret: result.value,
                });
            }
        }
    }
    Ok(best.expect("grids are nonempty"))
}

/// Grid-search an aggregator family's parameters for the minimal worst-case
/// regret; ties break toward smaller alpha, then smaller gamma.
pub fn optimize_aggregator(
    family: AggregatorFamily,
    domain: SearchDomain,
    outer_grid: f64,
    config: &SearchConfig,
) -> Result<OptimizedAggregator, SearchError> {
    optimize_core(family, domain, domain_bounds(domain), outer_grid, config)
}

/// Worst-case regret over nested-information environments, searching all seven
/// parameters (states, state weight, informed conditionals, garbling).
pub fn blackwell_worst_case(
    spec: &AggregatorSpec,
    config: &SearchConfig,
) -> Result<SearchResult<BlackwellEnvironment>, SearchError> {
    let objective = move |p: &Params| blackwell_regret(spec, &build_blackwell(p));
    run_two_stage(ParamBox::unit(), canonicalize_blackwell, build_blackwell, objective, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregators::MuPolicy;

    fn quick(n_starts: usize, local_iters: usize) -> SearchConfig {
        SearchConfig { n_starts, local_iters, n_workers: 1, ..SearchConfig::default() }
    }

    #[test]
    fn test_constant_half_approaches_quarter() {
        let spec = AggregatorSpec::Constant { c: 0.5 };
        let result =
            worst_case_regret(&spec, SearchDomain::UnknownState, &quick(32, 600)).unwrap();
        assert!(result.value >= 0.24, "found {}", result.value);
        assert!(result.value <= 0.25 + 1e-12);
    }

    #[test]
    fn test_value_is_reevaluated_regret() {
        let spec = AggregatorSpec::LogOdds { alpha: 0.585 };
        let result =
            worst_case_regret(&spec, SearchDomain::UnknownState, &quick(16, 400)).unwrap();
        let direct = expected_regret_total(&spec, &result.argmax_env);
        assert!((result.value - direct).abs() < 1e-12);
        for candidate in &result.stage1_candidates {
            assert!(result.value >= candidate.refined_value - 1e-12);
        }
    }

    #[test]
    fn test_known_mean_rebinds_prior_slot() {
        let spec = AggregatorSpec::Kww { lambda: 0.8, mu_policy: MuPolicy::Known(0.123) };
        let result =
            worst_case_regret(&spec, SearchDomain::KnownMarginalMean, &quick(16, 400)).unwrap();
        let bound = spec.with_prior_mean(result.argmax_env.prior_mean());
        let direct = expected_regret_total(&bound, &result.argmax_env);
        assert!((result.value - direct).abs() < 1e-12);
    }

    #[test]
    fn test_infeasible_domains_for_prior_dependent_rules() {
        let kww = AggregatorSpec::Kww { lambda: 0.8, mu_policy: MuPolicy::Known(0.5) };
        let gen = AggregatorSpec::GenLogOdds { alpha: 0.5, gamma: 0.5, mu: 0.5 };
        let cfg = quick(4, 50);
        for domain in [SearchDomain::UnknownState, SearchDomain::KnownZeroOne] {
            for spec in [&kww, &gen] {
                assert_eq!(
                    worst_case_regret(spec, domain, &cfg),
                    Err(SearchError::InfeasibleDomain { domain })
                );
            }
        }
        assert!(worst_case_regret(&kww, SearchDomain::KnownMarginalMean, &cfg).is_ok());
    }

    #[test]
    fn test_determinism_for_fixed_seed() {
        let spec = AggregatorSpec::PrecisionWeighted;
        let cfg = quick(12, 300);
        let a = worst_case_regret(&spec, SearchDomain::KnownZeroOne, &cfg).unwrap();
        let b = worst_case_regret(&spec, SearchDomain::KnownZeroOne, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        // More workers than tasks must not change the reduction order.
        let wide = SearchConfig { n_workers: 4, ..cfg };
        let c = worst_case_regret(&spec, SearchDomain::KnownZeroOne, &wide).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
    }

    #[test]
    fn test_refine_trace_is_monotone() {
        let spec = AggregatorSpec::SimpleAverage;
        let result =
            worst_case_regret(&spec, SearchDomain::UnknownState, &quick(8, 300)).unwrap();
        assert!(!result.refine_trace.is_empty());
        for pair in result.refine_trace.windows(2) {
            assert!(pair[1].value >= pair[0].value - 1e-15);
            assert_eq!(pair[1].step, pair[0].step + 1);
        }
        let last = result.refine_trace.last().unwrap().value;
        assert!((result.value - last).abs() < 1e-12);
    }

    #[test]
    fn test_domain_nesting() {
        let spec = AggregatorSpec::LogOdds { alpha: 0.5168 };
        let narrow =
            worst_case_regret(&spec, SearchDomain::KnownZeroOne, &quick(24, 500)).unwrap();
        let wide =
            worst_case_regret(&spec, SearchDomain::UnknownState, &quick(48, 500)).unwrap();
        assert!(narrow.value <= wide.value + 1e-9);
    }

    #[test]
    fn test_symmetric_argmax_swap() {
        let spec = AggregatorSpec::LogOdds { alpha: 0.585 };
        let result =
            worst_case_regret(&spec, SearchDomain::UnknownState, &quick(16, 400)).unwrap();
        let e = &result.argmax_env;
        let swapped = BinaryCIEnvironment::new(
            e.theta1(),
            e.theta2(),
            e.lambda2(),
            e.p2_low(),
            e.p1_low(),
            e.q2_low(),
            e.q1_low(),
        )
        .unwrap();
        let direct = expected_regret_total(&spec, &swapped);
        assert!((result.value - direct).abs() < 1e-12);
    }

    #[test]
    fn test_sweep_alpha_grid_order_and_anchor() {
        let points = sweep_alpha(SearchDomain::UnknownState, &[0.0, 0.5], &quick(24, 500))
            .unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].alpha, 0.0);
        assert_eq!(points[1].alpha, 0.5);
        // The all-ignoring rule's worst case is the fully revealing environment.
        assert!((points[0].worst_case_regret - 0.25).abs() < 1e-3);
        assert!(points[1].worst_case_regret < points[0].worst_case_regret);
    }

    #[test]
    fn test_sweep_rejects_bad_grids() {
        let cfg = quick(2, 20);
        assert_eq!(
            sweep_alpha(SearchDomain::UnknownState, &[], &cfg),
            Err(SearchError::EmptyGrid)
        );
        assert_eq!(
            sweep_alpha(SearchDomain::UnknownState, &[0.5, 1.2], &cfg),
            Err(SearchError::GridRange { alpha: 1.2 })
        );
    }

    #[test]
    fn test_optimize_degenerate_states_returns_smallest_alpha() {
        // Pin theta1 = theta2: regret vanishes for every alpha, so the tie
        // breaks toward the first grid point.
        let bounds = ParamBox::new(
            [0.4, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.4, 0.4, 1.0, 1.0, 1.0, 1.0, 1.0],
        );
        let best = optimize_core(
            AggregatorFamily::LogOdds,
            SearchDomain::UnknownState,
            bounds,
            0.5,
            &quick(4, 100),
        )
        .unwrap();
        assert_eq!(best.alpha, 0.0);
        assert_eq!(best.gamma, None);
        assert!(best.worst_case_regret.abs() < 1e-15);
    }

    #[test]
    fn test_optimize_rejects_bad_grid_step() {
        assert_eq!(
            optimize_aggregator(
                AggregatorFamily::LogOdds,
                SearchDomain::UnknownState,
                0.0,
                &quick(2, 20)
            ),
            Err(SearchError::OuterGridStep { step: 0.0 })
        );
    }

    #[test]
    fn test_config_validation() {
        let spec = AggregatorSpec::SimpleAverage;
        let bad_starts = SearchConfig { n_starts: 0, ..SearchConfig::default() };
        assert_eq!(
            worst_case_regret(&spec, SearchDomain::UnknownState, &bad_starts),
            Err(SearchError::NoStarts)
        );
        let bad_step = SearchConfig { refine_step: 1e-2, refine_radius: 1e-3, ..quick(2, 20) };
        assert!(matches!(
            worst_case_regret(&spec, SearchDomain::UnknownState, &bad_step),
            Err(SearchError::RefineStep { .. })
        ));
        let bad_workers = SearchConfig { n_workers: 0, ..SearchConfig::default() };
        assert_eq!(
            worst_case_regret(&spec, SearchDomain::UnknownState, &bad_workers),
            Err(SearchError::NoWorkers)
        );
    }

    #[test]
    fn test_blackwell_follow_informed_expert_is_safe() {
        let result =
            blackwell_worst_case(&AggregatorSpec::FollowExpert2, &quick(8, 100)).unwrap();
        assert!(result.value.abs() < 1e-15);
    }

    #[test]
    fn test_blackwell_constant_half_approaches_quarter() {
        let result =
            blackwell_worst_case(&AggregatorSpec::Constant { c: 0.5 }, &quick(32, 600)).unwrap();
        assert!(result.value >= 0.24, "found {}", result.value);
        let direct = blackwell_regret(&AggregatorSpec::Constant { c: 0.5 }, &result.argmax_env);
        assert!((result.value - direct).abs() < 1e-12);
    }

    #[test]
    fn test_canonicalization_preserves_the_distribution() {
        let raw = [0.8, 0.3, 0.25, 0.6, 0.7, 0.2, 0.9];
        let canon = canonicalize_ci(raw);
        assert!(canon[0] <= canon[1]);
        let env = build_ci(&canon);
        // The swapped labeling must give the same reports and prior mean as
        // direct enumeration of the raw parameterization.
        let mean_raw = (1.0 - raw[2]) * raw[0] + raw[2] * raw[1];
        assert!((env.prior_mean() - mean_raw).abs() < 1e-15);
        let spec = AggregatorSpec::SimpleAverage;
        let v = expected_regret_total(&spec, &env);
        assert!(v >= 0.0);
        let roundtrip = canonicalize_ci(canon);
        assert_eq!(roundtrip, canon);
    }

    #[test]
    fn test_grid_includes_endpoints() {
        let g = param_grid(0.0, 1.0, 0.25);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = param_grid(-1.0, 1.0, 0.5);
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let g = param_grid(0.0, 1.0, 0.3);
        assert_eq!(g.first(), Some(&0.0));
        assert_eq!(g.last(), Some(&1.0));
        assert_eq!(g.len(), 5);
    }
}
