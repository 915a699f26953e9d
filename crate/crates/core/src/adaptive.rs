//! Joint threshold and power adaptation: KKT switching levels, a λ
//! bisection on the power budget, the fixed-point iteration between the two
//! links and a golden-section search over the target-PER split.
//!
//! One iteration, starting from (Γ₁⁽ⁱ⁻¹⁾, Γ₂⁽ⁱ⁻¹⁾):
//!
//! 1. φ = Ω(Γ₁⁽ⁱ⁻¹⁾, Γ₂⁽ⁱ⁻¹⁾)
//! 2. λ solves E[P_s] + φ·P_t,1·E[P_r] = P̄(1 + φ·P_t,1), with each link's
//!    levels a function of λ and of the other link's previous levels
//! 3. Γ₁⁽ⁱ⁾ = f₁(Γ₂⁽ⁱ⁻¹⁾, λ), Γ₂⁽ⁱ⁾ = f₂(Γ₁⁽ⁱ⁻¹⁾, λ, φ)

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::amc::AmcModeTable;
use crate::channel::{mode_probabilities, Link, ThresholdVector};
use crate::error::{Error, Result};
use crate::numeric::golden_section_max;
use crate::perf::{
    build_power_policy, expected_power_with_gains, omega_with, performance_report, spectral_efficiency,
    AdaptationPolicy, OmegaVariant, PerformanceReport, Scenario,
};
use crate::units::db_to_linear;

/// Where the fixed-point iteration starts.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialThresholds {
    /// Every level at its Γₚ floor.
    #[default]
    Floors,
    /// Levels drawn uniformly in dB, sorted and floored.
    RandomDb { seed: u64, lo_db: f64, hi_db: f64 },
    User { source: ThresholdVector, relay: ThresholdVector },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Absolute change in η between iterations that counts as converged.
    pub se_convergence_tol: f64,
    /// Initial λ bracket; the upper end doubles until it straddles the root.
    pub lambda_bracket: (f64, f64),
    /// Largest λ tried before declaring the budget infeasible.
    pub lambda_cap: f64,
    /// Relative power residual accepted by the λ bisection.
    pub lambda_tol: f64,
    /// Final interval width of the golden-section search over P_t,1.
    pub pt1_search_tol: f64,
    pub initial_thresholds: InitialThresholds,
    pub omega_variant: OmegaVariant,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iterations: 50,
            se_convergence_tol: 1e-4,
            lambda_bracket: (0.0, 1.0),
            lambda_cap: 2f64.powi(60),
            lambda_tol: 1e-10,
            pt1_search_tol: 1e-4,
            initial_thresholds: InitialThresholds::Floors,
            omega_variant: OmegaVariant::HarmonicRate,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("se_convergence_tol", self.se_convergence_tol),
            ("lambda_tol", self.lambda_tol),
            ("pt1_search_tol", self.pt1_search_tol),
            ("lambda_cap", self.lambda_cap),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::Validation(format!("{name} must be positive, got {v}")));
        }
        if self.max_iterations == 0 {
            return Err(Error::Validation("max_iterations must be at least 1".into()));
        }
        let (lo, hi) = self.lambda_bracket;
        if !(lo >= 0.0 && hi > lo && hi <= self.lambda_cap) {
            return Err(Error::Validation(format!("bad lambda bracket [{lo}, {hi}]")));
        }
        if let InitialThresholds::RandomDb { lo_db, hi_db, .. } = self.initial_thresholds {
            if !(hi_db > lo_db) {
                return Err(Error::Validation(format!("bad random init range [{lo_db}, {hi_db}] dB")));
            }
        }
        Ok(())
    }

    /// Golden-section interval for P_t,1.
    pub fn pt1_interval(&self, p_loss: f64) -> (f64, f64) {
        (p_loss * 1.0001, 0.9999)
    }
}

/// Levels as an affine function of λ: Γₙ(λ) = max(λ·slopeₙ, floorₙ).
#[derive(Debug, Clone)]
struct LevelMap {
    slopes: Vec<f64>,
    floors: Vec<f64>,
}

impl LevelMap {
    fn at(&self, lambda: f64) -> Result<(ThresholdVector, Vec<usize>)> {
        let levels = self
            .slopes
            .iter()
            .zip(&self.floors)
            .map(|(&s, &f)| if s > 0.0 { (lambda * s).max(f) } else { f })
            .collect();
        ThresholdVector::from_candidates(levels)
    }
}

/// Σ over the other link of R²/((R + R_prev)(R + R_cur)) · π, the
/// derivative of the retransmission weight at a level boundary.
fn boundary_weight(r_prev: f64, r_cur: f64, other_rates: &[f64], other_pi: &[f64]) -> f64 {
    other_rates
        .iter()
        .zip(other_pi)
        .map(|(&r, &p)| r * r / ((r + r_prev) * (r + r_cur)) * p)
        .sum()
}

fn level_map(
    table: &AmcModeTable,
    other_rates: &[f64],
    other_pi: &[f64],
    gains: &[f64],
    numerator_scale: f64,
    first_term: f64,
    second_term: f64,
) -> Result<LevelMap> {
    let rates = table.rates();
    let mut slopes = Vec::with_capacity(rates.len());
    for i in 0..rates.len() {
        let (r_prev, h_prev) = if i == 0 { (0.0, 0.0) } else { (rates[i - 1], gains[i - 1]) };
        let num = numerator_scale * (gains[i] - h_prev) / (rates[i] - r_prev);
        if !(num > 0.0) {
            slopes.push(0.0);
            continue;
        }
        let den = first_term + second_term * boundary_weight(r_prev, rates[i], other_rates, other_pi);
        if !(den > 0.0) {
            return Err(Error::NonPositiveDenominator { mode: i + 1, value: den });
        }
        slopes.push(num / den);
    }
    Ok(LevelMap { slopes, floors: table.gamma_p_floors() })
}

fn source_map(scenario: &Scenario, p_t1: f64, relay_thresholds: &ThresholdVector) -> Result<LevelMap> {
    let pi2 = mode_probabilities(&scenario.relay_link, relay_thresholds);
    let gains = scenario.table.gains_for_target(p_t1)?;
    level_map(
        &scenario.table,
        &scenario.relay_modes().rates(),
        &pi2,
        &gains,
        scenario.p_bar_s,
        1.0 - p_t1,
        p_t1 - scenario.p_loss,
    )
}

fn relay_map(scenario: &Scenario, p_t1: f64, source_thresholds: &ThresholdVector, phi: f64) -> Result<LevelMap> {
    let pi1 = mode_probabilities(&scenario.source_link, source_thresholds);
    let gains = scenario.relay_modes().gains_for_target(scenario.p_loss / p_t1)?;
    level_map(
        scenario.relay_modes(),
        &scenario.table.rates(),
        &pi1,
        &gains,
        phi * scenario.p_bar_r,
        0.0,
        1.0 - scenario.p_loss / p_t1,
    )
}

/// Source switching levels for multiplier λ with relay levels held fixed.
pub fn source_levels(
    scenario: &Scenario,
    p_t1: f64,
    relay_thresholds: &ThresholdVector,
    lambda: f64,
) -> Result<ThresholdVector> {
    check_lambda(lambda)?;
    Ok(source_map(scenario, p_t1, relay_thresholds)?.at(lambda)?.0)
}

/// Relay switching levels for multiplier λ and relay weight φ with source
/// levels held fixed.
pub fn relay_levels(
    scenario: &Scenario,
    p_t1: f64,
    source_thresholds: &ThresholdVector,
    lambda: f64,
    phi: f64,
) -> Result<ThresholdVector> {
    check_lambda(lambda)?;
    if !(phi >= 0.0) {
        return Err(Error::Validation(format!("phi must be non-negative, got {phi}")));
    }
    Ok(relay_map(scenario, p_t1, source_thresholds, phi)?.at(lambda)?.0)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) {
        return Err(Error::Validation(format!("lambda must be non-negative, got {lambda}")));
    }
    Ok(())
}

/// Outcome of one λ solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSolution {
    pub lambda: f64,
    pub source: ThresholdVector,
    pub relay: ThresholdVector,
    /// Modes whose region collapsed to (near) zero width, per link.
    pub disabled_source: Vec<usize>,
    pub disabled_relay: Vec<usize>,
    /// Left-hand side of the power equality at the returned λ.
    pub consumed: f64,
    pub budget: f64,
}

struct PowerProblem<'a> {
    scenario: &'a Scenario,
    source: LevelMap,
    relay: LevelMap,
    source_gains: Vec<f64>,
    relay_gains: Vec<f64>,
    relay_weight: f64,
    budget: f64,
}

impl PowerProblem<'_> {
    fn consumed(&self, lambda: f64) -> Result<f64> {
        let (t1, _) = self.source.at(lambda)?;
        let (t2, _) = self.relay.at(lambda)?;
        let es = expected_power_with_gains(self.scenario, Link::SourceDestination, &t1, &self.source_gains)?;
        let er = expected_power_with_gains(self.scenario, Link::RelayDestination, &t2, &self.relay_gains)?;
        Ok(es + self.relay_weight * er)
    }
}

fn power_problem<'a>(
    scenario: &'a Scenario,
    p_t1: f64,
    prev_source: &ThresholdVector,
    prev_relay: &ThresholdVector,
    phi: f64,
) -> Result<PowerProblem<'a>> {
    Ok(PowerProblem {
        scenario,
        source: source_map(scenario, p_t1, prev_relay)?,
        relay: relay_map(scenario, p_t1, prev_source, phi)?,
        source_gains: scenario.table.gains_for_target(p_t1)?,
        relay_gains: scenario.relay_modes().gains_for_target(scenario.p_loss / p_t1)?,
        relay_weight: phi * p_t1,
        budget: scenario.p_bar * (1.0 + phi * p_t1),
    })
}

/// Total power on the left of the budget equality at multiplier λ.
pub fn consumed_power(
    scenario: &Scenario,
    p_t1: f64,
    prev: (&ThresholdVector, &ThresholdVector),
    phi: f64,
    lambda: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    power_problem(scenario, p_t1, prev.0, prev.1, phi)?.consumed(lambda)
}

/// Find λ ≥ 0 meeting the power budget with equality (or λ = 0 when the
/// budget is slack at the floors). Bisection keeps the feasible end, so the
/// returned levels never overspend.
pub fn solve_lambda(
    scenario: &Scenario,
    p_t1: f64,
    prev: (&ThresholdVector, &ThresholdVector),
    phi: f64,
    config: &OptimizerConfig,
) -> Result<LambdaSolution> {
    if !(phi >= 0.0) {
        return Err(Error::Validation(format!("phi must be non-negative, got {phi}")));
    }
    let problem = power_problem(scenario, p_t1, prev.0, prev.1, phi)?;
    let residual = |l: f64| problem.consumed(l).map(|c| c - problem.budget);

    let (mut lo, mut hi) = config.lambda_bracket;
    let lambda = if residual(lo)? <= 0.0 {
        lo
    } else {
        let mut r_hi = residual(hi)?;
        while r_hi > 0.0 {
            if hi >= config.lambda_cap {
                return Err(Error::Infeasible(format!(
                    "power budget {:.6} unreachable for P_t1 = {p_t1:.6} with lambda up to {:e}",
                    problem.budget, config.lambda_cap
                )));
            }
            lo = hi;
            hi = (hi * 2.0).min(config.lambda_cap);
            r_hi = residual(hi)?;
        }
        for _ in 0..200 {
            if r_hi.abs() <= config.lambda_tol * problem.budget || hi - lo <= 1e-15 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let r = residual(mid)?;
            if r > 0.0 {
                lo = mid;
            } else {
                hi = mid;
                r_hi = r;
            }
        }
        hi
    };
    let (source, disabled_source) = problem.source.at(lambda)?;
    let (relay, disabled_relay) = problem.relay.at(lambda)?;
    Ok(LambdaSolution {
        lambda,
        source,
        relay,
        disabled_source,
        disabled_relay,
        consumed: problem.consumed(lambda)?,
        budget: problem.budget,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub lambda: f64,
    pub phi: f64,
    pub source: ThresholdVector,
    pub relay: ThresholdVector,
    pub spectral_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationTrace {
    /// η at the starting thresholds (no power constraint applied).
    pub initial_se: f64,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    /// Iterations after the first whose η fell by more than the tolerance.
    pub se_decreases: Vec<usize>,
}

impl IterationTrace {
    pub fn se_history(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.spectral_efficiency).collect()
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Warn about SE decreases and non-convergence.
    pub fn log_findings(&self, p_t1: f64) {
        if let Some(first) = self.se_decreases.first() {
            warn!(
                "spectral efficiency fell in {} iteration(s), first at {first}, at p_t1 = {p_t1}",
                self.se_decreases.len()
            );
        }
        if !self.converged {
            warn!("no convergence within {} iterations at p_t1 = {p_t1}", self.iterations());
        }
    }
}

fn initial_levels(scenario: &Scenario, init: &InitialThresholds) -> Result<(ThresholdVector, ThresholdVector)> {
    match init {
        InitialThresholds::Floors => Ok((
            ThresholdVector::from_candidates(scenario.table.gamma_p_floors())?.0,
            ThresholdVector::from_candidates(scenario.relay_modes().gamma_p_floors())?.0,
        )),
        InitialThresholds::RandomDb { seed, lo_db, hi_db } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut draw = |table: &AmcModeTable| -> Result<ThresholdVector> {
                let mut db: Vec<f64> = (0..table.len()).map(|_| rng.random_range(*lo_db..*hi_db)).collect();
                db.sort_by(f64::total_cmp);
                let levels = db
                    .iter()
                    .zip(table.gamma_p_floors())
                    .map(|(&d, f)| db_to_linear(d).max(f))
                    .collect();
                Ok(ThresholdVector::from_candidates(levels)?.0)
            };
            let source = draw(&scenario.table)?;
            let relay = draw(scenario.relay_modes())?;
            Ok((source, relay))
        }
        InitialThresholds::User { source, relay } => Ok((source.clone(), relay.clone())),
    }
}

/// Fixed-point iteration at a fixed P_t,1.
pub fn iterate(
    scenario: &Scenario,
    p_t1: f64,
    config: &OptimizerConfig,
) -> Result<(AdaptationPolicy, IterationTrace)> {
    config.validate()?;
    let (mut t1, mut t2) = initial_levels(scenario, &config.initial_thresholds)?;
    let mut policy = build_power_policy(scenario, p_t1, t1.clone(), t2.clone())?;
    let mut trace = IterationTrace { initial_se: spectral_efficiency(scenario, &policy), ..Default::default() };

    for i in 1..=config.max_iterations {
        let phi = omega_with(scenario, &t1, &t2, config.omega_variant);
        let sol = solve_lambda(scenario, p_t1, (&t1, &t2), phi, config)?;
        t1 = sol.source;
        t2 = sol.relay;
        policy = build_power_policy(scenario, p_t1, t1.clone(), t2.clone())?;
        let eta = spectral_efficiency(scenario, &policy);
        debug!("p_t1={p_t1:.6} iter {i}: lambda={:.6e} phi={phi:.6} eta={eta:.6}", sol.lambda);

        let prev = trace.records.last().map(|r| r.spectral_efficiency);
        trace.records.push(IterationRecord {
            iteration: i,
            lambda: sol.lambda,
            phi,
            source: t1.clone(),
            relay: t2.clone(),
            spectral_efficiency: eta,
        });
        if let Some(prev) = prev {
            if eta < prev - config.se_convergence_tol {
                trace.se_decreases.push(i);
            }
            if (eta - prev).abs() < config.se_convergence_tol {
                trace.converged = true;
                break;
            }
        }
    }
    if !trace.converged {
        debug!("no convergence within {} iterations at p_t1 = {p_t1}", config.max_iterations);
    }
    Ok((policy, trace))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub policy: AdaptationPolicy,
    pub p_t1_star: f64,
    pub report: PerformanceReport,
    pub trace: IterationTrace,
    pub evaluations: usize,
}

/// Maximize η over P_t,1 by golden section, each point a full iteration.
pub fn optimize(scenario: &Scenario, config: &OptimizerConfig) -> Result<OptimizeOutcome> {
    config.validate()?;
    scenario.validate()?;
    let (lo, hi) = config.pt1_interval(scenario.p_loss);
    let mut last_err = None;
    let search = golden_section_max(
        |p| match iterate(scenario, p, config) {
            Ok((policy, _)) => spectral_efficiency(scenario, &policy),
            Err(e) => {
                debug!("p_t1 = {p}: {e}");
                last_err = Some(e);
                f64::NAN
            }
        },
        lo,
        hi,
        config.pt1_search_tol,
    );
    if !search.value.is_finite() {
        return Err(match last_err {
            Some(Error::Infeasible(m)) => Error::Infeasible(format!("no feasible P_t1 in ({lo}, {hi}): {m}")),
            Some(e) => e,
            None => Error::Infeasible(format!("no feasible P_t1 in ({lo}, {hi})")),
        });
    }
    let (policy, trace) = iterate(scenario, search.x, config)?;
    trace.log_findings(search.x);
    let report = performance_report(scenario, &policy, config.omega_variant)?;
    Ok(OptimizeOutcome { policy, p_t1_star: search.x, report, trace, evaluations: search.evaluations })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiconcavityAudit {
    /// (P_t,1, η) samples; η is NaN where the point was infeasible.
    pub samples: Vec<(f64, f64)>,
    pub local_maxima: usize,
    pub noise: f64,
}

impl QuasiconcavityAudit {
    pub fn passes(&self) -> bool {
        self.local_maxima <= 1
    }

    pub fn argmax(&self) -> Option<(f64, f64)> {
        self.samples
            .iter()
            .copied()
            .filter(|s| s.1.is_finite())
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Strict local maxima of a sampled curve, ignoring steps within `noise`.
/// Endpoints count when the curve falls away from them.
pub fn count_local_maxima(values: &[f64], noise: f64) -> usize {
    let signs: Vec<i8> = values
        .iter()
        .filter(|v| v.is_finite())
        .collect::<Vec<_>>()
        .windows(2)
        .filter_map(|w| {
            let d = w[1] - w[0];
            if d > noise {
                Some(1)
            } else if d < -noise {
                Some(-1)
            } else {
                None
            }
        })
        .collect();
    let Some((&first, &last)) = signs.first().zip(signs.last()) else {
        return usize::from(values.iter().any(|v| v.is_finite()));
    };
    let interior = signs.windows(2).filter(|w| w[0] > 0 && w[1] < 0).count();
    interior + usize::from(first < 0) + usize::from(last > 0)
}

/// Sample η(P_t,1) at `points` log-spaced values and count its peaks.
pub fn audit_quasiconcavity(scenario: &Scenario, config: &OptimizerConfig, points: usize) -> Result<QuasiconcavityAudit> {
    config.validate()?;
    if points < 3 {
        return Err(Error::Validation(format!("need at least 3 audit points, got {points}")));
    }
    let (lo, hi) = config.pt1_interval(scenario.p_loss);
    let (llo, lhi) = (lo.ln(), hi.ln());
    let grid: Vec<f64> = (0..points)
        .map(|k| (llo + (lhi - llo) * k as f64 / (points - 1) as f64).exp())
        .collect();
    let samples: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&p| {
            let eta = iterate(scenario, p, config)
                .map(|(policy, _)| spectral_efficiency(scenario, &policy))
                .unwrap_or(f64::NAN);
            (p, eta)
        })
        .collect();
    let noise = 1e-6;
    let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let local_maxima = count_local_maxima(&values, noise);
    if local_maxima > 1 {
        warn!("eta(p_t1) shows {local_maxima} local maxima");
    }
    Ok(QuasiconcavityAudit { samples, local_maxima, noise })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amc::{hiperlan2, AmcMode};
    use crate::perf::average_power;
    use approx::assert_relative_eq;

    fn baseline() -> Scenario {
        Scenario::symmetric(hiperlan2(), 10.0, 0.0, 1e-3).unwrap()
    }

    fn floors(s: &Scenario) -> ThresholdVector {
        ThresholdVector::new(s.table.gamma_p_floors()).unwrap()
    }

    #[test]
    fn zero_lambda_gives_floors() {
        let s = baseline();
        let f = floors(&s);
        assert_eq!(source_levels(&s, 0.05, &f, 0.0).unwrap(), f);
        assert_eq!(relay_levels(&s, 0.05, &f, 0.0, 0.7).unwrap(), f);
        assert_eq!(relay_levels(&s, 0.05, &f, 1e9, 0.0).unwrap(), f);
    }

    #[test]
    fn levels_grow_with_lambda() {
        let s = baseline();
        let f = floors(&s);
        let mut prev = f.clone();
        for k in 0..40 {
            let lambda = 1e-3 * 1.5f64.powi(k);
            let next = source_levels(&s, 0.05, &f, lambda).unwrap();
            for (a, b) in prev.levels().iter().zip(next.levels()) {
                assert!(b >= a);
            }
            prev = next;
        }
        assert!(prev.levels()[0] > 1e3);
    }

    #[test]
    fn consumed_power_is_monotone_in_lambda() {
        let s = baseline();
        let f = floors(&s);
        let mut last = f64::INFINITY;
        for k in 0..60 {
            let lambda = 1e-4 * 1.3f64.powi(k);
            let c = consumed_power(&s, 0.03, (&f, &f), 0.8, lambda).unwrap();
            assert!(c <= last * (1.0 + 1e-12), "lambda {lambda}: {c} > {last}");
            last = c;
        }
    }

    #[test]
    fn slack_budget_gives_zero_lambda() {
        let mut s = baseline();
        s.p_bar = 1e9;
        let f = floors(&s);
        let sol = solve_lambda(&s, 0.03, (&f, &f), 0.5, &OptimizerConfig::default()).unwrap();
        assert_eq!(sol.lambda, 0.0);
        assert_eq!(sol.source, f);
    }

    #[test]
    fn capped_multiplier_reports_infeasible() {
        let mut s = baseline();
        s.p_bar = 1e-3;
        let f = floors(&s);
        let config = OptimizerConfig { lambda_bracket: (0.0, 1e-6), lambda_cap: 1e-4, ..Default::default() };
        let err = solve_lambda(&s, 0.03, (&f, &f), 0.5, &config).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn solved_lambda_meets_budget() {
        let mut s = baseline();
        s.p_bar = 1.0;
        let f = floors(&s);
        let sol = solve_lambda(&s, 0.03, (&f, &f), 0.6, &OptimizerConfig::default()).unwrap();
        assert!(sol.lambda > 0.0);
        assert!(sol.consumed <= sol.budget);
        assert_relative_eq!(sol.consumed, sol.budget, max_relative = 1e-9);
    }

    #[test]
    fn single_mode_converges_quickly() {
        let table = AmcModeTable::new(vec![AmcMode::new(1, 1.0, 67.6181, 1.6883, 2.4955).unwrap()], 1080).unwrap();
        let s = Scenario::symmetric(table, 10.0, 0.0, 1e-3).unwrap();
        let (_, trace) = iterate(&s, 0.03, &OptimizerConfig::default()).unwrap();
        assert!(trace.converged);
        assert!(trace.iterations() <= 3, "{:?}", trace.se_history());
    }

    #[test]
    fn baseline_iteration_is_feasible_and_ordered() {
        let s = baseline();
        let config = OptimizerConfig::default();
        let (policy, trace) = iterate(&s, 0.03, &config).unwrap();
        assert!(trace.converged);
        assert!(trace.se_decreases.is_empty());
        let p = average_power(&s, &policy, config.omega_variant).unwrap();
        assert!(p <= s.p_bar * (1.0 + 1e-6), "{p}");
        assert_relative_eq!(policy.target_per_source * policy.target_per_relay, s.p_loss, max_relative = 1e-15);
    }

    #[test]
    fn random_starts_agree() {
        let s = baseline();
        let etas: Vec<f64> = (0..4)
            .map(|seed| {
                let config = OptimizerConfig {
                    initial_thresholds: InitialThresholds::RandomDb { seed, lo_db: -5.0, hi_db: 30.0 },
                    ..Default::default()
                };
                spectral_efficiency(&s, &iterate(&s, 0.03, &config).unwrap().0)
            })
            .collect();
        for e in &etas {
            assert_relative_eq!(*e, etas[0], max_relative = 1e-3);
        }
    }

    #[test]
    fn local_maxima_counting() {
        assert_eq!(count_local_maxima(&[1.0, 2.0, 3.0, 2.0, 1.0], 1e-6), 1);
        assert_eq!(count_local_maxima(&[3.0, 2.0, 1.0], 1e-6), 1);
        assert_eq!(count_local_maxima(&[1.0, 2.0, 3.0], 1e-6), 1);
        assert_eq!(count_local_maxima(&[1.0, 3.0, 1.0, 3.0, 1.0], 1e-6), 2);
        assert_eq!(count_local_maxima(&[1.0, 2.0, 2.0 + 1e-8, 2.0, 1.0], 1e-6), 1);
        assert_eq!(count_local_maxima(&[1.0, 1.0], 1e-6), 1);
        assert_eq!(count_local_maxima(&[f64::NAN, 1.0, 2.0, f64::NAN], 1e-6), 1);
    }

    #[test]
    fn bad_config_rejected() {
        let s = baseline();
        let config = OptimizerConfig { max_iterations: 0, ..Default::default() };
        assert!(iterate(&s, 0.03, &config).is_err());
        let config = OptimizerConfig { se_convergence_tol: 0.0, ..Default::default() };
        assert!(optimize(&s, &config).is_err());
    }
}
