//! Rate-only adaptation at fixed transmit power, plus the direct-transmission
//! baseline.
//!
//! With constant power each level is the SNR at which the mode's PER fit
//! drops to the link's target, Γₙ = max{ln(aₙ/P_t)/gₙ, Γₚₙ}. The source uses
//! P_t,1 and the relay P_loss/P_t,1, so a packet that is used on both links
//! never exceeds the loss target. The split is tuned by golden section.

use crate::amc::AmcModeTable;
use crate::channel::{avg_per_constant_power, mode_probabilities, ThresholdVector};
use crate::error::{Error, Result};
use crate::numeric::golden_section_max;
use crate::perf::{
    build_constant_power_policy, performance_report, spectral_efficiency, AdaptationPolicy, OmegaVariant,
    PerformanceReport, Scenario,
};

/// Levels at which every mode of `table` meets `target`, floored at Γₚ.
pub fn target_levels(table: &AmcModeTable, target: f64) -> Result<ThresholdVector> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Validation(format!("target PER must lie in (0, 1), got {target}")));
    }
    let levels = table
        .modes()
        .iter()
        .map(|m| ((m.fit_a / target).ln() / m.fit_g).max(m.fit_gamma_p))
        .collect();
    Ok(ThresholdVector::from_candidates(levels)?.0)
}

/// Source and relay levels for the split (p_t1, p_loss/p_t1) on a shared table.
pub fn const_power_thresholds(
    table: &AmcModeTable,
    p_t1: f64,
    p_loss: f64,
) -> Result<(ThresholdVector, ThresholdVector)> {
    if !(p_t1 > p_loss && p_t1 < 1.0) {
        return Err(Error::Validation(format!("target PER {p_t1} outside ({p_loss}, 1)")));
    }
    Ok((target_levels(table, p_t1)?, target_levels(table, p_loss / p_t1)?))
}

/// Constant-power policy for a given split, honouring a separate relay table.
pub fn const_power_policy(scenario: &Scenario, p_t1: f64) -> Result<AdaptationPolicy> {
    if !(p_t1 > scenario.p_loss && p_t1 < 1.0) {
        return Err(Error::Validation(format!("target PER {p_t1} outside ({}, 1)", scenario.p_loss)));
    }
    let source = target_levels(&scenario.table, p_t1)?;
    let relay = target_levels(scenario.relay_modes(), scenario.p_loss / p_t1)?;
    build_constant_power_policy(scenario, p_t1, source, relay)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstPowerOutcome {
    pub policy: AdaptationPolicy,
    pub p_t1_star: f64,
    pub report: PerformanceReport,
}

/// Maximize η over the split by golden section on (P_loss·1.0001, 0.9999).
pub fn optimize_const_power(scenario: &Scenario, tol: f64, variant: OmegaVariant) -> Result<ConstPowerOutcome> {
    scenario.validate()?;
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("search tolerance must be positive, got {tol}")));
    }
    let (lo, hi) = (scenario.p_loss * 1.0001, 0.9999);
    let search = golden_section_max(
        |p| {
            const_power_policy(scenario, p)
                .map(|policy| spectral_efficiency(scenario, &policy))
                .unwrap_or(f64::NAN)
        },
        lo,
        hi,
        tol,
    );
    let policy = const_power_policy(scenario, search.x)?;
    let report = performance_report(scenario, &policy, variant)?;
    Ok(ConstPowerOutcome { policy, p_t1_star: search.x, report })
}

/// Single-link constant-power AMC without retransmission, each mode used
/// where it meets P_loss on its own.
pub fn direct_transmission_se(scenario: &Scenario) -> Result<f64> {
    let thresholds = target_levels(&scenario.table, scenario.p_loss)?;
    let pi = mode_probabilities(&scenario.source_link, &thresholds);
    let mut eta = 0.0;
    for (i, (mode, p)) in scenario.table.modes().iter().zip(&pi).enumerate() {
        let per = avg_per_constant_power(&scenario.source_link, &thresholds, &scenario.table, i + 1)?;
        eta += mode.rate * (1.0 - per) * p;
    }
    Ok(eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amc::{hiperlan2, per_awgn, AmcMode};
    use crate::channel::{Link, LinkModel};
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn baseline() -> Scenario {
        Scenario::symmetric(hiperlan2(), 10.0, 0.0, 1e-3).unwrap()
    }

    #[test]
    fn level_from_inversion() {
        let table = AmcModeTable::new(vec![AmcMode::new(1, 1.0, E, 1.0, 0.1).unwrap()], 1080).unwrap();
        let t = target_levels(&table, (-3.0f64).exp()).unwrap();
        assert_relative_eq!(t.levels()[0], 4.0, max_relative = 1e-14);
    }

    #[test]
    fn symmetric_split_gives_equal_levels() {
        let table = hiperlan2();
        let (s, r) = const_power_thresholds(&table, 1e-3f64.sqrt(), 1e-3).unwrap();
        for (a, b) in s.levels().iter().zip(r.levels()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn inversion_identity_where_floor_inactive() {
        let table = hiperlan2();
        for k in 1..30 {
            let p_t1 = 1e-3 * 1.25f64.powi(k);
            if p_t1 >= 1.0 {
                break;
            }
            let (s, r) = const_power_thresholds(&table, p_t1, 1e-3).unwrap();
            for (levels, target) in [(&s, p_t1), (&r, 1e-3 / p_t1)] {
                for (m, &l) in table.modes().iter().zip(levels.levels()) {
                    if l > m.fit_gamma_p * (1.0 + 1e-9) {
                        assert_relative_eq!(per_awgn(m, l), target, max_relative = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn worst_case_plr_within_target() {
        let s = baseline();
        for &p_t1 in &[0.002, 0.03, 0.3] {
            let policy = const_power_policy(&s, p_t1).unwrap();
            let (t1, t2) = (&policy.source_thresholds, &policy.relay_thresholds);
            for i in 0..200 {
                let g1 = t1.lower(1) * 1.05f64.powi(i);
                for j in 0..200 {
                    let g2 = t2.lower(1) * 1.05f64.powi(j);
                    let p1 = per_awgn(&s.table.modes()[t1.mode_for(g1) - 1], g1);
                    let p2 = per_awgn(&s.table.modes()[t2.mode_for(g2) - 1], g2);
                    assert!(p1 * p2 <= s.p_loss * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn direct_transmission_bounds() {
        let s = baseline();
        let dt = direct_transmission_se(&s).unwrap();
        assert!(dt > 0.0 && dt <= s.table.max_rate());
        let carq = optimize_const_power(&s, 1e-4, OmegaVariant::HarmonicRate).unwrap();
        assert!(dt <= carq.report.spectral_efficiency);

        let mut dark = s.clone();
        dark.source_link = LinkModel::new(Link::SourceDestination, 1e-6).unwrap();
        assert!(direct_transmission_se(&dark).unwrap() < 1e-12);
    }

    #[test]
    fn doubling_rates_doubles_se() {
        let s = baseline();
        let d = s.with_scaled_rates(2.0).unwrap();
        for &p in &[0.005, 0.05, 0.5] {
            let a = spectral_efficiency(&s, &const_power_policy(&s, p).unwrap());
            let b = spectral_efficiency(&d, &const_power_policy(&d, p).unwrap());
            assert_relative_eq!(b, 2.0 * a, max_relative = 1e-12);
        }
    }

    #[test]
    fn split_out_of_range_rejected() {
        assert!(const_power_thresholds(&hiperlan2(), 1e-3, 1e-3).is_err());
        assert!(const_power_thresholds(&hiperlan2(), 1.0, 1e-3).is_err());
    }
}
