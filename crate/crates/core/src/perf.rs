//! Closed-form spectral efficiency, average power and the policy types they
//! act on.
//!
//! Spectral efficiency (bits/symbol):
//!
//! ```text
//! η = Σₙ Rₙ(1 − P̄ER₁ₙ)π₁ₙ + Σₙ Σₘ RₙRₘ/(Rₙ+Rₘ) · P̄ER₁ₙ(1 − P̄ER₂ₘ) π₂ₘ π₁ₙ
//! ```
//!
//! Average power weighs the two nodes' mean powers by the share of time the
//! relay spends retransmitting:
//!
//! ```text
//! P_avg = (E[P_s] + X·E[P_r]) / (1 + X),   X = Σₙ Σₘ wₙₘ P̄ER₁ₙ π₁ₙ π₂ₘ
//! ```
//!
//! with wₙₘ = RₙRₘ/(Rₙ+Rₘ) ([`OmegaVariant::HarmonicRate`]) or wₙₘ = Rₙ/Rₘ
//! ([`OmegaVariant::RateRatio`]). Under channel inversion P̄ER₁ₙ = P_t,1 and
//! X = P_t,1·Ω.

use std::str::FromStr;

use crate::amc::AmcModeTable;
use crate::channel::{
    avg_per_constant_power, expected_inverse_snr, mode_probabilities, per_mass_constant_power, Link,
    LinkModel, ThresholdVector,
};
use crate::error::{Error, Result};
use crate::units::db_to_linear;

/// Weighting used in the relay-time term Ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OmegaVariant {
    /// RₙRₘ/(Rₙ+Rₘ); CLI name `prop2`.
    #[default]
    HarmonicRate,
    /// Rₙ/Rₘ, the symbol-count ratio of a retransmission; CLI name `appendixB`.
    RateRatio,
}

impl OmegaVariant {
    pub const ALL: [OmegaVariant; 2] = [OmegaVariant::HarmonicRate, OmegaVariant::RateRatio];

    pub fn name(self) -> &'static str {
        match self {
            OmegaVariant::HarmonicRate => "prop2",
            OmegaVariant::RateRatio => "appendixB",
        }
    }

    fn weight(self, r_source: f64, r_relay: f64) -> f64 {
        match self {
            OmegaVariant::HarmonicRate => r_source * r_relay / (r_source + r_relay),
            OmegaVariant::RateRatio => r_source / r_relay,
        }
    }
}

impl FromStr for OmegaVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prop2" => Ok(OmegaVariant::HarmonicRate),
            "appendixB" => Ok(OmegaVariant::RateRatio),
            other => Err(Error::Validation(format!(
                "unknown omega variant '{other}' (expected prop2 or appendixB)"
            ))),
        }
    }
}

impl std::fmt::Display for OmegaVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A complete problem instance. Powers and SNRs are linear.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub table: AmcModeTable,
    /// Relay-side modes; `None` shares `table`.
    pub relay_table: Option<AmcModeTable>,
    pub source_link: LinkModel,
    pub relay_link: LinkModel,
    /// Maximum average system power P̄.
    pub p_bar: f64,
    pub p_bar_s: f64,
    pub p_bar_r: f64,
    pub p_loss: f64,
    /// Relay frame length as a fraction of the source frame.
    pub alpha: f64,
    pub mu_db: f64,
}

impl Scenario {
    /// P̄_s = P̄_r = P̄, γ̄₁ = P̄_s and γ̄₂ = μ·P̄_r, with α = 0.5.
    pub fn symmetric(table: AmcModeTable, p_bar_db: f64, mu_db: f64, p_loss: f64) -> Result<Self> {
        let p_bar = db_to_linear(p_bar_db);
        let s = Scenario {
            table,
            relay_table: None,
            source_link: LinkModel::new(Link::SourceDestination, p_bar)?,
            relay_link: LinkModel::new(Link::RelayDestination, db_to_linear(mu_db) * p_bar)?,
            p_bar,
            p_bar_s: p_bar,
            p_bar_r: p_bar,
            p_loss,
            alpha: 0.5,
            mu_db,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_loss > 0.0 && self.p_loss < 1.0) {
            return Err(Error::Validation(format!("p_loss must lie in (0, 1), got {}", self.p_loss)));
        }
        for (name, v) in [("p_bar", self.p_bar), ("p_bar_s", self.p_bar_s), ("p_bar_r", self.p_bar_r)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Validation(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.source_link.link != Link::SourceDestination || self.relay_link.link != Link::RelayDestination {
            return Err(Error::Validation("link models are swapped".into()));
        }
        Ok(())
    }

    pub fn relay_modes(&self) -> &AmcModeTable {
        self.relay_table.as_ref().unwrap_or(&self.table)
    }

    pub fn modes_for(&self, link: Link) -> &AmcModeTable {
        match link {
            Link::SourceDestination => &self.table,
            Link::RelayDestination => self.relay_modes(),
        }
    }

    pub fn link(&self, link: Link) -> &LinkModel {
        match link {
            Link::SourceDestination => &self.source_link,
            Link::RelayDestination => &self.relay_link,
        }
    }

    pub fn nominal_power(&self, link: Link) -> f64 {
        match link {
            Link::SourceDestination => self.p_bar_s,
            Link::RelayDestination => self.p_bar_r,
        }
    }

    /// Same scenario with every rate multiplied by `factor`.
    pub fn with_scaled_rates(&self, factor: f64) -> Result<Self> {
        let scale = |t: &AmcModeTable| -> Result<AmcModeTable> {
            let modes = t
                .modes()
                .iter()
                .map(|m| crate::amc::AmcMode::new(m.index, m.rate * factor, m.fit_a, m.fit_g, m.fit_gamma_p))
                .collect::<Result<Vec<_>>>()?;
            AmcModeTable::new(modes, t.packet_bits())
        };
        Ok(Scenario {
            table: scale(&self.table)?,
            relay_table: self.relay_table.as_ref().map(scale).transpose()?,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PowerControl {
    /// Pₛ(γ)/P̄ = hₙ/γ inside region n, pinning the post-adaptation SNR to hₙ.
    ChannelInversion { source_gains: Vec<f64>, relay_gains: Vec<f64> },
    /// Nodes always transmit at P̄_s / P̄_r.
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationPolicy {
    pub source_thresholds: ThresholdVector,
    pub relay_thresholds: ThresholdVector,
    pub target_per_source: f64,
    pub target_per_relay: f64,
    pub power: PowerControl,
}

impl AdaptationPolicy {
    pub fn is_power_adaptive(&self) -> bool {
        matches!(self.power, PowerControl::ChannelInversion { .. })
    }

    pub fn thresholds(&self, link: Link) -> &ThresholdVector {
        match link {
            Link::SourceDestination => &self.source_thresholds,
            Link::RelayDestination => &self.relay_thresholds,
        }
    }

    /// Channel-inversion gain vector, if any.
    pub fn gains(&self, link: Link) -> Option<&[f64]> {
        match (&self.power, link) {
            (PowerControl::ChannelInversion { source_gains, .. }, Link::SourceDestination) => Some(source_gains),
            (PowerControl::ChannelInversion { relay_gains, .. }, Link::RelayDestination) => Some(relay_gains),
            (PowerControl::Constant, _) => None,
        }
    }

    fn target(&self, link: Link) -> f64 {
        match link {
            Link::SourceDestination => self.target_per_source,
            Link::RelayDestination => self.target_per_relay,
        }
    }
}

/// Channel-inversion policy for target split (p_t1, P_loss/p_t1).
pub fn build_power_policy(
    scenario: &Scenario,
    p_t1: f64,
    source_thresholds: ThresholdVector,
    relay_thresholds: ThresholdVector,
) -> Result<AdaptationPolicy> {
    check_split(scenario, p_t1)?;
    let p_t2 = scenario.p_loss / p_t1;
    check_thresholds(scenario, Link::SourceDestination, &source_thresholds)?;
    check_thresholds(scenario, Link::RelayDestination, &relay_thresholds)?;
    for link in [Link::SourceDestination, Link::RelayDestination] {
        if scenario.modes_for(link).modes()[0].fit_gamma_p <= 0.0 {
            return Err(Error::Validation(format!(
                "{link} mode 1 has gamma_p = 0; the average power of channel inversion diverges"
            )));
        }
    }
    Ok(AdaptationPolicy {
        power: PowerControl::ChannelInversion {
            source_gains: scenario.table.gains_for_target(p_t1)?,
            relay_gains: scenario.relay_modes().gains_for_target(p_t2)?,
        },
        source_thresholds,
        relay_thresholds,
        target_per_source: p_t1,
        target_per_relay: p_t2,
    })
}

/// Constant-power policy with the given levels and target split.
pub fn build_constant_power_policy(
    scenario: &Scenario,
    p_t1: f64,
    source_thresholds: ThresholdVector,
    relay_thresholds: ThresholdVector,
) -> Result<AdaptationPolicy> {
    check_split(scenario, p_t1)?;
    check_thresholds(scenario, Link::SourceDestination, &source_thresholds)?;
    check_thresholds(scenario, Link::RelayDestination, &relay_thresholds)?;
    Ok(AdaptationPolicy {
        source_thresholds,
        relay_thresholds,
        target_per_source: p_t1,
        target_per_relay: scenario.p_loss / p_t1,
        power: PowerControl::Constant,
    })
}

fn check_split(scenario: &Scenario, p_t1: f64) -> Result<()> {
    if !(p_t1 > scenario.p_loss && p_t1 < 1.0) {
        return Err(Error::Validation(format!(
            "target PER {p_t1} outside ({}, 1)",
            scenario.p_loss
        )));
    }
    Ok(())
}

fn check_thresholds(scenario: &Scenario, link: Link, t: &ThresholdVector) -> Result<()> {
    let table = scenario.modes_for(link);
    if t.len() != table.len() {
        return Err(Error::Validation(format!(
            "{link} has {} thresholds for {} modes",
            t.len(),
            table.len()
        )));
    }
    if let Some((l, m)) = t.levels().iter().zip(table.modes()).find(|(l, m)| **l < m.fit_gamma_p) {
        return Err(Error::Validation(format!(
            "{link} level for mode {} ({l}) is below its gamma_p floor {}",
            m.index, m.fit_gamma_p
        )));
    }
    Ok(())
}

/// Ω over the given levels with the chosen weighting (no PER factor).
pub fn omega_with(
    scenario: &Scenario,
    source_thresholds: &ThresholdVector,
    relay_thresholds: &ThresholdVector,
    variant: OmegaVariant,
) -> f64 {
    let pi1 = mode_probabilities(&scenario.source_link, source_thresholds);
    let pi2 = mode_probabilities(&scenario.relay_link, relay_thresholds);
    weighted_pair_sum(&scenario.table.rates(), &scenario.relay_modes().rates(), &pi1, &pi2, variant)
}

/// Ω(Γ₁, Γ₂) = Σₙ Σₘ RₙRₘ/(Rₙ+Rₘ) π₂ₘ π₁ₙ.
pub fn omega(scenario: &Scenario, source_thresholds: &ThresholdVector, relay_thresholds: &ThresholdVector) -> f64 {
    omega_with(scenario, source_thresholds, relay_thresholds, OmegaVariant::HarmonicRate)
}

/// Σₙ Σₘ (Rₙ/Rₘ) π₂ₘ π₁ₙ.
pub fn omega_appendix(
    scenario: &Scenario,
    source_thresholds: &ThresholdVector,
    relay_thresholds: &ThresholdVector,
) -> f64 {
    omega_with(scenario, source_thresholds, relay_thresholds, OmegaVariant::RateRatio)
}

fn weighted_pair_sum(r1: &[f64], r2: &[f64], x1: &[f64], x2: &[f64], variant: OmegaVariant) -> f64 {
    r1.iter()
        .zip(x1)
        .map(|(&rn, &a)| a * r2.iter().zip(x2).map(|(&rm, &b)| variant.weight(rn, rm) * b).sum::<f64>())
        .sum()
}

/// PLR = PER₁·PER₂.
pub fn instantaneous_plr(per_source: f64, per_relay: f64) -> f64 {
    per_source * per_relay
}

/// Per-mode (πₙ, P̄ERₙ·πₙ) on one link.
fn link_masses(scenario: &Scenario, policy: &AdaptationPolicy, link: Link) -> (Vec<f64>, Vec<f64>) {
    let model = scenario.link(link);
    let thresholds = policy.thresholds(link);
    let pi = mode_probabilities(model, thresholds);
    let per_mass = if policy.is_power_adaptive() {
        pi.iter().map(|p| p * policy.target(link)).collect()
    } else {
        scenario
            .modes_for(link)
            .modes()
            .iter()
            .enumerate()
            .map(|(i, m)| per_mass_constant_power(model, m, thresholds.lower(i + 1), thresholds.upper(i + 1)))
            .collect()
    };
    (pi, per_mass)
}

/// Average spectral efficiency in bits/symbol.
pub fn spectral_efficiency(scenario: &Scenario, policy: &AdaptationPolicy) -> f64 {
    let (pi1, q1) = link_masses(scenario, policy, Link::SourceDestination);
    let (pi2, q2) = link_masses(scenario, policy, Link::RelayDestination);
    let r1 = scenario.table.rates();
    let r2 = scenario.relay_modes().rates();
    let direct: f64 = r1.iter().zip(pi1.iter().zip(&q1)).map(|(r, (p, q))| r * (p - q)).sum();
    let delivered2: Vec<f64> = pi2.iter().zip(&q2).map(|(p, q)| p - q).collect();
    direct + weighted_pair_sum(&r1, &r2, &q1, &delivered2, OmegaVariant::HarmonicRate)
}

/// X = Σₙ Σₘ wₙₘ P̄ER₁ₙ π₁ₙ π₂ₘ: relay airtime per unit source airtime
/// (times α). Equals P_t,1·Ω under channel inversion.
pub fn relay_time_weight(scenario: &Scenario, policy: &AdaptationPolicy, variant: OmegaVariant) -> f64 {
    let (_, q1) = link_masses(scenario, policy, Link::SourceDestination);
    let pi2 = mode_probabilities(&scenario.relay_link, &policy.relay_thresholds);
    weighted_pair_sum(&scenario.table.rates(), &scenario.relay_modes().rates(), &q1, &pi2, variant)
}

/// Relay-to-source frame ratio J/I predicted for the simulator: X/α.
pub fn predicted_slot_ratio(scenario: &Scenario, policy: &AdaptationPolicy, variant: OmegaVariant) -> f64 {
    relay_time_weight(scenario, policy, variant) / scenario.alpha
}

/// Σₙ P̄ hₙ ∫ p(γ)/γ over region n, with hₙ derived from `target`.
pub fn expected_inversion_power(
    scenario: &Scenario,
    link: Link,
    thresholds: &ThresholdVector,
    target: f64,
) -> Result<f64> {
    let gains = scenario.modes_for(link).gains_for_target(target)?;
    expected_power_with_gains(scenario, link, thresholds, &gains)
}

/// Σₙ P̄ hₙ ∫ p(γ)/γ over region n for explicit gains.
pub fn expected_power_with_gains(
    scenario: &Scenario,
    link: Link,
    thresholds: &ThresholdVector,
    gains: &[f64],
) -> Result<f64> {
    let model = scenario.link(link);
    let mut total = 0.0;
    for (i, h) in gains.iter().enumerate() {
        let n = i + 1;
        total += h * expected_inverse_snr(model, thresholds.lower(n), thresholds.upper(n))?;
    }
    Ok(scenario.nominal_power(link) * total)
}

/// E[P(γ)] on one link, averaged over all fading states (zero in outage).
/// Channel-inversion gains are re-derived from the policy's target PERs.
pub fn expected_link_power(scenario: &Scenario, policy: &AdaptationPolicy, link: Link) -> Result<f64> {
    let thresholds = policy.thresholds(link);
    if policy.is_power_adaptive() {
        expected_inversion_power(scenario, link, thresholds, policy.target(link))
    } else {
        Ok(scenario.nominal_power(link) * scenario.link(link).survival_above(thresholds.lower(1)))
    }
}

/// Long-run average transmit power of the system.
pub fn average_power(scenario: &Scenario, policy: &AdaptationPolicy, variant: OmegaVariant) -> Result<f64> {
    let es = expected_link_power(scenario, policy, Link::SourceDestination)?;
    let er = expected_link_power(scenario, policy, Link::RelayDestination)?;
    let x = relay_time_weight(scenario, policy, variant);
    Ok((es + x * er) / (1.0 + x))
}

/// Long-run power when relay energy is charged per retransmitted packet:
/// each relay copy in mode m lasts N_b/Rₘ symbols at E[P_r | m]. This is
/// the limit of energy over air time for the frame-level protocol, and it
/// differs from [`average_power`] whenever relay power varies across modes.
pub fn symbol_weighted_average_power(scenario: &Scenario, policy: &AdaptationPolicy) -> Result<f64> {
    let es = expected_link_power(scenario, policy, Link::SourceDestination)?;
    let (_, q1) = link_masses(scenario, policy, Link::SourceDestination);
    let relay = &policy.relay_thresholds;
    let model = &scenario.relay_link;
    let energy_mass: Vec<f64> = match policy.gains(Link::RelayDestination) {
        Some(h) => h
            .iter()
            .enumerate()
            .map(|(i, h)| {
                expected_inverse_snr(model, relay.lower(i + 1), relay.upper(i + 1)).map(|j| scenario.p_bar_r * h * j)
            })
            .collect::<Result<_>>()?,
        None => mode_probabilities(model, relay).iter().map(|p| scenario.p_bar_r * p).collect(),
    };
    let r1 = scenario.table.rates();
    let r2 = scenario.relay_modes().rates();
    let relay_energy = weighted_pair_sum(&r1, &r2, &q1, &energy_mass, OmegaVariant::RateRatio);
    let x = relay_time_weight(scenario, policy, OmegaVariant::RateRatio);
    Ok((es + relay_energy) / (1.0 + x))
}

trait Survival {
    fn survival_above(&self, snr: f64) -> f64;
}

impl Survival for LinkModel {
    fn survival_above(&self, snr: f64) -> f64 {
        self.interval_probability(snr, f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceReport {
    pub spectral_efficiency: f64,
    pub avg_power: f64,
    pub omega_variant: OmegaVariant,
    pub source_mode_probabilities: Vec<f64>,
    pub relay_mode_probabilities: Vec<f64>,
    pub source_avg_pers: Vec<f64>,
    pub relay_avg_pers: Vec<f64>,
    /// Ω with harmonic-rate weights.
    pub omega: f64,
    /// Ω with rate-ratio weights.
    pub omega_appendix: f64,
    pub expected_source_power: f64,
    pub expected_relay_power: f64,
}

pub fn performance_report(
    scenario: &Scenario,
    policy: &AdaptationPolicy,
    variant: OmegaVariant,
) -> Result<PerformanceReport> {
    let avg_pers = |link: Link| -> Result<Vec<f64>> {
        let t = policy.thresholds(link);
        (1..=t.len())
            .map(|n| {
                if policy.is_power_adaptive() {
                    Ok(policy.target(link))
                } else {
                    avg_per_constant_power(scenario.link(link), t, scenario.modes_for(link), n)
                }
            })
            .collect()
    };
    Ok(PerformanceReport {
        spectral_efficiency: spectral_efficiency(scenario, policy),
        avg_power: average_power(scenario, policy, variant)?,
        omega_variant: variant,
        source_mode_probabilities: mode_probabilities(&scenario.source_link, &policy.source_thresholds),
        relay_mode_probabilities: mode_probabilities(&scenario.relay_link, &policy.relay_thresholds),
        source_avg_pers: avg_pers(Link::SourceDestination)?,
        relay_avg_pers: avg_pers(Link::RelayDestination)?,
        omega: omega(scenario, &policy.source_thresholds, &policy.relay_thresholds),
        omega_appendix: omega_appendix(scenario, &policy.source_thresholds, &policy.relay_thresholds),
        expected_source_power: expected_link_power(scenario, policy, Link::SourceDestination)?,
        expected_relay_power: expected_link_power(scenario, policy, Link::RelayDestination)?,
    })
}
