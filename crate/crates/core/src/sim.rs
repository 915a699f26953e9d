//! Packet-level Monte Carlo simulation of the relay protocol.
//!
//! Each source frame draws one SNR γ₁ and carries k = N_s·Rₙ/N_b packets in
//! mode n. Every packet fails independently with the mode's PER at the
//! post-adaptation SNR. A failed packet is resent by the relay in mode m
//! chosen from a fresh γ₂, costing N_b/Rₘ relay symbols; if γ₂ falls below
//! the relay's first level the packet is dropped. Source frames in outage
//! send nothing but still take a frame of air time.
//!
//! Estimators:
//! - per-packet SE: frame average of the per-packet bits/symbol (Rₙ on a
//!   first-try success, RₙRₘ/(Rₙ+Rₘ) on relay recovery, 0 otherwise), outage
//!   frames contributing 0
//! - ratio-of-totals SE: delivered bits over transmitted symbols
//! - average power: total energy over elapsed symbol time
//! - J/I: relay frames (relay symbols over α·N_s) per source frame
//!
//! Standard errors come from batch means. Batch b uses its own ChaCha8
//! stream of the master seed, so results do not depend on thread count.

use std::fmt::Write as _;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::amc::{per_awgn, AmcModeTable};
use crate::channel::{Link, SnrLaw};
use crate::error::{Error, Result};
use crate::perf::{
    average_power, relay_time_weight, spectral_efficiency, symbol_weighted_average_power, AdaptationPolicy,
    OmegaVariant, Scenario,
};

/// Which SE estimator is the headline number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeEstimator {
    #[default]
    PerPacket,
    RatioOfTotals,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub packet_budget: u64,
    pub seed: u64,
    /// Symbols per source frame; `None` picks the smallest multiple of N_b
    /// that holds a whole number of packets in every mode.
    pub frame_symbols: Option<u64>,
    /// Relay frame length as a fraction of the source frame; `None` uses the
    /// scenario's value.
    pub alpha: Option<f64>,
    pub estimator: SeEstimator,
    pub batches: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            packet_budget: 1_000_000,
            seed: 1,
            frame_symbols: None,
            alpha: None,
            estimator: SeEstimator::PerPacket,
            batches: 100,
        }
    }
}

/// Smallest N_s = q·N_b for which every N_s·Rₙ/N_b is an integer.
pub fn default_frame_symbols(tables: &[&AmcModeTable]) -> Result<u64> {
    let bits = tables[0].packet_bits() as u64;
    (1..=10_000u64)
        .find(|&q| {
            tables
                .iter()
                .flat_map(|t| t.rates())
                .all(|r| ((q as f64) * r - ((q as f64) * r).round()).abs() < 1e-9)
        })
        .map(|q| q * bits)
        .ok_or_else(|| Error::Validation("no frame length holds a whole number of packets in every mode".into()))
}

/// Mean and batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
}

impl Stat {
    fn from_batches(mean: f64, batch_values: &[f64]) -> Stat {
        let b = batch_values.len() as f64;
        if batch_values.len() < 2 {
            return Stat { mean, stderr: f64::NAN };
        }
        let m = batch_values.iter().sum::<f64>() / b;
        let var = batch_values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (b - 1.0);
        Stat { mean, stderr: (var / b).sqrt() }
    }

    /// (value − mean)/stderr.
    pub fn z(&self, value: f64) -> f64 {
        (self.mean - value) / self.stderr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub frames: u64,
    pub outage_frames: u64,
    pub sent: u64,
    pub first_try: u64,
    pub recovered: u64,
    pub lost_relay_outage: u64,
    pub lost_relay_error: u64,
}

impl Counts {
    pub fn lost(&self) -> u64 {
        self.lost_relay_outage + self.lost_relay_error
    }

    pub fn is_conserved(&self) -> bool {
        self.sent == self.first_try + self.recovered + self.lost()
    }

    fn merge(&mut self, o: &Counts) {
        self.frames += o.frames;
        self.outage_frames += o.outage_frames;
        self.sent += o.sent;
        self.first_try += o.first_try;
        self.recovered += o.recovered;
        self.lost_relay_outage += o.lost_relay_outage;
        self.lost_relay_error += o.lost_relay_error;
    }
}

/// Raw totals of one batch.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BatchTotals {
    pub counts: Counts,
    pub se_frame_sum: f64,
    pub delivered_bits: f64,
    pub source_symbols: f64,
    pub relay_symbols: f64,
    pub source_energy: f64,
    pub relay_energy: f64,
}

struct Ratios {
    se_per_packet: f64,
    se_ratio_totals: f64,
    avg_power: f64,
    plr: f64,
    plr_excluding_outage: f64,
    slot_ratio: f64,
}

impl BatchTotals {
    fn merge(&mut self, o: &BatchTotals) {
        self.counts.merge(&o.counts);
        self.se_frame_sum += o.se_frame_sum;
        self.delivered_bits += o.delivered_bits;
        self.source_symbols += o.source_symbols;
        self.relay_symbols += o.relay_symbols;
        self.source_energy += o.source_energy;
        self.relay_energy += o.relay_energy;
    }

    fn ratios(&self, frame_symbols: f64, alpha: f64) -> Ratios {
        let c = &self.counts;
        let frames = c.frames as f64;
        let sent = c.sent as f64;
        let elapsed = frames * frame_symbols + self.relay_symbols;
        Ratios {
            se_per_packet: self.se_frame_sum / frames,
            se_ratio_totals: self.delivered_bits / (self.source_symbols + self.relay_symbols),
            avg_power: (self.source_energy + self.relay_energy) / elapsed,
            plr: c.lost() as f64 / sent,
            plr_excluding_outage: c.lost_relay_error as f64 / (sent - c.lost_relay_outage as f64),
            slot_ratio: self.relay_symbols / (alpha * frame_symbols) / frames,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEstimate {
    pub se_per_packet: Stat,
    pub se_ratio_totals: Stat,
    pub avg_power_ratio_totals: Stat,
    /// All losses over packets sent.
    pub realized_plr: Stat,
    /// Relay decoding losses over packets not dropped for relay outage.
    pub plr_excluding_relay_outage: Stat,
    /// Relay frames per source frame, J/I.
    pub slot_ratio: Stat,
    pub counts: Counts,
    pub frame_symbols: u64,
    pub alpha: f64,
    pub estimator: SeEstimator,
    pub batches: Vec<BatchTotals>,
}

impl SimEstimate {
    pub fn headline_se(&self) -> Stat {
        match self.estimator {
            SeEstimator::PerPacket => self.se_per_packet,
            SeEstimator::RatioOfTotals => self.se_ratio_totals,
        }
    }

    /// Per-batch estimates as CSV.
    pub fn write_batch_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Numerical(format!("csv write failed: {e}"));
        w.write_record(["batch", "frames", "packets", "se_per_packet", "se_ratio_totals", "avg_power", "plr", "slot_ratio"])
            .map_err(io)?;
        for (i, b) in self.batches.iter().enumerate() {
            let r = b.ratios(self.frame_symbols as f64, self.alpha);
            w.write_record([
                i.to_string(),
                b.counts.frames.to_string(),
                b.counts.sent.to_string(),
                r.se_per_packet.to_string(),
                r.se_ratio_totals.to_string(),
                r.avg_power.to_string(),
                r.plr.to_string(),
                r.slot_ratio.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Numerical(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

/// Per-mode constants for one link.
struct LinkPlan<'a> {
    table: &'a AmcModeTable,
    levels: &'a [f64],
    gains: Option<&'a [f64]>,
    nominal_power: f64,
}

impl LinkPlan<'_> {
    /// 0 for outage, otherwise the 1-based mode.
    fn mode_for(&self, snr: f64) -> usize {
        self.levels.partition_point(|&l| l <= snr)
    }

    /// (transmit power, post-adaptation SNR) in mode n.
    fn transmit(&self, n: usize, snr: f64) -> (f64, f64) {
        match self.gains {
            Some(h) => (self.nominal_power * h[n - 1] / snr, h[n - 1]),
            None => (self.nominal_power, snr),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_batch(
    scenario: &Scenario,
    source: &LinkPlan,
    relay: &LinkPlan,
    packets_per_frame: &[u64],
    frame_symbols: f64,
    budget: u64,
    seed: u64,
    stream: u64,
) -> BatchTotals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let bits = scenario.table.packet_bits() as f64;
    let mut t = BatchTotals::default();
    while t.counts.sent < budget {
        t.counts.frames += 1;
        let g1 = scenario.source_link.sample(&mut rng);
        let n = source.mode_for(g1);
        if n == 0 {
            t.counts.outage_frames += 1;
            continue;
        }
        let mode = &source.table.modes()[n - 1];
        let (p1, post1) = source.transmit(n, g1);
        let per1 = per_awgn(mode, post1);
        t.source_energy += p1 * frame_symbols;
        t.source_symbols += frame_symbols;
        let k = packets_per_frame[n - 1];
        let mut frame_se = 0.0;
        for _ in 0..k {
            t.counts.sent += 1;
            if rng.random::<f64>() >= per1 {
                t.counts.first_try += 1;
                frame_se += mode.rate;
                t.delivered_bits += bits;
                continue;
            }
            let g2 = scenario.relay_link.sample(&mut rng);
            let m = relay.mode_for(g2);
            if m == 0 {
                t.counts.lost_relay_outage += 1;
                continue;
            }
            let rmode = &relay.table.modes()[m - 1];
            let (p2, post2) = relay.transmit(m, g2);
            let symbols = bits / rmode.rate;
            t.relay_symbols += symbols;
            t.relay_energy += p2 * symbols;
            if rng.random::<f64>() < per_awgn(rmode, post2) {
                t.counts.lost_relay_error += 1;
            } else {
                t.counts.recovered += 1;
                frame_se += mode.rate * rmode.rate / (mode.rate + rmode.rate);
                t.delivered_bits += bits;
            }
        }
        t.se_frame_sum += frame_se / k as f64;
    }
    t
}

/// Simulate `config.packet_budget` source packets under `policy`.
pub fn simulate(scenario: &Scenario, policy: &AdaptationPolicy, config: &SimConfig) -> Result<SimEstimate> {
    scenario.validate()?;
    if config.packet_budget == 0 || config.batches == 0 {
        return Err(Error::Validation("packet budget and batch count must be positive".into()));
    }
    for link in [Link::SourceDestination, Link::RelayDestination] {
        if policy.thresholds(link).len() != scenario.modes_for(link).len() {
            return Err(Error::Validation(format!("{link} policy does not match its mode table")));
        }
    }
    let alpha = config.alpha.unwrap_or(scenario.alpha);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Validation(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let frame_symbols = match config.frame_symbols {
        Some(0) => return Err(Error::Validation("frame_symbols must be at least 1".into())),
        Some(n) => n,
        None => default_frame_symbols(&[&scenario.table, scenario.relay_modes()])?,
    };
    let bits = scenario.table.packet_bits() as f64;
    let packets_per_frame = scenario
        .table
        .rates()
        .iter()
        .map(|r| {
            let k = frame_symbols as f64 * r / bits;
            if (k - k.round()).abs() > 1e-9 || k.round() < 1.0 {
                Err(Error::Validation(format!(
                    "frame of {frame_symbols} symbols holds {k} packets at rate {r}; need a positive integer"
                )))
            } else {
                Ok(k.round() as u64)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let source = LinkPlan {
        table: &scenario.table,
        levels: policy.source_thresholds.levels(),
        gains: policy.gains(Link::SourceDestination),
        nominal_power: scenario.p_bar_s,
    };
    let relay = LinkPlan {
        table: scenario.relay_modes(),
        levels: policy.relay_thresholds.levels(),
        gains: policy.gains(Link::RelayDestination),
        nominal_power: scenario.p_bar_r,
    };

    let batches = (config.batches as u64).min(config.packet_budget);
    let base = config.packet_budget / batches;
    let extra = config.packet_budget % batches;
    let totals: Vec<BatchTotals> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let budget = base + u64::from(b < extra);
            run_batch(scenario, &source, &relay, &packets_per_frame, frame_symbols as f64, budget, config.seed, b)
        })
        .collect();

    let mut all = BatchTotals::default();
    for t in &totals {
        all.merge(t);
    }
    let fs = frame_symbols as f64;
    let overall = all.ratios(fs, alpha);
    let per_batch: Vec<Ratios> = totals.iter().map(|t| t.ratios(fs, alpha)).collect();
    let stat = |mean: f64, pick: fn(&Ratios) -> f64| {
        let values: Vec<f64> = per_batch.iter().map(pick).collect();
        Stat::from_batches(mean, &values)
    };
    Ok(SimEstimate {
        se_per_packet: stat(overall.se_per_packet, |r| r.se_per_packet),
        se_ratio_totals: stat(overall.se_ratio_totals, |r| r.se_ratio_totals),
        avg_power_ratio_totals: stat(overall.avg_power, |r| r.avg_power),
        realized_plr: stat(overall.plr, |r| r.plr),
        plr_excluding_relay_outage: stat(overall.plr_excluding_outage, |r| r.plr_excluding_outage),
        slot_ratio: stat(overall.slot_ratio, |r| r.slot_ratio),
        counts: all.counts,
        frame_symbols,
        alpha,
        estimator: config.estimator,
        batches: totals,
    })
}

/// Flag threshold for the compare report, in standard errors.
pub const COMPARE_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub metric: String,
    pub analytic: f64,
    pub simulated: Stat,
    pub flagged: bool,
}

impl CompareRow {
    fn two_sided(metric: &str, analytic: f64, simulated: Stat) -> Self {
        CompareRow {
            metric: metric.into(),
            analytic,
            simulated,
            flagged: !(simulated.z(analytic).abs() <= COMPARE_SIGMAS),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    /// Ω weightings whose predicted J/I agrees with the simulation.
    pub omega_matches: Vec<OmegaVariant>,
    pub estimate: SimEstimate,
}

impl CompareReport {
    /// SE and loss rows green, J/I green for some Ω weighting and power
    /// green for some Ω weighting. The symbol-weighted power row is a
    /// diagnostic and does not count.
    pub fn all_green(&self) -> bool {
        let green = |m: &str| self.row(m).is_some_and(|r| !r.flagged);
        let any = |prefix: &str| OmegaVariant::ALL.iter().any(|v| green(&format!("{prefix}.{}", v.name())));
        green("se") && green("plr_excluding_relay_outage") && any("slot_ratio") && any("avg_power")
    }

    pub fn row(&self, metric: &str) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    /// Machine-readable `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{m}.analytic={a}\n{m}.simulated={v}\n{m}.stderr={e}\n{m}.z={z:.3}\n{m}.flag={f}",
                m = r.metric,
                a = r.analytic,
                v = r.simulated.mean,
                e = r.simulated.stderr,
                z = r.simulated.z(r.analytic),
                f = if r.flagged { "RED" } else { "green" },
            );
        }
        let names: Vec<&str> = self.omega_matches.iter().map(|v| v.name()).collect();
        let _ = writeln!(s, "omega.matching_variants={}", if names.is_empty() { "none".into() } else { names.join(",") });
        let c = &self.estimate.counts;
        let _ = writeln!(
            s,
            "counts.frames={}\ncounts.outage_frames={}\ncounts.sent={}\ncounts.first_try={}\ncounts.recovered={}\ncounts.lost_relay_outage={}\ncounts.lost_relay_error={}",
            c.frames, c.outage_frames, c.sent, c.first_try, c.recovered, c.lost_relay_outage, c.lost_relay_error
        );
        let _ = writeln!(s, "all_green={}", self.all_green());
        s
    }
}

/// Simulate and set each estimate beside its closed form.
///
/// Power and J/I are checked against both Ω weightings; the loss rate is a
/// one-sided check against P_loss.
pub fn compare(scenario: &Scenario, policy: &AdaptationPolicy, config: &SimConfig) -> Result<CompareReport> {
    let est = simulate(scenario, policy, config)?;
    let mut rows = vec![CompareRow::two_sided("se", spectral_efficiency(scenario, policy), est.se_per_packet)];
    let mut omega_matches = Vec::new();
    for v in OmegaVariant::ALL {
        rows.push(CompareRow::two_sided(
            &format!("avg_power.{}", v.name()),
            average_power(scenario, policy, v)?,
            est.avg_power_ratio_totals,
        ));
        let slot = CompareRow::two_sided(
            &format!("slot_ratio.{}", v.name()),
            relay_time_weight(scenario, policy, v) / est.alpha,
            est.slot_ratio,
        );
        if !slot.flagged {
            omega_matches.push(v);
        }
        rows.push(slot);
    }
    rows.push(CompareRow::two_sided(
        "avg_power.symbol_weighted",
        symbol_weighted_average_power(scenario, policy)?,
        est.avg_power_ratio_totals,
    ));
    let plr = est.plr_excluding_relay_outage;
    rows.push(CompareRow {
        metric: "plr_excluding_relay_outage".into(),
        analytic: scenario.p_loss,
        simulated: plr,
        flagged: plr.mean > scenario.p_loss + COMPARE_SIGMAS * plr.stderr,
    });
    Ok(CompareReport { rows, omega_matches, estimate: est })
}
