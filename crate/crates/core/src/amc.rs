//! AMC transmission modes and the exponential packet-error-rate fit.
//!
//! Each mode n carries a rate Rₙ (bits/symbol) and fit parameters
//! (aₙ, gₙ, Γₚₙ). Over an AWGN channel with SNR γ the packet error rate is
//! approximated as 1 below Γₚₙ and aₙ·exp(−gₙγ) above it, clamped to 1.
//!
//! Tables are loaded from TOML:
//!
//! ```toml
//! packet_bits = 1080
//!
//! [[mode]]
//! index = 1
//! rate_bits_per_symbol = 0.5
//! a = 274.7229
//! g = 7.9932
//! gamma_p_db = -1.5331
//! ```
//!
//! `gamma_p_db` is in dB in the file and linear in memory.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::units::{db_to_linear, linear_to_db};

/// Seam mismatch a·exp(−g·Γₚ) above 1 + this triggers a loader warning.
/// Published fits carry four decimals; at Γₚ ≈ 200 a half-unit error in g
/// already moves the seam by 1%.
pub const SEAM_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct AmcMode {
    pub index: usize,
    pub rate: f64,
    pub fit_a: f64,
    pub fit_g: f64,
    /// Linear SNR below which the packet is always lost.
    pub fit_gamma_p: f64,
}

impl AmcMode {
    pub fn new(index: usize, rate: f64, fit_a: f64, fit_g: f64, fit_gamma_p: f64) -> Result<Self> {
        let bad = |reason: &str| Err(Error::InvalidMode { mode: index, reason: reason.into() });
        if !(rate > 0.0 && rate.is_finite()) {
            return bad("rate must be positive");
        }
        if !(fit_a >= 1.0 && fit_a.is_finite()) {
            return bad("fit parameter a must be >= 1");
        }
        if !(fit_g > 0.0 && fit_g.is_finite()) {
            return bad("fit parameter g must be positive");
        }
        if !(fit_gamma_p >= 0.0 && fit_gamma_p.is_finite()) {
            return bad("gamma_p must be non-negative");
        }
        Ok(AmcMode { index, rate, fit_a, fit_g, fit_gamma_p })
    }

    /// Packet error rate at (post-adaptation) SNR `snr`.
    pub fn per(&self, snr: f64) -> f64 {
        per_awgn(self, snr)
    }

    /// Value of the fitted branch at Γₚ; exceeds 1 when the two branches of
    /// the fit disagree at the seam.
    pub fn seam_value(&self) -> f64 {
        self.fit_a * (-self.fit_g * self.fit_gamma_p).exp()
    }

    /// SNR at which the fit reaches `target`: ln(a / target) / g. Errors if
    /// the fit never exceeds the target (a ≤ target).
    pub fn snr_for_per(&self, target: f64) -> Result<f64> {
        if !(self.fit_a > target) {
            return Err(Error::UnreachableTarget { mode: self.index, target, a: self.fit_a });
        }
        Ok((self.fit_a / target).ln() / self.fit_g)
    }
}

/// Packet error rate of `mode` over AWGN at linear SNR `post_snr`.
pub fn per_awgn(mode: &AmcMode, post_snr: f64) -> f64 {
    if post_snr < mode.fit_gamma_p {
        1.0
    } else {
        (mode.fit_a * (-mode.fit_g * post_snr).exp()).min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmcModeTable {
    modes: Vec<AmcMode>,
    packet_bits: u32,
    seam_warnings: Vec<usize>,
}

impl AmcModeTable {
    /// Validate and build a table. Modes must be indexed 1..=N in order with
    /// strictly increasing rates.
    pub fn new(modes: Vec<AmcMode>, packet_bits: u32) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Validation("mode table has no modes".into()));
        }
        if packet_bits == 0 {
            return Err(Error::Validation("packet_bits must be positive".into()));
        }
        for (pos, mode) in modes.iter().enumerate() {
            if mode.index != pos + 1 {
                return Err(Error::InvalidMode {
                    mode: mode.index,
                    reason: format!("indices must be contiguous from 1; expected {}", pos + 1),
                });
            }
            if pos > 0 && mode.rate <= modes[pos - 1].rate {
                return Err(Error::InvalidMode {
                    mode: mode.index,
                    reason: format!(
                        "rate {} is not above the rate {} of mode {}",
                        mode.rate,
                        modes[pos - 1].rate,
                        pos
                    ),
                });
            }
        }
        let seam_warnings: Vec<usize> = modes
            .iter()
            .filter(|m| m.seam_value() > 1.0 + SEAM_TOLERANCE)
            .map(|m| m.index)
            .collect();
        for &n in &seam_warnings {
            log::warn!(
                "mode {n}: a*exp(-g*gamma_p) = {:.4} > 1, the PER fit is discontinuous at gamma_p",
                modes[n - 1].seam_value()
            );
        }
        Ok(AmcModeTable { modes, packet_bits, seam_warnings })
    }

    pub fn modes(&self) -> &[AmcMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Mode by 1-based index.
    pub fn mode(&self, n: usize) -> Option<&AmcMode> {
        n.checked_sub(1).and_then(|i| self.modes.get(i))
    }

    pub fn packet_bits(&self) -> u32 {
        self.packet_bits
    }

    pub fn rates(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.rate).collect()
    }

    pub fn max_rate(&self) -> f64 {
        self.modes.last().map_or(0.0, |m| m.rate)
    }

    pub fn gamma_p_floors(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.fit_gamma_p).collect()
    }

    /// Modes whose fit exceeds 1 at Γₚ by more than [`SEAM_TOLERANCE`].
    pub fn seam_warnings(&self) -> &[usize] {
        &self.seam_warnings
    }

    /// Power-gain targets hₙ = ln(aₙ / target)/gₙ for every mode.
    pub fn gains_for_target(&self, target: f64) -> Result<Vec<f64>> {
        self.modes.iter().map(|m| m.snr_for_per(target)).collect()
    }

    /// Modes n ≥ 2 at which (hₙ − hₙ₋₁)/(Rₙ − Rₙ₋₁) fails to increase for the
    /// given target PER (h₀ = R₀ = 0). An empty result means the KKT
    /// switching levels come out ordered without floor collisions.
    pub fn increment_ratio_violations(&self, target: f64) -> Result<Vec<usize>> {
        let gains = self.gains_for_target(target)?;
        let mut prev_ratio = f64::NEG_INFINITY;
        let (mut prev_h, mut prev_r) = (0.0, 0.0);
        let mut bad = Vec::new();
        for (mode, &h) in self.modes.iter().zip(&gains) {
            let ratio = (h - prev_h) / (mode.rate - prev_r);
            if ratio <= prev_ratio {
                bad.push(mode.index);
            }
            prev_ratio = ratio;
            prev_h = h;
            prev_r = mode.rate;
        }
        Ok(bad)
    }

    /// Parse a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: TableDoc = toml::from_str(text).map_err(|e| Error::parse("mode table", e))?;
        let modes = doc
            .mode
            .into_iter()
            .map(|m| AmcMode::new(m.index, m.rate_bits_per_symbol, m.a, m.g, db_to_linear(m.gamma_p_db)))
            .collect::<Result<Vec<_>>>()?;
        AmcModeTable::new(modes, doc.packet_bits)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse { context: path.display().to_string(), message },
            other => other,
        })
    }

    /// Render back to the TOML layout accepted by [`AmcModeTable::from_toml_str`].
    pub fn to_toml_string(&self) -> String {
        let mut out = format!("packet_bits = {}\n", self.packet_bits);
        for m in &self.modes {
            out.push_str(&format!(
                "\n[[mode]]\nindex = {}\nrate_bits_per_symbol = {}\na = {}\ng = {}\ngamma_p_db = {}\n",
                m.index,
                m.rate,
                m.fit_a,
                m.fit_g,
                linear_to_db(m.fit_gamma_p)
            ));
        }
        out
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDoc {
    packet_bits: u32,
    mode: Vec<ModeDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeDoc {
    index: usize,
    rate_bits_per_symbol: f64,
    a: f64,
    g: f64,
    gamma_p_db: f64,
}

/// The HIPERLAN/2 mode set with 1080-bit packets shipped in `data/hiperlan2.toml`.
pub fn hiperlan2() -> AmcModeTable {
    AmcModeTable::from_toml_str(HIPERLAN2_TOML).expect("bundled table is valid")
}

pub const HIPERLAN2_TOML: &str = include_str!("../data/hiperlan2.toml");
