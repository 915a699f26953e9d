//! Statistics of the pre-adaptation SNR on a Rayleigh block-fading link.
//!
//! The SNR γ on each link is exponential with mean γ̄. Closed forms here
//! cover the mode probabilities πₙ, the constant-power average PER and the
//! inverse-SNR expectation that drives channel-inversion power control.
//! Each has a quadrature counterpart that only needs the density, through
//! the [`SnrLaw`] trait.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::amc::{AmcMode, AmcModeTable};
use crate::error::{Error, Result};
use crate::numeric::{exp_integral_e1, integrate, integrate_with_breaks, Tolerance};

/// Relative gap used to separate levels that collide after flooring.
pub const NUDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    SourceDestination,
    RelayDestination,
}

impl std::fmt::Display for Link {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Link::SourceDestination => "S-D",
            Link::RelayDestination => "R-D",
        })
    }
}

/// Distribution of the pre-adaptation SNR.
pub trait SnrLaw {
    fn pdf(&self, snr: f64) -> f64;
    /// P(γ ≥ snr).
    fn survival(&self, snr: f64) -> f64;
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;
}

/// One fading link: exponential SNR with mean `mean_snr` (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkModel {
    pub link: Link,
    pub mean_snr: f64,
}

impl LinkModel {
    pub fn new(link: Link, mean_snr: f64) -> Result<Self> {
        if !(mean_snr > 0.0 && mean_snr.is_finite()) {
            return Err(Error::Validation(format!("{link} mean SNR must be positive, got {mean_snr}")));
        }
        Ok(LinkModel { link, mean_snr })
    }

    /// P(lo ≤ γ < hi), written to keep precision on narrow intervals.
    pub fn interval_probability(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let head = (-lo / self.mean_snr).exp();
        if hi.is_infinite() {
            head
        } else {
            -head * (-(hi - lo) / self.mean_snr).exp_m1()
        }
    }
}

impl SnrLaw for LinkModel {
    fn pdf(&self, snr: f64) -> f64 {
        if snr < 0.0 {
            0.0
        } else {
            (-snr / self.mean_snr).exp() / self.mean_snr
        }
    }

    fn survival(&self, snr: f64) -> f64 {
        if snr <= 0.0 {
            1.0
        } else {
            (-snr / self.mean_snr).exp()
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Exp::new(1.0 / self.mean_snr).expect("positive rate").sample(rng)
    }
}

/// Mode switching levels Γ₁ < … < Γ_N (linear SNR), with implicit Γ₀ = 0
/// and Γ_{N+1} = ∞. Mode n is used on [Γₙ, Γₙ₊₁); [0, Γ₁) is outage.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdVector {
    levels: Vec<f64>,
}

impl ThresholdVector {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Validation("threshold vector is empty".into()));
        }
        for (i, &l) in levels.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Validation(format!("threshold {} must be positive and finite, got {l}", i + 1)));
            }
            if i > 0 && l <= levels[i - 1] {
                return Err(Error::Validation(format!(
                    "thresholds must increase strictly: level {} = {l} <= level {} = {}",
                    i + 1,
                    i,
                    levels[i - 1]
                )));
            }
        }
        Ok(ThresholdVector { levels })
    }

    /// Build from candidate levels, lifting any level that does not exceed
    /// its predecessor to `prev·(1 + NUDGE)`. Returns the vector and the
    /// 1-based modes left with a (near) zero-width region.
    pub fn from_candidates(mut levels: Vec<f64>) -> Result<(Self, Vec<usize>)> {
        let mut disabled = Vec::new();
        for i in 1..levels.len() {
            let floor = levels[i - 1] * (1.0 + NUDGE);
            if levels[i] < floor {
                levels[i] = floor;
                disabled.push(i);
            }
        }
        Ok((ThresholdVector::new(levels)?, disabled))
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Lower edge of region n (0 ≤ n ≤ N).
    pub fn lower(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.levels[n - 1]
        }
    }

    /// Upper edge of region n (0 ≤ n ≤ N).
    pub fn upper(&self, n: usize) -> f64 {
        self.levels.get(n).copied().unwrap_or(f64::INFINITY)
    }

    /// Region containing `snr`: 0 for outage, otherwise the mode index.
    pub fn mode_for(&self, snr: f64) -> usize {
        self.levels.partition_point(|&l| l <= snr)
    }

    /// True if every level sits at or above its mode's Γₚ floor.
    pub fn respects_floors(&self, table: &AmcModeTable) -> bool {
        self.levels.len() == table.len()
            && self.levels.iter().zip(table.modes()).all(|(l, m)| *l >= m.fit_gamma_p)
    }
}

/// πₙ for link `link` (n = 0 is outage).
pub fn mode_probability(link: &LinkModel, thresholds: &ThresholdVector, n: usize) -> Result<f64> {
    if n > thresholds.len() {
        return Err(Error::IndexOutOfRange { index: n, max: thresholds.len() });
    }
    Ok(link.interval_probability(thresholds.lower(n), thresholds.upper(n)))
}

/// (π₁, …, π_N), excluding outage.
pub fn mode_probabilities(link: &LinkModel, thresholds: &ThresholdVector) -> Vec<f64> {
    (1..=thresholds.len())
        .map(|n| link.interval_probability(thresholds.lower(n), thresholds.upper(n)))
        .collect()
}

/// ∫ PER(γ)·p(γ) dγ over [lo, hi) at constant power (post-adaptation SNR =
/// pre-adaptation SNR). This is P̄ERₙ·πₙ without the division by πₙ.
pub fn per_mass_constant_power(link: &LinkModel, mode: &AmcMode, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    // PER is 1 up to the point where the clamped fit drops below 1.
    let knee = mode.fit_gamma_p.max(mode.fit_a.ln() / mode.fit_g);
    let clamp_hi = knee.min(hi);
    let mut mass = if clamp_hi > lo { link.interval_probability(lo, clamp_hi) } else { 0.0 };
    let fit_lo = lo.max(knee);
    if hi > fit_lo {
        let k = mode.fit_g + 1.0 / link.mean_snr;
        let head = (-k * fit_lo).exp();
        let span = if hi.is_infinite() { 1.0 } else { -(-k * (hi - fit_lo)).exp_m1() };
        mass += mode.fit_a / (link.mean_snr * k) * head * span;
    }
    mass
}

/// P̄ERₙ: mean PER of mode n given γ in its region, at constant power.
pub fn avg_per_constant_power(
    link: &LinkModel,
    thresholds: &ThresholdVector,
    table: &AmcModeTable,
    n: usize,
) -> Result<f64> {
    if n == 0 || n > thresholds.len() || n > table.len() {
        return Err(Error::IndexOutOfRange { index: n, max: thresholds.len().min(table.len()) });
    }
    let mode = &table.modes()[n - 1];
    let (lo, hi) = (thresholds.lower(n), thresholds.upper(n));
    let pi = link.interval_probability(lo, hi);
    if pi <= 0.0 {
        return Ok(mode.per(lo));
    }
    Ok((per_mass_constant_power(link, mode, lo, hi) / pi).clamp(0.0, 1.0))
}

/// ∫ (1/γ)·p(γ) dγ over [lo, hi) = (E₁(lo/γ̄) − E₁(hi/γ̄))/γ̄.
pub fn expected_inverse_snr(link: &LinkModel, lo: f64, hi: f64) -> Result<f64> {
    check_inverse_limits(lo, hi)?;
    if hi == lo {
        return Ok(0.0);
    }
    let g = link.mean_snr;
    let upper = if hi.is_infinite() { 0.0 } else { exp_integral_e1(hi / g) };
    Ok((exp_integral_e1(lo / g) - upper) / g)
}

/// Same integral by adaptive quadrature of the density. The tolerance is
/// purely relative so deep-tail intervals keep their significant digits,
/// and breaks crowd geometrically towards `lo` where a steep density puts
/// its mass on a wide interval.
pub fn expected_inverse_snr_quadrature<L: SnrLaw>(law: &L, lo: f64, hi: f64) -> Result<f64> {
    check_inverse_limits(lo, hi)?;
    let tol = Tolerance { abs: 0.0, rel: 1e-12 };
    let breaks: Vec<f64> = if hi.is_finite() {
        (1..=60).map(|k| lo + (hi - lo) * 0.5f64.powi(k)).collect()
    } else {
        Vec::new()
    };
    Ok(integrate_with_breaks(|g| law.pdf(g) / g, lo, hi, &breaks, tol)?.value)
}

fn check_inverse_limits(lo: f64, hi: f64) -> Result<()> {
    if lo == 0.0 && hi > 0.0 {
        return Err(Error::Divergent);
    }
    if !(lo >= 0.0) || !(hi >= lo) {
        return Err(Error::Validation(format!("need 0 < lower <= upper, got [{lo}, {hi})")));
    }
    Ok(())
}

/// Quadrature counterpart of [`per_mass_constant_power`], split at Γₚ.
pub fn per_mass_quadrature<L: SnrLaw>(law: &L, mode: &AmcMode, lo: f64, hi: f64) -> Result<f64> {
    let knee = mode.fit_gamma_p.max(mode.fit_a.ln() / mode.fit_g);
    Ok(integrate_with_breaks(
        |g| mode.per(g) * law.pdf(g),
        lo,
        hi,
        &[mode.fit_gamma_p, knee],
        Tolerance::default(),
    )?
    .value)
}

/// Quadrature counterpart of the interval probability.
pub fn interval_probability_quadrature<L: SnrLaw>(law: &L, lo: f64, hi: f64) -> Result<f64> {
    Ok(integrate(|g| law.pdf(g), lo, hi, Tolerance::default())?.value)
}
