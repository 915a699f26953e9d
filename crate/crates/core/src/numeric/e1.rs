//! Exponential integral E₁(x) = ∫ₓ^∞ e⁻ᵗ/t dt for real x > 0.
//!
//! Power series below [`SERIES_CUTOFF`], modified-Lentz continued fraction
//! above it. Both branches are public so tests can compare them where
//! their domains overlap.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_TERMS: usize = 500;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Argument at which [`exp_integral_e1`] switches from the series to the
/// continued fraction.
pub const SERIES_CUTOFF: f64 = 1.0;

/// E₁(x). Returns `+inf` at zero, `NaN` for negative or NaN input and `0`
/// for `+inf`.
pub fn exp_integral_e1(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        f64::NAN
    } else if x == 0.0 {
        f64::INFINITY
    } else if x.is_infinite() {
        0.0
    } else if x <= SERIES_CUTOFF {
        exp_integral_e1_series(x)
    } else {
        exp_integral_e1_cf(x)
    }
}

/// E₁(x) = −γ − ln x − Σ_{k≥1} (−x)ᵏ / (k·k!). Accurate for small x; loses
/// digits to cancellation once x grows past a few units.
pub fn exp_integral_e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= -x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.abs() < EPS * sum.abs().max(TINY) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// E₁(x) = e⁻ˣ / (x + 1 − 1/(x + 3 − 4/(x + 5 − …))), evaluated with the
/// modified Lentz algorithm. Converges quickly for x ≳ 1.
pub fn exp_integral_e1_cf(x: f64) -> f64 {
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -((i * i) as f64);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h * (-x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun table 5.1.
        assert_relative_eq!(exp_integral_e1(1.0), 0.219_383_934_395_520_3, max_relative = 1e-14);
        assert_relative_eq!(exp_integral_e1(0.5), 0.559_773_594_776_160_8, max_relative = 1e-14);
        assert_relative_eq!(exp_integral_e1(2.0), 0.048_900_510_708_061_12, max_relative = 1e-13);
        assert_relative_eq!(exp_integral_e1(10.0), 4.156_968_929_685_324e-6, max_relative = 1e-13);
        assert_relative_eq!(exp_integral_e1(1e-3), 6.331_539_364_136_149, max_relative = 1e-14);
    }

    #[test]
    fn branches_agree_near_cutoff() {
        for &x in &[0.8, 0.9, 1.0, 1.1, 1.5, 2.0] {
            assert_relative_eq!(
                exp_integral_e1_series(x),
                exp_integral_e1_cf(x),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn edge_arguments() {
        assert!(exp_integral_e1(0.0).is_infinite());
        assert_eq!(exp_integral_e1(f64::INFINITY), 0.0);
        assert!(exp_integral_e1(-1.0).is_nan());
        assert_eq!(exp_integral_e1(800.0), 0.0);
    }
}
