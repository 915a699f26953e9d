//! Golden-section maximization on a bracket, for unimodal objectives.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchResult {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Maximize `f` on `[lo, hi]` until the bracket is narrower than `tol`.
///
/// `NaN` is treated as `-inf`, so callers can mark infeasible points that
/// way. The best point seen (including the bracket ends) is returned.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> SearchResult {
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut best = SearchResult { x: a, value: eval(a), evaluations: 1 };
    let fb = eval(b);
    best.evaluations += 1;
    if fb > best.value {
        best.x = b;
        best.value = fb;
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    best.evaluations += 2;
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
        best.evaluations += 1;
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.value {
            best.x = x;
            best.value = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let r = golden_section_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-8);
        assert!((r.x - 0.3).abs() < 1e-7);
    }

    #[test]
    fn boundary_maximum() {
        let r = golden_section_max(|x| -x, 0.0, 1.0, 1e-6);
        assert_eq!(r.x, 0.0);
    }

    #[test]
    fn nan_is_infeasible() {
        let r = golden_section_max(|x| if x < 0.5 { f64::NAN } else { 1.0 - x }, 0.0, 1.0, 1e-6);
        assert!((r.x - 0.5).abs() < 1e-5, "{r:?}");
    }
}
