//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerics; only tables and scenarios are borrowed.

#![allow(dead_code)]

use carq::amc::{hiperlan2, AmcMode, AmcModeTable};
use carq::perf::Scenario;

/// Reduced table made of the listed built-in modes (1-based), re-indexed.
pub fn reduced_table(modes: &[usize]) -> AmcModeTable {
    let full = hiperlan2();
    let picked = modes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let m = full.mode(n).unwrap();
            AmcMode::new(i + 1, m.rate, m.fit_a, m.fit_g, m.fit_gamma_p).unwrap()
        })
        .collect();
    AmcModeTable::new(picked, full.packet_bits()).unwrap()
}

pub fn symmetric(table: AmcModeTable, p_bar_db: f64, mu_db: f64) -> Scenario {
    Scenario::symmetric(table, p_bar_db, mu_db, 1e-3).unwrap()
}

/// Adaptive Simpson on [a, b].
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (b - a) / 12.0 * (fa + 4.0 * flm + fm);
        let right = (b - a) / 12.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        // Stop at the tolerance or once the correction is rounding noise.
        if depth == 0 || delta.abs() <= 15.0 * tol || delta.abs() <= 1e-13 * (left + right).abs() {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 30)
}

/// ∫ (1/γ)·e^{−γ/γ̄}/γ̄ dγ over [lo, hi), `hi` possibly infinite. The factor
/// e^{−lo/γ̄} is pulled out and the rest integrated in v = ln γ, so the
/// tolerance is relative even deep in the tail.
pub fn inverse_snr_interval(lo: f64, hi: f64, mean: f64) -> f64 {
    let top = hi.min(lo + 60.0 * mean);
    if top <= lo {
        return 0.0;
    }
    let f = |v: f64| (-(v.exp() - lo) / mean).exp() / mean;
    let (a, b) = (lo.ln(), top.ln());
    let scale = (b - a).min(mean / lo) / mean;
    (-lo / mean).exp() * simpson(&f, a, b, 1e-13 * scale)
}

pub fn inverse_snr_tail(x: f64, mean: f64) -> f64 {
    inverse_snr_interval(x, f64::INFINITY, mean)
}

/// Best η from exhaustive search, with its P_t,1 and levels.
#[derive(Debug, Clone)]
pub struct GridOptimum {
    pub eta: f64,
    pub p_t1: f64,
    pub source: Vec<f64>,
    pub relay: Vec<f64>,
}

/// One candidate level vector with its mode probabilities and the
/// per-mode inverse-SNR integrals over its regions.
struct Candidate {
    levels: Vec<f64>,
    pi: Vec<f64>,
    inv: Vec<f64>,
}

fn candidates(table: &AmcModeTable, mean: f64, db_lo: f64, db_hi: f64, points: usize) -> Vec<Candidate> {
    let n = table.len();
    assert!(n == 1 || n == 2, "grid oracle handles one or two modes");
    let grid: Vec<f64> = (0..points)
        .map(|k| 10f64.powf((db_lo + (db_hi - db_lo) * k as f64 / (points - 1) as f64) / 10.0))
        .collect();
    let per_mode: Vec<Vec<f64>> = table
        .modes()
        .iter()
        .map(|m| {
            let mut v: Vec<f64> = grid.iter().copied().filter(|&g| g >= m.fit_gamma_p).collect();
            v.push(m.fit_gamma_p);
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
        .collect();
    let surv = |g: f64| (-g / mean).exp();
    let tail = |g: f64| inverse_snr_tail(g, mean);
    let tails: Vec<Vec<f64>> = per_mode.iter().map(|v| v.iter().map(|&g| tail(g)).collect()).collect();
    let mut out = Vec::new();
    if n == 1 {
        for (i, &g) in per_mode[0].iter().enumerate() {
            out.push(Candidate { levels: vec![g], pi: vec![surv(g)], inv: vec![tails[0][i]] });
        }
    } else {
        for (i, &g1) in per_mode[0].iter().enumerate() {
            for (j, &g2) in per_mode[1].iter().enumerate() {
                if g2 <= g1 {
                    continue;
                }
                out.push(Candidate {
                    levels: vec![g1, g2],
                    pi: vec![surv(g1) - surv(g2), surv(g2)],
                    inv: vec![tails[0][i] - tails[1][j], tails[1][j]],
                });
            }
        }
    }
    out
}

/// Maximize η over every pair of level vectors on a dB grid (plus the
/// floors) and over P_t,1 = k·10⁻³, subject to the average-power budget.
/// Both links share `scenario.table`; Ω uses the RR/(R+R) weighting.
pub fn grid_search(scenario: &Scenario, db_lo: f64, db_hi: f64, points: usize) -> GridOptimum {
    let table = &scenario.table;
    let n = table.len();
    let rates = table.rates();
    let src = candidates(table, scenario.source_link.mean_snr, db_lo, db_hi, points);
    let rel = candidates(table, scenario.relay_link.mean_snr, db_lo, db_hi, points);
    let k: Vec<Vec<f64>> = rates.iter().map(|&a| rates.iter().map(|&b| a * b / (a + b)).collect()).collect();

    // Source side as lanes, padded to a multiple of 4.
    let lanes = src.len().div_ceil(4) * 4;
    let mut a1 = vec![0.0; lanes];
    let mut a2 = vec![0.0; lanes];
    let mut es = vec![f64::INFINITY; lanes];
    for (i, c) in src.iter().enumerate() {
        a1[i] = c.pi[0];
        a2[i] = if n == 2 { c.pi[1] } else { 0.0 };
    }
    let gains = |target: f64| -> Vec<f64> { table.modes().iter().map(|m| (m.fit_a / target).ln() / m.fit_g).collect() };

    // The objective is linear in (π₁₁, π₁₂), so its unconstrained maximum
    // over all source candidates sits on their convex hull. That bound lets
    // relay candidates be skipped without giving up exactness.
    let hull = convex_hull(&a1[..src.len()], &a2[..src.len()]);

    let p_bar = scenario.p_bar;
    let mut best = GridOptimum { eta: f64::NEG_INFINITY, p_t1: f64::NAN, source: vec![], relay: vec![] };
    for step in 2..1000 {
        let p_t1 = step as f64 * 1e-3;
        let p_t2 = scenario.p_loss / p_t1;
        let (h1, h2) = (gains(p_t1), gains(p_t2));
        for (i, c) in src.iter().enumerate() {
            es[i] = scenario.p_bar_s * c.inv.iter().zip(&h1).map(|(j, h)| j * h).sum::<f64>();
        }
        let mut order: Vec<(f64, usize, [f64; 4])> = rel
            .iter()
            .enumerate()
            .map(|(ri, r)| {
                let er = scenario.p_bar_r * r.inv.iter().zip(&h2).map(|(j, h)| j * h).sum::<f64>();
                // d_n = Σ_m K_nm π₂ₘ, so Ω = π₁·d.
                let d: Vec<f64> = (0..n).map(|a| (0..n).map(|b| k[a][b] * r.pi[b]).sum()).collect();
                let d2 = if n == 2 { d[1] } else { 0.0 };
                let c1 = (1.0 - p_t1) * rates[0] + (p_t1 - scenario.p_loss) * d[0];
                let c2 = if n == 2 { (1.0 - p_t1) * rates[1] + (p_t1 - scenario.p_loss) * d2 } else { 0.0 };
                let kap = p_t1 * (er - p_bar);
                let bound = hull.iter().map(|&(x1, x2)| c1 * x1 + c2 * x2).fold(f64::NEG_INFINITY, f64::max);
                (bound, ri, [c1, c2, kap * d[0], kap * d2])
            })
            .collect();
        order.sort_by(|x, y| y.0.total_cmp(&x.0));
        for (bound, ri, [c1, c2, k1, k2]) in order {
            if bound <= best.eta {
                break;
            }
            let mut acc = [f64::NEG_INFINITY; 4];
            for ((x1, x2), e) in a1.chunks_exact(4).zip(a2.chunks_exact(4)).zip(es.chunks_exact(4)) {
                for l in 0..4 {
                    let ok = e[l] + k1 * x1[l] + k2 * x2[l] <= p_bar;
                    let eta = c1 * x1[l] + c2 * x2[l];
                    let v = if ok { eta } else { f64::NEG_INFINITY };
                    acc[l] = if v > acc[l] { v } else { acc[l] };
                }
            }
            let top = acc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if top > best.eta {
                let si = (0..src.len())
                    .find(|&i| es[i] + k1 * a1[i] + k2 * a2[i] <= p_bar && c1 * a1[i] + c2 * a2[i] == top)
                    .unwrap();
                best = GridOptimum { eta: top, p_t1, source: src[si].levels.clone(), relay: rel[ri].levels.clone() };
            }
        }
    }
    best
}

/// Vertices of the convex hull of the points (x[i], y[i]), monotone chain.
pub fn convex_hull(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// η(P_t,1) on a dense grid by direct evaluation of `f`, with the best point.
pub fn dense_scan<F: Fn(f64) -> Option<f64>>(f: F, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    let mut p = lo;
    while p < hi {
        if let Some(eta) = f(p) {
            if eta > best.1 {
                best = (p, eta);
            }
        }
        p += step;
    }
    best
}
