//! Spectral efficiency of power-adaptive C-ARQ, constant-power C-ARQ and
//! direct transmission over average SNR, as CSV on stdout.
//!
//! Run with `cargo run --release --example scheme_comparison`.

use carq::adaptive::{optimize, OptimizerConfig};
use carq::constpower::{direct_transmission_se, optimize_const_power};
use carq::{hiperlan2, Scenario};

fn main() -> anyhow::Result<()> {
    let config = OptimizerConfig::default();
    println!("p_bar_db,adaptive,const_power,direct,adaptive_gain,const_gain");
    for db in (0..=20).step_by(2) {
        let scenario = Scenario::symmetric(hiperlan2(), db as f64, 0.0, 1e-3)?;
        let a = optimize(&scenario, &config)?.report.spectral_efficiency;
        let c = optimize_const_power(&scenario, config.pt1_search_tol, config.omega_variant)?
            .report
            .spectral_efficiency;
        let d = direct_transmission_se(&scenario)?;
        println!("{db},{a:.5},{c:.5},{d:.5},{:.4},{:.4}", a / c - 1.0, c / d - 1.0);
    }
    Ok(())
}
