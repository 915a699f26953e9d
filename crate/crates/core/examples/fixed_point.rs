//! Convergence of the joint threshold/power iteration from several random
//! starts at P̄ = 10 dB, μ = 0 dB, followed by the optimal target split.
//!
//! Run with `cargo run --release --example fixed_point`.

use carq::adaptive::{iterate, optimize, InitialThresholds, OptimizerConfig};
use carq::units::linear_to_db;
use carq::{hiperlan2, Scenario};

fn main() -> anyhow::Result<()> {
    let scenario = Scenario::symmetric(hiperlan2(), 10.0, 0.0, 1e-3)?;
    let best = optimize(&scenario, &OptimizerConfig::default())?;
    println!("P_t1* = {:.5}", best.p_t1_star);
    println!("eta*  = {:.4} bits/symbol", best.report.spectral_efficiency);
    println!("P_avg = {:.4} (budget {:.4})", best.report.avg_power, scenario.p_bar);

    for trial in 1..=4u64 {
        let config = OptimizerConfig {
            initial_thresholds: InitialThresholds::RandomDb { seed: trial, lo_db: -5.0, hi_db: 30.0 },
            ..OptimizerConfig::default()
        };
        let (_, trace) = iterate(&scenario, best.p_t1_star, &config)?;
        let history: Vec<String> = trace.se_history().iter().map(|e| format!("{e:.4}")).collect();
        println!("trial {trial}: start {:.4} -> {}", trace.initial_se, history.join(" -> "));
    }

    let db = |v: &[f64]| v.iter().map(|x| format!("{:7.2}", linear_to_db(*x))).collect::<Vec<_>>().join(" ");
    println!("source levels (dB): {}", db(best.policy.source_thresholds.levels()));
    println!("relay levels  (dB): {}", db(best.policy.relay_thresholds.levels()));
    Ok(())
}
