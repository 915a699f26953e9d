//! Optimize the P̄ = 10 dB scenario, then simulate the resulting policy and
//! print the closed-form vs Monte Carlo comparison as key=value lines.
//!
//! Run with `cargo run --release --example monte_carlo_check [packets] [seed]`.

use carq::adaptive::{optimize, OptimizerConfig};
use carq::sim::{compare, SimConfig};
use carq::{hiperlan2, Scenario};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let packets = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10_000_000);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2024);

    let scenario = Scenario::symmetric(hiperlan2(), 10.0, 0.0, 1e-3)?;
    let best = optimize(&scenario, &OptimizerConfig::default())?;
    println!("p_t1_star={:.6}", best.p_t1_star);
    let config = SimConfig { packet_budget: packets, seed, ..SimConfig::default() };
    let report = compare(&scenario, &best.policy, &config)?;
    print!("{}", report.to_key_value());
    Ok(())
}
