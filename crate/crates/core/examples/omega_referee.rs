//! Two unequal-rate modes, simulated. The measured relay-to-source frame
//! ratio J/I is set against the prediction of each Ω weighting.
//!
//! Run with `cargo run --release --example omega_referee [packets] [seed]`.

use carq::adaptive::{optimize, OptimizerConfig};
use carq::amc::{AmcMode, AmcModeTable};
use carq::perf::OmegaVariant;
use carq::sim::{compare, SimConfig};
use carq::{hiperlan2, Scenario};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let packets = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10_000_000);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);

    // QPSK 1/2 and 16-QAM 9/16 from the built-in table.
    let full = hiperlan2();
    let modes = [2, 4]
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let m = full.mode(n).expect("built-in mode");
            AmcMode::new(i + 1, m.rate, m.fit_a, m.fit_g, m.fit_gamma_p)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let scenario = Scenario::symmetric(AmcModeTable::new(modes, full.packet_bits())?, 10.0, 0.0, 1e-3)?;

    let best = optimize(&scenario, &OptimizerConfig::default())?;
    let report = compare(&scenario, &best.policy, &SimConfig { packet_budget: packets, seed, ..SimConfig::default() })?;
    for v in OmegaVariant::ALL {
        let row = report.row(&format!("slot_ratio.{}", v.name())).expect("slot ratio row");
        println!(
            "{:<10} predicted J/I {:.6}  simulated {:.6} +/- {:.6}  z {:+.2}",
            v.name(),
            row.analytic,
            row.simulated.mean,
            row.simulated.stderr,
            row.simulated.z(row.analytic)
        );
    }
    let names: Vec<&str> = report.omega_matches.iter().map(|v| v.name()).collect();
    println!("matching: {}", if names.is_empty() { "none".to_string() } else { names.join(", ") });
    Ok(())
}
