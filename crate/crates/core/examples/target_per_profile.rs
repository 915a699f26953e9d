//! η as a function of the source target PER at three average SNRs, with
//! the peak count from the quasiconcavity audit.
//!
//! Run with `cargo run --release --example target_per_profile`.

use carq::adaptive::{audit_quasiconcavity, optimize, OptimizerConfig};
use carq::{hiperlan2, Scenario};

fn main() -> anyhow::Result<()> {
    let config = OptimizerConfig::default();
    for db in [4.0, 10.0, 16.0] {
        let scenario = Scenario::symmetric(hiperlan2(), db, 0.0, 1e-3)?;
        let audit = audit_quasiconcavity(&scenario, &config, 50)?;
        let best = optimize(&scenario, &config)?;
        println!(
            "# {db} dB: local maxima {}, p_t1* {:.5}, eta* {:.4}",
            audit.local_maxima, best.p_t1_star, best.report.spectral_efficiency
        );
        for (p, eta) in audit.samples.iter().step_by(5) {
            println!("{db},{p:.6},{eta:.5}");
        }
    }
    Ok(())
}
