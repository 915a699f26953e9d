//! Load a mode table (the built-in one by default, or a TOML path) and
//! print its fit diagnostics and channel-inversion gains.
//!
//! Run with `cargo run --release --example mode_table [table.toml]`.

use carq::amc::AmcModeTable;
use carq::hiperlan2;
use carq::units::linear_to_db;

fn main() -> anyhow::Result<()> {
    let table = match std::env::args().nth(1) {
        Some(path) => AmcModeTable::load(path)?,
        None => hiperlan2(),
    };
    let target = 1e-3f64.sqrt();
    let gains = table.gains_for_target(target)?;
    println!("{} modes, {}-bit packets", table.len(), table.packet_bits());
    println!("mode  rate      a        g   floor dB   seam   gain dB @ {target:.4}");
    for (m, h) in table.modes().iter().zip(&gains) {
        println!(
            "{:>4} {:>5} {:>8.3} {:>8.4} {:>9.3} {:>7.4} {:>9.3}",
            m.index,
            m.rate,
            m.fit_a,
            m.fit_g,
            linear_to_db(m.fit_gamma_p),
            m.seam_value(),
            linear_to_db(*h)
        );
    }
    println!("seam warnings: {:?}", table.seam_warnings());
    println!("increment-ratio violations: {:?}", table.increment_ratio_violations(target)?);
    Ok(())
}
