//! Command-line driver for scenario files and sweeps.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use carq::adaptive::audit_quasiconcavity;
use carq::amc::AmcModeTable;
use carq::config::{ScenarioFile, SweepSpec};
use carq::report::{run_scenario, run_sweep, write_sweep_csv};
use carq::sim::SimConfig;
use carq::units::linear_to_db;
use carq::{Error, OmegaVariant, Result};

#[derive(Parser)]
#[command(name = "carq", version, about = "Cooperative-ARQ link adaptation optimizer and simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize thresholds, power and target split for a scenario.
    Optimize {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_parser = parse_variant)]
        omega_variant: Option<OmegaVariant>,
        /// Also simulate this many packets and append the comparison.
        #[arg(long)]
        packets: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sweep file and write CSV.
    Sweep {
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long, value_parser = parse_variant)]
        omega_variant: Option<OmegaVariant>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize, then compare the policy against Monte Carlo simulation.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        packets: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = parse_variant)]
        omega_variant: Option<OmegaVariant>,
        /// Per-batch estimates as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample eta over the target-PER split and count its local maxima.
    AuditQuasiconcavity {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, value_parser = parse_variant)]
        omega_variant: Option<OmegaVariant>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load a mode table and report fit diagnostics.
    CheckTable {
        /// Mode table file; the built-in table when neither flag is given.
        #[arg(long, conflicts_with = "scenario")]
        table: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

fn parse_variant(s: &str) -> std::result::Result<OmegaVariant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    match out {
        Some(p) => File::create(p)
            .map(|f| Box::new(f) as Box<dyn Write>)
            .map_err(|source| Error::Io { path: p.to_path_buf(), source }),
        None => Ok(Box::new(io::stdout())),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    w.write_all(text.as_bytes())
        .map_err(|source| Error::Io { path: out.map(Path::to_path_buf).unwrap_or_else(|| "stdout".into()), source })
}

fn sim_config(base: Option<SimConfig>, packets: Option<u64>, seed: Option<u64>) -> SimConfig {
    let mut c = base.unwrap_or_default();
    if let Some(p) = packets {
        c.packet_budget = p;
    }
    if let Some(s) = seed {
        c.seed = s;
    }
    c
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Optimize { scenario, omega_variant, packets, seed, out } => {
            let sim = (packets.is_some() || seed.is_some()).then(|| sim_config(None, packets, seed));
            let run = run_scenario(&scenario, omega_variant, sim)?;
            emit(&run.to_key_value(), out.as_deref())
        }
        Command::Sweep { sweep, omega_variant, out } => {
            let spec = SweepSpec::load(&sweep)?;
            let rows = run_sweep(&spec, omega_variant);
            write_sweep_csv(&rows, spec.simulate.is_some(), sink(out.as_deref())?)
        }
        Command::Simulate { scenario, packets, seed, omega_variant, out } => {
            let file = ScenarioFile::load(&scenario)?;
            let sim = sim_config(file.simulation.clone(), packets, seed);
            let run = run_scenario(&scenario, omega_variant, Some(sim))?;
            emit(&run.to_key_value(), None)?;
            match (out, &run.comparison) {
                (Some(p), Some(c)) => c.estimate.write_batch_csv(sink(Some(&p))?),
                _ => Ok(()),
            }
        }
        Command::AuditQuasiconcavity { scenario, points, omega_variant, out } => {
            let file = ScenarioFile::load(&scenario)?;
            let mut config = file.optimizer.clone();
            if let Some(v) = omega_variant {
                config.omega_variant = v;
            }
            let audit = audit_quasiconcavity(&file.scenario, &config, points)?;
            let mut text = String::from("p_t1,eta\n");
            for (p, e) in &audit.samples {
                text.push_str(&format!("{p},{e}\n"));
            }
            emit(&text, out.as_deref())?;
            eprintln!("local_maxima={}", audit.local_maxima);
            eprintln!("quasiconcave={}", audit.passes());
            if let Some((p, e)) = audit.argmax() {
                eprintln!("argmax_p_t1={p:.6}\nmax_eta={e:.6}");
            }
            Ok(())
        }
        Command::CheckTable { table, scenario } => {
            let (t, p_loss) = match (table, scenario) {
                (Some(p), _) => (AmcModeTable::load(p)?, 1e-3),
                (None, Some(s)) => {
                    let f = ScenarioFile::load(s)?;
                    (f.scenario.table, f.scenario.p_loss)
                }
                (None, None) => (carq::hiperlan2(), 1e-3),
            };
            let mut text = format!("modes={}\npacket_bits={}\n", t.len(), t.packet_bits());
            for m in t.modes() {
                text.push_str(&format!(
                    "mode.{}=rate:{} a:{} g:{} gamma_p_db:{:.4} seam:{:.6}\n",
                    m.index,
                    m.rate,
                    m.fit_a,
                    m.fit_g,
                    linear_to_db(m.fit_gamma_p),
                    m.seam_value()
                ));
            }
            let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
            text.push_str(&format!("seam_warnings={}\n", join(t.seam_warnings())));
            for target in [p_loss, p_loss.sqrt()] {
                text.push_str(&format!(
                    "increment_ratio_violations@{target:e}={}\n",
                    join(&t.increment_ratio_violations(target)?)
                ));
            }
            emit(&text, None)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
