//! Scenario and sweep files.
//!
//! Both are TOML. Powers and SNRs are given in dB and converted to linear
//! units here; paths inside a file are resolved against that file's
//! directory.
//!
//! ```toml
//! p_bar_db = 10.0
//! mu_db = 0.0
//! p_loss = 0.001
//! mode_table = "../hiperlan2.toml"   # optional, built-in table otherwise
//!
//! [optimizer]
//! init = "random"
//! seed = 3
//!
//! [simulation]
//! packets = 1000000
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::adaptive::{InitialThresholds, OptimizerConfig};
use crate::amc::{hiperlan2, AmcModeTable};
use crate::channel::{Link, LinkModel, ThresholdVector};
use crate::error::{Error, Result};
use crate::perf::Scenario;
use crate::sim::{SeEstimator, SimConfig};
use crate::units::db_to_linear;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    p_bar_db: f64,
    p_bar_s_db: Option<f64>,
    p_bar_r_db: Option<f64>,
    #[serde(default)]
    mu_db: f64,
    #[serde(default = "default_p_loss")]
    p_loss: f64,
    #[serde(default = "default_alpha")]
    alpha: f64,
    mode_table: Option<PathBuf>,
    relay_mode_table: Option<PathBuf>,
    #[serde(default)]
    optimizer: OptimizerDoc,
    simulation: Option<SimulationDoc>,
}

fn default_p_loss() -> f64 {
    1e-3
}

fn default_alpha() -> f64 {
    0.5
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizerDoc {
    max_iterations: Option<usize>,
    se_convergence_tol: Option<f64>,
    lambda_bracket: Option<(f64, f64)>,
    lambda_cap: Option<f64>,
    lambda_tol: Option<f64>,
    pt1_search_tol: Option<f64>,
    /// "floors", "random" or "user".
    init: Option<String>,
    seed: Option<u64>,
    random_lo_db: Option<f64>,
    random_hi_db: Option<f64>,
    source_levels_db: Option<Vec<f64>>,
    relay_levels_db: Option<Vec<f64>>,
    omega_variant: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulationDoc {
    packets: Option<u64>,
    seed: Option<u64>,
    frame_symbols: Option<u64>,
    alpha: Option<f64>,
    /// "per-packet" or "ratio-of-totals".
    estimator: Option<String>,
    batches: Option<usize>,
}

/// A loaded scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub path: PathBuf,
    pub scenario: Scenario,
    pub optimizer: OptimizerConfig,
    /// Present when the file has a `[simulation]` section.
    pub simulation: Option<SimConfig>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

impl ScenarioFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_str_at(&read(path)?, path)
    }

    /// Parse `text` as if it were the file at `path`.
    pub fn from_str_at(text: &str, path: &Path) -> Result<Self> {
        let doc: ScenarioDoc = toml::from_str(text).map_err(|e| Error::parse(path.display().to_string(), e))?;
        let dir = base_dir(path);
        let table = match &doc.mode_table {
            Some(p) => AmcModeTable::load(dir.join(p))?,
            None => hiperlan2(),
        };
        let relay_table = doc.relay_mode_table.as_ref().map(|p| AmcModeTable::load(dir.join(p))).transpose()?;
        let scenario = build_scenario(&doc, table, relay_table)?;
        let optimizer = optimizer_config(&doc.optimizer, &scenario)?;
        let simulation = doc.simulation.as_ref().map(sim_config).transpose()?;
        Ok(ScenarioFile { path: path.to_path_buf(), scenario, optimizer, simulation })
    }
}

fn build_scenario(doc: &ScenarioDoc, table: AmcModeTable, relay_table: Option<AmcModeTable>) -> Result<Scenario> {
    let p_bar = db_to_linear(doc.p_bar_db);
    let p_bar_s = doc.p_bar_s_db.map_or(p_bar, db_to_linear);
    let p_bar_r = doc.p_bar_r_db.map_or(p_bar, db_to_linear);
    if let Some(r) = &relay_table {
        if r.packet_bits() != table.packet_bits() {
            return Err(Error::Validation("source and relay tables disagree on packet_bits".into()));
        }
    }
    let scenario = Scenario {
        table,
        relay_table,
        source_link: LinkModel::new(Link::SourceDestination, p_bar_s)?,
        relay_link: LinkModel::new(Link::RelayDestination, db_to_linear(doc.mu_db) * p_bar_r)?,
        p_bar,
        p_bar_s,
        p_bar_r,
        p_loss: doc.p_loss,
        alpha: doc.alpha,
        mu_db: doc.mu_db,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn optimizer_config(doc: &OptimizerDoc, scenario: &Scenario) -> Result<OptimizerConfig> {
    let d = OptimizerConfig::default();
    let levels = |db: &Option<Vec<f64>>, what: &str| -> Result<ThresholdVector> {
        let db = db
            .as_ref()
            .ok_or_else(|| Error::Validation(format!("init = \"user\" needs {what}")))?;
        ThresholdVector::new(db.iter().map(|&x| db_to_linear(x)).collect())
    };
    let initial_thresholds = match doc.init.as_deref().unwrap_or("floors") {
        "floors" => InitialThresholds::Floors,
        "random" => InitialThresholds::RandomDb {
            seed: doc.seed.unwrap_or(1),
            lo_db: doc.random_lo_db.unwrap_or(-5.0),
            hi_db: doc.random_hi_db.unwrap_or(30.0),
        },
        "user" => {
            let source = levels(&doc.source_levels_db, "source_levels_db")?;
            let relay = levels(&doc.relay_levels_db, "relay_levels_db")?;
            if source.len() != scenario.table.len() || relay.len() != scenario.relay_modes().len() {
                return Err(Error::Validation("user levels do not match the mode tables".into()));
            }
            InitialThresholds::User { source, relay }
        }
        other => return Err(Error::Validation(format!("unknown init strategy '{other}'"))),
    };
    let config = OptimizerConfig {
        max_iterations: doc.max_iterations.unwrap_or(d.max_iterations),
        se_convergence_tol: doc.se_convergence_tol.unwrap_or(d.se_convergence_tol),
        lambda_bracket: doc.lambda_bracket.unwrap_or(d.lambda_bracket),
        lambda_cap: doc.lambda_cap.unwrap_or(d.lambda_cap),
        lambda_tol: doc.lambda_tol.unwrap_or(d.lambda_tol),
        pt1_search_tol: doc.pt1_search_tol.unwrap_or(d.pt1_search_tol),
        initial_thresholds,
        omega_variant: doc.omega_variant.as_deref().map(str::parse).transpose()?.unwrap_or(d.omega_variant),
    };
    let config = if config.lambda_bracket.1 > config.lambda_cap {
        OptimizerConfig { lambda_bracket: (config.lambda_bracket.0, config.lambda_cap), ..config }
    } else {
        config
    };
    config.validate()?;
    Ok(config)
}

fn sim_config(doc: &SimulationDoc) -> Result<SimConfig> {
    let d = SimConfig::default();
    let estimator = match doc.estimator.as_deref().unwrap_or("per-packet") {
        "per-packet" => SeEstimator::PerPacket,
        "ratio-of-totals" => SeEstimator::RatioOfTotals,
        other => return Err(Error::Validation(format!("unknown estimator '{other}'"))),
    };
    Ok(SimConfig {
        packet_budget: doc.packets.unwrap_or(d.packet_budget),
        seed: doc.seed.unwrap_or(d.seed),
        frame_symbols: doc.frame_symbols,
        alpha: doc.alpha,
        estimator,
        batches: doc.batches.unwrap_or(d.batches),
    })
}

/// Quantity varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    PBarDb,
    MuDb,
    PT1,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::PBarDb => "p_bar_db",
            SweepVariable::MuDb => "mu_db",
            SweepVariable::PT1 => "p_t1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
pub enum Scheme {
    #[serde(rename = "adaptive-power-carq")]
    AdaptivePower,
    #[serde(rename = "const-power-carq")]
    ConstPower,
    #[serde(rename = "direct-transmission")]
    Direct,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::AdaptivePower => "adaptive-power-carq",
            Scheme::ConstPower => "const-power-carq",
            Scheme::Direct => "direct-transmission",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepDoc {
    scenario: PathBuf,
    variable: SweepVariable,
    grid: Vec<f64>,
    schemes: Vec<Scheme>,
    simulate: Option<SimulationDoc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ScenarioFile,
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub simulate: Option<SimConfig>,
}

impl SweepSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_str_at(&read(path)?, path)
    }

    pub fn from_str_at(text: &str, path: &Path) -> Result<Self> {
        let doc: SweepDoc = toml::from_str(text).map_err(|e| Error::parse(path.display().to_string(), e))?;
        if doc.grid.is_empty() {
            return Err(Error::Validation("sweep grid is empty".into()));
        }
        if doc.grid.windows(2).any(|w| !(w[0] < w[1])) || doc.grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("sweep grid must be finite and strictly increasing".into()));
        }
        if doc.schemes.is_empty() {
            return Err(Error::Validation("sweep lists no schemes".into()));
        }
        let base = ScenarioFile::load(base_dir(path).join(&doc.scenario))?;
        if doc.variable == SweepVariable::PT1 {
            if let Some(v) = doc.grid.iter().find(|&&v| !(v > base.scenario.p_loss && v < 1.0)) {
                return Err(Error::Validation(format!("p_t1 grid value {v} outside ({}, 1)", base.scenario.p_loss)));
            }
        }
        Ok(SweepSpec {
            base,
            variable: doc.variable,
            grid: doc.grid,
            schemes: doc.schemes,
            simulate: doc.simulate.as_ref().map(sim_config).transpose()?,
        })
    }

    /// The base scenario with the sweep variable set to `value`. A p_t1
    /// sweep leaves the scenario unchanged.
    pub fn scenario_at(&self, value: f64) -> Result<Scenario> {
        let mut s = self.base.scenario.clone();
        match self.variable {
            SweepVariable::PBarDb => {
                let p = db_to_linear(value);
                s.p_bar = p;
                s.p_bar_s = p;
                s.p_bar_r = p;
                s.source_link = LinkModel::new(Link::SourceDestination, p)?;
                s.relay_link = LinkModel::new(Link::RelayDestination, db_to_linear(s.mu_db) * p)?;
            }
            SweepVariable::MuDb => {
                s.mu_db = value;
                s.relay_link = LinkModel::new(Link::RelayDestination, db_to_linear(value) * s.p_bar_r)?;
            }
            SweepVariable::PT1 => {}
        }
        s.validate()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perf::OmegaVariant;
    use approx::assert_relative_eq;

    fn at(text: &str) -> Result<ScenarioFile> {
        ScenarioFile::from_str_at(text, Path::new("scenario.toml"))
    }

    #[test]
    fn minimal_scenario_uses_defaults() {
        let f = at("p_bar_db = 10.0").unwrap();
        assert_relative_eq!(f.scenario.p_bar, 10.0, max_relative = 1e-12);
        assert_relative_eq!(f.scenario.relay_link.mean_snr, 10.0, max_relative = 1e-12);
        assert_eq!(f.scenario.p_loss, 1e-3);
        assert_eq!(f.optimizer, OptimizerConfig::default());
        assert!(f.simulation.is_none());
    }

    #[test]
    fn path_loss_scales_relay_snr() {
        let f = at("p_bar_db = 10.0\nmu_db = -3.0").unwrap();
        assert_relative_eq!(f.scenario.relay_link.mean_snr, 10.0 * db_to_linear(-3.0), max_relative = 1e-12);
    }

    #[test]
    fn optimizer_and_simulation_sections() {
        let f = at(r#"
p_bar_db = 6
[optimizer]
init = "random"
seed = 9
omega_variant = "appendixB"
[simulation]
packets = 5000
estimator = "ratio-of-totals"
"#)
        .unwrap();
        assert!(matches!(f.optimizer.initial_thresholds, InitialThresholds::RandomDb { seed: 9, .. }));
        assert_eq!(f.optimizer.omega_variant, OmegaVariant::RateRatio);
        let sim = f.simulation.unwrap();
        assert_eq!(sim.packet_budget, 5000);
        assert_eq!(sim.estimator, SeEstimator::RatioOfTotals);
    }

    #[test]
    fn errors_carry_context() {
        let e = at("p_bar_db = \"ten\"").unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
        assert!(e.to_string().contains("line 1"), "{e}");
        assert!(matches!(at("p_bar_db = 10\nbogus = 1").unwrap_err(), Error::Parse { .. }));
        assert!(matches!(at("p_bar_db = 10\np_loss = 2").unwrap_err(), Error::Validation(_)));
        assert!(matches!(at("p_bar_db = 10\nmode_table = \"nope.toml\"").unwrap_err(), Error::Io { .. }));
        assert!(matches!(at("p_bar_db = 10\n[optimizer]\ninit = \"user\"").unwrap_err(), Error::Validation(_)));
    }

    #[test]
    fn sweep_validation() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("base.toml"), "p_bar_db = 10").unwrap();
        let sweep = |body: &str| SweepSpec::from_str_at(body, &dir.path().join("sweep.toml"));
        let ok = sweep("scenario = \"base.toml\"\nvariable = \"p_bar_db\"\ngrid = [4, 6]\nschemes = [\"direct-transmission\"]")
            .unwrap();
        assert_relative_eq!(ok.scenario_at(6.0).unwrap().p_bar, db_to_linear(6.0), max_relative = 1e-12);
        let empty = sweep("scenario = \"base.toml\"\nvariable = \"p_bar_db\"\ngrid = [4]\nschemes = []");
        assert!(matches!(empty.unwrap_err(), Error::Validation(_)));
        let unsorted =
            sweep("scenario = \"base.toml\"\nvariable = \"mu_db\"\ngrid = [4, 2]\nschemes = [\"const-power-carq\"]");
        assert!(matches!(unsorted.unwrap_err(), Error::Validation(_)));
        let bad_pt1 = sweep("scenario = \"base.toml\"\nvariable = \"p_t1\"\ngrid = [0.5, 1.5]\nschemes = [\"const-power-carq\"]");
        assert!(matches!(bad_pt1.unwrap_err(), Error::Validation(_)));
    }
}
