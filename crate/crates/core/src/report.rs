//! Scenario runs, sweeps and their text/CSV output.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::adaptive::{iterate, optimize, OptimizeOutcome, OptimizerConfig};
use crate::config::{ScenarioFile, Scheme, SweepSpec, SweepVariable};
use crate::constpower::{const_power_policy, direct_transmission_se, optimize_const_power};
use crate::error::{Error, Result};
use crate::perf::{average_power, spectral_efficiency, AdaptationPolicy, OmegaVariant, PerformanceReport, Scenario};
use crate::sim::{compare, simulate, CompareReport, SimConfig};
use crate::units::linear_to_db;

/// Result of optimizing one scenario file.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub outcome: OptimizeOutcome,
    pub comparison: Option<CompareReport>,
}

/// Optimize the scenario in `path`; simulate too when `sim` is given (or
/// the file has a `[simulation]` section and `sim` is `None`).
pub fn run_scenario(
    path: impl AsRef<Path>,
    variant: Option<OmegaVariant>,
    sim: Option<SimConfig>,
) -> Result<ScenarioRun> {
    let file = ScenarioFile::load(path)?;
    let mut config = file.optimizer.clone();
    if let Some(v) = variant {
        config.omega_variant = v;
    }
    let outcome = optimize(&file.scenario, &config)?;
    let comparison = sim
        .or(file.simulation)
        .map(|c| compare(&file.scenario, &outcome.policy, &c))
        .transpose()?;
    Ok(ScenarioRun { scenario: file.scenario, outcome, comparison })
}

fn db_list(levels: &[f64]) -> String {
    levels.iter().map(|l| format!("{:.4}", linear_to_db(*l))).collect::<Vec<_>>().join(",")
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join(",")
}

/// `key=value` lines describing a policy and its analytic report.
pub fn format_report(policy: &AdaptationPolicy, p_t1: f64, report: &PerformanceReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "eta={:.6}", report.spectral_efficiency);
    let _ = writeln!(s, "p_avg={:.6}", report.avg_power);
    let _ = writeln!(s, "omega_variant={}", report.omega_variant);
    let _ = writeln!(s, "p_t1={p_t1:.6}");
    let _ = writeln!(s, "p_t2={:.6}", policy.target_per_relay);
    let _ = writeln!(s, "power_adaptive={}", policy.is_power_adaptive());
    let _ = writeln!(s, "source_levels_db={}", db_list(policy.source_thresholds.levels()));
    let _ = writeln!(s, "relay_levels_db={}", db_list(policy.relay_thresholds.levels()));
    let _ = writeln!(s, "source_mode_probabilities={}", list(&report.source_mode_probabilities));
    let _ = writeln!(s, "relay_mode_probabilities={}", list(&report.relay_mode_probabilities));
    let _ = writeln!(s, "source_avg_pers={}", list(&report.source_avg_pers));
    let _ = writeln!(s, "relay_avg_pers={}", list(&report.relay_avg_pers));
    let _ = writeln!(s, "omega={:.6}", report.omega);
    let _ = writeln!(s, "omega_appendix={:.6}", report.omega_appendix);
    let _ = writeln!(s, "expected_source_power={:.6}", report.expected_source_power);
    let _ = writeln!(s, "expected_relay_power={:.6}", report.expected_relay_power);
    s
}

impl ScenarioRun {
    pub fn to_key_value(&self) -> String {
        let o = &self.outcome;
        let mut s = format_report(&o.policy, o.p_t1_star, &o.report);
        let _ = writeln!(s, "iterations={}", o.trace.iterations());
        let _ = writeln!(s, "converged={}", o.trace.converged);
        let history: Vec<String> = o.trace.se_history().iter().map(|e| format!("{e:.6}")).collect();
        let _ = writeln!(s, "se_history={}", history.join(","));
        if let Some(c) = &self.comparison {
            s.push_str(&c.to_key_value());
        }
        s
    }
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variable: SweepVariable,
    pub value: f64,
    pub scheme: Scheme,
    pub eta: Option<f64>,
    pub p_avg: Option<f64>,
    pub p_t1_star: Option<f64>,
    /// "ok" or the failure message.
    pub feasibility: String,
    pub sim_eta: Option<f64>,
    pub sim_eta_stderr: Option<f64>,
    pub sim_p_avg: Option<f64>,
}

struct Point {
    eta: f64,
    p_avg: Option<f64>,
    p_t1: Option<f64>,
    policy: Option<AdaptationPolicy>,
}

fn evaluate(spec: &SweepSpec, scenario: &Scenario, value: f64, scheme: Scheme, config: &OptimizerConfig) -> Result<Point> {
    let variant = config.omega_variant;
    let fixed_pt1 = (spec.variable == SweepVariable::PT1).then_some(value);
    match scheme {
        Scheme::AdaptivePower => {
            let (policy, p_t1) = match fixed_pt1 {
                Some(p) => (iterate(scenario, p, config)?.0, p),
                None => {
                    let o = optimize(scenario, config)?;
                    (o.policy, o.p_t1_star)
                }
            };
            Ok(Point {
                eta: spectral_efficiency(scenario, &policy),
                p_avg: Some(average_power(scenario, &policy, variant)?),
                p_t1: Some(p_t1),
                policy: Some(policy),
            })
        }
        Scheme::ConstPower => {
            let (policy, p_t1) = match fixed_pt1 {
                Some(p) => (const_power_policy(scenario, p)?, p),
                None => {
                    let o = optimize_const_power(scenario, config.pt1_search_tol, variant)?;
                    (o.policy, o.p_t1_star)
                }
            };
            Ok(Point {
                eta: spectral_efficiency(scenario, &policy),
                p_avg: Some(average_power(scenario, &policy, variant)?),
                p_t1: Some(p_t1),
                policy: Some(policy),
            })
        }
        Scheme::Direct => Ok(Point {
            eta: direct_transmission_se(scenario)?,
            p_avg: Some(scenario.p_bar_s),
            p_t1: None,
            policy: None,
        }),
    }
}

/// Evaluate every (grid value, scheme) pair. Points run in parallel; rows
/// come back in grid order with schemes in the order listed. Failures are
/// recorded in their row.
pub fn run_sweep(spec: &SweepSpec, variant: Option<OmegaVariant>) -> Vec<SweepRow> {
    let mut config = spec.base.optimizer.clone();
    if let Some(v) = variant {
        config.omega_variant = v;
    }
    let jobs: Vec<(f64, Scheme)> = spec
        .grid
        .iter()
        .flat_map(|&v| spec.schemes.iter().map(move |&s| (v, s)))
        .collect();
    jobs.par_iter()
        .map(|&(value, scheme)| {
            let mut row = SweepRow {
                variable: spec.variable,
                value,
                scheme,
                eta: None,
                p_avg: None,
                p_t1_star: None,
                feasibility: "ok".into(),
                sim_eta: None,
                sim_eta_stderr: None,
                sim_p_avg: None,
            };
            let result = spec.scenario_at(value).and_then(|scenario| {
                let point = evaluate(spec, &scenario, value, scheme, &config)?;
                let sim = match (&spec.simulate, &point.policy) {
                    (Some(c), Some(p)) => Some(simulate(&scenario, p, c)?),
                    _ => None,
                };
                Ok((point, sim))
            });
            match result {
                Ok((point, sim)) => {
                    row.eta = Some(point.eta);
                    row.p_avg = point.p_avg;
                    row.p_t1_star = point.p_t1;
                    if let Some(e) = sim {
                        let se = e.headline_se();
                        row.sim_eta = Some(se.mean);
                        row.sim_eta_stderr = Some(se.stderr);
                        row.sim_p_avg = Some(e.avg_power_ratio_totals.mean);
                    }
                }
                Err(e @ Error::Infeasible(_)) => row.feasibility = e.to_string(),
                Err(e) => row.feasibility = format!("error: {e}"),
            }
            row
        })
        .collect()
}

/// Write sweep rows as CSV with a header.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], with_sim: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Numerical(format!("csv write failed: {e}"));
    let mut header = vec!["variable", "value", "scheme", "eta", "p_avg", "p_t1_star", "feasibility"];
    if with_sim {
        header.extend(["sim_eta", "sim_eta_stderr", "sim_p_avg"]);
    }
    w.write_record(&header).map_err(io)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let mut rec = vec![
            r.variable.name().to_string(),
            r.value.to_string(),
            r.scheme.name().to_string(),
            opt(r.eta),
            opt(r.p_avg),
            opt(r.p_t1_star),
            r.feasibility.clone(),
        ];
        if with_sim {
            rec.extend([opt(r.sim_eta), opt(r.sim_eta_stderr), opt(r.sim_p_avg)]);
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Numerical(format!("csv flush failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep_in(dir: &Path, body: &str) -> SweepSpec {
        std::fs::write(dir.join("base.toml"), "p_bar_db = 10").unwrap();
        std::fs::write(dir.join("sweep.toml"), body).unwrap();
        SweepSpec::load(dir.join("sweep.toml")).unwrap()
    }

    #[test]
    fn rows_follow_grid_and_scheme_order() {
        let dir = tempfile::tempdir().unwrap();
        let spec = sweep_in(
            dir.path(),
            "scenario = \"base.toml\"\nvariable = \"p_t1\"\ngrid = [0.01, 0.1, 0.5]\nschemes = [\"const-power-carq\", \"direct-transmission\"]",
        );
        let rows = run_sweep(&spec, None);
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].scheme, Scheme::ConstPower);
        assert_eq!(rows[1].scheme, Scheme::Direct);
        assert_eq!(rows[2].value, 0.1);
        assert!(rows.iter().all(|r| r.feasibility == "ok"));
        let mut buf = Vec::new();
        write_sweep_csv(&rows, false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("variable,value,scheme,eta,p_avg,p_t1_star,feasibility\n"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn infeasible_points_are_recorded_in_row() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("base.toml"), "p_bar_db = -10\np_bar_s_db = 10\np_bar_r_db = 10\n[optimizer]\nlambda_bracket = [0, 1e-9]\nlambda_cap = 1e-8")
            .unwrap();
        std::fs::write(
            dir.path().join("sweep.toml"),
            "scenario = \"base.toml\"\nvariable = \"p_t1\"\ngrid = [0.05]\nschemes = [\"adaptive-power-carq\", \"direct-transmission\"]",
        )
        .unwrap();
        let spec = SweepSpec::load(dir.path().join("sweep.toml")).unwrap();
        let rows = run_sweep(&spec, None);
        assert!(rows[0].feasibility.starts_with("infeasible"), "{}", rows[0].feasibility);
        assert!(rows[0].eta.is_none());
        assert_eq!(rows[1].feasibility, "ok");
    }
}
