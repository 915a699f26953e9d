use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

fn carq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carq")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
}

#[test]
fn check_table_reports_builtin_modes() {
    let o = carq(&["check-table"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(value(&out, "modes"), "6");
    assert_eq!(value(&out, "packet_bits"), "1080");
    assert_eq!(value(&out, "seam_warnings"), "");
}

#[test]
fn optimize_prints_report_for_each_variant() {
    let scenario = data("scenarios/baseline.toml");
    let o = carq(&["optimize", "--scenario", scenario.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(value(&out, "omega_variant"), "prop2");
    assert_eq!(value(&out, "converged"), "true");
    let eta: f64 = value(&out, "eta").parse().unwrap();
    assert!(eta > 1.0 && eta < 4.5);

    let o = carq(&["optimize", "--scenario", scenario.to_str().unwrap(), "--omega-variant", "appendixB"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(value(&stdout(&o), "omega_variant"), "appendixB");
}

#[test]
fn optimize_with_packets_appends_comparison() {
    let scenario = data("scenarios/baseline.toml");
    let o = carq(&["optimize", "--scenario", scenario.to_str().unwrap(), "--packets", "200000", "--seed", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(value(&out, "se.flag"), "green");
    value(&out, "omega.matching_variants");
    value(&out, "all_green");
}

#[test]
fn infeasible_budget_exits_with_its_own_code() {
    let o = carq(&["optimize", "--scenario", data("scenarios/infeasible.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("infeasible"), "{}", stderr(&o));
}

#[test]
fn error_classes_map_to_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(carq(&["optimize", "--scenario", missing.to_str().unwrap()]).status.code(), Some(1));

    let broken = dir.path().join("broken.toml");
    std::fs::write(&broken, "p_bar_db = = 3").unwrap();
    let o = carq(&["optimize", "--scenario", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("broken.toml"), "{}", stderr(&o));

    let invalid = dir.path().join("invalid.toml");
    std::fs::write(&invalid, "p_bar_db = 10\np_loss = 2.0").unwrap();
    assert_eq!(carq(&["optimize", "--scenario", invalid.to_str().unwrap()]).status.code(), Some(4));

    let no_schemes = dir.path().join("sweep.toml");
    std::fs::write(dir.path().join("base.toml"), "p_bar_db = 10").unwrap();
    std::fs::write(&no_schemes, "scenario = \"base.toml\"\nvariable = \"p_bar_db\"\ngrid = [1, 2]\nschemes = []").unwrap();
    assert_eq!(carq(&["sweep", "--sweep", no_schemes.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn unknown_variant_is_rejected_by_the_parser() {
    let scenario = data("scenarios/baseline.toml");
    let o = carq(&["optimize", "--scenario", scenario.to_str().unwrap(), "--omega-variant", "both"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("both"));
}

#[test]
fn sweep_csv_is_ordered_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let sweep = data("sweeps/spectral_efficiency_vs_power.toml");
    let o = carq(&["sweep", "--sweep", sweep.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();

    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    assert_eq!(&header, vec!["variable", "value", "scheme", "eta", "p_avg", "p_t1_star", "feasibility"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 33);
    for point in rows.chunks(3) {
        let eta: Vec<f64> = point.iter().map(|r| r[3].parse().unwrap()).collect();
        assert!(eta[0] >= eta[1] && eta[1] >= eta[2], "{point:?}");
    }

    let again = carq(&["sweep", "--sweep", sweep.to_str().unwrap()]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn simulate_writes_batch_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("batches.csv");
    let scenario = data("scenarios/baseline_sim.toml");
    let o = carq(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--packets",
        "50000",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    value(&stdout(&o), "se.z");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("batch,frames,packets,se_per_packet"));
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn audit_emits_samples_and_verdict() {
    let scenario = data("scenarios/baseline.toml");
    let o = carq(&["audit-quasiconcavity", "--scenario", scenario.to_str().unwrap(), "--points", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 21);
    assert!(stderr(&o).contains("local_maxima=1"), "{}", stderr(&o));
}
