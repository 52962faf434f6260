use std::fs;
use std::path::Path;
use std::process::Command;

use timescale_cli::{run, PipelineConfig, Subcommand};
use timescale_core::series::{read_panel, read_series, write_series, TimeSeries};
use timescale_core::synth::{gen_harmonic_series, gen_poisson_counts, Harmonic, SynthScenario};

fn scenario() -> SynthScenario {
    SynthScenario {
        n: 400,
        harmonics: vec![
            Harmonic { amplitude: 8.0, period: 40.0, phase: 0.2 },
            Harmonic { amplitude: 3.0, period: 7.3, phase: 1.0 },
        ],
        trend: vec![30.0, 0.01],
        noise_sd: 2.0,
        seed: 11,
        ..SynthScenario::default()
    }
}

fn config(dir: &Path, json: &str) -> PipelineConfig {
    PipelineConfig::from_json(json, dir).unwrap()
}

fn write_inputs(dir: &Path) -> TimeSeries<f64> {
    let s = gen_harmonic_series::<f64>(&scenario()).unwrap();
    write_series(dir.join("pm10.csv"), &s.series).unwrap();
    let counts = gen_poisson_counts(s.series.date(0), &s.harmonics, &[0.01, 0.02], &[], 2.0, 5).unwrap();
    write_series(dir.join("deaths.csv"), &counts).unwrap();
    s.series
}

#[test]
fn ssa_components_sum_to_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_inputs(dir.path());
    let cfg = config(dir.path(), r#"{"input": "pm10.csv", "window_length": 40, "groups": 4, "output": "out"}"#);
    let files = run(Subcommand::Ssa, &cfg).unwrap();
    let names: Vec<&str> = files.iter().map(|f| f.file.as_str()).collect();
    for f in ["decomposition.json", "wmatrix.csv", "grouping.json", "components.csv", "spectrum.csv", "component_G1.csv"] {
        assert!(names.contains(&f), "{f} missing");
    }
    let table = read_panel::<f64>(dir.path().join("out/components.csv")).unwrap();
    assert_eq!(table.stations(), 4);
    let x = input.complete_values().unwrap();
    for t in 0..x.len() {
        let s: f64 = table.row(t).into_iter().map(|v| v.unwrap()).sum();
        assert!((s - x[t]).abs() <= 1e-8 * (1.0 + x[t].abs()), "{s} vs {}", x[t]);
    }
    let w = fs::read_to_string(dir.path().join("out/wmatrix.csv")).unwrap();
    assert_eq!(w.lines().count(), 40);
    assert!(dir.path().join("out/manifest.json").is_file());
}

#[test]
fn fft_writes_bands() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path());
    let cfg = config(dir.path(), r#"{"input": "pm10.csv", "breaks": [1, 10, 30, 400], "output": "out"}"#);
    run(Subcommand::Fft, &cfg).unwrap();
    let bands = read_panel::<f64>(dir.path().join("out/bands.csv")).unwrap();
    assert_eq!(bands.station_ids(), ["B1", "B2", "B3"]);
    let x = read_series::<f64>(dir.path().join("pm10.csv")).unwrap().complete_values().unwrap();
    for t in 0..x.len() {
        let s: f64 = bands.row(t).into_iter().map(|v| v.unwrap()).sum();
        assert!((s - x[t]).abs() < 1e-9);
    }
}

#[test]
fn compare_orders_by_ubre() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path());
    let cfg = config(dir.path(), r#"{"input": "pm10.csv", "window_length": 40, "groups": 4, "output": "ssa"}"#);
    run(Subcommand::Ssa, &cfg).unwrap();
    let compare = config(
        dir.path(),
        r#"{
          "output": "cmp",
          "fits": [
            {"name": "null", "counts": "deaths.csv"},
            {"name": "raw", "counts": "deaths.csv", "exposures": [{"name": "pm10", "path": "pm10.csv"}],
             "smooths": [{"name": "time", "basis_dim": 6}]},
            {"name": "ssa", "counts": "deaths.csv",
             "exposures": [{"name": "G2", "path": "ssa/components.csv"}, {"name": "G3", "path": "ssa/components.csv"}],
             "smooths": [{"name": "time", "basis_dim": 6}]}
          ]
        }"#,
    );
    run(Subcommand::Compare, &compare).unwrap();
    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("cmp/comparison.json")).unwrap()).unwrap();
    let ubre: Vec<f64> = rows.as_array().unwrap().iter().map(|r| r["ubre"].as_f64().unwrap()).collect();
    assert_eq!(ubre.len(), 3);
    assert!(ubre.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(rows[2]["name"], "null");
    assert!(dir.path().join("cmp/fit_ssa_table.txt").is_file());
}

#[test]
fn preprocess_hourly_panel() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("date,s1,s2,s3\n");
    let start = chrono::NaiveDate::from_ymd_opt(2005, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    for h in 0..24 * 60 {
        let t = start + chrono::Duration::hours(h);
        let base = 40.0 + 10.0 * (h as f64 / 24.0 / 9.0).sin() + ((h * 37) % 11) as f64;
        let s2 = if h / 24 == 10 { "NA".to_string() } else { format!("{}", base * 0.9 + ((h * h * 13 + 3) % 19) as f64) };
        csv.push_str(&format!("{},{base},{s2},{}\n", t.format("%Y-%m-%dT%H:%M"), base + ((h * h * 31 + h * 7) % 17) as f64));
    }
    fs::write(dir.path().join("raw.csv"), csv).unwrap();
    let cfg = config(dir.path(), r#"{"input": "raw.csv", "output": "pre", "preprocess": {"remove_count": 2}}"#);
    run(Subcommand::Preprocess, &cfg).unwrap();
    let daily = read_series::<f64>(dir.path().join("pre/daily.csv")).unwrap();
    assert_eq!(daily.len(), 60);
    assert!(daily.is_complete());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("pre/preprocess_report.json")).unwrap()).unwrap();
    assert_eq!(report["outliers"]["removed"].as_array().unwrap().len(), 2);
}

#[test]
fn binary_reports_machine_readable_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.json"),
        r#"{"fits": [{"counts": "nope.csv", "smooths": [{"name": "t", "basis_dim": 2}]}]}"#,
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_timescale"))
        .args(["compare", "--config"])
        .arg(dir.path().join("bad.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["status"], "error");
    assert_eq!(record["messages"].as_array().unwrap().len(), 3, "{record}");

    let ok = Command::new(env!("CARGO_BIN_EXE_timescale"))
        .args(["simulate", "--seed", "4", "--out"])
        .arg(dir.path().join("sim"))
        .output()
        .unwrap();
    assert!(ok.status.success());
    let rec: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sim/recovery.json")).unwrap()).unwrap();
    assert_eq!(rec["seed"], 4);
}
