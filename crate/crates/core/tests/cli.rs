mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use monotone_lrt::cli::Report;
use serde_json::Value;
use tempfile::TempDir;

const GND_SUMMARY: &str = "level,n,mean,var\n0,340,0.815,0.035\n1,211,0.833,0.024\n2,54,0.870,0.017\n3,18,0.854,0.022\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_monotone-lrt"))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Long-format file with the given per-level observations.
fn long_file(dir: &TempDir, name: &str, groups: &[Vec<f64>]) -> PathBuf {
    let mut text = String::from("level,value\n");
    for (i, g) in groups.iter().enumerate() {
        for y in g {
            text.push_str(&format!("{i},{y}\n"));
        }
    }
    write(dir, name, &text)
}

#[test]
fn ordered_scenario_on_gnd_summary() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "t1.csv", GND_SUMMARY);
    let out = run(&["run", path(&input), "--scenario", "ordered", "--bootstrap", "parametric", "--replicates", "20000", "--seed", "1"]);
    let r = json(&out);
    let mu = floats(&r["estimates"]["ordered_variances"]["mu"]);
    for (a, b) in mu.iter().zip([0.815, 0.833, 0.866, 0.866]) {
        assert!((a - b).abs() <= 1e-3, "{mu:?}");
    }
    let stat = r["statistic"]["value"].as_f64().unwrap();
    assert!((stat - 7.105).abs() / 7.105 <= 0.05, "{stat}");
    let p = r["p_values"]["parametric"]["p_value"].as_f64().unwrap();
    assert!((p - 0.0212).abs() <= 0.010, "{p}");
    assert_eq!(r["statistic"]["kind"], "neg2-log-lambda-i");
    assert_eq!(r["replicates"], 20000);
    assert_eq!(r["seed"], 1);
    assert_eq!(r["conditions"]["condition2"], false);
    assert!(r["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().contains("condition2")));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: condition2"));
}

#[test]
fn known_ratio_with_pooled_variance() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "t1.csv", GND_SUMMARY);
    let chi = json(&run(&["run", path(&input), "--scenario", "known-ratio", "--sigma2", "pooled", "--bootstrap", "none"]));
    assert_eq!(chi["statistic"]["kind"], "chi-bar-sq");
    assert!((chi["null_fit"]["mu0"].as_f64().unwrap() - 0.827).abs() < 1e-3);
    assert_eq!(chi["settings"]["sigma2_source"], "pooled");
    let mu1 = floats(&chi["estimates"]["known_ratio"]["mu"]);
    assert!((mu1[2] - 0.867).abs() < 1e-3);
    let ebar = json(&run(&["run", path(&input), "--scenario", "known-ratio", "--sigma2", "pooled", "--statistic", "ebar", "--bootstrap", "none"]));
    assert!((ebar["statistic"]["value"].as_f64().unwrap() - 0.0121).abs() < 0.0121 * 0.05);
    assert!((ebar["null_fit"]["mu0"].as_f64().unwrap() - 0.831).abs() < 1e-3);
}

#[test]
fn bootstrap_none_omits_p_values() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "t1.csv", GND_SUMMARY);
    let r = json(&run(&["run", path(&input), "--scenario", "unknown", "--bootstrap", "none"]));
    assert!(r["p_values"]["parametric"].is_null());
    assert!(r["p_values"]["nonparametric"].is_null());
    assert!(r["replicates"].is_null());
    assert!(r["statistic"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn single_level_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let input = long_file(&dir, "one.csv", &[vec![1.0, 2.0, 3.0]]);
    let out = run(&["run", path(&input), "--scenario", "unknown"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("two levels"));
}

#[test]
fn nonparametric_needs_raw_data() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "t1.csv", GND_SUMMARY);
    for mode in ["nonparametric", "both"] {
        let out = run(&["run", path(&input), "--scenario", "unknown", "--bootstrap", mode]);
        assert_eq!(out.status.code(), Some(2));
    }
}

#[test]
fn malformed_rows_exit_2_with_line_numbers() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bad.csv", "level,value\n0,1.0\n0,abc\n1,2.0\n1\n");
    let out = run(&["run", path(&input), "--scenario", "unknown"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line(s) 3, 5"), "{err}");
    let missing = run(&["run", path(&dir.path().join("nope.csv")), "--scenario", "unknown"]);
    assert_eq!(missing.status.code(), Some(2));
    let flag = run(&["run", path(&input), "--scenario", "sideways"]);
    assert_eq!(flag.status.code(), Some(2));
}

#[test]
fn summary_and_long_inputs_agree() {
    let dir = TempDir::new().unwrap();
    let sample = common::sample_with_moments(11, &[12, 15, 9], &[0.1, 0.0, 0.4], &[1.0, 0.5, 0.8]);
    let long = long_file(&dir, "long.csv", sample.observations());
    let stats = monotone_lrt::summarize(&sample).unwrap();
    let mut text = String::from("level,n,mean,var\n");
    for i in 0..stats.k() {
        text.push_str(&format!("{},{},{},{}\n", i, stats.n[i], stats.mean[i], stats.var[i]));
    }
    let summary = write(&dir, "summary.csv", &text);
    for scenario in ["known-ratio", "unknown", "ordered"] {
        let args = ["--scenario", scenario, "--replicates", "300", "--seed", "4"];
        let a = json(&run(&[&["run", path(&long)][..], &args].concat()));
        let b = json(&run(&[&["run", path(&summary)][..], &args].concat()));
        let sa = a["statistic"]["value"].as_f64().unwrap();
        let sb = b["statistic"]["value"].as_f64().unwrap();
        assert!((sa - sb).abs() <= 1e-10 * (1.0 + sa.abs()));
        for key in ["unknown_variances", "ordered_variances", "known_ratio"] {
            for (x, y) in floats(&a["estimates"][key]["mu"]).iter().zip(floats(&b["estimates"][key]["mu"])) {
                assert!((x - y).abs() <= 1e-10);
            }
        }
        assert_eq!(a["p_values"]["parametric"]["p_value"], b["p_values"]["parametric"]["p_value"]);
        assert_eq!(a["input"]["format"], "long");
        assert_eq!(b["input"]["format"], "summary");
    }
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "t1.csv", GND_SUMMARY);
    let base = ["run", path(&input), "--scenario", "unknown", "--replicates", "500", "--seed", "9"];
    let a = run(&base);
    let b = run(&base);
    let c = run(&[&base[..], &["--workers", "3"]].concat());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let text = run(&[&base[..], &["--format", "text"]].concat());
    let text2 = run(&[&base[..], &["--format", "text"]].concat());
    assert_eq!(text.stdout, text2.stdout);
}

#[test]
fn json_report_round_trips() {
    let dir = TempDir::new().unwrap();
    let sample = common::sample_with_moments(3, &[20, 20, 20], &[0.0, 0.2, 0.5], &[1.0, 1.0, 1.0]);
    let input = long_file(&dir, "long.csv", sample.observations());
    let out = run(&["run", path(&input), "--scenario", "ordered", "--bootstrap", "both", "--replicates", "200"]);
    assert!(out.status.success());
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again.as_bytes(), &out.stdout[..]);
    assert!(report.p_values.parametric.is_some() && report.p_values.nonparametric.is_some());
}

#[test]
fn strict_mode_and_non_convergence() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "t1.csv", GND_SUMMARY);
    let args = ["run", path(&input), "--scenario", "unknown", "--max-iter", "1", "--bootstrap", "none"];
    let lax = run(&args);
    assert_eq!(lax.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&lax.stdout).unwrap();
    assert_eq!(r["converged"], false);
    let strict = run(&[&args[..], &["--strict"]].concat());
    assert_eq!(strict.status.code(), Some(3));
    let fine = run(&["run", path(&input), "--scenario", "unknown", "--bootstrap", "none", "--strict"]);
    assert_eq!(fine.status.code(), Some(0));
}

#[test]
fn text_report_has_table_rows() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "t1.csv", GND_SUMMARY);
    let out_file = dir.path().join("report.txt");
    let out = run(&["run", path(&input), "--scenario", "unknown", "--format", "text", "--replicates", "200", "--output", path(&out_file)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&out_file).unwrap();
    for needle in ["unknown var: mu", "ordered var: sigma2", "null fit: mu0", "p-value (parametric, M = 200"] {
        assert!(text.contains(needle), "{needle}\n{text}");
    }
}

#[test]
fn replicate_dump_one_value_per_line() {
    let dir = TempDir::new().unwrap();
    let sample = common::sample_with_moments(8, &[10, 10, 10], &[0.0, 0.1, 0.2], &[1.0, 1.0, 1.0]);
    let input = long_file(&dir, "long.csv", sample.observations());
    let single = dir.path().join("reps.txt");
    let out = run(&["run", path(&input), "--scenario", "unknown", "--replicates", "50", "--dump-replicates", path(&single)]);
    let r = json(&out);
    let lines: Vec<f64> = fs::read_to_string(&single).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    let failures = r["p_values"]["parametric"]["failures"].as_u64().unwrap() as usize;
    assert_eq!(lines.len() + failures, 50);
    assert!(r["p_values"]["parametric"]["replicate_values"].is_null());

    let both = dir.path().join("both.txt");
    let out = run(&["run", path(&input), "--scenario", "unknown", "--replicates", "20", "--bootstrap", "both", "--dump-replicates", path(&both)]);
    assert!(out.status.success());
    assert!(dir.path().join("both.parametric.txt").exists());
    assert!(dir.path().join("both.nonparametric.txt").exists());
}

#[test]
fn decreasing_direction_on_reflected_data() {
    let dir = TempDir::new().unwrap();
    let t1 = write(&dir, "t1.csv", GND_SUMMARY);
    let flipped = write(
        &dir,
        "flip.csv",
        "level,n,mean,var\n0,340,-0.815,0.035\n1,211,-0.833,0.024\n2,54,-0.870,0.017\n3,18,-0.854,0.022\n",
    );
    let a = json(&run(&["run", path(&t1), "--scenario", "unknown", "--bootstrap", "none"]));
    let b = json(&run(&["run", path(&flipped), "--scenario", "unknown", "--direction", "dec", "--bootstrap", "none"]));
    let (sa, sb) = (a["statistic"]["value"].as_f64().unwrap(), b["statistic"]["value"].as_f64().unwrap());
    assert!((sa - sb).abs() < 1e-9);
}

#[test]
fn group_cells_into_levels() {
    let dir = TempDir::new().unwrap();
    let cells = write(&dir, "cells.csv", "cell,count,value\na,0,1.0\nb,0,2.0\nc,2,3.0\n");
    let out = run(&["group", path(&cells)]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "level,value\n0,1\n0,2\n2,3\n");

    let capped = write(&dir, "capped.csv", "cell,count,value\n1,5,0.5\n2,3,0.7\n");
    let out = run(&["group", path(&capped), "--cap", "3"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "level,value\n3,0.5\n3,0.7\n");

    let bad = write(&dir, "bad.csv", "cell,count,value\n1,x,0.5\n2,3,0.7\n3,1\n");
    let out = run(&["group", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2, 4"));
}

#[test]
fn grouping_conserves_cells_and_feeds_run() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("cell,count,value\n");
    for c in 0..625u64 {
        let count = (c * 7 + c / 25) % 6;
        text.push_str(&format!("{c},{count},{}\n", 0.8 + 0.01 * count as f64 + 0.001 * (c % 13) as f64));
    }
    let cells = write(&dir, "grid.csv", &text);
    let long = dir.path().join("long.csv");
    let out = run(&["group", path(&cells), "--cap", "3", "--output", path(&long)]);
    assert!(out.status.success());
    let body = fs::read_to_string(&long).unwrap();
    let levels: Vec<u64> = body.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(levels.len(), 625);
    assert!(levels.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(*levels.last().unwrap(), 3);
    let r = json(&run(&["run", path(&long), "--scenario", "ordered", "--bootstrap", "none"]));
    assert_eq!(r["input"]["total"], 625);
    assert_eq!(r["input"]["k"], 4);
}
