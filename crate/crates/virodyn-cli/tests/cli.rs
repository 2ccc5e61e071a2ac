//! End-to-end checks of the command-line surface: exit codes, CSV layout,
//! reproducibility, and the parameter-file contract.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_virodyn"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("virodyn-cli-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn equilibria_reference_run() {
    let out = run(&[
        "equilibria",
        "--defaults-eq7",
        "--alpha",
        "1.0",
        "--alpha-s",
        "1.0",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with('#'));
    assert_eq!(lines[2], "name,x1,x2,ys1,y1,y2,zs,z,feasible,residual");
    // nine rows it is: the coexistence quadratic has two real roots here
    assert_eq!(lines.len(), 3 + 9);
    // relative residual bound on every row
    for row in &lines[3..] {
        let f: Vec<&str> = row.split(',').collect();
        let state_norm: f64 = f[1..8]
            .iter()
            .map(|v| v.parse::<f64>().unwrap().powi(2))
            .sum::<f64>()
            .sqrt();
        let residual: f64 = f[9].parse().unwrap();
        assert!(
            residual < 1e-10 * state_norm.max(1.0),
            "{row}: residual too large"
        );
    }
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate",
        "--defaults-eq7",
        "--alpha",
        "0.5",
        "--alpha-s",
        "2.0",
        "--t-end",
        "30",
        "--sample-dt",
        "1.0",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let text = stdout(&a);
    assert!(text.lines().any(|l| l == "t,x1,x2,ys1,y1,y2,zs,z"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 32);
}

#[test]
fn curves_lists_every_constant_threshold() {
    let out = run(&["curves", "--defaults-eq7", "--count", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for label in ["T12", "T13", "T23", "T26", "T37", "T45", "T57", "T67", "H5"] {
        assert!(
            text.lines().any(|l| l.starts_with(&format!("{label},"))),
            "{label} missing"
        );
    }
    assert!(text
        .lines()
        .any(|l| l.starts_with("T12,") && l.ends_with(",0.44")));
}

#[test]
fn missing_rates_is_a_usage_error() {
    let out = run(&["equilibria", "--defaults-eq7", "--alpha", "1.0"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("alpha"), "unhelpful message: {err}");
}

#[test]
fn unknown_set_key_is_rejected_with_the_key_list() {
    let out = run(&[
        "equilibria",
        "--defaults-eq7",
        "--alpha",
        "1",
        "--alpha-s",
        "1",
        "--set",
        "bogus=3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("unknown parameter key"));
    assert!(err.contains("zeta_s"), "valid keys not listed: {err}");
}

#[test]
fn set_overrides_apply_after_config_and_last_wins() {
    let path = tmp("config");
    std::fs::write(&path, virodyn::Params::baseline(1.0, 1.0).to_key_values()).unwrap();
    let out = run(&[
        "equilibria",
        "--config",
        path.to_str().unwrap(),
        "--set",
        "alpha=0.4",
        "--set",
        "alpha=0.2",
        "--set",
        "alpha_s=0.2",
    ]);
    std::fs::remove_file(&path).ok();
    assert!(out.status.success());
    assert!(stdout(&out).contains("alpha=0.2 alpha_s=0.2"));
}

#[test]
fn config_missing_keys_fails() {
    let path = tmp("partial");
    std::fs::write(&path, "beta1=1.5\nbeta2=2.0\n").unwrap();
    let out = run(&["equilibria", "--config", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing required keys"));
}

#[test]
fn sweep1d_writes_to_file_with_threads_cap() {
    let path = tmp("sweep.csv");
    let out = run(&[
        "sweep1d",
        "--defaults-eq7",
        "--alpha-s",
        "0.2",
        "--axis",
        "alpha",
        "--from",
        "0.2",
        "--to",
        "0.9",
        "--count",
        "10",
        "--t-end",
        "400",
        "--threads",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text
        .lines()
        .any(|l| l == "alpha,equilibrium,norm,stable,po_max,po_min"));
    assert!(text.contains("v1"));
}

#[test]
fn lle_map_covers_the_grid_with_flags() {
    let out = run(&[
        "lle-map",
        "--defaults-eq7",
        "--alpha-from",
        "0.15",
        "--alpha-to",
        "0.25",
        "--alpha-count",
        "2",
        "--alpha-s-from",
        "0.15",
        "--alpha-s-to",
        "0.25",
        "--alpha-s-count",
        "2",
        "--transient",
        "100",
        "--accumulation",
        "500",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        // deep in the virus-free region every exponent is negative
        assert!(f[2].parse::<f64>().unwrap() < 0.0, "{row}");
        assert!(f[3] == "true" || f[3] == "false");
    }
}

#[test]
fn stability_map_runs_out_records_every_run() {
    let path = tmp("runs.csv");
    let out = run(&[
        "stability-map",
        "--defaults-eq7",
        "--alpha-from",
        "0.15",
        "--alpha-to",
        "0.25",
        "--alpha-count",
        "2",
        "--alpha-s-from",
        "0.15",
        "--alpha-s-to",
        "0.25",
        "--alpha-s-count",
        "2",
        "--basin-n",
        "2",
        "--t-end",
        "600",
        "--runs-out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let header = "alpha,alpha_s,zs0,z0,kind,target,final_residual,po_max,po_min,period,lle";
    assert!(text.lines().any(|l| l == header));
    // 4 cells x 4 runs
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 16);
    assert!(text.contains("equilibrium,v1"));
}

#[test]
fn stability_map_probabilities_sum_to_one_per_cell() {
    let out = run(&[
        "stability-map",
        "--defaults-eq7",
        "--alpha-from",
        "0.1",
        "--alpha-to",
        "0.3",
        "--alpha-count",
        "2",
        "--alpha-s-from",
        "0.1",
        "--alpha-s-to",
        "0.3",
        "--alpha-s-count",
        "2",
        "--basin-n",
        "2",
        "--t-end",
        "600",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let mut sums = std::collections::BTreeMap::<String, f64>::new();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        *sums.entry(format!("{},{}", f[0], f[1])).or_default() += f[3].parse::<f64>().unwrap();
    }
    assert_eq!(sums.len(), 4);
    for (cell, total) in sums {
        assert!((total - 1.0).abs() < 1e-12, "cell {cell} sums to {total}");
    }
}
