use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use charblow::cli::config::{parse_config, RunConfig};
use serde_json::Value;
use tempfile::TempDir;

const SMALL: &str = "seed = 5\n[grid]\nn = 100\n[run]\nt_max = 0.2\n";

fn charblow(args: &[&str], dir: &Path, threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_charblow"))
        .args(args)
        .current_dir(dir)
        .env("CHARBLOW_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn with_config(text: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("run.toml"), text).unwrap();
    dir
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_every_output() {
    let dir = with_config(SMALL);
    let out = charblow(&["simulate", "--config", "run.toml", "--out", "o", "--quiet"], dir.path(), "2");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let o = dir.path().join("o");
    for f in ["snapshots.csv", "traces.csv", "traces_index.json", "blowup_report.json", "config_echo.toml"] {
        assert!(o.join(f).is_file(), "missing {f}");
    }
    let report = json(&o.join("blowup_report.json"));
    for key in ["N", "nu", "y0_min", "q0_min", "T_pred", "T_obs", "refinement_confirmed", "bounds"] {
        assert!(report.get(key).is_some(), "blowup_report lacks {key}");
    }
    let csv = fs::read_to_string(o.join("snapshots.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,x,v,u,h,p,c,alpha,beta,y,q,fwdRC,bwdRC");
    let echoed = parse_config(&fs::read_to_string(o.join("config_echo.toml")).unwrap()).unwrap();
    let mut expected = parse_config(SMALL).unwrap();
    expected.output.dir = "o".into();
    assert_eq!(echoed, expected);
}

#[test]
fn zero_duration_gives_one_level() {
    let dir = with_config("[grid]\nn = 50\n[run]\nt_max = 0\n");
    let out = charblow(&["simulate", "--config", "run.toml", "--out", "o"], dir.path(), "1");
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("o/snapshots.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r.starts_with("0.0000000000000000e0,")));
}

#[test]
fn runs_are_byte_identical_across_thread_counts() {
    let dir = with_config(SMALL);
    let a = charblow(&["simulate", "--config", "run.toml", "--out", "a", "--refine", "1"], dir.path(), "1");
    let b = charblow(&["simulate", "--config", "run.toml", "--out", "b", "--refine", "1"], dir.path(), "4");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    for f in ["refinement.json", "n100/snapshots.csv", "n200/snapshots.csv", "n200/blowup_report.json", "n100/traces.csv"] {
        let fa = fs::read(dir.path().join("a").join(f)).unwrap();
        let fb = fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(fa == fb, "{f} differs");
    }
}

#[test]
fn config_errors_exit_two_with_positions() {
    let dir = with_config("[run]\ncfl = 1.5\nnu = -1\n");
    let out = charblow(&["simulate", "--config", "run.toml"], dir.path(), "1");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("run.toml:2:7:"), "{err}");
    assert!(err.contains("run.toml:3:"), "{err}");
    let missing = charblow(&["verify", "--config", "absent.toml"], dir.path(), "1");
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_three() {
    let dir = with_config("[model]\nv_min = 0.95\nv_max = 1.05\n[initial]\namplitude = 0.5\n");
    let out = charblow(&["simulate", "--config", "run.toml", "--out", "o"], dir.path(), "1");
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out.stderr.is_empty());
}

#[test]
fn threshold_prints_and_writes_bounds() {
    let dir = with_config("[model]\nname = \"mhd\"\nprofile = { kind = \"sinusoidal\", mean = 1, amplitude = 0.2, wavenumber = 1 }\n\
         [grid]\nn = 64\nx_hi = 6.283185307179586\n");
    let out = charblow(&["threshold", "--config", "run.toml", "--out", "o"], dir.path(), "1");
    assert_eq!(out.status.code(), Some(0));
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    let written = json(&dir.path().join("o/threshold.json"));
    assert_eq!(printed, written);
    for key in ["N", "nu", "sup_a1", "sup_a0_plus", "sup_a2", "inf_a2"] {
        assert!(written[key].is_number(), "{key}");
    }
    assert!(written["N"].as_f64().unwrap() < 0.0);
    assert!(written["sup_a1"].as_f64().unwrap() > 0.0);
    assert!(written["inf_a2"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_passes_for_the_defaults() {
    let dir = with_config("[verify]\nsamples = 200\n[duct]\nn = 101\n");
    let out = charblow(&["verify", "--config", "run.toml", "--out", "o"], dir.path(), "2");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = json(&dir.path().join("o/verify_report.json"));
    assert_eq!(report["pass"], Value::Bool(true));
    assert_eq!(report["checks"].as_array().unwrap().len(), 8);
}

#[test]
fn trace_and_duct_write_their_files() {
    let dir = with_config("[grid]\nn = 100\n[run]\nt_max = 0.3\n[trace]\ncount = 3\n[duct]\nn = 81\nt_max = 0.2\n");
    let out = charblow(&["trace", "--config", "run.toml", "--out", "t"], dir.path(), "2");
    assert_eq!(out.status.code(), Some(0));
    let index = json(&dir.path().join("t/traces_index.json"));
    assert_eq!(index.as_array().unwrap().len(), 3);
    let out = charblow(&["duct", "--config", "run.toml", "--out", "d", "--refine", "1"], dir.path(), "2");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["n81/duct_snapshots.csv", "n161/duct_report.json", "refinement.json"] {
        assert!(dir.path().join("d").join(f).is_file(), "missing {f}");
    }
}

#[test]
fn defaults_echo_cleanly() {
    let d = RunConfig::default();
    assert_eq!(parse_config(&d.echo()).unwrap(), d);
}
