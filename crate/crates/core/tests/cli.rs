use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bichromatic::config::{parse_config, SweepAxis, SweepParameter, SweepScale};
use bichromatic::run::{run_spectrum, run_sweep};

const SMALL: &str = "\
drive.omega1_ueV = 20
drive.omega2_ueV = 6
drive.delta2_ueV = 20
dissipation.gamma_ueV = 2
dissipation.gamma_prime_ueV = 1
grid.omega_min_ueV = -40
grid.omega_max_ueV = 40
grid.points = 161
numerics.period_samples = 8
floquet.order = 2
";

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], config: &str) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_bichromatic"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .output()
        .unwrap();
    (out, dir)
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn spectrum_to_stdout() {
    let (out, _d) = run(&["spectrum", "--threads", "1"], SMALL);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("omega_rel_ueV,intensity"));
    assert_eq!(text.lines().count(), 162);
}

#[test]
fn csv_is_byte_identical_across_runs_and_threads() {
    let (a, _d1) = run(&["spectrum", "--threads", "1"], SMALL);
    let (b, _d2) = run(&["spectrum", "--threads", "1"], SMALL);
    let (c, _d3) = run(&["spectrum", "--threads", "4"], SMALL);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn json_and_files() {
    let out_dir = tempfile::tempdir().unwrap();
    let target = out_dir.path().join("res");
    let (out, _d) = run(
        &["spectrum", "--format", "json", "--out", target.to_str().unwrap()],
        SMALL,
    );
    assert_eq!(code(&out), 0);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(target.join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(v["trace"]["values"].as_array().unwrap().len(), 161);
    assert_eq!(v["provenance"]["config_sha256"].as_str().unwrap().len(), 64);
    assert!(v["overlay"].as_array().is_some());
}

#[test]
fn config_errors_exit_one() {
    let bad = SMALL.replace("drive.omega1_ueV = 20", "drive.omega1_ueV = -5");
    let (out, _d) = run(&["spectrum"], &bad);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1") && err.contains("drive.omega1_ueV"), "{err}");

    let (out, _d) = run(&["spectrum"], &format!("{SMALL}drive.omega9 = 1\n"));
    assert_eq!(code(&out), 1);
    let (out, _d) = run(&["sweep"], SMALL);
    assert_eq!(code(&out), 1, "sweep without an axis");
    let (out, _d) = run(&["spectrum", "--overlay-order", "99"], SMALL);
    assert_eq!(code(&out), 1);
}

#[test]
fn numerical_failure_exits_two() {
    // correlation window far too short for the decay
    let (out, _d) = run(&["spectrum"], &format!("{SMALL}numerics.tau_max_ps = 2000\n"));
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tail not converged"));
}

#[test]
fn partial_sweep_exits_three() {
    // with this window only the single-laser point leaves too large a tail
    let cfg = format!(
        "{}numerics.tau_max_ps = 3000\nnumerics.tail_tol = 2e-4\n\
         sweep.parameter = omega2\nsweep.min = 0\nsweep.max = 40\nsweep.points = 3\n",
        SMALL.replace("drive.omega2_ueV = 6\n", "")
    );
    let (out, _d) = run(&["sweep", "--threads", "2"], &cfg);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("omega2 = 0 failed"));
    let text = String::from_utf8(out.stdout).unwrap();
    // failed points contribute no rows
    assert_eq!(text.lines().count(), 1 + 2 * 161);
    assert!(text.lines().skip(1).all(|l| !l.starts_with("0,")));
}

#[test]
fn floquet_and_phonon_subcommands() {
    let (out, _d) = run(&["floquet", "--overlay-order", "1"], SMALL);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("transition_ueV"));
    assert!(text.lines().count() > 5);

    let (out, _d) = run(&["phonon-rate", "--format", "json"], &format!("{SMALL}phonon.omega_rabi_ueV = 100\n"));
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rate = v["gamma_prime_ph_ueV"].as_f64().unwrap();
    assert!((2.4..=2.8).contains(&rate));
}

#[test]
fn sweep_result_independent_of_order() {
    let mut cfg = parse_config(SMALL).unwrap();
    let axis = |min: f64, max: f64| SweepAxis {
        parameter: SweepParameter::Omega2,
        min,
        max,
        points: 4,
        scale: SweepScale::Linear,
    };
    cfg.sweep = Some(axis(0.0, 12.0));
    let forward = run_sweep(&cfg, SMALL, 3).unwrap();
    cfg.sweep = Some(axis(12.0, 0.0));
    let backward = run_sweep(&cfg, SMALL, 1).unwrap();
    for (a, b) in forward.points.iter().zip(backward.points.iter().rev()) {
        assert_eq!(a.axis_value, b.axis_value);
        assert_eq!(a.trace.as_ref().unwrap().values, b.trace.as_ref().unwrap().values);
    }
}

/// Every shipped configuration parses; single-spectrum ones run as shipped,
/// sweeps run at their two end points on a coarser grid.
#[test]
fn shipped_configs_run() {
    let mut seen = 0;
    for name in ["fig1", "fig2a", "fig2b", "fig3a", "fig3b", "fig4"] {
        let text = fs::read_to_string(configs_dir().join(format!("{name}.cfg"))).unwrap();
        let mut cfg = parse_config(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        match cfg.sweep.as_mut() {
            None => {
                let run = run_spectrum(&cfg, &text, 0).unwrap();
                assert!(run.trace.max_value() > 0.0);
                assert!(!run.overlay.unwrap().is_empty());
            }
            Some(axis) => {
                axis.points = 2;
                cfg.grid.points = 201;
                let res = run_sweep(&cfg, &text, 0).unwrap();
                assert_eq!(res.failures(), 0, "{name}");
            }
        }
        seen += 1;
    }
    assert_eq!(seen, 6);
}
