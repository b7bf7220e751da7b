//! End-to-end tests of the command-line binary: artifacts, determinism, and
//! exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shelltrap"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run_ok(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_shelltrap"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Data rows of a CSV artifact (everything after the `#` preamble and the
/// header line), split into cells.
fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn sweep_reproduces_shell_positions() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[rf]\nrabi_khz = 180\n[sweep]\nparameter = \"delta_mhz\"\nvalues = [1.7, 6.7, 8.7]\n",
    );
    run_ok(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "sweep",
    ]);
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 3);
    // z0_um column against the analytic inversion of the 1.8 G / 225 G/cm
    // field at 1.7, 6.7, and 8.7 MHz.
    let expected = [-170.1, -499.2, -627.6];
    for (row, z_ref) in rows.iter().zip(expected) {
        assert!(
            (row[2] / z_ref - 1.0).abs() < 0.01,
            "z0 = {} um vs {} um",
            row[2],
            z_ref
        );
    }
    // Transverse frequency grows with detuning toward the asymptotic value.
    assert!(rows[0][4] < rows[1][4] && rows[1][4] < rows[2][4]);
    assert!(rows[2][4] < 566.0 * 1.01);
}

#[test]
fn estimate_reports_gas_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let out = run_ok(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "estimate",
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("wrote"), "stdout: {stdout}");
    let rows = csv_rows(&dir.path().join("estimate.csv"));
    let mu_hz = rows[0][4];
    assert!((mu_hz - 404.0).abs() < 4.0, "mu/h = {mu_hz} Hz");
}

#[test]
fn json_output_carries_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[output]\nformat = \"json\"\n");
    run_ok(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "estimate",
    ]);
    let doc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("estimate.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(doc["_meta"]["subcommand"], "estimate");
    assert!(doc["rows"][0]["tc_nk"].as_f64().unwrap() > 50.0);
}

#[test]
fn load_runs_are_bit_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[rf]\ndelta_mhz = 2.0\nrabi_khz = 180\n\
         [ensemble]\nn_particles = 50\nseed = 5\n\
         [schedule]\nramp_ms = 20.0\nhold_ms = 10.0\n\
         [noise]\nnoise_kind = \"white_fwhm\"\ntarget_fwhm_hz = 2000.0\n",
    );
    let mut artifacts = Vec::new();
    for (threads, sub) in [("1", "a"), ("4", "b"), ("2", "c")] {
        let out_dir = dir.path().join(sub);
        std::fs::create_dir(&out_dir).unwrap();
        run_ok(&[
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--threads",
            threads,
            "load",
        ]);
        artifacts.push(std::fs::read(out_dir.join("load.csv")).unwrap());
    }
    assert!(!artifacts[0].is_empty());
    assert_eq!(artifacts[0], artifacts[1]);
    assert_eq!(artifacts[0], artifacts[2]);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[rf]\ndelta_mhz = 2.0\nrabi_khz = 180\n\
         [ensemble]\nn_particles = 20\nseed = 5\n\
         [schedule]\nramp_ms = 10.0\nhold_ms = 5.0\n",
    );
    let run_seed = |sub: &str, seed: Option<&str>| {
        let out_dir = dir.path().join(sub);
        std::fs::create_dir(&out_dir).unwrap();
        let mut args = vec![
            "--config".to_string(),
            config.to_str().unwrap().to_string(),
            "--out".to_string(),
            out_dir.to_str().unwrap().to_string(),
        ];
        if let Some(s) = seed {
            args.push("--seed".to_string());
            args.push(s.to_string());
        }
        args.push("load".to_string());
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        run_ok(&refs);
        std::fs::read(out_dir.join("load.csv")).unwrap()
    };
    let base = run_seed("base", None);
    let same = run_seed("same", Some("5"));
    let other = run_seed("other", Some("6"));
    assert_eq!(base, same);
    assert_ne!(base, other);
}

#[test]
fn config_errors_exit_one_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[rf]\ndelta_mhz = 2.0\nrabi_khz = 180\nbogus_key = 1\n[ensemble]\nn_particles = -3\n",
    );
    let out = bin()
        .args([
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "characterize",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    // Both problems reported in one pass, each with its line.
    assert!(stderr.contains("bogus_key"), "stderr: {stderr}");
    assert!(stderr.contains("line 4"), "stderr: {stderr}");
    assert!(stderr.contains("n_particles"), "stderr: {stderr}");
    assert!(stderr.contains("line 6"), "stderr: {stderr}");
}

#[test]
fn missing_config_file_exits_one() {
    let out = bin()
        .args(["--config", "/nonexistent/run.toml", "characterize"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn noise_subcommand_without_model_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[rf]\ndelta_mhz = 2.0\nrabi_khz = 180\n");
    let out = bin()
        .args([
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "noise",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("noise_kind"));
}

#[test]
fn unknown_flag_exits_one_and_help_exits_zero() {
    let bad = bin().arg("--frobnicate").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let help = bin().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("characterize"));
}
