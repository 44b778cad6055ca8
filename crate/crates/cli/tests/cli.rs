use std::path::PathBuf;
use std::process::{Command, Output};

fn zdjscc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zdjscc")).args(args).output().expect("binary runs")
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("zdjscc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn field(stdout: &str, key: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {stdout}"))
        .parse()
        .unwrap()
}

#[test]
fn moments_prints_the_quantizer_summary() {
    let out = zdjscc(&["moments", "--delta", "1.0", "--rho", "0.9"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(field(&text, "k_max"), 6.0);
    assert_eq!(field(&text, "M"), 2.0);
    let (ts, tt, sr) = (field(&text, "E[TS]"), field(&text, "E[T^2]"), field(&text, "sigma_R^2"));
    assert!((sr - (1.0 - 2.0 * ts + tt)).abs() < 1e-15);
    // Close to the Δ²/12 rule at unit step.
    assert!((sr - 1.0 / 12.0).abs() < 1e-3);
}

#[test]
fn config_errors_exit_with_code_two() {
    let out = zdjscc(&["sweep", "--config", "/nonexistent/missing.file"]);
    assert_eq!(out.status.code(), Some(2));

    let bad = scratch("bad.cfg", "scheme = uncoded\nrho = 0.9\nc = 2\ncsnr_db = 0, ten\n");
    let out = zdjscc(&["sweep", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 4"));
}

#[test]
fn bad_arguments_are_configuration_errors() {
    let out = zdjscc(&["simulate", "--scheme", "uncoded", "--rho", "1.5", "--c", "2", "--csnr", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = zdjscc(&["simulate", "--scheme", "scheme_c", "--rho", "0.9", "--c", "2", "--csnr", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_code_one() {
    let cfg = scratch("ok.cfg", "scheme = uncoded\nrho = 0.9\nc = 2\ncsnr_db = 10\n");
    let out = zdjscc(&["sweep", "--config", cfg.to_str().unwrap(), "--output", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("/nonexistent/dir/out.csv"));
}

#[test]
fn sweep_output_is_reproducible() {
    let cfg = scratch("sweep.cfg", "scheme = uncoded, scheme_b\nrho = 0.9\nc = 2\ncsnr_db = 20\ntrials = 10000\n\
        delta_points = 4\ndigital_gain_points = 4\nrefinement = 0\n");
    let run = |seed: &str| {
        let out = zdjscc(&["sweep", "--config", cfg.to_str().unwrap(), "--output", "-", "--seed", seed]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    let first = run("5");
    assert_eq!(first, run("5"));
    assert_ne!(first, run("6"));
    assert_eq!(first.lines().count(), 3);

    let path = cfg.with_file_name("out.csv");
    let out = zdjscc(&["sweep", "--config", cfg.to_str().unwrap(), "--output", path.to_str().unwrap(), "--seed", "5"]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), first);
}

#[test]
fn simulate_with_manual_parameters() {
    let out = zdjscc(&[
        "simulate", "--scheme", "scheme_b", "--rho", "0.9", "--c", "2", "--csnr", "20", "--delta", "1.2",
        "--digital-gain", "0.6", "--trials", "20000",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "scheme_b");
    assert_eq!(row[13], "20000");
    assert!((row[8].parse::<f64>().unwrap() - 1.2).abs() < 1e-12);
}

#[test]
fn validate_passes_at_a_reference_point() {
    let out = zdjscc(&["validate", "--rho", "0.9", "--c", "2", "--csnr", "20"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}
