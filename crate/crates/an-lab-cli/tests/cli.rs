//! End-to-end tests of the `an-lab` binary: argument handling, config
//! validation, CSV schemas, reproducibility, and the run manifest.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_an-lab")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary should launch")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn write_cfg(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("exp.toml");
    std::fs::write(&path, body).expect("config written");
    path
}

const FIXED_4QAM: &str = r#"
[experiment]
name = "cli-test"
modulation = 4
em_over_n0_db = 10.0
trials = 20000
seed = 3

[sweep]
start = 0.0
stop = 10.0
step = 5.0

[channel]
kind = "fixed"
h_re = 1.0
h_im = 0.0
g_re = 1.0
g_im = 0.0
"#;

const RAYLEIGH_16QAM: &str = r#"
[experiment]
name = "cli-test-rayleigh"
modulation = 16
em_over_n0_db = 10.0
trials = 20000
seed = 5

[sweep]
start = 0.0
stop = 10.0
step = 5.0

[channel]
kind = "rayleigh"
sigma_h_sq = 1.0
sigma_g_sq = 1.0
"#;

#[test]
fn threshold_runs_without_config() {
    let out = run(&["threshold"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("modulation,a_over_sigma,threshold"));
    assert_eq!(text.lines().count(), 1 + 3 * 96);
    assert!(
        text.contains("\n16,4,6.2149\n"),
        "expected the 16-point crossover near 6.2149"
    );
    // Below the crossover regime the threshold cell is empty.
    assert!(text.contains("\n4,0.5,\n"));
}

#[test]
fn threshold_honors_config_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(
        dir.path(),
        r#"
[experiment]
name = "thresholds"
modulation = 16
em_over_n0_db = 20.0

[threshold]
modulations = [4]
start = 3.0
stop = 4.0
step = 0.5
"#,
    );
    let out = run(&["threshold", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("4,3,"));
    assert!(rows[2].starts_with("4,3.5,"));
    assert!(rows[3].starts_with("4,4,"));
}

#[test]
fn missing_config_is_a_usage_error() {
    for cmd in ["ser-curve", "power-opt", "ser-vs-ez", "aser"] {
        let out = run(&[cmd]);
        assert_eq!(out.status.code(), Some(2), "{cmd} should exit 2");
        assert!(
            stderr(&out).contains("--config"),
            "{cmd} should mention --config"
        );
    }
}

#[test]
fn invalid_configs_exit_2() {
    let dir = TempDir::new().unwrap();
    let cases: &[(&str, &str)] = &[
        (
            "modulation",
            r#"
[experiment]
name = "x"
modulation = 5
em_over_n0_db = 10.0
"#,
        ),
        (
            "step",
            r#"
[experiment]
name = "x"
modulation = 4
em_over_n0_db = 10.0

[sweep]
start = 0.0
stop = 10.0
step = -1.0

[channel]
kind = "fixed"
h_re = 1.0
h_im = 0.0
g_re = 1.0
g_im = 0.0
"#,
        ),
        (
            "kinds",
            r#"
[experiment]
name = "x"
modulation = 4
em_over_n0_db = 10.0

[sweep]
start = 0.0
stop = 10.0
step = 5.0

[channel]
kind = "fixed"
h_re = 1.0
h_im = 0.0
g_re = 1.0
g_im = 0.0

[designs]
kinds = []
"#,
        ),
        (
            "unknown",
            r#"
[experiment]
name = "x"
modulation = 4
em_over_n0_db = 10.0

[sweep]
start = 0.0
stop = 10.0
step = 5.0

[channel]
kind = "fixed"
h_re = 1.0
h_im = 0.0
g_re = 1.0
g_im = 0.0

[designs]
kinds = ["chaotic"]
"#,
        ),
        (
            "variance",
            r#"
[experiment]
name = "x"
modulation = 4
em_over_n0_db = 10.0

[sweep]
start = 0.0
stop = 10.0
step = 5.0

[channel]
kind = "rayleigh"
sigma_h_sq = -1.0
sigma_g_sq = 1.0
"#,
        ),
    ];
    for (token, body) in cases {
        let cfg = write_cfg(dir.path(), body);
        let out = run(&["ser-vs-ez", "--config", cfg.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "config with bad {token} should exit 2; stderr: {}",
            stderr(&out)
        );
    }
}

#[test]
fn channel_kind_must_match_the_command() {
    let dir = TempDir::new().unwrap();
    let fixed = write_cfg(dir.path(), FIXED_4QAM);
    let out = run(&["aser", "--config", fixed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("rayleigh"));

    let rayleigh = dir.path().join("ray.toml");
    std::fs::write(&rayleigh, RAYLEIGH_16QAM).unwrap();
    let out = run(&["ser-vs-ez", "--config", rayleigh.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("fixed"));
}

#[test]
fn design_kind_must_match_the_command() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(
        dir.path(),
        &format!("{FIXED_4QAM}\n[designs]\nkinds = [\"uniform-power\"]\n"),
    );
    let out = run(&["ser-vs-ez", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("uniform-power"));
}

#[test]
fn power_opt_needs_three_sweep_points() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(
        dir.path(),
        r#"
[experiment]
name = "x"
modulation = 16
em_over_n0_db = 20.0

[sweep]
start = 0.0
stop = 5.0
step = 5.0

[channel]
kind = "fixed"
h_re = 1.0
h_im = 0.0
g_re = 1.0
g_im = 0.0
"#,
    );
    let out = run(&["power-opt", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ser_curve_needs_a_zsweep() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), FIXED_4QAM);
    let out = run(&["ser-curve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("zsweep"));
}

#[test]
fn csv_headers_are_stable() {
    let dir = TempDir::new().unwrap();
    let fixed = write_cfg(dir.path(), FIXED_4QAM);
    let ray = dir.path().join("ray.toml");
    std::fs::write(&ray, RAYLEIGH_16QAM).unwrap();
    let zcfg = dir.path().join("z.toml");
    std::fs::write(
        &zcfg,
        format!("{FIXED_4QAM}\n[zsweep]\nstart = 0.0\nstop = 2.0\nstep = 1.0\n"),
    )
    .unwrap();
    let pcfg = dir.path().join("p.toml");
    std::fs::write(&pcfg, FIXED_4QAM).unwrap();

    let result_columns =
        "design,x1,x2,p,phase1,phase2,ser_analytic,ser_sim,ci_half_width,region_label";
    let cases = [
        (vec!["threshold"], "modulation,a_over_sigma,threshold".to_string()),
        (
            vec!["ser-curve", "--config", zcfg.to_str().unwrap()],
            format!("z_over_sigma,{result_columns}"),
        ),
        (
            vec!["power-opt", "--config", pcfg.to_str().unwrap()],
            format!("ez_over_n0_db,{result_columns}"),
        ),
        (
            vec!["ser-vs-ez", "--config", fixed.to_str().unwrap()],
            format!("ez_over_n0_db,{result_columns}"),
        ),
        (
            vec!["aser", "--config", ray.to_str().unwrap()],
            format!("ez_over_n0_db,{result_columns}"),
        ),
    ];
    for (args, header) in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
        assert_eq!(
            stdout(&out).lines().next(),
            Some(header.as_str()),
            "header mismatch for {args:?}"
        );
    }
}

#[test]
fn rows_come_out_in_sweep_order_with_no_nan_text() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), FIXED_4QAM);
    let out = run(&["ser-vs-ez", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let coords: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(coords.len(), 3 * 4, "three sweep points, four designs");
    assert!(coords.windows(2).all(|w| w[0] <= w[1]));
    assert!(!text.to_lowercase().contains("nan"));
}

#[test]
fn same_seed_is_byte_identical_and_seeds_matter() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), FIXED_4QAM);
    let a = run(&["ser-vs-ez", "--config", cfg.to_str().unwrap()]);
    let b = run(&["ser-vs-ez", "--config", cfg.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["ser-vs-ez", "--config", cfg.to_str().unwrap(), "--seed", "99"]);
    assert_eq!(c.status.code(), Some(0));
    assert_ne!(a.stdout, c.stdout, "a different seed should move the estimates");
}

#[test]
fn out_writes_csv_with_run_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), FIXED_4QAM);
    let csv = dir.path().join("run.csv");
    let out = run(&[
        "ser-vs-ez",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
        "--trials",
        "25000",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).is_empty(), "CSV goes to the file, not stdout");

    let written = std::fs::read_to_string(&csv).unwrap();
    assert!(written.starts_with("ez_over_n0_db,design,"));

    let meta = std::fs::read_to_string(dir.path().join("run.meta")).unwrap();
    let digest = format!("{:x}", Sha256::digest(std::fs::read(&cfg).unwrap()));
    assert!(meta.contains("command: ser-vs-ez"));
    assert!(meta.contains("experiment: cli-test"));
    assert!(meta.contains(&format!("config_sha256: {digest}")));
    assert!(meta.contains("seed: 3"), "seed from the config");
    assert!(meta.contains("trials: 25000"), "trials from the override");
    assert!(meta.contains("wall_time_s:"));
}

#[test]
fn power_opt_labels_regions_in_order() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(
        dir.path(),
        r#"
[experiment]
name = "regions"
modulation = 16
em_over_n0_db = 20.0

[sweep]
start = -5.0
stop = 25.0
step = 2.5

[channel]
kind = "fixed"
h_re = 1.0
h_im = 0.0
g_re = 1.0
g_im = 0.0
"#,
    );
    let out = run(&["power-opt", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let order = ["I", "II", "III", "IV", "V"];
    let labels: Vec<usize> = text
        .lines()
        .skip(1)
        .filter(|l| l.split(',').nth(1) == Some("optimal"))
        .map(|l| {
            let label = l.rsplit(',').next().unwrap();
            order
                .iter()
                .position(|&o| o == label)
                .unwrap_or_else(|| panic!("unexpected region label {label:?}"))
        })
        .collect();
    assert_eq!(labels.len(), 13);
    assert!(labels.windows(2).all(|w| w[0] <= w[1]), "labels: {labels:?}");
    assert_eq!(*labels.last().unwrap(), 4, "top of the sweep sits in region V");
}

#[test]
fn aser_fills_analytic_and_sim_columns_appropriately() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), RAYLEIGH_16QAM);
    let out = run(&["aser", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let (design, analytic, sim) = (cells[1], cells[7], cells[8]);
        match design {
            "gaussian" => {
                assert!(analytic.is_empty(), "no closed form for gaussian under fading");
                assert!(!sim.is_empty());
            }
            "non-informative" => {
                assert_eq!(analytic, "0.9375");
                assert!(sim.is_empty());
            }
            "statistical-optimal" | "uniform-power" | "exponential-power" => {
                assert!(!analytic.is_empty());
                assert!(!sim.is_empty());
            }
            other => panic!("unexpected design {other:?}"),
        }
    }
}

#[test]
fn instantaneous_expectation_is_opt_in_by_flag() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), RAYLEIGH_16QAM);
    let out = run(&["aser", "--config", cfg.to_str().unwrap()]);
    assert!(!stdout(&out).contains("instantaneous-expectation"));
    let out = run(&[
        "aser",
        "--config",
        cfg.to_str().unwrap(),
        "--with-instantaneous-expectation",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let row = text
        .lines()
        .find(|l| l.split(',').nth(1) == Some("instantaneous-expectation"))
        .expect("flag adds the design");
    let cells: Vec<&str> = row.split(',').collect();
    assert!(cells[7].is_empty(), "expectation rows are simulation-only");
    assert!(!cells[8].is_empty());
}

#[test]
fn verify_passes_and_reports_counts() {
    let out = run(&["verify", "--trials", "50000"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("verify: 27 checks, 27 passed, 0 failed"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_tolerance_hook_turns_failures_into_exit_1() {
    let out = Command::new(bin())
        .args(["verify", "--trials", "50000"])
        .env("AN_LAB_VERIFY_TOLERANCE_SCALE", "1e-9")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("FAIL"));
    assert!(text.contains("tolerance_scale: 1.00000e-9"));
}

#[test]
fn verify_writes_a_check_table() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("verify.csv");
    let out = run(&[
        "verify",
        "--trials",
        "50000",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("check,status,value,reference,tolerance\n"));
    assert_eq!(table.lines().count(), 28, "header plus one row per check");
    assert!(dir.path().join("verify.meta").exists());
}
