use std::fs;
use std::path::Path;
use std::process::Command;

use lqg::stats_harness::{ExperimentConfig, ExperimentKind};
use lqg_cli::{run, EXIT_CONFIG, EXIT_FAIL, EXIT_OK};

fn lqg(args: &[&str]) -> i32 {
    run(std::iter::once("lqg").chain(args.iter().copied()))
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn gff_sample_writes_field_and_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("d");
    let code = lqg(&["gff-sample", "--domain", "square", "--n", "64", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let field = lqg::grid_field::io::load_field(&out.join("field_7.lqgf"), lqg::Shape::UnitSquare).unwrap();
    let direct = lqg::grid_field::sample_gff(lqg::DomainSpec::square(64).unwrap(), 7).unwrap();
    assert_eq!(field.values(), direct.values());
    assert!(read(&out, "config.txt").contains("seed = 7"));
}

#[test]
fn measure_build_writes_measures() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("m");
    let code = lqg(&["measure-build", "--domain", "disk", "--n", "32", "--eps", "1/8,1/16", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let index = read(&out, "measures.csv");
    assert_eq!(index.lines().count(), 3);
    assert!(out.join("measure_1_eps0.0625.lqgm").exists());
}

#[test]
fn missing_config_exits_2_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let missing = tmp.path().join("absent.txt");
    let code = lqg(&["verify-variance", "--config", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(!out.exists());
}

#[test]
fn configuration_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = out.to_str().unwrap();
    assert_eq!(lqg(&["verify-variance", "--gamma", "2.5", "--out", o]), EXIT_CONFIG);
    assert_eq!(lqg(&["verify-variance", "--eps", "0.1", "--out", o]), EXIT_CONFIG);
    assert_eq!(lqg(&["boundary-recon", "--domain", "square", "--out", o]), EXIT_CONFIG);
    assert_eq!(lqg(&["gff-sample", "--n", "12", "--out", o]), EXIT_CONFIG);
    assert_eq!(lqg(&["no-such-command"]), EXIT_CONFIG);
    assert_eq!(lqg(&["gff-sample", "--bogus-flag", "1"]), EXIT_CONFIG);
    assert!(!out.exists());
}

#[test]
fn failed_check_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cv");
    // Three replicates cannot pin the slope to within 0.05.
    let code = lqg(&[
        "verify-circle-variance", "--n", "32", "--eps", "1/4,1/8,1/16", "--replicates", "3", "--seed", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_FAIL);
    assert!(read(&out, "SUMMARY.txt").contains("overall: FAIL"));
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.txt");
    fs::write(&cfg, "experiment = measure-expectation\nn = 32\ngamma = 1\neps = 1/4\nreplicates = 40\nseed = 5\n").unwrap();
    let out = tmp.path().join("o");
    let code = lqg(&["verify-measure", "--config", cfg.to_str().unwrap(), "--seed", "9", "--out", out.to_str().unwrap()]);
    // Forty replicates may or may not pass the 5% check; only the echo matters here.
    assert_ne!(code, EXIT_CONFIG);
    let echoed = ExperimentConfig::parse(&read(&out, "config.txt"), None).unwrap();
    assert_eq!(echoed.seed, 9);
    assert_eq!(echoed.n, 32);
    assert_eq!(echoed.replicates, 40);
}

#[test]
fn verify_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    for d in &dirs {
        let code = lqg(&[
            "verify-covariance", "--n", "64", "--eps", "1/8,1/16", "--replicates", "12", "--seed", "3", "--out",
            d.to_str().unwrap(),
        ]);
        assert_ne!(code, EXIT_CONFIG);
    }
    for name in ["replicates.csv", "aggregate.csv", "fits.csv", "constants.csv", "failures.csv"] {
        assert_eq!(read(&dirs[0], name), read(&dirs[1], name), "{name}");
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::parse(&fs::read_to_string(&path).unwrap(), None)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if cfg.experiment == ExperimentKind::Exponent {
            assert!(cfg.extra("trials").is_some());
        }
        seen += 1;
    }
    assert!(seen >= 9);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_lqg");
    let status = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&status.stderr).contains("Usage"));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(EXIT_OK));
    for sub in ["gff-sample", "recon-run", "lbm-extension", "exponent-estimate"] {
        assert!(String::from_utf8_lossy(&help.stdout).contains(sub), "{sub}");
    }
}
