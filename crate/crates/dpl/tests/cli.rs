use std::path::Path;
use std::process::{Command, Output};

use dpl::checks::{run_check, Inputs, CHECKS};
use dpl::formats::{parse_report, write_gfn};
use dpl::{run, ExperimentConfig};
use dpl_core::weights::{apd_characteristic, power_weight};
use dpl_core::GridFunction;

fn dpl(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpl"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn empty_check_list_gives_an_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.cfg", "dim = 1\ndepth = 3\n");
    let out = dir.path().join("out");
    let o = dpl(
        &[
            "verify-suite",
            "--config",
            &cfg,
            "--checks",
            "",
            "--output",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["checks"].as_array().unwrap().len(), 0);
    assert_eq!(manifest["passed"], true);
}

#[test]
fn a2d_report_matches_the_library_call() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a2d.cfg",
        "# single check\ndim = 1\ndepth = 3\nweight = power:0.5\nchecks = a2d\n",
    );
    let out = dir.path().join("out");
    let o = dpl(
        &[
            "characteristic",
            "--config",
            &cfg,
            "--output",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let report =
        parse_report(&std::fs::read_to_string(out.join("reports/a2d.json")).unwrap()).unwrap();
    let lib = apd_characteristic(&power_weight(1, 3, 0.5).unwrap(), 2.0).unwrap();
    assert_eq!(report.empirical_constant, lib.value);
    assert_eq!(
        report.worst_region.as_deref(),
        Some(lib.argmax.to_string().as_str())
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let checks = manifest["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0]["name"], "a2d");
    assert_eq!(checks[0]["empirical_constant"].as_f64().unwrap(), lib.value);
}

#[test]
fn every_check_through_the_runner_equals_the_direct_call() {
    let mut cfg = ExperimentConfig::from_text(
        "dim = 2\ndepth = 3\nweight = cascade:0.5:4\nsamples = 2000\ntrials = 3\n",
    )
    .unwrap();
    cfg.checks = CHECKS.iter().map(|c| c.name.to_string()).collect();
    let outcome = run(&cfg).unwrap();
    let inputs = Inputs::build(&cfg).unwrap();
    assert_eq!(outcome.runs.len(), CHECKS.len());
    for (run, entry) in outcome.runs.iter().zip(CHECKS) {
        assert_eq!(run.name, entry.name);
        let direct = run_check(entry.name, &cfg, &inputs).unwrap();
        assert_eq!(run.output.report, direct.report, "{}", entry.name);
        assert!(
            run.output.report.passed(),
            "{}: {:?}",
            entry.name,
            run.output.report.violations
        );
    }
}

#[test]
fn cap_zero_forces_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = dpl(
        &[
            "characteristic",
            "--dim",
            "1",
            "--depth",
            "3",
            "--checks",
            "a2d",
            "--cap",
            "a2d=0",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL a2d"));
}

#[test]
fn usage_and_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.cfg", "dim = 1\ncolour = blue\n");
    let o = dpl(&["verify-suite", "--config", &bad], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(
        dpl(&["verify-suite", "--checks", "nope"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(dpl(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(
        dpl(&["norm", "--weight", "file:missing.gfn"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        dpl(&["verify-suite", "--config", "absent.cfg"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn resource_guard_trips_and_can_be_lifted() {
    let dir = tempfile::tempdir().unwrap();
    let o = dpl(
        &[
            "characteristic",
            "--dim",
            "2",
            "--depth",
            "9",
            "--checks",
            "a2d",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--unsafe-size"));
    let o = dpl(
        &[
            "characteristic",
            "--dim",
            "1",
            "--depth",
            "17",
            "--checks",
            "a2d",
            "--unsafe-size",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let o = dpl(&["norm", "--dim", "1", "--depth", "13"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dpl"))
        .args(["characteristic", "--depth", "2"])
        .env("DPL_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_dpl"))
        .args(["characteristic", "--depth", "2"])
        .env("DPL_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn grid_files_feed_the_checks() {
    let dir = tempfile::tempdir().unwrap();
    let w = GridFunction::from_cells(1, 3, |c| 1.0 + c[0] as f64);
    write(dir.path(), "w.gfn", &write_gfn(&w));
    let out = dir.path().join("out");
    let o = dpl(
        &[
            "norm",
            "--dim",
            "1",
            "--depth",
            "3",
            "--weight",
            "file:w.gfn",
            "--export-matrix",
            "--output",
            "out",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.join("matrix.opm").is_file());
    assert!(out.join("timings.json").is_file());
    let short = write(dir.path(), "short.gfn", "gfn 1\ndim=1 depth=3\n1\n2\n");
    let o = dpl(
        &[
            "norm",
            "--dim",
            "1",
            "--depth",
            "3",
            "--weight",
            &format!("file:{short}"),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hash_ignores_the_output_directory_but_not_file_contents() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.gfn");
    std::fs::write(&path, write_gfn(&GridFunction::constant(1, 2, 2.0))).unwrap();
    let mut cfg =
        ExperimentConfig::from_text(&format!("depth = 2\nweight = file:{}\n", path.display()))
            .unwrap();
    let h1 = cfg.hash().unwrap();
    cfg.output = Some("elsewhere".into());
    assert_eq!(cfg.hash().unwrap(), h1);
    std::fs::write(&path, write_gfn(&GridFunction::constant(1, 2, 3.0))).unwrap();
    assert_ne!(cfg.hash().unwrap(), h1);
}
