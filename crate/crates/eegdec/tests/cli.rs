//! End-to-end CLI checks: the synth → preprocess → evaluate → compare chain
//! on a small configuration, exit-code conventions, and the fixture runner.

use std::path::Path;
use std::process::Command;

fn eegdec() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eegdec"))
}

fn write_small_config(path: &Path) {
    let cfg = r#"{
        "n_channels": 12,
        "fs": 1000.0,
        "separability": 1.0,
        "noise_scale": 1.0,
        "seed": 7,
        "trials_per_word": 4
    }"#;
    std::fs::write(path, cfg).unwrap();
}

#[test]
fn synth_preprocess_evaluate_compare_chain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let rec = dir.path().join("rec.eegd");
    let sched = dir.path().join("sched.json");
    let epochs = dir.path().join("epochs.eegd");
    write_small_config(&cfg);

    let out = eegdec()
        .args(["synth", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&rec)
        .arg("--schedule-out")
        .arg(&sched)
        .output()
        .unwrap();
    assert!(out.status.success(), "synth: {out:?}");
    assert!(rec.exists() && sched.exists());

    let out = eegdec()
        .args(["preprocess", "--in"])
        .arg(&rec)
        .arg("--schedule")
        .arg(&sched)
        .arg("--out")
        .arg(&epochs)
        .output()
        .unwrap();
    assert!(out.status.success(), "preprocess: {out:?}");

    // evaluate the two classical pipelines, twice each: byte-identical CSVs
    let mut csvs = Vec::new();
    for pipeline in ["psd_svm", "csp_lda"] {
        let a = dir.path().join(format!("{pipeline}_a.csv"));
        let b = dir.path().join(format!("{pipeline}_b.csv"));
        for out_path in [&a, &b] {
            let out = eegdec()
                .args(["evaluate", "--pipeline", pipeline, "--folds", "4", "--seed", "11"])
                .arg("--data")
                .arg(&epochs)
                .arg("--out")
                .arg(out_path)
                .output()
                .unwrap();
            assert!(out.status.success(), "evaluate {pipeline}: {out:?}");
        }
        assert_eq!(
            std::fs::read(&a).unwrap(),
            std::fs::read(&b).unwrap(),
            "{pipeline} evaluate not byte-identical"
        );
        csvs.push(a);
    }

    let report = dir.path().join("report.md");
    let out = eegdec()
        .args(["compare", "--results"])
        .args(&csvs)
        .arg("--report")
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success(), "compare: {out:?}");
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("| # of subjects | psd_svm | csp_lda |"));
    assert!(text.contains("Shapiro-Wilk"));
}

#[test]
fn train_writes_model_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let rec = dir.path().join("rec.eegd");
    let sched = dir.path().join("sched.json");
    let epochs = dir.path().join("epochs.eegd");
    write_small_config(&cfg);
    assert!(eegdec()
        .args(["synth", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&rec)
        .arg("--schedule-out")
        .arg(&sched)
        .status()
        .unwrap()
        .success());
    assert!(eegdec()
        .args(["preprocess", "--in"])
        .arg(&rec)
        .arg("--schedule")
        .arg(&sched)
        .arg("--out")
        .arg(&epochs)
        .status()
        .unwrap()
        .success());

    let svm_dir = dir.path().join("svm_model");
    assert!(eegdec()
        .args(["train", "--pipeline", "psd_svm", "--seed", "3"])
        .arg("--data")
        .arg(&epochs)
        .arg("--out")
        .arg(&svm_dir)
        .status()
        .unwrap()
        .success());
    assert!(svm_dir.join("model.svm").exists());

    let csp_dir = dir.path().join("csp_model");
    assert!(eegdec()
        .args(["train", "--pipeline", "csp_lda", "--seed", "3"])
        .arg("--data")
        .arg(&epochs)
        .arg("--out")
        .arg(&csp_dir)
        .status()
        .unwrap()
        .success());
    assert!(csp_dir.join("model.csp").exists());
    assert!(csp_dir.join("model.lda").exists());
}

#[test]
fn validation_errors_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = eegdec()
        .args(["evaluate", "--pipeline", "psd_svm", "--out"])
        .arg(dir.path().join("r.csv"))
        .arg("--data")
        .arg(dir.path().join("missing.eegd"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{out:?}");

    // corrupt magic
    let bad = dir.path().join("bad.eegd");
    std::fs::write(&bad, b"NOPE").unwrap();
    let out = eegdec()
        .args(["evaluate", "--pipeline", "psd_svm", "--out"])
        .arg(dir.path().join("r.csv"))
        .arg("--data")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn fixtures_check_reports_known_defects() {
    let out = eegdec().args(["fixtures", "--check"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    // the two known fixture-data defects fail honestly; everything else passes
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let fails: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(fails.len(), 2, "failing lines: {fails:?}");
    assert!(fails[0].contains("avg[table2.eegnet]"));
    assert!(fails[1].contains("claim.homoscedasticity[table1]"));
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() > 30);
}
