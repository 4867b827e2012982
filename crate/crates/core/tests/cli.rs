//! Command-line interface, driven through the built binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn eegboost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eegboost"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn synth_select_tune_run_report() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data.csv");
    ok(&eegboost(&[
        "synth",
        "--n",
        "120",
        "--d",
        "8",
        "--k",
        "4",
        "--separation",
        "3",
        "--seed",
        "5",
        "--out",
        p(&data),
    ]));
    assert_eq!(fs::read_to_string(&data).unwrap().lines().count(), 121);

    for method in ["chi2", "pca", "lasso", "ngn"] {
        let out = tmp.path().join(format!("{method}.csv"));
        ok(&eegboost(&[
            "select",
            "--method",
            method,
            "--k",
            "3",
            "--data",
            p(&data),
            "--out",
            p(&out),
        ]));
        assert!(fs::read_to_string(&out).unwrap().lines().count() >= 4);
    }

    let tune_dir = tmp.path().join("tune");
    ok(&eegboost(&[
        "tune",
        "--data",
        p(&data),
        "--out",
        p(&tune_dir),
        "--swarm-size",
        "3",
        "--max-iters",
        "3",
    ]));
    assert_eq!(
        fs::read_to_string(tune_dir.join("pso_trace.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );
    assert!(tune_dir.join("pso_trace.svg").exists());

    let config = tmp.path().join("c.toml");
    fs::write(
        &config,
        "seeds = [1]\nclassifiers = [\"nb\", \"dt\"]\nselectors = [\"chi2\", \"raw\"]\n[data]\nkind = \"csv\"\npath = \"data.csv\"\n",
    )
    .unwrap();
    let results = tmp.path().join("results");
    let run = eegboost(&["run", "--config", p(&config), "--out", p(&results)]);
    ok(&run);
    assert!(String::from_utf8_lossy(&run.stdout).contains("Chi-t"));
    let dir = fs::read_dir(&results)
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let before = fs::read(dir.join("results.csv")).unwrap();
    ok(&eegboost(&["report", "--results", p(&dir)]));
    assert_eq!(fs::read(dir.join("results.csv")).unwrap(), before);
}

#[test]
fn errors_exit_nonzero_with_diagnostic() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.toml");
    let out = eegboost(&["run", "--config", p(&missing), "--out", p(tmp.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "seeds = []\n").unwrap();
    let out = eegboost(&["run", "--config", p(&bad), "--out", p(tmp.path())]);
    assert!(!out.status.success());

    let csv = tmp.path().join("nolabel.csv");
    fs::write(&csv, "a,b\n1,2\n").unwrap();
    let out = eegboost(&[
        "select",
        "--method",
        "chi2",
        "--k",
        "1",
        "--data",
        p(&csv),
        "--out",
        p(&tmp.path().join("o.csv")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("label column not found"));
}
