//! Grid structure, reproducibility, report regeneration and leakage.

use std::fs;
use std::path::Path;

use eegboost::baselines::SelectorKind;
use eegboost::dataspace::{self, SplitSpec, SynthSpec};
use eegboost::harness::config::{ClassifierKind, DataSource, ExperimentConfig};
use eegboost::harness::experiment::{evaluate_seed, prepare, run_experiment};
use eegboost::harness::report;

fn tiny() -> ExperimentConfig {
    let mut c = ExperimentConfig {
        data: DataSource::Synth(SynthSpec {
            n: 80,
            d: 6,
            k: 4,
            separation: 3.0,
            seed: 2,
        }),
        ..Default::default()
    };
    c.booster.n_rounds = 5;
    c.tune.tune_rounds = 3;
    c.tune.swarm.swarm_size = 3;
    c.tune.swarm.max_iters = 4;
    c.ngn.t_max = Some(800);
    c
}

#[test]
fn full_grid_shape() {
    let config = tiny();
    let data = config.data.load(None).unwrap();
    let out = run_experiment(&config, &data).unwrap();
    assert_eq!(out.table.cells.len(), 30);
    assert!(out
        .table
        .cells
        .iter()
        .all(|c| c.runs == 15 && c.failures == 0));
    assert_eq!(out.table.per_fraction.len(), 90);
    assert_eq!(out.confusions.len(), 6);
    let test_rows = data.n_samples() - 56;
    for cm in out.confusions.values() {
        assert_eq!(cm.total() as usize, test_rows * 15);
    }
    assert_eq!(out.pso_trace.as_ref().unwrap().len(), 4);
}

#[test]
fn artifacts_and_report_are_reproducible() {
    let mut config = tiny();
    config.seeds = vec![3];
    let data = config.data.load(None).unwrap();
    let root = tempfile::tempdir().unwrap();
    let out = run_experiment(&config, &data).unwrap();
    let dir = report::write_experiment(root.path(), &config, &out).unwrap();
    assert!(dir
        .file_name()
        .unwrap()
        .to_str()
        .unwrap()
        .starts_with("run-"));

    let csv = fs::read_to_string(dir.join("results.csv")).unwrap();
    assert!(csv.starts_with("classifier,selector,mean,std,runs\n"));
    assert_eq!(csv.lines().count(), 31);

    let svg = fs::read_to_string(dir.join("pso_trace.svg")).unwrap();
    let start = svg.find("points=\"").unwrap() + 8;
    let end = start + svg[start..].find('"').unwrap();
    assert_eq!(
        svg[start..end].split(' ').count(),
        config.tune.swarm.max_iters
    );

    let names = [
        "results.csv",
        "results.txt",
        "per_fraction.csv",
        "failures.csv",
        "pso_trace.svg",
        "ngn_scores.svg",
        "membership.svg",
    ];
    let before: Vec<Vec<u8>> = names
        .iter()
        .map(|f| fs::read(dir.join(f)).unwrap())
        .collect();
    report::report(&dir).unwrap();
    let after: Vec<Vec<u8>> = names
        .iter()
        .map(|f| fs::read(dir.join(f)).unwrap())
        .collect();
    assert_eq!(before, after);

    let again = run_experiment(&config, &data).unwrap();
    assert_eq!(again.table.to_csv(), out.table.to_csv());
}

#[test]
fn minimal_grid_still_emits_artifacts() {
    let config = ExperimentConfig {
        classifiers: vec![ClassifierKind::Nb],
        selectors: vec![SelectorKind::Raw],
        ..tiny()
    };
    let data = config.data.load(None).unwrap();
    let root = tempfile::tempdir().unwrap();
    let out = run_experiment(&config, &data).unwrap();
    let dir = report::write_experiment(root.path(), &config, &out).unwrap();
    assert_eq!(out.table.cells.len(), 1);
    for f in [
        "results.csv",
        "confusion_nb.csv",
        "ngn_scores.csv",
        "ngn_scores.svg",
        "membership.csv",
        "membership.svg",
    ] {
        assert!(Path::new(&dir.join(f)).exists(), "{f}");
    }
}

#[test]
fn csv_source_relative_to_config() {
    let root = tempfile::tempdir().unwrap();
    let data = dataspace::synth(60, 4, 3, 3.0, 1).unwrap();
    dataspace::write_csv(&data, root.path().join("d.csv")).unwrap();
    let config_path = root.path().join("c.toml");
    fs::write(
        &config_path,
        "seeds = [1]\nclassifiers = [\"lr\"]\n[data]\nkind = \"csv\"\npath = \"d.csv\"\n",
    )
    .unwrap();
    let config = ExperimentConfig::load(&config_path).unwrap();
    let loaded = config.data.load(config_path.parent()).unwrap();
    assert_eq!(loaded, data);
}

#[test]
fn poisoned_test_labels_do_not_reach_training() {
    let mut config = tiny();
    config.split.stratified = false;
    let data = config.data.load(None).unwrap();
    let seed = 4;
    let spec = SplitSpec {
        train_ratio: 0.7,
        seed,
        stratified: false,
    };
    let idx = dataspace::split_indices(data.labels(), 4, &spec).unwrap();
    let mut labels = data.labels().to_vec();
    for &i in &idx.test {
        labels[i] = 3 - labels[i];
    }
    let poisoned = data.with_labels(labels).unwrap();
    let clean_prep = prepare(&data, &config, seed).unwrap();
    let dirty_prep = prepare(&poisoned, &config, seed).unwrap();
    assert_eq!(clean_prep.train, dirty_prep.train);
    let clean = evaluate_seed(&clean_prep, &config, seed);
    let dirty = evaluate_seed(&dirty_prep, &config, seed);
    assert_eq!(clean.selectors, dirty.selectors);
    for (a, b) in clean.runs.iter().zip(&dirty.runs) {
        assert!(a.pipeline.is_some());
        assert_eq!(a.pipeline, b.pipeline);
    }
}

#[test]
fn sample_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let default = ExperimentConfig::load(root.join("default.toml")).unwrap();
    assert_eq!(default, ExperimentConfig::default());
    for f in ["quick.toml", "smoke.toml"] {
        ExperimentConfig::load(root.join(f)).unwrap();
    }
}
