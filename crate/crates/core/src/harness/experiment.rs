//! The classifier x selector experiment grid.
//!
//! Per seed the data is split and standardized once, every selector produces
//! a full ranking (or full PCA basis) on the training rows, and each
//! (fraction, selector, classifier) run truncates that result to its `k`.
//! Fitting functions only ever receive the training [`Dataset`]; test rows
//! enter solely through [`FittedPipeline::predict`] and the accuracy count.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{ClassifierKind, ExperimentConfig, StandardizeScope};
use super::metrics::{accuracy, confusion, ConfusionMatrix};
use super::table::{ResultsTable, RunRecord};
use crate::baselines::selectors::{self, SelectorKind, SelectorResult};
use crate::baselines::{self, CartModel, LrModel, NbModel};
use crate::boostforest::{self, BoostEnsemble};
use crate::dataspace::{self, round_half_up, Dataset, SplitSpec, StandardizerModel};
use crate::error::Result;
use crate::fuzzifier::{self, FuzzyThresholds};
use crate::neuralgas::{self, NgnParams};
use crate::seeding;
use crate::swarmopt::{self, SwarmParams, TuneConfig, TuneOutcome};
use crate::Matrix;

/// `max(1, round_half_up(fraction * d))`, capped at `d`.
pub fn feature_count(fraction: f64, d: usize) -> usize {
    round_half_up(fraction * d as f64).clamp(1, d.max(1))
}

/// Seed of one run, independent of the rest of the grid.
pub fn run_seed(
    seed: u64,
    fraction_index: usize,
    selector: SelectorKind,
    classifier: ClassifierKind,
) -> u64 {
    seeding::derive(
        seed,
        &[
            fraction_index as u64,
            seeding::fnv1a(selector.name().as_bytes()),
            seeding::fnv1a(classifier.name().as_bytes()),
        ],
    )
}

fn ngn_params(config: &ExperimentConfig, seed: u64) -> NgnParams {
    NgnParams {
        seed: seeding::derive(seed, &[seeding::fnv1a(b"ngn")]),
        ..config.ngn
    }
}

/// Standardized train and test partitions for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub train: Dataset,
    pub test: Dataset,
    pub standardizer: StandardizerModel,
}

pub fn prepare(data: &Dataset, config: &ExperimentConfig, seed: u64) -> Result<Prepared> {
    let spec = SplitSpec {
        train_ratio: config.split.train_ratio,
        seed,
        stratified: config.split.stratified,
    };
    let (train, test) = dataspace::split(data, &spec)?;
    let standardizer = match config.standardize_scope {
        StandardizeScope::TrainOnly => dataspace::fit_standardizer(train.features())?,
        StandardizeScope::Full => dataspace::fit_standardizer(data.features())?,
    };
    Ok(Prepared {
        train: standardizer.apply_dataset(&train)?,
        test: standardizer.apply_dataset(&test)?,
        standardizer,
    })
}

/// Full-width selector result fitted on the training partition.
pub fn fit_selector(
    train: &Dataset,
    kind: SelectorKind,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<SelectorResult> {
    let (x, y, k) = (train.features(), train.labels(), train.n_classes());
    let d = train.n_features();
    match kind {
        SelectorKind::Chi2 => selectors::chi2_select(x, y, k, d),
        SelectorKind::Pca => selectors::pca_select(x, d),
        SelectorKind::Lasso => selectors::lasso_select(x, y, k, d, &config.lasso),
        SelectorKind::Ngn => selectors::ngn_select(x, d, &ngn_params(config, seed)),
        SelectorKind::Raw => Ok(SelectorResult::raw(d)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Nb(NbModel),
    Lr(LrModel),
    Dt(CartModel),
    Boost(BoostEnsemble),
}

/// Everything learned from the training rows for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub classifier: ClassifierKind,
    pub selector: SelectorResult,
    pub fuzzy: Option<FuzzyThresholds>,
    pub fuzzy_mode: fuzzifier::FuzzyMode,
    pub tune: Option<TuneOutcome>,
    pub model: Model,
}

impl FittedPipeline {
    /// Selector, then (optionally) fuzzifier.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        let selected = self.selector.apply(x)?;
        match &self.fuzzy {
            Some(t) => t.transform_with(&selected, self.fuzzy_mode),
            None => Ok(selected),
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        let z = self.transform(x)?;
        match &self.model {
            Model::Nb(m) => baselines::nb_predict(m, &z),
            Model::Lr(m) => baselines::lr_predict(m, &z),
            Model::Dt(m) => baselines::cart_predict(m, &z),
            Model::Boost(m) => m.predict(&z),
        }
    }
}

/// Fits selector output, fuzzifier, tuner and classifier on `train` only.
/// `selector` must already be truncated to the run's `k`.
pub fn fit_pipeline(
    train: &Dataset,
    selector: &SelectorResult,
    classifier: ClassifierKind,
    config: &ExperimentConfig,
    run_seed: u64,
) -> Result<FittedPipeline> {
    let mut x = selector.apply(train.features())?;
    let fuzzy = if classifier.is_fuzzy() {
        let t = fuzzifier::fit(&x)?;
        x = t.transform_with(&x, config.fuzzy_mode)?;
        Some(t)
    } else {
        None
    };
    let (y, k) = (train.labels(), train.n_classes());
    let mut tune = None;
    let model = match classifier {
        ClassifierKind::Nb => Model::Nb(baselines::nb_fit(&x, y, k)?),
        ClassifierKind::Lr => Model::Lr(baselines::lr_fit(&x, y, k, &config.lr)?),
        ClassifierKind::Dt => Model::Dt(baselines::cart_fit(&x, y, k, &config.cart)?),
        ClassifierKind::Xgb | ClassifierKind::FuzzyXgb => {
            Model::Boost(boostforest::fit(&x, y, k, &config.booster)?)
        }
        ClassifierKind::PsoFuzzyXgb => {
            let names = (0..x.ncols()).map(|j| format!("z{j}")).collect();
            let transformed = train.with_features(x.clone(), names)?;
            let tune_config = TuneConfig {
                swarm: SwarmParams {
                    seed: run_seed,
                    ..config.tune.swarm
                },
                ..config.tune
            };
            let outcome = swarmopt::tune_booster(&transformed, &config.booster, &tune_config)?;
            let params = outcome.apply(&config.booster);
            tune = Some(outcome);
            Model::Boost(boostforest::fit(&x, y, k, &params)?)
        }
    };
    Ok(FittedPipeline {
        classifier,
        selector: selector.clone(),
        fuzzy,
        fuzzy_mode: config.fuzzy_mode,
        tune,
        model,
    })
}

/// One evaluated run. `pipeline` and `confusion` are absent on failure.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub record: RunRecord,
    pub pipeline: Option<FittedPipeline>,
    pub confusion: Option<ConfusionMatrix>,
}

/// All runs of one seed, plus the fitted preprocessing for auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutput {
    pub standardizer: StandardizerModel,
    /// Full-width selector results, or the error message if fitting failed.
    pub selectors: BTreeMap<SelectorKind, std::result::Result<SelectorResult, String>>,
    pub runs: Vec<RunOutput>,
}

/// Runs every (fraction, selector, classifier) combination for one seed.
/// `test` labels are read only to score predictions.
pub fn evaluate_seed(prepared: &Prepared, config: &ExperimentConfig, seed: u64) -> SeedOutput {
    let Prepared { train, test, .. } = prepared;
    let d = train.n_features();
    let mut fitted = BTreeMap::new();
    for &kind in &config.selectors {
        let result = fit_selector(train, kind, config, seed).map_err(|e| e.to_string());
        fitted.insert(kind, result);
    }
    let mut runs = Vec::new();
    for (fi, &fraction) in config.fractions.iter().enumerate() {
        let k = feature_count(fraction, d);
        for &sel_kind in &config.selectors {
            let truncated = match &fitted[&sel_kind] {
                Ok(full) => full.truncated(k).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            for &clf in &config.classifiers {
                let rs = run_seed(seed, fi, sel_kind, clf);
                let outcome = truncated.clone().and_then(|sel| {
                    let pipeline =
                        fit_pipeline(train, &sel, clf, config, rs).map_err(|e| e.to_string())?;
                    let pred = pipeline
                        .predict(test.features())
                        .map_err(|e| e.to_string())?;
                    let acc = accuracy(&pred, test.labels()).map_err(|e| e.to_string())?;
                    let cm = confusion(&pred, test.labels(), test.n_classes())
                        .map_err(|e| e.to_string())?;
                    Ok((pipeline, acc, cm))
                });
                let (accuracy, error, pipeline, cm) = match outcome {
                    Ok((p, a, c)) => (Some(a), None, Some(p), Some(c)),
                    Err(e) => {
                        log::warn!(
                            "run failed: seed {seed} {} {} k={k}: {e}",
                            sel_kind.name(),
                            clf.name()
                        );
                        (None, Some(e), None, None)
                    }
                };
                runs.push(RunOutput {
                    record: RunRecord {
                        classifier: clf,
                        selector: sel_kind,
                        seed,
                        fraction_index: fi,
                        fraction,
                        k,
                        run_seed: rs,
                        accuracy,
                        error,
                    },
                    pipeline,
                    confusion: cm,
                });
            }
        }
    }
    SeedOutput {
        standardizer: prepared.standardizer.clone(),
        selectors: fitted,
        runs,
    }
}

/// Membership plot source: one feature's thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipSource {
    pub feature: String,
    pub t_low: f64,
    pub t_high: f64,
}

/// Results plus the data behind the report figures.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub table: ResultsTable,
    pub runs: Vec<RunRecord>,
    /// Test confusion summed over seeds and fractions, per classifier.
    pub confusions: BTreeMap<ClassifierKind, ConfusionMatrix>,
    /// Selector whose runs the confusion matrices are summed over.
    pub confusion_selector: SelectorKind,
    pub pso_trace: Option<Vec<f64>>,
    /// Neural gas feature scores on the first seed's training rows.
    pub ngn_scores: Vec<f64>,
    pub feature_names: Vec<String>,
    pub membership: MembershipSource,
}

pub fn run_experiment(config: &ExperimentConfig, data: &Dataset) -> Result<ExperimentOutput> {
    config.validate()?;
    let confusion_selector = if config.selectors.contains(&SelectorKind::Ngn) {
        SelectorKind::Ngn
    } else {
        config.selectors[0]
    };
    let mut runs = Vec::new();
    let mut confusions: BTreeMap<ClassifierKind, ConfusionMatrix> = BTreeMap::new();
    let mut pso_trace: Option<(bool, Vec<f64>)> = None;
    let mut first_seed_aux = None;

    for (si, &seed) in config.seeds.iter().enumerate() {
        log::info!("seed {seed} ({}/{})", si + 1, config.seeds.len());
        let prepared = prepare(data, config, seed)?;
        let out = evaluate_seed(&prepared, config, seed);
        if si == 0 {
            let scores = match out.selectors.get(&SelectorKind::Ngn) {
                Some(Ok(r)) => r.scores.clone(),
                _ => {
                    let codebook =
                        neuralgas::train(prepared.train.features(), &ngn_params(config, seed))?;
                    neuralgas::rank_features(&codebook)
                }
            };
            let top = neuralgas::ranking(&scores)[0];
            let column = prepared
                .train
                .features()
                .column(top)
                .to_owned()
                .insert_axis(ndarray::Axis(1));
            let thresholds = fuzzifier::fit(&column)?;
            first_seed_aux = Some((
                scores,
                MembershipSource {
                    feature: prepared.train.feature_names()[top].clone(),
                    t_low: thresholds.t_low[0],
                    t_high: thresholds.t_high[0],
                },
            ));
        }
        for run in out.runs {
            if run.record.selector == confusion_selector {
                if let Some(cm) = &run.confusion {
                    confusions
                        .entry(run.record.classifier)
                        .or_insert_with(|| ConfusionMatrix::zeros(cm.n_classes()))
                        .add(cm)?;
                }
            }
            if let Some(t) = run.pipeline.as_ref().and_then(|p| p.tune.as_ref()) {
                // Prefer a trace from the confusion selector's runs.
                let preferred = run.record.selector == confusion_selector;
                if pso_trace.as_ref().is_none_or(|(p, _)| !p && preferred) {
                    pso_trace = Some((preferred, t.trace.clone()));
                }
            }
            runs.push(run.record);
        }
    }
    let (ngn_scores, membership) = first_seed_aux.expect("at least one seed");
    Ok(ExperimentOutput {
        table: ResultsTable::from_runs(&runs),
        runs,
        confusions,
        confusion_selector,
        pso_trace: pso_trace.map(|(_, t)| t),
        ngn_scores,
        feature_names: data.feature_names().to_vec(),
        membership,
    })
}
