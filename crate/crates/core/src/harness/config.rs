//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::selectors::{LassoConfig, SelectorKind};
use crate::baselines::{CartConfig, LrConfig};
use crate::boostforest::BoostParams;
use crate::dataspace::{self, Dataset, SynthSpec};
use crate::error::{Error, Result};
use crate::fuzzifier::FuzzyMode;
use crate::neuralgas::NgnParams;
use crate::seeding;
use crate::swarmopt::TuneConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Nb,
    Lr,
    Dt,
    Xgb,
    FuzzyXgb,
    PsoFuzzyXgb,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        Self::Nb,
        Self::Lr,
        Self::Dt,
        Self::Xgb,
        Self::FuzzyXgb,
        Self::PsoFuzzyXgb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Nb => "nb",
            Self::Lr => "lr",
            Self::Dt => "dt",
            Self::Xgb => "xgb",
            Self::FuzzyXgb => "fuzzy_xgb",
            Self::PsoFuzzyXgb => "pso_fuzzy_xgb",
        }
    }

    /// Row heading used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            Self::Nb => "NB",
            Self::Lr => "LR",
            Self::Dt => "DT",
            Self::Xgb => "XGB",
            Self::FuzzyXgb => "Fuzzy XGB",
            Self::PsoFuzzyXgb => "PSO Fuzzy XGB",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn is_fuzzy(self) -> bool {
        matches!(self, Self::FuzzyXgb | Self::PsoFuzzyXgb)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    /// Numeric CSV with a `label` column.
    Csv {
        path: PathBuf,
    },
    Synth(SynthSpec),
}

impl Default for DataSource {
    fn default() -> Self {
        Self::Synth(SynthSpec::default())
    }
}

impl DataSource {
    /// Relative CSV paths are resolved against `base`.
    pub fn load(&self, base: Option<&Path>) -> Result<Dataset> {
        match self {
            Self::Csv { path } => match base {
                Some(b) if path.is_relative() => dataspace::load_csv(b.join(path)),
                _ => dataspace::load_csv(path),
            },
            Self::Synth(spec) => dataspace::synth_from(spec),
        }
    }
}

/// Which rows the standardizer is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardizeScope {
    #[default]
    TrainOnly,
    /// Fit on all rows before splitting. Lets test feature statistics leak
    /// into training; kept only for comparison.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train_ratio: f64,
    pub stratified: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_ratio: 0.7,
            stratified: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    pub fractions: Vec<f64>,
    pub classifiers: Vec<ClassifierKind>,
    pub selectors: Vec<SelectorKind>,
    pub standardize_scope: StandardizeScope,
    pub fuzzy_mode: FuzzyMode,
    pub data: DataSource,
    pub split: SplitConfig,
    pub booster: BoostParams,
    pub tune: TuneConfig,
    pub ngn: NgnParams,
    pub lasso: LassoConfig,
    pub lr: LrConfig,
    pub cart: CartConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seeds: vec![1, 2, 3, 4, 5],
            fractions: vec![0.25, 0.50, 0.75],
            classifiers: ClassifierKind::ALL.to_vec(),
            selectors: SelectorKind::ALL.to_vec(),
            standardize_scope: StandardizeScope::TrainOnly,
            fuzzy_mode: FuzzyMode::Replace,
            data: DataSource::default(),
            split: SplitConfig::default(),
            booster: BoostParams::default(),
            tune: TuneConfig::default(),
            ngn: NgnParams::default(),
            lasso: LassoConfig::default(),
            lr: LrConfig::default(),
            cart: CartConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Stable identifier of the configuration, used to name output folders.
    pub fn hash(&self) -> u64 {
        seeding::fnv1a(self.to_toml().as_bytes())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.seeds.is_empty() {
            return bad("seeds must not be empty");
        }
        if self.fractions.is_empty() {
            return bad("fractions must not be empty");
        }
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return Err(Error::Config(format!("fraction {f} outside (0, 1]")));
        }
        if self.classifiers.is_empty() || self.selectors.is_empty() {
            return bad("classifier and selector lists must not be empty");
        }
        if !(self.split.train_ratio > 0.0 && self.split.train_ratio < 1.0) {
            return bad("split.train_ratio must lie in (0, 1)");
        }
        self.booster.validate()?;
        self.ngn.validate()?;
        self.tune.swarm.validate()?;
        if self.lasso.lambda_l1 < 0.0 || !self.lasso.lambda_l1.is_finite() {
            return bad("lasso.lambda_l1 must be a finite non-negative number");
        }
        Ok(())
    }
}
