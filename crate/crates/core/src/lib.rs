//! Emotion recognition on tabular EEG band-power data.
//!
//! The crate is organised around the stages of the experiment pipeline:
//!
//! * [`dataspace`]: CSV ingestion, standardization, train/test splits and a
//!   seeded synthetic surrogate dataset.
//! * [`neuralgas`]: a rank-based neural gas codebook used as a feature selector.
//! * [`fuzzifier`]: tertile thresholds mapping features to low/medium/high states.
//! * [`boostforest`]: multiclass second-order gradient boosted regression trees.
//! * [`swarmopt`]: particle swarm optimization and booster hyperparameter tuning.
//! * [`baselines`]: Naive Bayes, logistic regression, CART and the Chi-square,
//!   PCA and Lasso selectors used for comparison.
//! * [`harness`]: the classifier x selector experiment grid, metrics, reports
//!   and configuration.

pub mod baselines;
pub mod boostforest;
pub mod dataspace;
pub mod error;
pub mod fuzzifier;
pub mod harness;
pub mod neuralgas;
pub mod seeding;
pub mod swarmopt;

pub use error::{Error, Result};

/// Dense row-major feature matrix (rows = samples).
pub type Matrix = ndarray::Array2<f64>;
