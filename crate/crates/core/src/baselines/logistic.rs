//! Multinomial logistic regression trained by full-batch gradient descent.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::boostforest::{argmax, softmax_into};
use crate::error::{Error, Result};
use crate::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LrConfig {
    pub step: f64,
    pub iterations: usize,
    pub l2: f64,
}

impl Default for LrConfig {
    fn default() -> Self {
        Self {
            step: 0.1,
            iterations: 1000,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    /// `n_classes x n_features`
    pub weights: Array2<f64>,
    pub intercepts: Array1<f64>,
    pub config: LrConfig,
}

impl LrModel {
    pub fn zeros(n_classes: usize, n_features: usize, config: LrConfig) -> Self {
        Self {
            weights: Array2::zeros((n_classes, n_features)),
            intercepts: Array1::zeros(n_classes),
            config,
        }
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        if x.ncols() != self.weights.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.ncols(),
                got: x.ncols(),
            });
        }
        let mut scores = x.dot(&self.weights.t()) + &self.intercepts;
        let mut buf = vec![0.0; self.weights.nrows()];
        for mut row in scores.rows_mut() {
            softmax_into(&row.to_vec(), &mut buf);
            row.iter_mut().zip(&buf).for_each(|(r, b)| *r = *b);
        }
        Ok(scores)
    }
}

/// Mean cross-entropy plus `l2/2 * ||W||^2` and its gradient with respect to
/// weights and intercepts.
pub fn loss_and_gradient(
    model: &LrModel,
    x: &Matrix,
    y: &[usize],
    l2: f64,
) -> Result<(f64, Array2<f64>, Array1<f64>)> {
    let n = x.nrows() as f64;
    let mut resid = model.predict_proba(x)?;
    let mut loss = 0.0;
    for (i, &c) in y.iter().enumerate() {
        loss -= resid[[i, c]].max(f64::MIN_POSITIVE).ln();
        resid[[i, c]] -= 1.0;
    }
    loss = loss / n + 0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>();
    let grad_w = resid.t().dot(x) / n + &(&model.weights * l2);
    let grad_b = resid.sum_axis(Axis(0)) / n;
    Ok((loss, grad_w, grad_b))
}

/// Starts from zero weights, so the result is deterministic.
pub fn lr_fit(x: &Matrix, y: &[usize], n_classes: usize, config: &LrConfig) -> Result<LrModel> {
    if x.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if n_classes < 2 || y.iter().all(|&c| c == y[0]) {
        return Err(Error::SingleClass);
    }
    let mut model = LrModel::zeros(n_classes, x.ncols(), *config);
    for iter in 0..config.iterations {
        let (loss, gw, gb) = loss_and_gradient(&model, x, y, config.l2)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss(iter));
        }
        model.weights.scaled_add(-config.step, &gw);
        model.intercepts.scaled_add(-config.step, &gb);
    }
    if model.weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFiniteLoss(config.iterations));
    }
    Ok(model)
}

pub fn lr_predict(model: &LrModel, x: &Matrix) -> Result<Vec<usize>> {
    let proba = model.predict_proba(x)?;
    Ok(proba
        .rows()
        .into_iter()
        .map(|r| argmax(&r.to_vec()))
        .collect())
}
