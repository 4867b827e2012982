//! Gaussian Naive Bayes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Matrix;

pub const VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub priors: Vec<f64>,
    /// `means[class][feature]`
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

pub fn nb_fit(x: &Matrix, y: &[usize], n_classes: usize) -> Result<NbModel> {
    let n = x.nrows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let d = x.ncols();
    let mut counts = vec![0usize; n_classes];
    let mut means = vec![vec![0.0; d]; n_classes];
    for (row, &c) in x.rows().into_iter().zip(y) {
        counts[c] += 1;
        for (m, v) in means[c].iter_mut().zip(row) {
            *m += v;
        }
    }
    for (m, &cnt) in means.iter_mut().zip(&counts) {
        if cnt > 0 {
            m.iter_mut().for_each(|v| *v /= cnt as f64);
        }
    }
    let mut variances = vec![vec![0.0; d]; n_classes];
    for (row, &c) in x.rows().into_iter().zip(y) {
        for ((s, v), m) in variances[c].iter_mut().zip(row).zip(&means[c]) {
            *s += (v - m) * (v - m);
        }
    }
    for (var, &cnt) in variances.iter_mut().zip(&counts) {
        for v in var.iter_mut() {
            *v = if cnt > 0 { *v / cnt as f64 } else { 0.0 };
            *v = v.max(VAR_FLOOR);
        }
    }
    let priors = counts.iter().map(|&c| c as f64 / n as f64).collect();
    Ok(NbModel {
        priors,
        means,
        variances,
    })
}

impl NbModel {
    /// Joint log-likelihood `log P(c) + sum_j log N(x_j | mu, var)` per class;
    /// classes never seen in training score `-inf`.
    pub fn log_scores(&self, row: &[f64]) -> Vec<f64> {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.priors
            .iter()
            .enumerate()
            .map(|(c, &prior)| {
                if prior == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let ll: f64 = row
                    .iter()
                    .zip(&self.means[c])
                    .zip(&self.variances[c])
                    .map(|((x, m), v)| -0.5 * (ln_2pi + v.ln() + (x - m) * (x - m) / v))
                    .sum();
                prior.ln() + ll
            })
            .collect()
    }
}

pub fn nb_predict(model: &NbModel, x: &Matrix) -> Result<Vec<usize>> {
    let d = model.means.first().map_or(0, Vec::len);
    if x.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.ncols(),
        });
    }
    Ok(x.rows()
        .into_iter()
        .map(|row| crate::boostforest::argmax(&model.log_scores(&row.to_vec())))
        .collect())
}
