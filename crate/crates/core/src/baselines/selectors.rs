//! Benchmark feature selectors: Chi-square, PCA and one-vs-rest Lasso, plus
//! the neural gas selector wrapped in the same result type.
//!
//! All selectors are fitted on training data only. Ranking-based selectors
//! produce full rankings, so a result fitted for `k = d` can be truncated to
//! any smaller `k` without refitting.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuralgas::{self, NgnParams};
use crate::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    Chi2,
    Pca,
    Lasso,
    Ngn,
    Raw,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 5] = [Self::Chi2, Self::Pca, Self::Lasso, Self::Ngn, Self::Raw];

    pub fn name(self) -> &'static str {
        match self {
            Self::Chi2 => "chi2",
            Self::Pca => "pca",
            Self::Lasso => "lasso",
            Self::Ngn => "ngn",
            Self::Raw => "raw",
        }
    }

    /// Column heading used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            Self::Chi2 => "Chi-t",
            Self::Pca => "PCA",
            Self::Lasso => "Lasso",
            Self::Ngn => "NGN",
            Self::Raw => "Raw",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Selection {
    /// Original columns, in ranking order.
    Indices(Vec<usize>),
    /// Centered data times `components` (`d x k`, orthonormal columns).
    Projection {
        mean: Vec<f64>,
        components: Array2<f64>,
        eigenvalues: Vec<f64>,
    },
    /// Every column, unchanged.
    All(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorResult {
    pub kind: SelectorKind,
    pub selection: Selection,
    /// Per-feature relevance for ranking selectors, empty otherwise.
    pub scores: Vec<f64>,
}

impl SelectorResult {
    pub fn raw(n_features: usize) -> Self {
        Self {
            kind: SelectorKind::Raw,
            selection: Selection::All(n_features),
            scores: Vec::new(),
        }
    }

    /// Number of output columns.
    pub fn width(&self) -> usize {
        match &self.selection {
            Selection::Indices(idx) => idx.len(),
            Selection::Projection { components, .. } => components.ncols(),
            Selection::All(d) => *d,
        }
    }

    /// The first `k` selected columns or components. Raw selections are
    /// returned unchanged.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        let max = self.width();
        if matches!(self.selection, Selection::All(_)) {
            return Ok(self.clone());
        }
        if k == 0 || k > max {
            return Err(Error::KOutOfRange { k, max });
        }
        let selection = match &self.selection {
            Selection::Indices(idx) => Selection::Indices(idx[..k].to_vec()),
            Selection::Projection {
                mean,
                components,
                eigenvalues,
            } => Selection::Projection {
                mean: mean.clone(),
                components: components.slice(ndarray::s![.., ..k]).to_owned(),
                eigenvalues: eigenvalues[..k].to_vec(),
            },
            Selection::All(_) => unreachable!(),
        };
        Ok(Self {
            kind: self.kind,
            selection,
            scores: self.scores.clone(),
        })
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        match &self.selection {
            Selection::Indices(idx) => {
                if let Some(&bad) = idx.iter().find(|&&j| j >= x.ncols()) {
                    return Err(Error::DimensionMismatch {
                        expected: bad + 1,
                        got: x.ncols(),
                    });
                }
                Ok(x.select(Axis(1), idx))
            }
            Selection::Projection { .. } => pca_apply(self, x),
            Selection::All(d) => {
                if x.ncols() != *d {
                    return Err(Error::DimensionMismatch {
                        expected: *d,
                        got: x.ncols(),
                    });
                }
                Ok(x.clone())
            }
        }
    }

    /// Names of the output columns.
    pub fn output_names(&self, feature_names: &[String]) -> Vec<String> {
        match &self.selection {
            Selection::Indices(idx) => idx.iter().map(|&j| feature_names[j].clone()).collect(),
            Selection::Projection { components, .. } => {
                (0..components.ncols()).map(|c| format!("pc{c}")).collect()
            }
            Selection::All(_) => feature_names.to_vec(),
        }
    }

    /// Audit CSV: `rank,index,name,score` for index selections, the
    /// projection matrix (one row per input feature) for PCA.
    pub fn write_csv<W: Write>(&self, feature_names: &[String], w: &mut W) -> std::io::Result<()> {
        let name = |j: usize| {
            feature_names
                .get(j)
                .cloned()
                .unwrap_or_else(|| j.to_string())
        };
        match &self.selection {
            Selection::Indices(idx) => {
                writeln!(w, "rank,index,name,score")?;
                for (rank, &j) in idx.iter().enumerate() {
                    let score = self.scores.get(j).copied().unwrap_or(f64::NAN);
                    writeln!(w, "{rank},{j},{},{score:.6}", name(j))?;
                }
            }
            Selection::Projection {
                components,
                eigenvalues,
                ..
            } => {
                let pcs: Vec<String> = (0..components.ncols()).map(|c| format!("pc{c}")).collect();
                writeln!(w, "feature,{}", pcs.join(","))?;
                for (j, row) in components.rows().into_iter().enumerate() {
                    let cells: Vec<String> = row.iter().map(|v| format!("{v:.8}")).collect();
                    writeln!(w, "{},{}", name(j), cells.join(","))?;
                }
                let ev: Vec<String> = eigenvalues.iter().map(|v| format!("{v:.8}")).collect();
                writeln!(w, "eigenvalue,{}", ev.join(","))?;
            }
            Selection::All(d) => {
                writeln!(w, "rank,index,name,score")?;
                for j in 0..*d {
                    writeln!(w, "{j},{j},{},", name(j))?;
                }
            }
        }
        Ok(())
    }
}

/// Indices by descending score, ties to the lower index.
pub fn rank_by_score(scores: &[f64]) -> Vec<usize> {
    neuralgas::ranking(scores)
}

fn check_k(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::KOutOfRange { k, max: d });
    }
    Ok(())
}

fn check_labels(x: &Matrix, y: &[usize]) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    Ok(())
}

/// Pearson statistic `sum (O - E)^2 / E` of a contingency table, with
/// expected counts from the row and column margins. Cells with zero
/// expectation are skipped.
pub fn chi2_contingency(table: &[Vec<f64>]) -> f64 {
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let n_cols = table.first().map_or(0, Vec::len);
    let cols: Vec<f64> = (0..n_cols)
        .map(|j| table.iter().map(|r| r[j]).sum())
        .collect();
    let total: f64 = rows.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut stat = 0.0;
    for (r, row) in table.iter().enumerate() {
        for (c, &obs) in row.iter().enumerate() {
            let expected = rows[r] * cols[c] / total;
            if expected > 0.0 {
                stat += (obs - expected).powi(2) / expected;
            }
        }
    }
    stat
}

/// Per-feature chi-square scores.
///
/// Each column is min-max scaled to `[0, 1]`; a sample then contributes its
/// scaled value to the feature's "mass" cell and the remainder to the
/// complement cell of its class row. The score is the contingency statistic
/// of that `n_classes x 2` table. For a 0/1 feature this is the ordinary
/// class-by-value chi-square.
pub fn chi2_scores(x: &Matrix, y: &[usize], n_classes: usize) -> Result<Vec<f64>> {
    check_labels(x, y)?;
    Ok(x.columns()
        .into_iter()
        .map(|col| {
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            let mut table = vec![vec![0.0; 2]; n_classes];
            for (&v, &c) in col.iter().zip(y) {
                let s = if span > 0.0 { (v - lo) / span } else { 0.0 };
                table[c][0] += s;
                table[c][1] += 1.0 - s;
            }
            chi2_contingency(&table)
        })
        .collect())
}

pub fn chi2_select(x: &Matrix, y: &[usize], n_classes: usize, k: usize) -> Result<SelectorResult> {
    check_k(k, x.ncols())?;
    let scores = chi2_scores(x, y, n_classes)?;
    let mut idx = rank_by_score(&scores);
    idx.truncate(k);
    Ok(SelectorResult {
        kind: SelectorKind::Chi2,
        selection: Selection::Indices(idx),
        scores,
    })
}

/// Column means and the covariance matrix (divisor `n - 1`, or 1 for a
/// single row).
pub fn covariance(x: &Matrix) -> (Array1<f64>, Array2<f64>) {
    let n = x.nrows();
    let mean = x.mean_axis(Axis(0)).expect("non-empty");
    let centered = x - &mean;
    let denom = n.saturating_sub(1).max(1) as f64;
    let cov = centered.t().dot(&centered) / denom;
    (mean, cov)
}

/// Top-`k` eigenvectors of the training covariance. Eigenvectors are sorted
/// by descending eigenvalue and signed so their first non-negligible entry
/// is positive.
pub fn pca_select(x_train: &Matrix, k: usize) -> Result<SelectorResult> {
    if x_train.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let d = x_train.ncols();
    check_k(k, d)?;
    let (mean, cov) = covariance(x_train);
    let sym = DMatrix::from_fn(d, d, |i, j| 0.5 * (cov[[i, j]] + cov[[j, i]]));
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let mut components = Array2::<f64>::zeros((d, k));
    let mut eigenvalues = Vec::with_capacity(k);
    for (c, &src) in order.iter().take(k).enumerate() {
        let v = eig.eigenvectors.column(src);
        let sign = v
            .iter()
            .find(|x| x.abs() > 1e-12)
            .map_or(1.0, |&x| x.signum());
        for j in 0..d {
            components[[j, c]] = sign * v[j];
        }
        eigenvalues.push(eig.eigenvalues[src]);
    }
    Ok(SelectorResult {
        kind: SelectorKind::Pca,
        selection: Selection::Projection {
            mean: mean.to_vec(),
            components,
            eigenvalues,
        },
        scores: Vec::new(),
    })
}

pub fn pca_apply(result: &SelectorResult, x: &Matrix) -> Result<Matrix> {
    let Selection::Projection {
        mean, components, ..
    } = &result.selection
    else {
        return Err(Error::InvalidParameter("not a PCA selection".into()));
    };
    if x.ncols() != mean.len() {
        return Err(Error::DimensionMismatch {
            expected: mean.len(),
            got: x.ncols(),
        });
    }
    let mean = Array1::from(mean.clone());
    Ok((x - &mean).dot(components))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LassoConfig {
    pub lambda_l1: f64,
    pub max_sweeps: usize,
    pub tol: f64,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            lambda_l1: 0.01,
            max_sweeps: 500,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub coef: Vec<f64>,
    pub intercept: f64,
    /// Objective before the first sweep and after every sweep.
    pub objective_trace: Vec<f64>,
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Minimizes `1/(2n) ||y - b - X w||^2 + lambda ||w||_1` by cyclic
/// coordinate descent on centered data; the intercept is unpenalized.
pub fn fit_lasso(x: &Matrix, target: &[f64], config: &LassoConfig) -> Result<LassoFit> {
    let n = x.nrows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if target.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: target.len(),
        });
    }
    let d = x.ncols();
    let nf = n as f64;
    let x_mean = x.mean_axis(Axis(0)).expect("non-empty");
    let xc = x - &x_mean;
    let y_mean = target.iter().sum::<f64>() / nf;
    let mut resid: Vec<f64> = target.iter().map(|t| t - y_mean).collect();
    let col_sq: Vec<f64> = xc.columns().into_iter().map(|c| c.dot(&c) / nf).collect();
    let mut coef = vec![0.0; d];
    let lambda = config.lambda_l1;

    let objective = |resid: &[f64], coef: &[f64]| {
        resid.iter().map(|r| r * r).sum::<f64>() / (2.0 * nf)
            + lambda * coef.iter().map(|c| c.abs()).sum::<f64>()
    };
    let mut trace = vec![objective(&resid, &coef)];
    for _ in 0..config.max_sweeps {
        let mut max_change: f64 = 0.0;
        for j in 0..d {
            if col_sq[j] == 0.0 {
                continue;
            }
            let col = xc.column(j);
            let rho =
                col.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / nf + col_sq[j] * coef[j];
            let updated = soft_threshold(rho, lambda) / col_sq[j];
            let delta = updated - coef[j];
            if delta != 0.0 {
                for (r, a) in resid.iter_mut().zip(col.iter()) {
                    *r -= a * delta;
                }
                coef[j] = updated;
                max_change = max_change.max(delta.abs());
            }
        }
        trace.push(objective(&resid, &coef));
        if max_change < config.tol {
            break;
        }
    }
    let intercept = y_mean - x_mean.iter().zip(&coef).map(|(m, c)| m * c).sum::<f64>();
    Ok(LassoFit {
        coef,
        intercept,
        objective_trace: trace,
    })
}

/// Max over classes of `|coef|` from one-vs-rest Lasso on one-hot targets.
pub fn lasso_scores(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    config: &LassoConfig,
) -> Result<Vec<f64>> {
    check_labels(x, y)?;
    let mut scores = vec![0.0f64; x.ncols()];
    for class in 0..n_classes {
        let target: Vec<f64> = y.iter().map(|&c| f64::from(u8::from(c == class))).collect();
        let fit = fit_lasso(x, &target, config)?;
        for (s, c) in scores.iter_mut().zip(&fit.coef) {
            *s = s.max(c.abs());
        }
    }
    if scores.iter().all(|&s| s == 0.0) {
        log::warn!(
            "lasso (lambda_l1 = {}) zeroed every coefficient; falling back to index order",
            config.lambda_l1
        );
    }
    Ok(scores)
}

pub fn lasso_select(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    k: usize,
    config: &LassoConfig,
) -> Result<SelectorResult> {
    check_k(k, x.ncols())?;
    let scores = lasso_scores(x, y, n_classes, config)?;
    let mut idx = rank_by_score(&scores);
    idx.truncate(k);
    Ok(SelectorResult {
        kind: SelectorKind::Lasso,
        selection: Selection::Indices(idx),
        scores,
    })
}

/// Neural gas selector; scores are the codebook spread per feature.
pub fn ngn_select(x: &Matrix, k: usize, params: &NgnParams) -> Result<SelectorResult> {
    check_k(k, x.ncols())?;
    let codebook = neuralgas::train(x, params)?;
    let scores = neuralgas::rank_features(&codebook);
    let mut idx = rank_by_score(&scores);
    idx.truncate(k);
    Ok(SelectorResult {
        kind: SelectorKind::Ngn,
        selection: Selection::Indices(idx),
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataspace;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::RngExt;

    #[test]
    fn contingency_two_by_two() {
        assert_eq!(chi2_contingency(&[vec![10.0, 0.0], vec![0.0, 10.0]]), 20.0);
        assert_eq!(chi2_contingency(&[vec![5.0, 5.0], vec![5.0, 5.0]]), 0.0);
    }

    #[test]
    fn binary_feature_score_is_contingency_statistic() {
        let mut x = Array2::<f64>::zeros((20, 1));
        let mut y = vec![0; 20];
        for i in 0..10 {
            x[[i, 0]] = 1.0;
            y[10 + i] = 1;
        }
        assert_eq!(chi2_scores(&x, &y, 2).unwrap(), vec![20.0]);
    }

    #[test]
    fn label_aligned_feature_ranks_first() {
        let mut rng = crate::seeding::rng(5);
        let y: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let x = Array2::from_shape_fn((60, 3), |(i, j)| match j {
            1 => 2.0 * y[i] as f64 + 1.0,
            _ => rng.random::<f64>(),
        });
        let sel = chi2_select(&x, &y, 3, 3).unwrap();
        let Selection::Indices(idx) = &sel.selection else {
            panic!()
        };
        assert_eq!(idx[0], 1);
        assert_eq!(idx.len(), 3);
        assert!(chi2_select(&x, &y, 3, 4).is_err());
    }

    #[test]
    fn pca_collinear_data() {
        let x = Array2::from_shape_fn((20, 2), |(i, j)| {
            let t = i as f64 - 7.0;
            if j == 0 {
                t
            } else {
                2.0 * t + 1.0
            }
        });
        let sel = pca_select(&x, 2).unwrap();
        let Selection::Projection { eigenvalues, .. } = &sel.selection else {
            panic!()
        };
        let total: f64 = eigenvalues.iter().sum();
        assert!(eigenvalues[0] / total > 0.999);
    }

    fn orthonormality_error(c: &Array2<f64>) -> f64 {
        let gram = c.t().dot(c);
        gram.indexed_iter()
            .map(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    fn total_variance(x: &Matrix) -> f64 {
        let (_, cov) = covariance(x);
        cov.diag().sum()
    }

    #[test]
    fn pca_orthonormal_and_variance_preserving() {
        let ds = dataspace::synth(80, 6, 3, 2.0, 12).unwrap();
        let sel = pca_select(ds.features(), 6).unwrap();
        let Selection::Projection { components, .. } = &sel.selection else {
            panic!()
        };
        assert!(orthonormality_error(components) < 1e-8);
        let z = sel.apply(ds.features()).unwrap();
        assert!((total_variance(&z) - total_variance(ds.features())).abs() < 1e-8);
        let top2 = sel.truncated(2).unwrap();
        assert_eq!(top2.apply(ds.features()).unwrap().ncols(), 2);
        assert!(pca_select(ds.features(), 7).is_err());
    }

    #[test]
    fn pca_is_affine() {
        let ds = dataspace::synth(40, 4, 2, 2.0, 1).unwrap();
        let sel = pca_select(ds.features(), 3).unwrap();
        let a = dataspace::synth(10, 4, 2, 1.0, 2).unwrap();
        let b = dataspace::synth(10, 4, 2, 1.0, 3).unwrap();
        let (alpha, beta) = (0.7, -1.3);
        let combo = a.features() * alpha + &(b.features() * beta);
        let lhs = sel.apply(&combo).unwrap();
        // centering contributes (1 - alpha - beta) * (-mean) @ P
        let Selection::Projection {
            mean, components, ..
        } = &sel.selection
        else {
            panic!()
        };
        let shift = Array1::from(mean.clone()).dot(components) * (alpha + beta - 1.0);
        let rhs = sel.apply(a.features()).unwrap() * alpha
            + &(sel.apply(b.features()).unwrap() * beta)
            + &shift;
        for (l, r) in lhs.iter().zip(rhs.iter()) {
            assert!((l - r).abs() < 1e-9);
        }
    }

    /// Least squares with intercept by Gaussian elimination on the normal
    /// equations.
    fn normal_equations(x: &Matrix, y: &[f64]) -> Vec<f64> {
        let n = x.nrows();
        let d = x.ncols() + 1;
        let design =
            Array2::from_shape_fn((n, d), |(i, j)| if j == 0 { 1.0 } else { x[[i, j - 1]] });
        let mut a = design.t().dot(&design);
        let mut b = design.t().dot(&Array1::from(y.to_vec()));
        for p in 0..d {
            let pivot = (p..d)
                .max_by(|&i, &j| a[[i, p]].abs().total_cmp(&a[[j, p]].abs()))
                .unwrap();
            for c in 0..d {
                a.swap([p, c], [pivot, c]);
            }
            b.swap(p, pivot);
            for r in p + 1..d {
                let f = a[[r, p]] / a[[p, p]];
                for c in p..d {
                    a[[r, c]] -= f * a[[p, c]];
                }
                b[r] -= f * b[p];
            }
        }
        let mut sol = vec![0.0; d];
        for p in (0..d).rev() {
            let s: f64 = (p + 1..d).map(|c| a[[p, c]] * sol[c]).sum();
            sol[p] = (b[p] - s) / a[[p, p]];
        }
        sol
    }

    #[test]
    fn unpenalized_lasso_is_least_squares() {
        let x = array![
            [1.0, 0.5, -1.0],
            [2.0, -0.3, 0.0],
            [0.0, 1.2, 1.0],
            [-1.0, 0.8, 2.0],
            [0.5, -1.0, 0.3]
        ];
        let y = [1.0, 2.5, -0.5, 0.3, 1.7];
        let fit = fit_lasso(
            &x,
            &y,
            &LassoConfig {
                lambda_l1: 0.0,
                ..Default::default()
            },
        )
        .unwrap();
        let ls = normal_equations(&x, &y);
        assert!((fit.intercept - ls[0]).abs() < 1e-3);
        for (c, l) in fit.coef.iter().zip(&ls[1..]) {
            assert!((c - l).abs() < 1e-3, "{c} vs {l}");
        }
    }

    #[test]
    fn huge_penalty_zeroes_everything() {
        let ds = dataspace::synth(40, 5, 2, 2.0, 3).unwrap();
        let cfg = LassoConfig {
            lambda_l1: 1e6,
            ..Default::default()
        };
        let sel = lasso_select(ds.features(), ds.labels(), 2, 5, &cfg).unwrap();
        assert!(sel.scores.iter().all(|&s| s == 0.0));
        assert_eq!(sel.selection, Selection::Indices(vec![0, 1, 2, 3, 4]));
    }

    #[test]
    fn lasso_finds_the_driving_feature() {
        let mut rng = crate::seeding::rng(8);
        let x = Array2::from_shape_fn((100, 5), |_| rng.random::<f64>() * 2.0 - 1.0);
        let y: Vec<f64> = (0..100)
            .map(|i| x[[i, 2]] + 0.05 * (rng.random::<f64>() - 0.5))
            .collect();
        let fit = fit_lasso(
            &x,
            &y,
            &LassoConfig {
                lambda_l1: 0.05,
                ..Default::default()
            },
        )
        .unwrap();
        let best = rank_by_score(&fit.coef.iter().map(|c| c.abs()).collect::<Vec<_>>())[0];
        assert_eq!(best, 2);
    }

    #[test]
    fn ngn_selects_the_cluster_feature() {
        let mut rng = crate::seeding::rng(3);
        let x = Array2::from_shape_fn((200, 6), |(i, j)| {
            let noise = rng.random::<f64>() - 0.5;
            if j == 0 {
                if i % 2 == 0 {
                    3.0
                } else {
                    -3.0
                }
            } else {
                0.1 * noise
            }
        });
        let params = NgnParams {
            t_max: Some(20_000),
            ..Default::default()
        };
        let sel = ngn_select(&x, 3, &params).unwrap();
        let Selection::Indices(idx) = &sel.selection else {
            panic!()
        };
        assert!(idx.contains(&0));
    }

    #[test]
    fn raw_passes_through() {
        let x = array![[1.0, 2.0]];
        let raw = SelectorResult::raw(2);
        assert_eq!(raw.apply(&x).unwrap(), x);
        assert_eq!(raw.truncated(1).unwrap(), raw);
        assert!(raw.apply(&array![[1.0]]).is_err());
    }

    #[test]
    fn audit_csv() {
        let sel = SelectorResult {
            kind: SelectorKind::Chi2,
            selection: Selection::Indices(vec![1, 0]),
            scores: vec![0.5, 2.0],
        };
        let mut buf = Vec::new();
        sel.write_csv(&["a".into(), "b".into()], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "rank,index,name,score\n0,1,b,2.000000\n1,0,a,0.500000\n"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn lasso_objective_non_increasing(seed in 0u64..500, lambda in 0.0f64..0.5) {
            let mut rng = crate::seeding::rng(seed);
            let x = Array2::from_shape_fn((15, 4), |_| rng.random::<f64>() * 2.0 - 1.0);
            let y: Vec<f64> = (0..15).map(|_| rng.random::<f64>()).collect();
            let fit = fit_lasso(&x, &y, &LassoConfig { lambda_l1: lambda, ..Default::default() }).unwrap();
            for w in fit.objective_trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
        }

        #[test]
        fn index_selections_are_distinct_and_in_range(seed in 0u64..200, k in 1usize..=8) {
            let ds = dataspace::synth(40, 8, 4, 2.0, seed).unwrap();
            let results = [
                chi2_select(ds.features(), ds.labels(), 4, k).unwrap(),
                lasso_select(ds.features(), ds.labels(), 4, k, &LassoConfig::default()).unwrap(),
            ];
            for r in results {
                let Selection::Indices(idx) = &r.selection else { panic!() };
                let mut u = idx.clone();
                u.sort_unstable();
                u.dedup();
                prop_assert_eq!(u.len(), k);
                prop_assert!(idx.iter().all(|&j| j < 8));
            }
        }
    }
}
