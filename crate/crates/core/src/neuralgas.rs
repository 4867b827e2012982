//! Neural gas vector quantization and codebook-based feature ranking.
//!
//! Every neuron is adapted towards each presented sample with a strength that
//! decays with its distance *rank* (0 for the closest neuron). Both the step
//! size and the neighbourhood range shrink geometrically over the schedule.
//! After training, features are ranked by how widely the neurons are spread
//! along each dimension.

use std::io::Write;

use ndarray::Array2;
use rand::seq::index;
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{seeding, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NgnParams {
    pub n_neurons: usize,
    /// Step size at the start of training.
    pub eps_initial: f64,
    /// Step size at the end of training.
    pub eps_final: f64,
    /// Neighbourhood range at the start of training.
    pub lambda_initial: f64,
    /// Neighbourhood range at the end of training.
    pub lambda_final: f64,
    /// Total number of sample presentations. `None` means 100 per row.
    pub t_max: Option<usize>,
    pub seed: u64,
}

impl Default for NgnParams {
    fn default() -> Self {
        Self {
            n_neurons: 10,
            eps_initial: 0.5,
            eps_final: 0.005,
            lambda_initial: 10.0,
            lambda_final: 0.5,
            t_max: None,
            seed: 0,
        }
    }
}

impl NgnParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.n_neurons == 0 {
            return bad("n_neurons must be positive");
        }
        if !(self.eps_initial > 0.0 && self.eps_initial <= 1.0)
            || !(self.eps_final > 0.0 && self.eps_final <= 1.0)
        {
            return bad("step sizes must lie in (0, 1]");
        }
        if self.eps_final > self.eps_initial {
            return bad("eps_final must not exceed eps_initial");
        }
        if self.lambda_final.is_nan()
            || self.lambda_final <= 0.0
            || self.lambda_final > self.lambda_initial
        {
            return bad("need 0 < lambda_final <= lambda_initial");
        }
        if self.t_max == Some(0) {
            return bad("t_max must be at least 1");
        }
        Ok(())
    }

    /// Presentation count for a dataset with `n_samples` rows.
    pub fn resolved_t_max(&self, n_samples: usize) -> usize {
        self.t_max.unwrap_or(100 * n_samples).max(1)
    }
}

/// Geometric interpolation `start * (end / start)^(t / t_max)`.
pub fn schedule(start: f64, end: f64, t: usize, t_max: usize) -> f64 {
    start * (end / start).powf(t as f64 / t_max as f64)
}

/// Adaptation strength for a neuron of distance rank `rank`.
pub fn update_strength(eps: f64, lambda: f64, rank: usize) -> f64 {
    eps * (-(rank as f64) / lambda).exp()
}

/// Trained neuron positions plus the quantization error sampled once per
/// epoch (every `n_samples` presentations), starting before the first update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub positions: Matrix,
    pub qe_trace: Vec<f64>,
}

/// Mean Euclidean distance from each row of `x` to its nearest neuron.
pub fn quantization_error(x: &Matrix, positions: &Matrix) -> f64 {
    let total: f64 = x
        .rows()
        .into_iter()
        .map(|row| {
            positions
                .rows()
                .into_iter()
                .map(|w| sq_dist(row.as_slice().unwrap(), w.as_slice().unwrap()))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    total / x.nrows() as f64
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn train(x: &Matrix, params: &NgnParams) -> Result<Codebook> {
    params.validate()?;
    let n = x.nrows();
    let d = x.ncols();
    if n == 0 || d == 0 {
        return Err(Error::EmptyDataset);
    }
    if params.n_neurons > n {
        return Err(Error::InvalidParameter(format!(
            "n_neurons ({}) exceeds sample count ({n})",
            params.n_neurons
        )));
    }
    let x: Matrix = x.as_standard_layout().into_owned();
    let m = params.n_neurons;
    let t_max = params.resolved_t_max(n);
    let mut rng = seeding::rng(params.seed);

    let init = index::sample(&mut rng, n, m).into_vec();
    let mut positions = Array2::<f64>::zeros((m, d));
    for (neuron, &row) in init.iter().enumerate() {
        positions.row_mut(neuron).assign(&x.row(row));
    }

    let mut qe_trace = vec![quantization_error(&x, &positions)];
    let mut order: Vec<usize> = (0..m).collect();
    let mut dists = vec![0.0; m];
    let data = x.as_slice().expect("standard layout");
    {
        let pos = positions.as_slice_mut().expect("owned standard layout");
        for t in 0..t_max {
            let eps = schedule(params.eps_initial, params.eps_final, t, t_max);
            let lambda = schedule(params.lambda_initial, params.lambda_final, t, t_max);
            let r = rng.random_range(0..n);
            let sample = &data[r * d..(r + 1) * d];
            for (i, dist) in dists.iter_mut().enumerate() {
                *dist = sq_dist(sample, &pos[i * d..(i + 1) * d]);
            }
            for (i, o) in order.iter_mut().enumerate() {
                *o = i;
            }
            order.sort_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(a.cmp(&b)));
            for (rank, &neuron) in order.iter().enumerate() {
                let h = update_strength(eps, lambda, rank);
                if h == 0.0 {
                    break;
                }
                let w = &mut pos[neuron * d..(neuron + 1) * d];
                for (wj, sj) in w.iter_mut().zip(sample) {
                    *wj += h * (sj - *wj);
                }
            }
            if (t + 1) % n == 0 || t + 1 == t_max {
                let snapshot = Array2::from_shape_vec((m, d), pos.to_vec()).unwrap();
                qe_trace.push(quantization_error(&x, &snapshot));
            }
        }
    }
    Ok(Codebook {
        positions,
        qe_trace,
    })
}

/// Population variance of each codebook column.
pub fn rank_features(codebook: &Codebook) -> Vec<f64> {
    let m = codebook.positions.nrows() as f64;
    codebook
        .positions
        .columns()
        .into_iter()
        .map(|col| {
            let mean = col.sum() / m;
            col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m
        })
        .collect()
}

/// Feature indices ordered by descending score, ties to the lower index.
pub fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

/// The `k` features with the largest codebook spread.
pub fn select(x: &Matrix, k: usize, params: &NgnParams) -> Result<Vec<usize>> {
    if k == 0 || k > x.ncols() {
        return Err(Error::KOutOfRange { k, max: x.ncols() });
    }
    let codebook = train(x, params)?;
    let mut order = ranking(&rank_features(&codebook));
    order.truncate(k);
    Ok(order)
}

/// One CSV row per neuron, columns named after `feature_names`.
pub fn write_codebook_csv<W: Write>(
    codebook: &Codebook,
    feature_names: &[String],
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(w, "neuron,{}", feature_names.join(","))?;
    for (i, row) in codebook.positions.rows().into_iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        writeln!(w, "{i},{}", cells.join(","))?;
    }
    Ok(())
}
