//! Tertile fuzzification of continuous features.
//!
//! Each feature is cut at its 33rd and 67th percentiles into the crisp
//! states low (0), medium (1) and high (2). A triangular membership family is
//! provided for reporting; its crossover points coincide with the two
//! thresholds so the dominant membership always agrees with the crisp state.

use std::io::Write;

use ndarray::{concatenate, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Matrix;

pub const LOW_QUANTILE: f64 = 0.33;
pub const HIGH_QUANTILE: f64 = 0.67;

/// Whether fuzzy states replace the continuous features or are appended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuzzyMode {
    #[default]
    Replace,
    Augment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyThresholds {
    pub t_low: Vec<f64>,
    pub t_high: Vec<f64>,
}

/// Quantile by linear interpolation between order statistics at position
/// `p * (n - 1)`. `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn fit(x_train: &Matrix) -> Result<FuzzyThresholds> {
    if x_train.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut t_low = Vec::with_capacity(x_train.ncols());
    let mut t_high = Vec::with_capacity(x_train.ncols());
    for col in x_train.columns() {
        let mut sorted = col.to_vec();
        sorted.sort_by(f64::total_cmp);
        t_low.push(quantile_sorted(&sorted, LOW_QUANTILE));
        t_high.push(quantile_sorted(&sorted, HIGH_QUANTILE));
    }
    Ok(FuzzyThresholds { t_low, t_high })
}

/// Crisp state of a single value: `x <= t_low` is low, `x >= t_high` is
/// high, anything strictly between is medium.
pub fn state(x: f64, t_low: f64, t_high: f64) -> u8 {
    if x <= t_low {
        0
    } else if x >= t_high {
        2
    } else {
        1
    }
}

impl FuzzyThresholds {
    pub fn n_features(&self) -> usize {
        self.t_low.len()
    }

    /// Maps every value to its state, returned as `0.0`, `1.0` or `2.0`.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: x.ncols(),
            });
        }
        let mut out = x.clone();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (lo, hi) = (self.t_low[j], self.t_high[j]);
            col.mapv_inplace(|v| state(v, lo, hi) as f64);
        }
        Ok(out)
    }

    /// Applies `mode`: either the states alone, or `[x | states]`.
    pub fn transform_with(&self, x: &Matrix, mode: FuzzyMode) -> Result<Matrix> {
        let states = self.transform(x)?;
        Ok(match mode {
            FuzzyMode::Replace => states,
            FuzzyMode::Augment => {
                concatenate(Axis(1), &[x.view(), states.view()]).expect("row counts agree")
            }
        })
    }

    pub fn write_csv<W: Write>(&self, feature_names: &[String], w: &mut W) -> std::io::Result<()> {
        writeln!(w, "feature,t_low,t_high")?;
        for (j, (lo, hi)) in self.t_low.iter().zip(&self.t_high).enumerate() {
            let name = feature_names
                .get(j)
                .cloned()
                .unwrap_or_else(|| j.to_string());
            writeln!(w, "{name},{lo:.6},{hi:.6}")?;
        }
        Ok(())
    }
}

/// Degrees of membership in (low, medium, high).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub low: f64,
    pub medium: f64,
    pub high: f64,
}

impl Membership {
    pub fn as_array(&self) -> [f64; 3] {
        [self.low, self.medium, self.high]
    }

    /// Index of the largest degree, ties to the lower state.
    pub fn argmax(&self) -> u8 {
        let v = self.as_array();
        let mut best = 0;
        for i in 1..3 {
            if v[i] > v[best] {
                best = i;
            }
        }
        best as u8
    }
}

/// Peak positions (low, medium, high) of the triangular family for a
/// threshold pair. The medium peak sits at the midpoint `m`; the outer peaks
/// are the thresholds reflected away from `m`, so adjacent triangles cross at
/// exactly `t_low` and `t_high`.
pub fn membership_knots(t_low: f64, t_high: f64) -> (f64, f64, f64) {
    let mid = 0.5 * (t_low + t_high);
    (2.0 * t_low - mid, mid, 2.0 * t_high - mid)
}

/// Triangular partition-of-unity membership of `x`.
///
/// Low is 1 up to its peak and falls linearly to 0 at the midpoint; medium
/// rises from the low peak to 1 at the midpoint and back to 0 at the high
/// peak; high mirrors low. Degenerate thresholds (`t_low == t_high`) give
/// `(0, 1, 0)`.
pub fn membership(x: f64, t_low: f64, t_high: f64) -> Result<Membership> {
    if t_low > t_high {
        return Err(Error::InvalidParameter(format!(
            "t_low ({t_low}) exceeds t_high ({t_high})"
        )));
    }
    if t_low == t_high {
        return Ok(Membership {
            low: 0.0,
            medium: 1.0,
            high: 0.0,
        });
    }
    let (a, m, b) = membership_knots(t_low, t_high);
    let mu = if x <= a {
        Membership {
            low: 1.0,
            medium: 0.0,
            high: 0.0,
        }
    } else if x < m {
        let low = (m - x) / (m - a);
        Membership {
            low,
            medium: 1.0 - low,
            high: 0.0,
        }
    } else if x < b {
        let high = (x - m) / (b - m);
        Membership {
            low: 0.0,
            medium: 1.0 - high,
            high,
        }
    } else {
        Membership {
            low: 0.0,
            medium: 0.0,
            high: 1.0,
        }
    };
    Ok(mu)
}

/// `samples` evenly spaced points spanning the outer knots plus a margin on
/// each side, as `(x, low, medium, high)` rows.
pub fn membership_curve(t_low: f64, t_high: f64, samples: usize) -> Result<Vec<[f64; 4]>> {
    let (a, _, b) = membership_knots(t_low, t_high);
    let span = (b - a).max(1e-6);
    let (start, end) = (a - 0.25 * span, b + 0.25 * span);
    let samples = samples.max(2);
    (0..samples)
        .map(|i| {
            let x = start + (end - start) * i as f64 / (samples - 1) as f64;
            let mu = membership(x, t_low, t_high)?;
            Ok([x, mu.low, mu.medium, mu.high])
        })
        .collect()
}
