//! Tabular dataset handling: CSV ingestion, z-score standardization,
//! (stratified) train/test splitting and a seeded synthetic surrogate.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{seeding, Matrix};

/// Name of the class column in CSV files.
pub const LABEL_COLUMN: &str = "label";

/// Smallest standard deviation used when scaling a column.
pub const STD_FLOOR: f64 = 1e-9;

/// Feature matrix with integer class labels `0..n_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    n_classes: usize,
}

impl Dataset {
    /// Builds a dataset and checks every invariant: shape agreement, finite
    /// values, labels in range and every class represented.
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        n_classes: usize,
    ) -> Result<Self> {
        let ds = Self::new_unchecked_classes(features, labels, feature_names, n_classes)?;
        let counts = ds.class_counts();
        if let Some(class) = counts.iter().position(|&c| c == 0) {
            return Err(Error::ClassTooSmall {
                class,
                count: 0,
                needed: 1,
            });
        }
        Ok(ds)
    }

    /// Like [`Dataset::new`] but allows classes with no samples. Subsets
    /// (splits, folds) keep the parent's class count.
    pub fn new_unchecked_classes(
        features: Matrix,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        n_classes: usize,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::DimensionMismatch {
                expected: features.ncols(),
                got: feature_names.len(),
            });
        }
        if n_classes == 0 {
            return Err(Error::InvalidParameter("n_classes must be positive".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} outside 0..{n_classes}"
            )));
        }
        if let Some(((r, c), v)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Parse {
                row: r,
                column: feature_names[c].clone(),
                message: format!("non-finite value {v}"),
            });
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            n_classes,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            n_classes: self.n_classes,
        }
    }

    /// Same labels, replaced feature matrix (row count must match).
    pub fn with_features(&self, features: Matrix, feature_names: Vec<String>) -> Result<Dataset> {
        Dataset::new_unchecked_classes(features, self.labels.clone(), feature_names, self.n_classes)
    }

    /// Same features, replaced labels.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Dataset> {
        Dataset::new_unchecked_classes(
            self.features.clone(),
            labels,
            self.feature_names.clone(),
            self.n_classes,
        )
    }
}

/// Reads a CSV with a header row and exactly one `label` column. All other
/// columns become features in header order; the class count is `max label + 1`.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(Error::EmptyDataset);
    }
    let label_cols: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.as_str() == LABEL_COLUMN)
        .map(|(i, _)| i)
        .collect();
    let label_col = match label_cols.as_slice() {
        [] => return Err(Error::MissingLabelColumn),
        [c] => *c,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "{} `{LABEL_COLUMN}` columns in header",
                label_cols.len()
            )))
        }
    };
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_col)
        .map(|(_, h)| h.clone())
        .collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        // data rows are numbered from 1; the header is row 0
        let row = r + 1;
        if record.len() != header.len() {
            return Err(Error::Parse {
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            if c == label_col {
                let label: i64 = cell.parse().map_err(|_| Error::Parse {
                    row,
                    column: header[c].clone(),
                    message: format!("label `{cell}` is not an integer"),
                })?;
                if label < 0 {
                    return Err(Error::Parse {
                        row,
                        column: header[c].clone(),
                        message: format!("label {label} outside 0..K-1"),
                    });
                }
                labels.push(label as usize);
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row,
                    column: header[c].clone(),
                    message: format!("`{cell}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row,
                        column: header[c].clone(),
                        message: format!("non-finite value `{cell}`"),
                    });
                }
                values.push(v);
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let features = Array2::from_shape_vec((labels.len(), feature_names.len()), values)
        .expect("row lengths checked above");
    let ds = Dataset::new_unchecked_classes(features, labels, feature_names, n_classes)?;
    if let Some(class) = ds.class_counts().iter().position(|&c| c == 0) {
        return Err(Error::Parse {
            row: 0,
            column: LABEL_COLUMN.into(),
            message: format!(
                "label {class} outside the observed classes (labels must cover 0..{n_classes})"
            ),
        });
    }
    Ok(ds)
}

/// Writes `data` in the format accepted by [`load_csv`]; the label is the
/// last column. Floats use shortest round-trip formatting.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv_to(data, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv_to<W: Write>(data: &Dataset, w: &mut W) -> std::io::Result<()> {
    for name in &data.feature_names {
        write!(w, "{name},")?;
    }
    writeln!(w, "{LABEL_COLUMN}")?;
    for (row, label) in data.features.rows().into_iter().zip(&data.labels) {
        for v in row {
            write!(w, "{v:?},")?;
        }
        writeln!(w, "{label}")?;
    }
    Ok(())
}

/// Per-column z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizerModel {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Population mean and standard deviation of every column of `x`, with the
/// standard deviation floored at [`STD_FLOOR`].
pub fn fit_standardizer(x: &Matrix) -> Result<StandardizerModel> {
    let n = x.nrows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let means: Array1<f64> = x.mean_axis(Axis(0)).expect("non-empty");
    let stds = x
        .columns()
        .into_iter()
        .zip(means.iter())
        .map(|(col, &m)| {
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
            var.sqrt().max(STD_FLOOR)
        })
        .collect();
    Ok(StandardizerModel {
        means: means.to_vec(),
        stds,
    })
}

impl StandardizerModel {
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.ncols() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                got: x.ncols(),
            });
        }
        let mut out = x.clone();
        for (mut col, (m, s)) in out
            .columns_mut()
            .into_iter()
            .zip(self.means.iter().zip(&self.stds))
        {
            col.mapv_inplace(|v| (v - m) / s);
        }
        Ok(out)
    }

    pub fn apply_dataset(&self, data: &Dataset) -> Result<Dataset> {
        let features = self.apply(data.features())?;
        data.with_features(features, data.feature_names.clone())
    }
}

/// How a dataset is cut into train and test partitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train_ratio: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_ratio: 0.7,
            seed: 0,
            stratified: true,
        }
    }
}

/// Row indices of a train/test partition, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// `round(x)` with halves rounded up, for non-negative `x`.
pub(crate) fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

pub fn split_indices(labels: &[usize], n_classes: usize, spec: &SplitSpec) -> Result<SplitIndices> {
    if !(spec.train_ratio > 0.0 && spec.train_ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train_ratio {} not in (0, 1)",
            spec.train_ratio
        )));
    }
    let n = labels.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let n_train = round_half_up(spec.train_ratio * n as f64).min(n);
    let mut rng = seeding::rng(spec.seed);

    let mut train = Vec::with_capacity(n_train);
    let mut test = Vec::with_capacity(n - n_train);
    if spec.stratified {
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
        for (i, &l) in labels.iter().enumerate() {
            by_class[l].push(i);
        }
        for (class, members) in by_class.iter().enumerate() {
            if !members.is_empty() && members.len() < 2 {
                return Err(Error::ClassTooSmall {
                    class,
                    count: members.len(),
                    needed: 2,
                });
            }
        }
        let counts: Vec<usize> = by_class.iter().map(Vec::len).collect();
        let quotas = allocate_stratified(&counts, spec.train_ratio, n_train);
        for (members, quota) in by_class.iter_mut().zip(quotas) {
            members.shuffle(&mut rng);
            train.extend_from_slice(&members[..quota]);
            test.extend_from_slice(&members[quota..]);
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        train.extend_from_slice(&order[..n_train]);
        test.extend_from_slice(&order[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

/// Largest-remainder allocation of `total` training rows across classes,
/// keeping at least one train and one test row per class where possible.
fn allocate_stratified(counts: &[usize], ratio: f64, total: usize) -> Vec<usize> {
    let ideal: Vec<f64> = counts.iter().map(|&c| c as f64 * ratio).collect();
    let mut quota: Vec<usize> = counts
        .iter()
        .zip(&ideal)
        .map(|(&c, &q)| {
            if c >= 2 {
                (q.floor() as usize).clamp(1, c - 1)
            } else {
                q.floor() as usize
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    // larger fractional remainder first, then lower class index
    order.sort_by(|&a, &b| {
        let ra = ideal[a] - ideal[a].floor();
        let rb = ideal[b] - ideal[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut assigned: usize = quota.iter().sum();
    // keep one test row per class first; only give it up if the total demands it
    for keep_test in [true, false] {
        while assigned < total {
            let before = assigned;
            for &c in &order {
                if assigned == total {
                    break;
                }
                let cap = if keep_test && counts[c] >= 2 {
                    counts[c] - 1
                } else {
                    counts[c]
                };
                if quota[c] < cap {
                    quota[c] += 1;
                    assigned += 1;
                }
            }
            if assigned == before {
                break;
            }
        }
    }
    while assigned > total {
        let before = assigned;
        for &c in order.iter().rev() {
            if assigned == total {
                break;
            }
            if quota[c] > 1 {
                quota[c] -= 1;
                assigned -= 1;
            }
        }
        if assigned == before {
            break;
        }
    }
    quota
}

/// Partitions `data` into (train, test).
pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let idx = split_indices(data.labels(), data.n_classes(), spec)?;
    Ok((data.subset(&idx.train), data.subset(&idx.test)))
}

/// Parameters of the synthetic surrogate. Defaults mirror a 5-band x
/// 5-electrode, four-class layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub separation: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n: 600,
            d: 25,
            k: 4,
            separation: 3.0,
            seed: 7,
        }
    }
}

/// Generates `k` unit-variance Gaussian clusters in `d` dimensions.
///
/// When `k <= d`, class `c` is centred at `separation / sqrt(2)` along axis
/// `c`, so every pair of centres is exactly `separation` apart and the
/// remaining axes are pure noise. With more classes than dimensions the
/// centres sit on a regular polygon in the first two axes (a line when
/// `d = 1`) with neighbouring centres `separation` apart. Sample `i`
/// belongs to class `i mod k`.
pub fn synth(n: usize, d: usize, k: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if k == 0 || n < k {
        return Err(Error::InvalidParameter(format!(
            "synth needs n >= k >= 1 (n={n}, k={k})"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("synth needs d >= 1".into()));
    }
    let mut rng = seeding::rng(seed);
    let mut centers = Array2::<f64>::zeros((k, d));
    if k <= d {
        let offset = separation / std::f64::consts::SQRT_2;
        for c in 0..k {
            centers[[c, c]] = offset;
        }
    } else if d == 1 {
        for c in 0..k {
            centers[[c, 0]] = separation * c as f64;
        }
    } else {
        let step = 2.0 * std::f64::consts::PI / k as f64;
        let radius = separation / (2.0 * (step / 2.0).sin());
        for c in 0..k {
            centers[[c, 0]] = radius * (step * c as f64).cos();
            centers[[c, 1]] = radius * (step * c as f64).sin();
        }
    }
    let labels: Vec<usize> = (0..n).map(|i| i % k).collect();
    let mut features = Array2::<f64>::zeros((n, d));
    for (i, mut row) in features.rows_mut().into_iter().enumerate() {
        let center = centers.row(labels[i]);
        for (v, c) in row.iter_mut().zip(center.iter()) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = c + z;
        }
    }
    let names = (0..d).map(|j| format!("f{j}")).collect();
    Dataset::new(features, labels, names, k)
}

pub fn synth_from(spec: &SynthSpec) -> Result<Dataset> {
    synth(spec.n, spec.d, spec.k, spec.separation, spec.seed)
}
