//! Multiclass gradient boosted regression trees with second-order leaf fitting.
//!
//! Every boosting round evaluates the softmax of the current scores once and
//! then grows one regression tree per class against that class's gradient
//! and hessian of the cross-entropy loss. Trees use exact greedy splitting
//! over sorted feature values.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostParams {
    pub max_depth: usize,
    pub learning_rate: f64,
    pub n_rounds: usize,
    pub reg_lambda: f64,
    pub min_child_weight: f64,
    pub gamma_min_gain: f64,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            max_depth: 6,
            learning_rate: 0.3,
            n_rounds: 100,
            reg_lambda: 1.0,
            min_child_weight: 1.0,
            gamma_min_gain: 0.0,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_nonneg(self.learning_rate)
            || !finite_nonneg(self.reg_lambda)
            || !finite_nonneg(self.min_child_weight)
            || !finite_nonneg(self.gamma_min_gain)
        {
            return Err(Error::InvalidParameter(format!(
                "booster parameters must be finite and non-negative: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Gradient and hessian of softmax cross-entropy with respect to the scores.
pub fn softmax_grad_hess(p: &[f64], y: usize) -> (Vec<f64>, Vec<f64>) {
    let g = p
        .iter()
        .enumerate()
        .map(|(k, &pk)| if k == y { pk - 1.0 } else { pk })
        .collect();
    let h = p.iter().map(|&pk| pk * (1.0 - pk)).collect();
    (g, h)
}

/// Numerically stable softmax of `scores` into `out`.
pub fn softmax_into(scores: &[f64], out: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &s) in out.iter_mut().zip(scores) {
        *o = (s - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Rows with `x[feature] < threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        weight: f64,
    },
}

/// Binary regression tree stored in preorder; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { weight } => return weight,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[feature] < threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_internal(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Split { .. }))
            .count()
    }

    pub fn leaf_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { weight } => Some(*weight),
            Node::Split { .. } => None,
        })
    }
}

/// Row indices of `x` sorted by each feature, shared across all trees of a fit.
struct SortedColumns {
    per_feature: Vec<Vec<usize>>,
}

impl SortedColumns {
    fn new(x: &Matrix) -> Self {
        let per_feature = x
            .columns()
            .into_iter()
            .map(|col| {
                let mut idx: Vec<usize> = (0..col.len()).collect();
                idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Self { per_feature }
    }
}

struct Split {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct TreeBuilder<'a> {
    data: &'a [f64],
    n_features: usize,
    g: &'a [f64],
    h: &'a [f64],
    params: &'a BoostParams,
    nodes: Vec<Node>,
    goes_left: Vec<bool>,
}

impl TreeBuilder<'_> {
    fn value(&self, row: usize, feature: usize) -> f64 {
        self.data[row * self.n_features + feature]
    }

    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.params.reg_lambda)
    }

    fn best_split(&self, lists: &[Vec<usize>], g_sum: f64, h_sum: f64) -> Option<Split> {
        let mcw = self.params.min_child_weight;
        let parent = self.score(g_sum, h_sum);
        let mut best: Option<Split> = None;
        for (feature, rows) in lists.iter().enumerate() {
            let (mut gl, mut hl) = (0.0, 0.0);
            for w in 0..rows.len().saturating_sub(1) {
                let r = rows[w];
                gl += self.g[r];
                hl += self.h[r];
                let v = self.value(r, feature);
                let next = self.value(rows[w + 1], feature);
                if v == next {
                    continue;
                }
                let (gr, hr) = (g_sum - gl, h_sum - hl);
                if hl < mcw || hr < mcw {
                    continue;
                }
                let gain = 0.5 * (self.score(gl, hl) + self.score(gr, hr) - parent)
                    - self.params.gamma_min_gain;
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Split {
                        gain,
                        feature,
                        threshold: 0.5 * (v + next),
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, lists: Vec<Vec<usize>>, depth: usize) -> usize {
        let rows = &lists[0];
        let g_sum: f64 = rows.iter().map(|&r| self.g[r]).sum();
        let h_sum: f64 = rows.iter().map(|&r| self.h[r]).sum();
        let id = self.nodes.len();
        let leaf = Node::Leaf {
            weight: -g_sum / (h_sum + self.params.reg_lambda),
        };
        self.nodes.push(leaf);
        if depth >= self.params.max_depth {
            return id;
        }
        let split = match self.best_split(&lists, g_sum, h_sum) {
            Some(s) if s.gain > 0.0 => s,
            _ => return id,
        };
        for &r in rows {
            self.goes_left[r] = self.value(r, split.feature) < split.threshold;
        }
        let (left_lists, right_lists): (Vec<Vec<usize>>, Vec<Vec<usize>>) = lists
            .into_iter()
            .map(|l| l.into_iter().partition(|&r| self.goes_left[r]))
            .unzip();
        let left = self.grow(left_lists, depth + 1);
        let right = self.grow(right_lists, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

fn build_tree_sorted(
    data: &[f64],
    n_features: usize,
    sorted: &SortedColumns,
    g: &[f64],
    h: &[f64],
    params: &BoostParams,
) -> RegressionTree {
    let n = g.len();
    if n_features == 0 {
        let (gs, hs): (f64, f64) = (g.iter().sum(), h.iter().sum());
        return RegressionTree {
            nodes: vec![Node::Leaf {
                weight: -gs / (hs + params.reg_lambda),
            }],
        };
    }
    let mut builder = TreeBuilder {
        data,
        n_features,
        g,
        h,
        params,
        nodes: Vec::new(),
        goes_left: vec![false; n],
    };
    builder.grow(sorted.per_feature.clone(), 0);
    RegressionTree {
        nodes: builder.nodes,
    }
}

/// Grows one regression tree on gradients `g` and hessians `h` with exact
/// greedy splitting. Candidate thresholds are midpoints between adjacent
/// distinct values; equal gains keep the lower feature, then lower threshold.
pub fn build_tree(
    x: &Matrix,
    g: &[f64],
    h: &[f64],
    params: &BoostParams,
) -> Result<RegressionTree> {
    if g.len() != x.nrows() || h.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: g.len().min(h.len()),
        });
    }
    if x.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let x = x.as_standard_layout();
    let sorted = SortedColumns::new(&x.to_owned());
    Ok(build_tree_sorted(
        x.as_slice().unwrap(),
        x.ncols(),
        &sorted,
        g,
        h,
        params,
    ))
}

/// `trees[round][class]`; class scores are `learning_rate * sum of tree outputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostEnsemble {
    pub trees: Vec<Vec<RegressionTree>>,
    pub params: BoostParams,
    pub n_classes: usize,
    pub n_features: usize,
}

/// Boosts `params.n_rounds` rounds of per-class trees on `(x, y)`.
pub fn fit(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    params: &BoostParams,
) -> Result<BoostEnsemble> {
    fit_with_trace(x, y, n_classes, params).map(|(m, _)| m)
}

/// Like [`fit`], also returning the mean training cross-entropy before the
/// first round and after every round.
pub fn fit_with_trace(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    params: &BoostParams,
) -> Result<(BoostEnsemble, Vec<f64>)> {
    params.validate()?;
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
    if let Some(&bad) = y.iter().find(|&&l| l >= n_classes) {
        return Err(Error::InvalidParameter(format!(
            "label {bad} outside 0..{n_classes}"
        )));
    }
    if n_classes < 2 || y.iter().all(|&l| l == y[0]) {
        return Err(Error::SingleClass);
    }
    let k = n_classes;
    let d = x.ncols();
    let x = x.as_standard_layout().into_owned();
    let data = x.as_slice().unwrap();
    let sorted = SortedColumns::new(&x);

    let mut scores = vec![0.0; n * k];
    let mut probs = vec![0.0; n * k];
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_rounds);
    let mut trace = Vec::with_capacity(params.n_rounds + 1);

    let refresh = |scores: &[f64], probs: &mut [f64]| -> f64 {
        let mut loss = 0.0;
        for i in 0..n {
            softmax_into(&scores[i * k..(i + 1) * k], &mut probs[i * k..(i + 1) * k]);
            loss -= probs[i * k + y[i]].max(f64::MIN_POSITIVE).ln();
        }
        loss / n as f64
    };
    trace.push(refresh(&scores, &mut probs));

    for _ in 0..params.n_rounds {
        let mut round = Vec::with_capacity(k);
        for class in 0..k {
            for i in 0..n {
                let p = probs[i * k + class];
                g[i] = if y[i] == class { p - 1.0 } else { p };
                h[i] = p * (1.0 - p);
            }
            let tree = build_tree_sorted(data, d, &sorted, &g, &h, params);
            for i in 0..n {
                scores[i * k + class] +=
                    params.learning_rate * tree.predict_row(&data[i * d..(i + 1) * d]);
            }
            round.push(tree);
        }
        trees.push(round);
        trace.push(refresh(&scores, &mut probs));
    }
    Ok((
        BoostEnsemble {
            trees,
            params: *params,
            n_classes: k,
            n_features: d,
        },
        trace,
    ))
}

impl BoostEnsemble {
    /// Ensemble with no trees; every prediction is the uniform distribution.
    pub fn empty(n_classes: usize, n_features: usize, params: BoostParams) -> Self {
        Self {
            trees: Vec::new(),
            params,
            n_classes,
            n_features,
        }
    }

    fn check_width(&self, x: &Matrix) -> Result<()> {
        if x.ncols() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.ncols(),
            });
        }
        Ok(())
    }

    pub fn raw_scores(&self, x: &Matrix) -> Result<Matrix> {
        self.check_width(x)?;
        let mut out = Matrix::zeros((x.nrows(), self.n_classes));
        let x = x.as_standard_layout();
        for (i, row) in x.rows().into_iter().enumerate() {
            let row = row.as_slice().unwrap();
            for round in &self.trees {
                for (class, tree) in round.iter().enumerate() {
                    out[[i, class]] += self.params.learning_rate * tree.predict_row(row);
                }
            }
        }
        Ok(out)
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        let mut scores = self.raw_scores(x)?;
        let mut buf = vec![0.0; self.n_classes];
        for mut row in scores.rows_mut() {
            softmax_into(row.as_slice().unwrap(), &mut buf);
            row.assign(&ndarray::ArrayView1::from(&buf));
        }
        Ok(scores)
    }

    /// Most probable class per row, ties to the lowest class index.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        let proba = self.predict_proba(x)?;
        Ok(proba
            .rows()
            .into_iter()
            .map(|r| argmax(r.as_slice().unwrap()))
            .collect())
    }

    /// Plain-text dump: a header line, then one block per tree with its nodes
    /// in preorder.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        writeln!(
            s,
            "booster n_classes={} n_features={} n_rounds={} max_depth={} learning_rate={} reg_lambda={} min_child_weight={} gamma_min_gain={}",
            self.n_classes,
            self.n_features,
            self.trees.len(),
            p.max_depth,
            p.learning_rate,
            p.reg_lambda,
            p.min_child_weight,
            p.gamma_min_gain
        )
        .unwrap();
        for (r, round) in self.trees.iter().enumerate() {
            for (c, tree) in round.iter().enumerate() {
                writeln!(s, "tree round={r} class={c} nodes={}", tree.nodes.len()).unwrap();
                for (i, node) in tree.nodes.iter().enumerate() {
                    match node {
                        Node::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => writeln!(
                            s,
                            "  {i} split feature={feature} threshold={threshold:?} left={left} right={right}"
                        ),
                        Node::Leaf { weight } => writeln!(s, "  {i} leaf weight={weight:?}"),
                    }
                    .unwrap();
                }
            }
        }
        s
    }
}

/// Index of the largest value, ties to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}
