//! CART classification tree with exact greedy Gini splits.
//!
//! Thresholds are midpoints between adjacent distinct values and equal gains
//! keep the lower feature, then the lower threshold, as in
//! [`crate::boostforest::build_tree`].

use serde::{Deserialize, Serialize};

use crate::boostforest::argmax;
use crate::error::{Error, Result};
use crate::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CartConfig {
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for CartConfig {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CartNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: usize,
        counts: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartModel {
    pub nodes: Vec<CartNode>,
    pub n_features: usize,
}

/// `1 - sum p_c^2` of a class-count vector.
pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [usize],
    n_classes: usize,
    config: &'a CartConfig,
    nodes: Vec<CartNode>,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &r in rows {
            c[self.y[r]] += 1;
        }
        c
    }

    fn best_split(&self, rows: &[usize], parent: &[usize]) -> Option<(usize, f64)> {
        let n = rows.len() as f64;
        let parent_gini = gini(parent);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        for f in 0..self.x.ncols() {
            sorted.sort_by(|&a, &b| self.x[[a, f]].total_cmp(&self.x[[b, f]]).then(a.cmp(&b)));
            let mut left = vec![0usize; self.n_classes];
            let mut right = parent.to_vec();
            for w in 0..sorted.len() - 1 {
                let c = self.y[sorted[w]];
                left[c] += 1;
                right[c] -= 1;
                let v = self.x[[sorted[w], f]];
                let next = self.x[[sorted[w + 1], f]];
                if v == next {
                    continue;
                }
                let nl = (w + 1) as f64;
                let gain = parent_gini - (nl * gini(&left) + (n - nl) * gini(&right)) / n;
                if best.is_none_or(|b| gain > b.0) {
                    best = Some((gain, f, 0.5 * (v + next)));
                }
            }
        }
        best.filter(|b| b.0 >= -1e-12).map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&rows);
        let id = self.nodes.len();
        self.nodes.push(CartNode::Leaf {
            class: majority(&counts),
            counts: counts.clone(),
        });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_ok = self.config.max_depth.is_none_or(|m| depth < m);
        if pure || !depth_ok || rows.len() < self.config.min_samples_split.max(2) {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&rows, &counts) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.x[[i, feature]] < threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = CartNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

/// Most frequent class, ties to the lowest index.
fn majority(counts: &[usize]) -> usize {
    let as_f: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    argmax(&as_f)
}

pub fn cart_fit(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    config: &CartConfig,
) -> Result<CartModel> {
    if x.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    let mut b = Builder {
        x,
        y,
        n_classes,
        config,
        nodes: Vec::new(),
    };
    b.grow((0..x.nrows()).collect(), 0);
    Ok(CartModel {
        nodes: b.nodes,
        n_features: x.ncols(),
    })
}

impl CartModel {
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                CartNode::Leaf { class, .. } => return *class,
                CartNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[*feature] < *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[CartNode], i: usize) -> usize {
            match &nodes[i] {
                CartNode::Leaf { .. } => 0,
                CartNode::Split { left, right, .. } => {
                    1 + walk(nodes, *left).max(walk(nodes, *right))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

pub fn cart_predict(model: &CartModel, x: &Matrix) -> Result<Vec<usize>> {
    if x.ncols() != model.n_features {
        return Err(Error::DimensionMismatch {
            expected: model.n_features,
            got: x.ncols(),
        });
    }
    Ok(x.rows()
        .into_iter()
        .map(|r| model.predict_row(&r.to_vec()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boostforest::{build_tree, softmax_grad_hess, BoostParams, Node};
    use ndarray::array;

    #[test]
    fn xor_needs_depth_two() {
        let x = array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
        let y = [0, 1, 1, 0];
        let model = cart_fit(&x, &y, 2, &CartConfig::default()).unwrap();
        assert_eq!(model.depth(), 2);
        assert_eq!(cart_predict(&model, &x).unwrap(), y);
    }

    #[test]
    fn pure_node_is_a_leaf() {
        let x = array![[0.0], [1.0], [2.0]];
        let model = cart_fit(&x, &[1, 1, 1], 2, &CartConfig::default()).unwrap();
        assert_eq!(model.nodes.len(), 1);
        assert!(matches!(model.nodes[0], CartNode::Leaf { class: 1, .. }));
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[5, 5]), 0.5);
        assert_eq!(gini(&[4, 0]), 0.0);
        assert!((gini(&[1, 1, 1]) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn majority_ties_go_low() {
        let x = array![[0.0], [0.0]];
        let model = cart_fit(&x, &[1, 0], 2, &CartConfig::default()).unwrap();
        assert!(matches!(model.nodes[0], CartNode::Leaf { class: 0, .. }));
    }

    #[test]
    fn depth_limit() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let cfg = CartConfig {
            max_depth: Some(1),
            ..Default::default()
        };
        let model = cart_fit(&x, &[0, 1, 0, 1], 2, &cfg).unwrap();
        assert!(model.depth() <= 1);
    }

    #[test]
    fn stump_agrees_with_booster_split() {
        // binary labels, uniform prior: the second-order gain is a monotone
        // transform of the Gini decrease, so both pick the same split
        let x = array![
            [0.3, 5.0, 1.0],
            [1.2, 4.0, 0.0],
            [2.2, 1.0, 1.0],
            [0.1, 3.0, 0.0],
            [2.9, 0.5, 1.0],
            [1.7, 2.5, 1.0],
            [0.8, 4.5, 0.0],
            [2.5, 0.2, 0.0]
        ];
        let y = [0, 0, 1, 0, 1, 1, 0, 1];
        let cart = cart_fit(
            &x,
            &y,
            2,
            &CartConfig {
                max_depth: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        let (g, h): (Vec<f64>, Vec<f64>) = y
            .iter()
            .map(|&c| {
                let (g, h) = softmax_grad_hess(&[0.5, 0.5], c);
                (g[1], h[1])
            })
            .unzip();
        let p = BoostParams {
            max_depth: 1,
            reg_lambda: 0.0,
            min_child_weight: 0.0,
            ..Default::default()
        };
        let tree = build_tree(&x, &g, &h, &p).unwrap();
        let (
            CartNode::Split {
                feature: cf,
                threshold: ct,
                ..
            },
            Node::Split {
                feature: bf,
                threshold: bt,
                ..
            },
        ) = (&cart.nodes[0], &tree.nodes[0])
        else {
            panic!("both should split");
        };
        assert_eq!((cf, ct), (bf, bt));
    }
}
