//! Test-set accuracy and confusion matrices.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_lengths(predicted: &[usize], truth: &[usize]) -> Result<()> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

/// Fraction of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(predicted, truth)?;
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// `K x K` counts, rows are true classes and columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(n_classes: usize) -> Self {
        Self {
            counts: vec![vec![0; n_classes]; n_classes],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    /// Element-wise sum; both matrices must have the same size.
    pub fn add(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.n_classes() != self.n_classes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_classes(),
                got: other.n_classes(),
            });
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.n_classes()).map(|c| format!("pred_{c}")).collect();
        writeln!(w, "true,{}", header.join(","))?;
        for (c, row) in self.counts.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(w, "{c},{}", cells.join(","))?;
        }
        Ok(())
    }
}

pub fn confusion(
    predicted: &[usize],
    truth: &[usize],
    n_classes: usize,
) -> Result<ConfusionMatrix> {
    check_lengths(predicted, truth)?;
    let mut m = ConfusionMatrix::zeros(n_classes);
    for (&p, &t) in predicted.iter().zip(truth) {
        if p >= n_classes || t >= n_classes {
            return Err(Error::InvalidParameter(format!(
                "class index {} outside 0..{n_classes}",
                p.max(t)
            )));
        }
        m.counts[t][p] += 1;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_prediction() {
        let truth: Vec<usize> = (0..30).map(|i| i % 4).collect();
        assert_eq!(accuracy(&truth, &truth).unwrap(), 1.0);
        let m = confusion(&truth, &truth, 4).unwrap();
        assert_eq!(m.trace(), 30);
        assert_eq!(m.total(), 30);
    }

    #[test]
    fn shifted_prediction() {
        let truth: Vec<usize> = (0..20).map(|i| i % 4).collect();
        let pred: Vec<usize> = truth.iter().map(|t| (t + 1) % 4).collect();
        assert_eq!(accuracy(&pred, &truth).unwrap(), 0.0);
        assert_eq!(confusion(&pred, &truth, 4).unwrap().trace(), 0);
    }

    #[test]
    fn hand_counted() {
        let truth = [0, 0, 1, 2, 3, 3];
        let pred = [0, 1, 1, 2, 3, 0];
        assert_eq!(accuracy(&pred, &truth).unwrap(), 4.0 / 6.0);
        let m = confusion(&pred, &truth, 4).unwrap();
        assert_eq!(m.row_sums(), vec![2, 1, 1, 2]);
        assert_eq!(m.counts[3][0], 1);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("true,pred_0,pred_1,pred_2,pred_3\n0,1,1,0,0\n"));
    }

    #[test]
    fn length_mismatch() {
        assert!(accuracy(&[0, 1], &[0]).is_err());
        assert!(confusion(&[0], &[0, 1], 2).is_err());
    }

    proptest! {
        #[test]
        fn accuracy_is_trace_over_total(pairs in prop::collection::vec((0usize..5, 0usize..5), 1..60)) {
            let (pred, truth): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            let m = confusion(&pred, &truth, 5).unwrap();
            prop_assert_eq!(accuracy(&pred, &truth).unwrap(), m.trace() as f64 / m.total() as f64);
            prop_assert_eq!(m.total() as usize, truth.len());
            for c in 0..5 {
                prop_assert_eq!(m.row_sums()[c] as usize, truth.iter().filter(|&&t| t == c).count());
            }
        }
    }
}
