//! Per-run records and their aggregation into the classifier x selector grid.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::config::ClassifierKind;
use crate::baselines::SelectorKind;
use crate::error::{Error, Result};

/// Outcome of one (seed, fraction, selector, classifier) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub classifier: ClassifierKind,
    pub selector: SelectorKind,
    pub seed: u64,
    pub fraction_index: usize,
    pub fraction: f64,
    pub k: usize,
    pub run_seed: u64,
    pub accuracy: Option<f64>,
    pub error: Option<String>,
}

pub fn write_runs_csv<W: Write>(runs: &[RunRecord], w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for r in runs {
        writer.serialize(r)?;
    }
    writer.flush().map_err(|e| Error::io("runs.csv", e))?;
    Ok(())
}

pub fn read_runs_csv<R: Read>(r: R) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_reader(r);
    reader
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Mean and population standard deviation; exactly zero spread when all
/// values are equal.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    let first = *values.first()?;
    if values.iter().all(|&v| v == first) {
        return Some((first, 0.0));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub classifier: ClassifierKind,
    pub selector: SelectorKind,
    /// Present only when every contributing run succeeded.
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub runs: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionCell {
    pub classifier: ClassifierKind,
    pub selector: SelectorKind,
    pub fraction: f64,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub runs: usize,
    pub failures: usize,
}

/// Pooled statistics per (classifier, selector) plus the per-fraction view,
/// both in canonical classifier and selector order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub cells: Vec<Cell>,
    pub per_fraction: Vec<FractionCell>,
}

#[derive(Default)]
struct Bucket {
    accuracies: Vec<f64>,
    failures: usize,
}

impl Bucket {
    fn push(&mut self, r: &RunRecord) {
        match (r.accuracy, &r.error) {
            (Some(a), None) => self.accuracies.push(a),
            _ => self.failures += 1,
        }
    }

    fn stats(&self) -> (Option<f64>, Option<f64>) {
        if self.failures > 0 {
            return (None, None);
        }
        match mean_std(&self.accuracies) {
            Some((m, s)) => (Some(m), Some(s)),
            None => (None, None),
        }
    }
}

impl ResultsTable {
    /// Aggregation is keyed, so the order of `runs` does not matter beyond
    /// the order accuracies are summed in, which follows (seed, fraction).
    pub fn from_runs(runs: &[RunRecord]) -> Self {
        let mut sorted: Vec<&RunRecord> = runs.iter().collect();
        sorted.sort_by(|a, b| {
            (a.classifier, a.selector, a.seed, a.fraction_index).cmp(&(
                b.classifier,
                b.selector,
                b.seed,
                b.fraction_index,
            ))
        });
        let mut pooled: BTreeMap<(ClassifierKind, SelectorKind), Bucket> = BTreeMap::new();
        let mut by_fraction: BTreeMap<(ClassifierKind, SelectorKind, usize), (f64, Bucket)> =
            BTreeMap::new();
        for r in sorted {
            pooled
                .entry((r.classifier, r.selector))
                .or_default()
                .push(r);
            by_fraction
                .entry((r.classifier, r.selector, r.fraction_index))
                .or_insert_with(|| (r.fraction, Bucket::default()))
                .1
                .push(r);
        }
        let cells = pooled
            .into_iter()
            .map(|((classifier, selector), b)| {
                let (mean, std) = b.stats();
                Cell {
                    classifier,
                    selector,
                    mean,
                    std,
                    runs: b.accuracies.len(),
                    failures: b.failures,
                }
            })
            .collect();
        let per_fraction = by_fraction
            .into_iter()
            .map(|((classifier, selector, _), (fraction, b))| {
                let (mean, std) = b.stats();
                FractionCell {
                    classifier,
                    selector,
                    fraction,
                    mean,
                    std,
                    runs: b.accuracies.len(),
                    failures: b.failures,
                }
            })
            .collect();
        Self {
            cells,
            per_fraction,
        }
    }

    pub fn cell(&self, classifier: ClassifierKind, selector: SelectorKind) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.classifier == classifier && c.selector == selector)
    }

    pub fn mean(&self, classifier: ClassifierKind, selector: SelectorKind) -> Option<f64> {
        self.cell(classifier, selector).and_then(|c| c.mean)
    }

    pub fn total_failures(&self) -> usize {
        self.cells.iter().map(|c| c.failures).sum()
    }

    /// `classifier,selector,mean,std,runs`; mean and std are left empty for
    /// cells with failed runs.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("classifier,selector,mean,std,runs\n");
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                c.classifier.name(),
                c.selector.name(),
                fmt_opt(c.mean),
                fmt_opt(c.std),
                c.runs
            );
        }
        s
    }

    pub fn per_fraction_csv(&self) -> String {
        let mut s = String::from("classifier,selector,fraction,mean,std,runs,failures\n");
        for c in &self.per_fraction {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                c.classifier.name(),
                c.selector.name(),
                c.fraction,
                fmt_opt(c.mean),
                fmt_opt(c.std),
                c.runs,
                c.failures
            );
        }
        s
    }

    /// Aligned grid, one row per classifier and one column per selector.
    pub fn to_text(&self) -> String {
        let mut classifiers: Vec<ClassifierKind> =
            self.cells.iter().map(|c| c.classifier).collect();
        classifiers.dedup();
        let mut selectors: Vec<SelectorKind> = self.cells.iter().map(|c| c.selector).collect();
        selectors.sort();
        selectors.dedup();
        let cell_text = |c: Option<&Cell>| match c {
            None => "-".to_string(),
            Some(c) if c.failures > 0 => format!("failed {}/{}", c.failures, c.failures + c.runs),
            Some(c) => match (c.mean, c.std) {
                (Some(m), Some(s)) => format!("{m:.3} +/- {s:.3}"),
                _ => "-".to_string(),
            },
        };
        let mut rows: Vec<Vec<String>> = vec![std::iter::once("Classifier".to_string())
            .chain(selectors.iter().map(|s| s.label().to_string()))
            .collect()];
        for &clf in &classifiers {
            rows.push(
                std::iter::once(clf.label().to_string())
                    .chain(selectors.iter().map(|&sel| cell_text(self.cell(clf, sel))))
                    .collect(),
            );
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|j| rows.iter().map(|r| r[j].len()).max().unwrap_or(0))
            .collect();
        let mut s = String::new();
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(j, (v, w))| {
                    if j == 0 {
                        format!("{v:<w$}")
                    } else {
                        format!("{v:>w$}")
                    }
                })
                .collect();
            let _ = writeln!(s, "{}", line.join("  ").trim_end());
        }
        s
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(classifier: ClassifierKind, seed: u64, fi: usize, acc: Option<f64>) -> RunRecord {
        RunRecord {
            classifier,
            selector: SelectorKind::Raw,
            seed,
            fraction_index: fi,
            fraction: [0.25, 0.5, 0.75][fi],
            k: 1,
            run_seed: 0,
            accuracy: acc,
            error: acc.is_none().then(|| "boom, with comma".to_string()),
        }
    }

    #[test]
    fn pooled_cell_counts_runs() {
        let runs: Vec<RunRecord> = (1..=5)
            .flat_map(|s| {
                (0..3).map(move |f| record(ClassifierKind::Nb, s, f, Some(0.5 + 0.01 * f as f64)))
            })
            .collect();
        let t = ResultsTable::from_runs(&runs);
        assert_eq!(t.cells.len(), 1);
        assert_eq!(t.cells[0].runs, 15);
        assert_eq!(t.per_fraction.len(), 3);
        assert_eq!(t.per_fraction[1].std, Some(0.0));
        assert!(t
            .to_csv()
            .starts_with("classifier,selector,mean,std,runs\nnb,raw,0.510000,"));
    }

    #[test]
    fn identical_runs_have_zero_std() {
        let runs: Vec<RunRecord> = (0..15)
            .map(|i| record(ClassifierKind::Dt, i, 0, Some(0.1)))
            .collect();
        let t = ResultsTable::from_runs(&runs);
        assert_eq!(t.cells[0].std, Some(0.0));
        assert_eq!(t.cells[0].mean, Some(0.1));
    }

    #[test]
    fn failures_block_the_mean() {
        let runs = vec![
            record(ClassifierKind::Lr, 1, 0, Some(0.9)),
            record(ClassifierKind::Lr, 2, 0, None),
        ];
        let t = ResultsTable::from_runs(&runs);
        assert_eq!(t.cells[0].mean, None);
        assert_eq!(t.cells[0].failures, 1);
        assert!(t.to_text().contains("failed 1/2"));
        assert!(t.to_csv().ends_with("lr,raw,,,1\n"));
    }

    #[test]
    fn runs_csv_round_trip() {
        let runs = vec![
            record(ClassifierKind::PsoFuzzyXgb, 1, 2, Some(0.123456789)),
            record(ClassifierKind::Nb, 2, 0, None),
        ];
        let mut buf = Vec::new();
        write_runs_csv(&runs, &mut buf).unwrap();
        assert_eq!(read_runs_csv(buf.as_slice()).unwrap(), runs);
    }

    proptest! {
        #[test]
        fn order_independent(accs in prop::collection::vec(0.0f64..1.0, 6), rot in 0usize..6) {
            let mut runs: Vec<RunRecord> = accs
                .iter()
                .enumerate()
                .map(|(i, &a)| record(ClassifierKind::ALL[i % 2], i as u64, i % 3, Some(a)))
                .collect();
            let a = ResultsTable::from_runs(&runs);
            runs.rotate_left(rot);
            prop_assert_eq!(a.clone(), ResultsTable::from_runs(&runs));
            for c in &a.cells {
                let m = c.mean.unwrap();
                prop_assert!((0.0..=1.0).contains(&m));
                prop_assert!(c.std.unwrap() >= 0.0);
            }
        }
    }
}
