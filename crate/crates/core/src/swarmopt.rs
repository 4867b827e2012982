//! Global-best particle swarm optimization over a bounded box, and its use
//! for tuning booster depth and learning rate.

use std::io::Write;

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::boostforest::{self, BoostParams};
use crate::dataspace::{self, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::harness::metrics::accuracy;
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwarmParams {
    pub swarm_size: usize,
    pub max_iters: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
}

impl Default for SwarmParams {
    fn default() -> Self {
        Self {
            swarm_size: 50,
            max_iters: 100,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            seed: 0,
        }
    }
}

impl SwarmParams {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 || self.max_iters < 1 {
            return Err(Error::InvalidParameter(format!(
                "swarm needs swarm_size >= 2 and max_iters >= 1 (got {} and {})",
                self.swarm_size, self.max_iters
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimKind {
    Continuous,
    Integer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub lower: f64,
    pub upper: f64,
    pub kind: DimKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub dims: Vec<Dimension>,
}

impl SearchBox {
    pub fn new(dims: Vec<Dimension>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidParameter(
                "search box has no dimensions".into(),
            ));
        }
        for (i, d) in dims.iter().enumerate() {
            if !(d.lower.is_finite() && d.upper.is_finite() && d.lower < d.upper) {
                return Err(Error::InvalidParameter(format!(
                    "dimension {i}: need finite lower < upper, got [{}, {}]",
                    d.lower, d.upper
                )));
            }
        }
        Ok(Self { dims })
    }

    pub fn continuous(n: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![
            Dimension {
                lower,
                upper,
                kind: DimKind::Continuous
            };
            n
        ])
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// The point actually handed to the objective: integer dimensions
    /// rounded to the nearest integer, everything clipped to the box.
    pub fn evaluation_point(&self, position: &[f64]) -> Vec<f64> {
        position
            .iter()
            .zip(&self.dims)
            .map(|(&x, d)| {
                let x = match d.kind {
                    DimKind::Continuous => x,
                    DimKind::Integer => x.round(),
                };
                x.clamp(d.lower, d.upper)
            })
            .collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point
            .iter()
            .zip(&self.dims)
            .all(|(&x, d)| x >= d.lower && x <= d.upper)
    }
}

/// Full optimizer state after the last iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub personal_best: Vec<(Vec<f64>, f64)>,
    /// Evaluated (rounded) position and its cost.
    pub global_best: (Vec<f64>, f64),
    /// Global best cost after each iteration.
    pub trace: Vec<f64>,
    /// Costs of the initial positions, before any velocity update.
    pub initial_costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmOutcome {
    pub best_position: Vec<f64>,
    pub best_cost: f64,
    pub trace: Vec<f64>,
}

impl From<&SwarmState> for SwarmOutcome {
    fn from(s: &SwarmState) -> Self {
        Self {
            best_position: s.global_best.0.clone(),
            best_cost: s.global_best.1,
            trace: s.trace.clone(),
        }
    }
}

pub fn optimize<F>(objective: F, bounds: &SearchBox, params: &SwarmParams) -> Result<SwarmOutcome>
where
    F: FnMut(&[f64]) -> f64,
{
    run_swarm(objective, bounds, params).map(|s| SwarmOutcome::from(&s))
}

/// Standard global-best PSO with velocity clamping at 20% of each range and
/// position clipping. Each particle draws from its own stream seeded by
/// `(seed, iteration, particle)`; best updates are reduced in particle order.
pub fn run_swarm<F>(
    mut objective: F,
    bounds: &SearchBox,
    params: &SwarmParams,
) -> Result<SwarmState>
where
    F: FnMut(&[f64]) -> f64,
{
    params.validate()?;
    let dims = bounds.len();
    let vmax: Vec<f64> = bounds
        .dims
        .iter()
        .map(|d| 0.2 * (d.upper - d.lower))
        .collect();

    let mut evaluate = |x: &[f64]| -> Result<(Vec<f64>, f64)> {
        let point = bounds.evaluation_point(x);
        let cost = objective(&point);
        if !cost.is_finite() {
            return Err(Error::NonFiniteObjective {
                value: cost,
                position: point,
            });
        }
        Ok((point, cost))
    };

    let mut positions = Vec::with_capacity(params.swarm_size);
    let mut velocities = Vec::with_capacity(params.swarm_size);
    for i in 0..params.swarm_size {
        let mut rng = seeding::rng(seeding::derive(params.seed, &[0, i as u64]));
        let x: Vec<f64> = bounds
            .dims
            .iter()
            .map(|d| rng.random_range(d.lower..=d.upper))
            .collect();
        let v: Vec<f64> = vmax.iter().map(|&m| rng.random_range(-m..=m)).collect();
        positions.push(x);
        velocities.push(v);
    }

    let mut personal_best = Vec::with_capacity(params.swarm_size);
    let mut initial_costs = Vec::with_capacity(params.swarm_size);
    for x in &positions {
        let (point, cost) = evaluate(x)?;
        initial_costs.push(cost);
        // personal bests keep the continuous position for attraction
        personal_best.push((x.clone(), cost, point));
    }
    let mut best_idx = 0;
    for (i, pb) in personal_best.iter().enumerate() {
        if pb.1 < personal_best[best_idx].1 {
            best_idx = i;
        }
    }
    let mut global = personal_best[best_idx].clone();

    let mut trace = Vec::with_capacity(params.max_iters);
    for iter in 1..=params.max_iters {
        for i in 0..params.swarm_size {
            let mut rng = seeding::rng(seeding::derive(params.seed, &[iter as u64, i as u64]));
            let x = &mut positions[i];
            let v = &mut velocities[i];
            for j in 0..dims {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let vj = params.inertia * v[j]
                    + params.cognitive * r1 * (personal_best[i].0[j] - x[j])
                    + params.social * r2 * (global.0[j] - x[j]);
                v[j] = vj.clamp(-vmax[j], vmax[j]);
                let d = &bounds.dims[j];
                x[j] = (x[j] + v[j]).clamp(d.lower, d.upper);
            }
        }
        for i in 0..params.swarm_size {
            let (point, cost) = evaluate(&positions[i])?;
            if cost < personal_best[i].1 {
                personal_best[i] = (positions[i].clone(), cost, point);
            }
            if personal_best[i].1 < global.1 {
                global = personal_best[i].clone();
            }
        }
        trace.push(global.1);
    }

    Ok(SwarmState {
        positions,
        velocities,
        personal_best: personal_best.into_iter().map(|(x, c, _)| (x, c)).collect(),
        global_best: (global.2, global.1),
        trace,
        initial_costs,
    })
}

/// Data the tuning objective is scored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveScope {
    /// Fit on 80% of the training set, score on the held-out 20%.
    #[default]
    InnerVal,
    /// Fit and score on the full training set.
    Train,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneConfig {
    pub swarm: SwarmParams,
    pub objective_scope: ObjectiveScope,
    /// Boosting rounds used inside the objective.
    pub tune_rounds: usize,
    pub inner_train_ratio: f64,
    pub max_depth_bounds: (usize, usize),
    pub learning_rate_bounds: (f64, f64),
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            swarm: SwarmParams::default(),
            objective_scope: ObjectiveScope::InnerVal,
            tune_rounds: 50,
            inner_train_ratio: 0.8,
            max_depth_bounds: (3, 10),
            learning_rate_bounds: (0.01, 0.3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub max_depth: usize,
    pub learning_rate: f64,
    pub best_cost: f64,
    pub trace: Vec<f64>,
}

impl TuneOutcome {
    /// `base` with the tuned depth and learning rate.
    pub fn apply(&self, base: &BoostParams) -> BoostParams {
        BoostParams {
            max_depth: self.max_depth,
            learning_rate: self.learning_rate,
            ..*base
        }
    }
}

/// Searches `max_depth` (integer) and `learning_rate` (continuous) to
/// minimize `1 - accuracy` of a booster trained with `config.tune_rounds`.
pub fn tune_booster(
    train: &Dataset,
    base: &BoostParams,
    config: &TuneConfig,
) -> Result<TuneOutcome> {
    let (fit_set, score_set) = match config.objective_scope {
        ObjectiveScope::InnerVal => {
            let spec = SplitSpec {
                train_ratio: config.inner_train_ratio,
                seed: seeding::derive(config.swarm.seed, &[0x1_22e7]),
                stratified: true,
            };
            dataspace::split(train, &spec)?
        }
        ObjectiveScope::Train => (train.clone(), train.clone()),
    };
    let (dlo, dhi) = config.max_depth_bounds;
    let (llo, lhi) = config.learning_rate_bounds;
    let bounds = SearchBox::new(vec![
        Dimension {
            lower: dlo as f64,
            upper: dhi as f64,
            kind: DimKind::Integer,
        },
        Dimension {
            lower: llo,
            upper: lhi,
            kind: DimKind::Continuous,
        },
    ])?;
    let mut failure: Option<Error> = None;
    let objective = |p: &[f64]| -> f64 {
        let params = BoostParams {
            max_depth: p[0] as usize,
            learning_rate: p[1],
            n_rounds: config.tune_rounds,
            ..*base
        };
        let fitted = boostforest::fit(
            fit_set.features(),
            fit_set.labels(),
            train.n_classes(),
            &params,
        )
        .and_then(|m| m.predict(score_set.features()));
        match fitted {
            Ok(pred) => 1.0 - accuracy(&pred, score_set.labels()).expect("lengths agree"),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let outcome = optimize(objective, &bounds, &config.swarm);
    if let Some(e) = failure {
        return Err(e);
    }
    let outcome = outcome?;
    Ok(TuneOutcome {
        max_depth: outcome.best_position[0] as usize,
        learning_rate: outcome.best_position[1],
        best_cost: outcome.best_cost,
        trace: outcome.trace,
    })
}

/// `iteration,best_cost` rows, iterations counted from 1.
pub fn write_trace_csv<W: Write>(trace: &[f64], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "iteration,best_cost")?;
    for (i, c) in trace.iter().enumerate() {
        writeln!(w, "{},{c:.6}", i + 1)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn sphere_converges() {
        let bounds = SearchBox::continuous(2, -5.0, 5.0).unwrap();
        let out = optimize(
            sphere,
            &bounds,
            &SwarmParams {
                seed: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out.best_cost < 1e-3, "{}", out.best_cost);
        assert_eq!(out.trace.len(), 100);
    }

    #[test]
    fn flat_objective() {
        let bounds = SearchBox::continuous(3, -1.0, 1.0).unwrap();
        let params = SwarmParams {
            swarm_size: 5,
            max_iters: 7,
            ..Default::default()
        };
        let out = optimize(|_| 2.5, &bounds, &params).unwrap();
        assert_eq!(out.best_cost, 2.5);
        assert_eq!(out.trace, vec![2.5; 7]);
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let bounds = SearchBox::continuous(1, 0.0, 1.0).unwrap();
        let err = optimize(|_| f64::NAN, &bounds, &SwarmParams::default()).unwrap_err();
        match err {
            Error::NonFiniteObjective { position, .. } => assert_eq!(position.len(), 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(SearchBox::continuous(1, 1.0, 1.0).is_err());
        let bounds = SearchBox::continuous(1, 0.0, 1.0).unwrap();
        let p = SwarmParams {
            swarm_size: 1,
            ..Default::default()
        };
        assert!(optimize(sphere, &bounds, &p).is_err());
    }

    #[test]
    fn integer_dimensions_are_rounded_before_evaluation() {
        let bounds = SearchBox::new(vec![
            Dimension {
                lower: 3.0,
                upper: 10.0,
                kind: DimKind::Integer,
            },
            Dimension {
                lower: 0.01,
                upper: 0.3,
                kind: DimKind::Continuous,
            },
        ])
        .unwrap();
        let mut seen = Vec::new();
        let params = SwarmParams {
            swarm_size: 8,
            max_iters: 10,
            seed: 5,
            ..Default::default()
        };
        let out = optimize(
            |p| {
                seen.push(p.to_vec());
                (p[0] - 7.0).powi(2) + (p[1] - 0.1).powi(2)
            },
            &bounds,
            &params,
        )
        .unwrap();
        assert_eq!(seen.len(), 8 * 11);
        for p in &seen {
            assert_eq!(p[0], p[0].round());
            assert!(bounds.contains(p));
        }
        assert_eq!(out.best_position[0], 7.0);
    }

    #[test]
    fn velocities_shrink_without_attraction() {
        let bounds = SearchBox::continuous(2, -3.0, 3.0).unwrap();
        let base = SwarmParams {
            swarm_size: 6,
            cognitive: 0.0,
            social: 0.0,
            inertia: 0.6,
            seed: 2,
            ..Default::default()
        };
        let mut last: Option<Vec<f64>> = None;
        for iters in 1..15 {
            let state = run_swarm(
                sphere,
                &bounds,
                &SwarmParams {
                    max_iters: iters,
                    ..base
                },
            )
            .unwrap();
            let norms: Vec<f64> = state.velocities.iter().map(|v| sphere(v).sqrt()).collect();
            if let Some(prev) = &last {
                for (a, b) in norms.iter().zip(prev) {
                    assert!(a <= b);
                }
            }
            last = Some(norms);
        }
    }

    #[test]
    fn tuning_respects_box() {
        let ds = dataspace::synth(120, 5, 3, 3.0, 4).unwrap();
        let cfg = TuneConfig {
            swarm: SwarmParams {
                swarm_size: 4,
                max_iters: 3,
                seed: 1,
                ..Default::default()
            },
            tune_rounds: 5,
            ..Default::default()
        };
        let out = tune_booster(&ds, &BoostParams::default(), &cfg).unwrap();
        assert!((3..=10).contains(&out.max_depth));
        assert!((0.01..=0.3).contains(&out.learning_rate));
        assert_eq!(out.trace.len(), 3);
        assert_eq!(
            out,
            tune_booster(&ds, &BoostParams::default(), &cfg).unwrap()
        );
    }

    #[test]
    fn tuning_needs_two_samples_per_class() {
        let ds = dataspace::synth(7, 2, 4, 3.0, 0).unwrap();
        let ds = ds.subset(&[0, 1, 2, 3, 4, 5]);
        assert!(matches!(
            tune_booster(&ds, &BoostParams::default(), &TuneConfig::default()),
            Err(Error::ClassTooSmall { .. })
        ));
    }

    #[test]
    fn trace_csv_format() {
        let mut buf = Vec::new();
        write_trace_csv(&[0.5, 0.25], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "iteration,best_cost\n1,0.500000\n2,0.250000\n"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn trace_monotone_and_bounded_by_initial(seed in 0u64..1000, shift in -2.0f64..2.0) {
            let bounds = SearchBox::continuous(3, -4.0, 4.0).unwrap();
            let params = SwarmParams { swarm_size: 10, max_iters: 20, seed, ..Default::default() };
            let f = |x: &[f64]| x.iter().map(|v| (v - shift).powi(2) + (3.0 * v).sin()).sum::<f64>();
            let state = run_swarm(f, &bounds, &params).unwrap();
            for w in state.trace.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
            let best_initial = state.initial_costs.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!(state.global_best.1 <= best_initial);
            let min_pb = state.personal_best.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(state.global_best.1, min_pb);
            let again = run_swarm(f, &bounds, &params).unwrap();
            prop_assert_eq!(again, state);
        }
    }
}
