//! Predictable holdings processes.
//!
//! A strategy is turned into a [`HoldingsSchedule`] on a concrete path: one
//! holdings vector per grid interval `(t_i, t_{i+1}]`, chosen with information
//! up to `t_i` only, plus the optional time-0 holdings `H_0`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::path::{DimensionedVector, PathError, PiecewisePath};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("holdings at t={time} have dimension {found}, price process has dimension {expected}")]
    DimensionMismatch { time: f64, expected: usize, found: usize },
    #[error("rebalance time {0} is not on the grid")]
    NotOnGrid(f64),
    #[error("rebalance times must be strictly increasing ({0} after {1})")]
    Unordered(f64, f64),
    #[error("schedules are defined on different grids")]
    GridMismatch,
    #[error(transparent)]
    Path(#[from] PathError),
}

/// What a rule may look at when choosing holdings for `(t_i, t_{i+1}]`: the
/// path up to and including `t_i`, and the right limit `X^+_{t_i}`.
pub struct History<'a> {
    path: &'a PiecewisePath,
    index: usize,
}

impl<'a> History<'a> {
    pub(crate) fn new(path: &'a PiecewisePath, index: usize) -> Self {
        Self { path, index }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn time(&self) -> f64 {
        self.path.grid().time(self.index)
    }

    /// Observation times up to now.
    pub fn times(&self) -> &'a [f64] {
        &self.path.grid().times()[..=self.index]
    }

    /// `X` at an earlier or current grid index.
    pub fn value(&self, j: usize) -> Option<&'a DimensionedVector> {
        (j <= self.index).then(|| self.path.value_at_index(j))
    }

    /// `X^+_{t_i}`: the state the next holdings are applied to.
    pub fn current(&self) -> &'a DimensionedVector {
        self.path.right_limit_at_index(self.index).expect("history never reaches the horizon")
    }

    pub fn dim(&self) -> usize {
        self.current().dim()
    }

    /// Whether a new piece starts now.
    pub fn at_reset(&self) -> bool {
        self.path.piece_starting_at(self.index).is_some_and(|p| p.start() > 0)
    }
}

/// A holdings rule evaluated on the history of a path.
pub trait HoldingsRule: Send + Sync + fmt::Debug {
    fn holdings(&self, history: &History<'_>) -> DimensionedVector;
}

/// Rules selectable from configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum NamedRule {
    /// One share of every asset currently listed.
    BuyHold,
    /// One unit of currency spread equally by value over the listed assets,
    /// re-struck at every grid time.
    EqualWeight,
    /// A fixed number of shares of one asset (zero while it is not listed).
    ConstantShare { asset: usize, shares: f64 },
    /// Short one share of the first asset.
    ShortOne,
}

impl HoldingsRule for NamedRule {
    fn holdings(&self, history: &History<'_>) -> DimensionedVector {
        let x = history.current();
        let n = x.dim();
        match self {
            NamedRule::BuyHold => DimensionedVector::filled(n, 1.0),
            NamedRule::EqualWeight => {
                let w = 1.0 / n as f64;
                let h: smallvec::SmallVec<[f64; 4]> =
                    x.as_slice().iter().map(|&p| if p != 0.0 { w / p } else { 0.0 }).collect();
                DimensionedVector::from_smallvec(h)
            }
            NamedRule::ConstantShare { asset, shares } => {
                let mut h = DimensionedVector::zeros(n).as_slice().to_vec();
                if let Some(slot) = h.get_mut(*asset) {
                    *slot = *shares;
                }
                DimensionedVector::new(&h).expect("n >= 1")
            }
            NamedRule::ShortOne => {
                let mut h = vec![0.0; n];
                h[0] = -1.0;
                DimensionedVector::new(&h).expect("n >= 1")
            }
        }
    }
}

/// Holdings `H_i` on `(alpha_i, alpha_{i+1}]`, the last one held to the
/// horizon. Before the first rebalance time the holdings are `0^(N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepStrategy {
    pub initial: Option<DimensionedVector>,
    pub steps: Vec<(f64, DimensionedVector)>,
}

#[derive(Clone, Debug)]
pub enum Strategy {
    Step(StepStrategy),
    Rule { initial: Option<DimensionedVector>, rule: Arc<dyn HoldingsRule> },
    /// `sum_j a_j H^j`.
    Combination(Vec<(f64, Strategy)>),
}

impl Strategy {
    pub fn step(initial: Option<DimensionedVector>, steps: Vec<(f64, DimensionedVector)>) -> Self {
        Strategy::Step(StepStrategy { initial, steps })
    }

    pub fn rule(rule: impl HoldingsRule + 'static) -> Self {
        Strategy::Rule { initial: None, rule: Arc::new(rule) }
    }

    pub fn named(rule: NamedRule) -> Self {
        Self::rule(rule)
    }

    /// The zero strategy `0^(N)`.
    pub fn zero() -> Self {
        Strategy::Combination(Vec::new())
    }

    pub fn linear(a: f64, h: Strategy, b: f64, g: Strategy) -> Self {
        Strategy::Combination(vec![(a, h), (b, g)])
    }

    /// Holdings on every grid interval of `path`.
    pub fn schedule(&self, path: &PiecewisePath) -> Result<HoldingsSchedule, StrategyError> {
        let grid = path.grid();
        let last = grid.last_index();
        let schedule = match self {
            Strategy::Step(s) => {
                let mut alphas = Vec::with_capacity(s.steps.len());
                for (t, _) in &s.steps {
                    let i = grid.locate(*t).map_err(|_| StrategyError::NotOnGrid(*t))?;
                    if let Some(&(prev, _)) = alphas.last() {
                        if i <= prev {
                            return Err(StrategyError::Unordered(*t, grid.time(prev)));
                        }
                    }
                    alphas.push((i, *t));
                }
                let mut intervals = Vec::with_capacity(last);
                let mut active: Option<usize> = None;
                let mut next = 0;
                for i in 0..last {
                    while next < alphas.len() && alphas[next].0 <= i {
                        active = Some(next);
                        next += 1;
                    }
                    intervals.push(match active {
                        Some(a) => s.steps[a].1.clone(),
                        None => DimensionedVector::zeros(path.dim_at(i + 1)),
                    });
                }
                HoldingsSchedule { initial: s.initial.clone(), intervals }
            }
            Strategy::Rule { initial, rule } => HoldingsSchedule {
                initial: initial.clone(),
                intervals: (0..last).map(|i| rule.holdings(&History::new(path, i))).collect(),
            },
            Strategy::Combination(terms) => {
                let mut acc = HoldingsSchedule::zero(path);
                for (a, s) in terms {
                    let sched = s.schedule(path)?;
                    acc = HoldingsSchedule::combine(1.0, &acc, *a, &sched)?;
                }
                acc
            }
        };
        schedule.check_dims(path)?;
        Ok(schedule)
    }
}

impl From<NamedRule> for Strategy {
    fn from(rule: NamedRule) -> Self {
        Strategy::named(rule)
    }
}

/// A strategy materialized on one path.
#[derive(Clone, Debug, PartialEq)]
pub struct HoldingsSchedule {
    initial: Option<DimensionedVector>,
    intervals: Vec<DimensionedVector>,
}

impl HoldingsSchedule {
    pub fn new(initial: Option<DimensionedVector>, intervals: Vec<DimensionedVector>) -> Self {
        Self { initial, intervals }
    }

    pub fn zero(path: &PiecewisePath) -> Self {
        let last = path.grid().last_index();
        Self { initial: None, intervals: (1..=last).map(|i| DimensionedVector::zeros(path.dim_at(i))).collect() }
    }

    /// `H_0`; `None` stands for `0^(N_0)`.
    pub fn initial(&self) -> Option<&DimensionedVector> {
        self.initial.as_ref()
    }

    /// Holdings for `(t_i, t_{i+1}]` at position `i`.
    pub fn intervals(&self) -> &[DimensionedVector] {
        &self.intervals
    }

    pub fn with_initial(mut self, initial: Option<DimensionedVector>) -> Self {
        self.initial = initial;
        self
    }

    /// `H_0' X_0`.
    pub fn seed_term(&self, path: &PiecewisePath) -> Result<f64, StrategyError> {
        match &self.initial {
            None => Ok(0.0),
            Some(h) => Ok(h.dot(path.initial())?),
        }
    }

    pub fn check_dims(&self, path: &PiecewisePath) -> Result<(), StrategyError> {
        let grid = path.grid();
        if self.intervals.len() != grid.last_index() {
            return Err(StrategyError::GridMismatch);
        }
        if let Some(h) = &self.initial {
            if h.dim() != path.initial().dim() {
                return Err(StrategyError::DimensionMismatch { time: 0.0, expected: path.initial().dim(), found: h.dim() });
            }
        }
        for (i, h) in self.intervals.iter().enumerate() {
            let expected = path.dim_at(i + 1);
            if h.dim() != expected {
                return Err(StrategyError::DimensionMismatch { time: grid.time(i + 1), expected, found: h.dim() });
            }
        }
        Ok(())
    }

    /// `a H + b G`.
    pub fn combine(a: f64, h: &Self, b: f64, g: &Self) -> Result<Self, StrategyError> {
        if h.intervals.len() != g.intervals.len() {
            return Err(StrategyError::GridMismatch);
        }
        let initial = match (&h.initial, &g.initial) {
            (None, None) => None,
            (Some(x), None) => Some(x.scale(a)),
            (None, Some(y)) => Some(y.scale(b)),
            (Some(x), Some(y)) => Some(DimensionedVector::axpby(a, x, b, y)?),
        };
        let intervals = h
            .intervals
            .iter()
            .zip(&g.intervals)
            .map(|(x, y)| DimensionedVector::axpby(a, x, b, y))
            .collect::<Result<_, _>>()?;
        Ok(Self { initial, intervals })
    }

    /// `1_[0, alpha] H + 0^(N)` for grid index `alpha`: intervals ending after
    /// `alpha` are zeroed.
    pub fn restricted_to(&self, alpha: usize) -> Self {
        let intervals = self
            .intervals
            .iter()
            .enumerate()
            .map(|(i, h)| if i < alpha { h.clone() } else { DimensionedVector::zeros(h.dim()) })
            .collect();
        Self { initial: self.initial.clone(), intervals }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::tests::{dv, worked_path};

    #[test]
    fn step_schedule_on_worked_path() {
        let w = worked_path();
        let h = Strategy::step(Some(dv(&[0.0, 0.0])), vec![(0.0, dv(&[1.0, 1.0])), (2.0, dv(&[1.0, 1.0, 2.0]))]);
        let s = h.schedule(&w).unwrap();
        assert_eq!(s.intervals(), &[dv(&[1.0, 1.0]), dv(&[1.0, 1.0]), dv(&[1.0, 1.0, 2.0])]);
    }

    #[test]
    fn dimension_mismatch_reports_time() {
        let w = worked_path();
        let h = Strategy::step(None, vec![(0.0, dv(&[1.0, 1.0]))]);
        assert_eq!(h.schedule(&w), Err(StrategyError::DimensionMismatch { time: 3.0, expected: 3, found: 2 }));
    }

    #[test]
    fn off_grid_rebalance_is_rejected() {
        let h = Strategy::step(None, vec![(0.5, dv(&[1.0, 1.0]))]);
        assert_eq!(h.schedule(&worked_path()), Err(StrategyError::NotOnGrid(0.5)));
    }

    #[test]
    fn rules_follow_the_dimension() {
        let w = worked_path();
        let s = Strategy::named(NamedRule::BuyHold).schedule(&w).unwrap();
        assert_eq!(s.intervals()[2], dv(&[1.0, 1.0, 1.0]));
        let e = Strategy::named(NamedRule::EqualWeight).schedule(&w).unwrap();
        // at t=2 the rule sees X2+ = (12, 21, 5)
        assert_eq!(e.intervals()[2], dv(&[1.0 / 3.0 / 12.0, 1.0 / 3.0 / 21.0, 1.0 / 3.0 / 5.0]));
        let c = Strategy::named(NamedRule::ConstantShare { asset: 2, shares: 4.0 }).schedule(&w).unwrap();
        assert_eq!(c.intervals()[0], dv(&[0.0, 0.0]));
        assert_eq!(c.intervals()[2], dv(&[0.0, 0.0, 4.0]));
    }

    #[test]
    fn history_hides_the_future() {
        let w = worked_path();
        let h = History::new(&w, 1);
        assert!(h.value(2).is_none());
        assert_eq!(h.times(), &[0.0, 1.0]);
        let h2 = History::new(&w, 2);
        assert!(h2.at_reset());
        assert_eq!(h2.dim(), 3);
    }

    #[test]
    fn zero_strategy_and_combination() {
        let w = worked_path();
        let z = Strategy::zero().schedule(&w).unwrap();
        assert!(z.intervals().iter().all(|h| h.is_zero()));
        let sum = Strategy::linear(2.0, NamedRule::BuyHold.into(), -1.0, NamedRule::BuyHold.into()).schedule(&w).unwrap();
        assert_eq!(sum, Strategy::named(NamedRule::BuyHold).schedule(&w).unwrap());
    }
}
