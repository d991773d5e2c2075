//! The pasted stochastic integral `H . X` on the grid.
//!
//! Gains accumulate forward sums `H_i' (X_{t_{i+1}} - X^+_{t_i})` inside each
//! piece; the right jump at a reset never contributes. Two routes are
//! provided: [`integrate_schedule`] walks the path directly, and
//! [`integrate_dissected`] sums the `R^n` integrals of the dissected pieces
//! for an arbitrary reset sequence.

use thiserror::Error;

use crate::dissection::{dissect_strategy, DissectError, DissectedPiece};
use crate::path::{PathError, PiecewisePath, ResetSequence, TimeGrid};
use crate::strategy::{HoldingsSchedule, Strategy, StrategyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Dissect(#[from] DissectError),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// A real-valued process on a grid: gains `H . X` or wealth `v + H . X`.
#[derive(Clone, Debug, PartialEq)]
pub struct GainsPath {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl GainsPath {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self, PathError> {
        if values.len() != grid.len() {
            return Err(PathError::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, t: f64) -> Result<f64, PathError> {
        Ok(self.values[self.grid.locate(t)?])
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("grid has >= 2 points")
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn shifted(&self, v: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|g| v + g).collect() }
    }
}

pub fn integrate(strategy: &Strategy, path: &PiecewisePath) -> Result<GainsPath, IntegrationError> {
    let holdings = strategy.schedule(path)?;
    integrate_schedule(&holdings, path)
}

/// Direct route: one pass over the grid.
pub fn integrate_schedule(holdings: &HoldingsSchedule, path: &PiecewisePath) -> Result<GainsPath, IntegrationError> {
    holdings.check_dims(path)?;
    let n = path.grid().len();
    let mut values = Vec::with_capacity(n);
    let mut g = holdings.seed_term(path)?;
    values.push(g);
    for (i, h) in holdings.intervals().iter().enumerate() {
        let from = path.right_limit_at_index(i)?;
        let to = path.value_at_index(i + 1);
        g += h.dot(&to.sub(from)?)?;
        values.push(g);
    }
    Ok(GainsPath { grid: path.grid().clone(), values })
}

/// `(H^{k,n} . X^{k,n})` on the full grid for one dissected piece.
pub fn piece_integral(piece: &DissectedPiece) -> Vec<f64> {
    let h = piece.strategy_values.as_ref().expect("piece was dissected with a strategy");
    let mut out = Vec::with_capacity(piece.values.len());
    let mut acc = 0.0;
    out.push(acc);
    for i in 1..piece.values.len() {
        let dx = piece.values[i].sub(&piece.values[i - 1]).expect("constant dimension");
        acc += h[i].dot(&dx).expect("constant dimension");
        out.push(acc);
    }
    out
}

/// Dissection route: `H_0' X_0 + sum_k (H^{k,n} . X^{k,n})` under `resets`.
pub fn integrate_dissected(
    holdings: &HoldingsSchedule,
    path: &PiecewisePath,
    resets: &ResetSequence,
) -> Result<GainsPath, IntegrationError> {
    let pieces = dissect_strategy(holdings, path, resets)?;
    let seed = holdings.seed_term(path)?;
    let mut values = vec![seed; path.grid().len()];
    for p in &pieces {
        for (v, x) in values.iter_mut().zip(piece_integral(p)) {
            *v += x;
        }
    }
    Ok(GainsPath { grid: path.grid().clone(), values })
}

/// Gains level at a reset time computed from the pieces up to it (`before`)
/// and the level the next piece starts from (`after`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResetLevel {
    pub time: f64,
    pub before: f64,
    pub after: f64,
}

/// Gains on both sides of every reset after `tau_0`.
pub fn reset_levels(
    holdings: &HoldingsSchedule,
    path: &PiecewisePath,
    resets: &ResetSequence,
) -> Result<Vec<ResetLevel>, IntegrationError> {
    let pieces = dissect_strategy(holdings, path, resets)?;
    let integrals: Vec<Vec<f64>> = pieces.iter().map(piece_integral).collect();
    let seed = holdings.seed_term(path)?;
    Ok(pieces
        .iter()
        .skip(1)
        .map(|next| {
            let at = next.start;
            let level = |upto: usize| integrals[..upto].iter().fold(seed, |acc, x| acc + x[at]);
            ResetLevel { time: path.grid().time(at), before: level(next.k - 1), after: level(next.k) }
        })
        .collect())
}

/// Freezing a process at a grid stopping time.
pub trait Stop: Sized {
    fn stop_at(&self, alpha: f64) -> Result<Self, IntegrationError>;
}

impl Stop for GainsPath {
    fn stop_at(&self, alpha: f64) -> Result<Self, IntegrationError> {
        let a = self.grid.locate(alpha)?;
        let frozen = self.values[a];
        let values = self.values.iter().enumerate().map(|(i, &v)| if i <= a { v } else { frozen }).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }
}

impl Stop for PiecewisePath {
    fn stop_at(&self, alpha: f64) -> Result<Self, IntegrationError> {
        let a = self.grid().locate(alpha)?;
        Ok(self.stopped_at_index(a))
    }
}

/// Smallest `H' dX` over the marked left-jump times, `+inf` when none are
/// marked. Times that are not grid points after 0 are rejected.
pub fn jump_exposure(
    holdings: &HoldingsSchedule,
    path: &PiecewisePath,
    jump_times: &[f64],
) -> Result<f64, IntegrationError> {
    holdings.check_dims(path)?;
    let mut worst = f64::INFINITY;
    for &t in jump_times {
        let i = path.grid().locate(t)?;
        if i == 0 {
            return Err(PathError::NotOnGrid(t).into());
        }
        let dx = path.value_at_index(i).sub(path.right_limit_at_index(i - 1)?)?;
        worst = worst.min(holdings.intervals()[i - 1].dot(&dx)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::tests::{dv, worked_path};
    use crate::path::{PathBuilder, TimeGrid};
    use crate::strategy::NamedRule;

    fn w_strategy() -> Strategy {
        Strategy::step(Some(dv(&[0.0, 0.0])), vec![(0.0, dv(&[1.0, 1.0])), (2.0, dv(&[1.0, 1.0, 2.0]))])
    }

    /// Independent oracle: brute-force increment sum read straight off the
    /// worked example's numbers.
    fn brute_force_w_gains() -> Vec<f64> {
        let x = [[10.0, 20.0], [11.0, 19.0], [12.0, 21.0]];
        let mut g = vec![0.0];
        for i in 0..2 {
            g.push(g[i] + (x[i + 1][0] - x[i][0]) + (x[i + 1][1] - x[i][1]));
        }
        // (2, 3]: from X2+ = (12,21,5) to X3 = (13,20,6) with H = (1,1,2)
        g.push(g[2] + (13.0 - 12.0) + (20.0 - 21.0) + 2.0 * (6.0 - 5.0));
        g
    }

    #[test]
    fn worked_path_gains() {
        let w = worked_path();
        let expect = brute_force_w_gains();
        assert_eq!(expect, vec![0.0, 0.0, 3.0, 5.0]);
        let g = integrate(&w_strategy(), &w).unwrap();
        assert_eq!(g.values(), expect.as_slice());
        let h = w_strategy().schedule(&w).unwrap();
        let r = ResetSequence::new(vec![0, 2], w.grid()).unwrap();
        assert_eq!(integrate_dissected(&h, &w, &r).unwrap().values(), expect.as_slice());
    }

    #[test]
    fn buy_and_hold_telescopes() {
        let grid = TimeGrid::uniform(2.0, 4).unwrap();
        let mut b = PathBuilder::on_grid(grid, dv(&[3.0, 1.0]), dv(&[3.0, 1.0]));
        for x in [[3.5, 1.0], [2.75, 0.5], [4.0, 0.25], [5.5, 2.0]] {
            b.push(dv(&x)).unwrap();
        }
        let p = b.finish().unwrap();
        let g = integrate(&NamedRule::ConstantShare { asset: 0, shares: 1.0 }.into(), &p).unwrap();
        assert_eq!(g.terminal(), 5.5 - 3.0);
    }

    #[test]
    fn zero_strategy_has_zero_gains() {
        let g = integrate(&Strategy::zero(), &worked_path()).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn seed_term_enters_at_zero() {
        let w = worked_path();
        let s = w_strategy().schedule(&w).unwrap().with_initial(Some(dv(&[1.0, 2.0])));
        let g = integrate_schedule(&s, &w).unwrap();
        assert_eq!(g.values(), &[50.0, 50.0, 53.0, 55.0]);
    }

    #[test]
    fn stopping() {
        let w = worked_path();
        let g = integrate(&w_strategy(), &w).unwrap();
        assert_eq!(g.stop_at(2.0).unwrap().values(), &[0.0, 0.0, 3.0, 3.0]);
        assert_eq!(g.stop_at(3.0).unwrap(), g);
        assert_eq!(g.stop_at(0.0).unwrap().values(), &[0.0; 4]);
        assert!(g.stop_at(2.5).is_err());

        // restricting the integrand to [0, alpha] instead
        let h = w_strategy().schedule(&w).unwrap();
        assert_eq!(integrate_schedule(&h.restricted_to(2), &w).unwrap().values(), &[0.0, 0.0, 3.0, 3.0]);
    }

    #[test]
    fn reset_levels_are_conserved() {
        let w = worked_path();
        let h = w_strategy().schedule(&w).unwrap();
        let r = ResetSequence::new(vec![0, 1, 2], w.grid()).unwrap();
        let levels = reset_levels(&h, &w, &r).unwrap();
        assert_eq!(levels.len(), 2);
        assert_eq!(levels[1], ResetLevel { time: 2.0, before: 3.0, after: 3.0 });
    }

    #[test]
    fn jump_exposure_cases() {
        let w = worked_path();
        let h = w_strategy().schedule(&w).unwrap();
        assert_eq!(jump_exposure(&h, &w, &[]).unwrap(), f64::INFINITY);

        // bankruptcy: 10 -> 0 at t=1, then the asset is removed
        let grid = TimeGrid::uniform(2.0, 2).unwrap();
        let mut b = PathBuilder::on_grid(grid, dv(&[10.0, 4.0]), dv(&[10.0, 4.0]));
        b.push(dv(&[0.0, 4.5])).unwrap();
        b.reset(dv(&[4.5])).unwrap();
        b.push(dv(&[5.0])).unwrap();
        let p = b.finish().unwrap();
        let one = Strategy::named(NamedRule::ConstantShare { asset: 0, shares: 1.0 }).schedule(&p).unwrap();
        assert_eq!(jump_exposure(&one, &p, &[1.0]).unwrap(), -10.0);
        let zero = Strategy::zero().schedule(&p).unwrap();
        assert_eq!(jump_exposure(&zero, &p, &[1.0]).unwrap(), 0.0);
    }
}
