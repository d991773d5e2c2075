//! Self-financing wealth, admissibility and the class of nonnegative wealth
//! processes.
//!
//! Wealth is `V = v + H . X` with `H_0 = 0`, so it moves only through
//! capital gains and is left unchanged by resets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integration::{integrate_schedule, GainsPath, IntegrationError};
use crate::path::{PathError, PiecewisePath};
use crate::strategy::{HoldingsSchedule, Strategy, StrategyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PortfolioError {
    #[error("wealth processes need H_0 = 0; got time-0 holdings {0}")]
    SeedHoldings(String),
    #[error("initial wealth must be finite, got {0}")]
    InvalidWealth(f64),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

impl From<StrategyError> for PortfolioError {
    fn from(e: StrategyError) -> Self {
        Self::Integration(e.into())
    }
}

impl From<PathError> for PortfolioError {
    fn from(e: PathError) -> Self {
        Self::Integration(e.into())
    }
}

/// `V_t = v + (H . X)_t` on one scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct WealthProcess {
    v: f64,
    gains: GainsPath,
}

impl WealthProcess {
    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn gains(&self) -> &GainsPath {
        &self.gains
    }

    pub fn values(&self) -> GainsPath {
        self.gains.shifted(self.v)
    }

    pub fn at(&self, t: f64) -> Result<f64, PathError> {
        Ok(self.v + self.gains.at(t)?)
    }

    pub fn terminal(&self) -> f64 {
        self.v + self.gains.terminal()
    }

    pub fn min(&self) -> f64 {
        self.v + self.gains.min()
    }

    /// `V_t >= 0` at every grid time.
    pub fn is_nonnegative(&self) -> bool {
        self.min() >= 0.0
    }
}

pub fn wealth_process(v: f64, holdings: &HoldingsSchedule, path: &PiecewisePath) -> Result<WealthProcess, PortfolioError> {
    if !v.is_finite() {
        return Err(PortfolioError::InvalidWealth(v));
    }
    if let Some(h0) = holdings.initial().filter(|h| !h.is_zero()) {
        return Err(PortfolioError::SeedHoldings(h0.to_string()));
    }
    Ok(WealthProcess { v, gains: integrate_schedule(holdings, path)? })
}

/// Wealth of `strategy` on every path, in order. Time-0 holdings of the
/// strategy are dropped.
pub fn wealth_ensemble(
    v: f64,
    strategy: &Strategy,
    paths: &[PiecewisePath],
) -> Result<Vec<WealthProcess>, PortfolioError> {
    paths
        .iter()
        .map(|p| wealth_process(v, &strategy.schedule(p)?.with_initial(None), p))
        .collect()
}

/// `V >= 0` on every scenario and grid time: empirical membership in the
/// class of nonnegative wealth processes.
pub fn in_nonnegative_class<'a>(wealth: impl IntoIterator<Item = &'a WealthProcess>) -> bool {
    wealth.into_iter().all(WealthProcess::is_nonnegative)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Admissibility {
    /// No sample went below `-c`; says nothing about unseen paths.
    EmpiricallyAdmissible { c: f64 },
    /// Some sample went below `-c_claimed`. Conclusive.
    Violates { c_claimed: f64 },
}

impl std::fmt::Display for Admissibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Admissibility::EmpiricallyAdmissible { c } => write!(f, "EMPIRICALLY_ADMISSIBLE({c})"),
            Admissibility::Violates { c_claimed } => write!(f, "VIOLATES({c_claimed})"),
        }
    }
}

pub const ADMISSIBILITY_NOTE: &str = "a violation is conclusive; an admissible verdict only bounds the sampled \
     paths and cannot certify an almost-sure credit line";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub n_scenarios: usize,
    /// Smallest gains value over all scenarios and grid times.
    pub pathwise_inf: f64,
    /// `max(0, -pathwise_inf)`.
    pub certified_bound: f64,
    pub c_claimed: Option<f64>,
    pub verdict: Admissibility,
    pub note: String,
}

/// Lower bound check `H . X >= -c` on a sample of gains paths. Without a
/// claim the verdict is the sample bound itself.
pub fn admissibility_report<'a>(
    gains: impl IntoIterator<Item = &'a GainsPath>,
    c_claimed: Option<f64>,
) -> AdmissibilityReport {
    let mut n = 0;
    let mut inf = f64::INFINITY;
    for g in gains {
        n += 1;
        inf = inf.min(g.min());
    }
    admissibility_from_inf(n, inf, c_claimed)
}

/// Same report from a precomputed infimum over `n_scenarios` gains paths,
/// for callers that stream scenarios.
pub fn admissibility_from_inf(n_scenarios: usize, inf: f64, c_claimed: Option<f64>) -> AdmissibilityReport {
    let certified_bound = if inf.is_finite() { (-inf).max(0.0) } else { 0.0 };
    let verdict = match c_claimed {
        Some(c) if inf < -c => Admissibility::Violates { c_claimed: c },
        _ => Admissibility::EmpiricallyAdmissible { c: certified_bound },
    };
    AdmissibilityReport {
        n_scenarios,
        pathwise_inf: inf,
        certified_bound,
        c_claimed,
        verdict,
        note: ADMISSIBILITY_NOTE.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integration::integrate;
    use crate::path::tests::{dv, worked_path};
    use crate::path::{PathBuilder, TimeGrid};
    use crate::strategy::NamedRule;

    fn w_holdings() -> HoldingsSchedule {
        Strategy::step(None, vec![(0.0, dv(&[1.0, 1.0])), (2.0, dv(&[1.0, 1.0, 2.0]))])
            .schedule(&worked_path())
            .unwrap()
    }

    #[test]
    fn worked_wealth() {
        let v = wealth_process(10.0, &w_holdings(), &worked_path()).unwrap();
        assert_eq!(v.values().values(), &[10.0, 10.0, 13.0, 15.0]);
        assert_eq!(v.at(2.0).unwrap(), 13.0);
        assert!(v.is_nonnegative());
    }

    #[test]
    fn zero_strategy_keeps_wealth() {
        let w = worked_path();
        let v = wealth_process(1.0, &HoldingsSchedule::zero(&w), &w).unwrap();
        assert!(v.values().values().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn seed_holdings_rejected() {
        let w = worked_path();
        let h = w_holdings().with_initial(Some(dv(&[1.0, 0.0])));
        assert!(matches!(wealth_process(1.0, &h, &w), Err(PortfolioError::SeedHoldings(_))));
        let zero = w_holdings().with_initial(Some(dv(&[0.0, 0.0])));
        assert!(wealth_process(1.0, &zero, &w).is_ok());
    }

    #[test]
    fn admissibility_verdicts() {
        let grid = TimeGrid::uniform(1.0, 2).unwrap();
        let g = |v: Vec<f64>| GainsPath::new(grid.clone(), v).unwrap();
        let sample = [g(vec![0.0, -2.0, 1.0]), g(vec![0.0, -7.0, -3.0])];
        let r = admissibility_report(&sample, Some(5.0));
        assert_eq!(r.verdict, Admissibility::Violates { c_claimed: 5.0 });
        assert_eq!(r.pathwise_inf, -7.0);
        assert_eq!(r.verdict.to_string(), "VIOLATES(5)");

        let r = admissibility_report(&sample, Some(7.0));
        assert_eq!(r.verdict, Admissibility::EmpiricallyAdmissible { c: 7.0 });

        let zero = [g(vec![0.0; 3])];
        assert_eq!(admissibility_report(&zero, Some(3.0)).verdict, Admissibility::EmpiricallyAdmissible { c: 0.0 });
    }

    #[test]
    fn buy_and_hold_is_bounded_by_initial_price() {
        let grid = TimeGrid::uniform(1.0, 3).unwrap();
        let mut b = PathBuilder::on_grid(grid, dv(&[10.0]), dv(&[10.0]));
        for x in [4.0, 0.5, 12.0] {
            b.push(dv(&[x])).unwrap();
        }
        let p = b.finish().unwrap();
        let g = integrate(&NamedRule::ConstantShare { asset: 0, shares: 1.0 }.into(), &p).unwrap();
        let r = admissibility_report([&g], Some(10.0));
        assert!(matches!(r.verdict, Admissibility::EmpiricallyAdmissible { c } if c <= 10.0));
    }
}
