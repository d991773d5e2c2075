//! Piecewise deflators `Z = prod_k Z^k` for generated markets.
//!
//! On piece `k` every asset with model `GBM(mu, sigma)` carries the market
//! price of risk `theta = mu / sigma`. The piece factor starts at 1 at
//! `tau_{k-1}` and multiplies by `exp(-theta' dW - |theta|^2 h / 2)` on every
//! step of the piece, where `dW` is recovered from the exact log step of the
//! price. Brownian and inverse-Bessel pieces are already local martingales
//! and get `theta = 0`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::market::{PieceModel, Scenario};
use crate::path::TimeGrid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeflatorError {
    #[error("piece {piece}: asset {asset} has sigma = 0 and mu = {mu}; no deflator exists for this piece")]
    NoDeflator { piece: usize, asset: usize, mu: f64 },
    #[error("volatility matrix is singular; the market price of risk is not determined")]
    SingularVolatility,
    #[error("volatility is {rows}x{cols} but drift has length {drift}")]
    Shape { rows: usize, cols: usize, drift: usize },
    #[error("scenario has {0} left jump(s); jump pieces are not supported")]
    LeftJumps(usize),
    #[error("scenario carries {found} piece models for {expected} pieces")]
    PieceModels { expected: usize, found: usize },
}

/// Solve `volatility * theta = drift`.
pub fn market_price_of_risk(volatility: &DMatrix<f64>, drift: &DVector<f64>) -> Result<DVector<f64>, DeflatorError> {
    let (rows, cols) = volatility.shape();
    if rows != cols || rows != drift.len() {
        return Err(DeflatorError::Shape { rows, cols, drift: drift.len() });
    }
    let theta = volatility.clone().lu().solve(drift).ok_or(DeflatorError::SingularVolatility)?;
    if theta.iter().all(|x| x.is_finite()) {
        Ok(theta)
    } else {
        Err(DeflatorError::SingularVolatility)
    }
}

/// A deflator on one scenario: the piece factors on the full grid and their
/// product.
#[derive(Clone, Debug, PartialEq)]
pub struct DeflatorProcess {
    grid: TimeGrid,
    factors: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl DeflatorProcess {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// `Z^k` for `k = 1, 2, ...`, each 1 up to the start of its piece and
    /// frozen after its end.
    pub fn factors(&self) -> &[Vec<f64>] {
        &self.factors
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("nonempty grid")
    }

    pub fn at_index(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().all(|&z| z == 1.0)
    }
}

struct Kernel {
    // (asset, theta, drift of log price, sigma)
    legs: Vec<(usize, f64, f64, f64)>,
    half_theta_sq: f64,
}

fn piece_kernel(piece: usize, models: &[PieceModel]) -> Result<Kernel, DeflatorError> {
    let mut assets = Vec::new();
    for (a, m) in models.iter().enumerate() {
        if let PieceModel::Gbm { mu, sigma } = *m {
            if sigma == 0.0 {
                if mu != 0.0 {
                    return Err(DeflatorError::NoDeflator { piece, asset: a, mu });
                }
                continue;
            }
            assets.push((a, mu, sigma));
        }
    }
    if assets.iter().all(|&(_, mu, _)| mu == 0.0) {
        return Ok(Kernel { legs: Vec::new(), half_theta_sq: 0.0 });
    }
    let n = assets.len();
    let vol = DMatrix::from_diagonal(&DVector::from_iterator(n, assets.iter().map(|x| x.2)));
    let drift = DVector::from_iterator(n, assets.iter().map(|x| x.1));
    let theta = market_price_of_risk(&vol, &drift)?;
    let legs: Vec<_> = assets
        .iter()
        .zip(theta.iter())
        .map(|(&(a, mu, sigma), &th)| (a, th, mu - 0.5 * sigma * sigma, sigma))
        .collect();
    Ok(Kernel { half_theta_sq: 0.5 * theta.norm_squared(), legs })
}

/// Build `Z` for a scenario generated by the market simulator.
pub fn build_piecewise_deflator(scenario: &Scenario) -> Result<DeflatorProcess, DeflatorError> {
    if !scenario.left_jumps.is_empty() {
        return Err(DeflatorError::LeftJumps(scenario.left_jumps.len()));
    }
    let path = &scenario.path;
    let pieces = path.pieces();
    if scenario.piece_models.len() != pieces.len() {
        return Err(DeflatorError::PieceModels { expected: pieces.len(), found: scenario.piece_models.len() });
    }
    let grid = path.grid();
    let len = grid.len();
    let mut factors = Vec::with_capacity(pieces.len());
    for (p, models) in pieces.iter().zip(&scenario.piece_models) {
        let kernel = piece_kernel(p.index(), models)?;
        let mut f = vec![1.0; len];
        let mut z = 1.0;
        for i in p.start() + 1..=p.end() {
            if !kernel.legs.is_empty() {
                let h = grid.time(i) - grid.time(i - 1);
                let from = path.right_limit_at_index(i - 1).expect("i - 1 before horizon");
                let to = path.value_at_index(i);
                let mut exponent = -kernel.half_theta_sq * h;
                for &(a, theta, log_drift, sigma) in &kernel.legs {
                    let x0 = from.as_slice()[a];
                    let x1 = to.as_slice()[a];
                    let dw = ((x1 / x0).ln() - log_drift * h) / sigma;
                    exponent -= theta * dw;
                }
                z *= exponent.exp();
            }
            f[i] = z;
        }
        for v in &mut f[p.end() + 1..] {
            *v = z;
        }
        factors.push(f);
    }
    let values = (0..len).map(|i| factors.iter().map(|f| f[i]).product()).collect();
    Ok(DeflatorProcess { grid: grid.clone(), factors, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{simulate, simulate_scenario, Action, AssetSpec, EventRule, GridSpec, MarketSpec, Trigger};

    fn gbm_market(mu: f64, sigma: f64, events: Vec<EventRule>) -> MarketSpec {
        MarketSpec {
            grid: GridSpec { horizon: 3.0, steps: 30 },
            assets: vec![AssetSpec { start: 1.0, model: PieceModel::Gbm { mu, sigma } }],
            events,
            seed: 3,
            n_scenarios: 20,
            max_pieces: 64,
        }
    }

    fn entries_at(times: &[f64], mu: f64, sigma: f64) -> Vec<EventRule> {
        times
            .iter()
            .map(|&time| EventRule {
                trigger: Trigger::At { time },
                action: Action::Entry { asset: AssetSpec { start: 2.0, model: PieceModel::Gbm { mu, sigma } } },
            })
            .collect()
    }

    #[test]
    fn driftless_market_has_unit_deflator() {
        for sc in simulate(&gbm_market(0.0, 0.2, vec![])).unwrap() {
            assert!(build_piecewise_deflator(&sc).unwrap().is_identity());
        }
    }

    #[test]
    fn pasting_is_factor_exact() {
        let spec = gbm_market(0.05, 0.2, entries_at(&[1.0, 2.0], 0.1, 0.3));
        for sc in simulate(&spec).unwrap() {
            let z = build_piecewise_deflator(&sc).unwrap();
            assert_eq!(z.factors().len(), 3);
            for i in 0..z.grid().len() {
                let prod: f64 = z.factors().iter().map(|f| f[i]).product();
                assert_eq!(z.at_index(i), prod);
                assert!(z.at_index(i) > 0.0);
            }
            // each factor is 1 up to the start of its piece
            for (f, p) in z.factors().iter().zip(sc.path.pieces()) {
                assert!(f[..=p.start()].iter().all(|&x| x == 1.0));
            }
        }
    }

    #[test]
    fn single_step_matches_closed_form() {
        // one step of GBM: Z_h = exp(-theta dW - theta^2 h / 2) with the dW
        // that produced the price move
        let mut spec = gbm_market(0.3, 0.2, vec![]);
        spec.grid = GridSpec { horizon: 0.5, steps: 1 };
        let sc = simulate_scenario(&spec, 0).unwrap();
        let x1 = sc.path.value_at_index(1).as_slice()[0];
        let dw = (x1.ln() - (0.3 - 0.02) * 0.5) / 0.2;
        let expect = (-1.5 * dw - 0.5 * 2.25 * 0.5).exp();
        let z = build_piecewise_deflator(&sc).unwrap();
        assert!((z.terminal() - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn zero_volatility_with_drift_has_no_deflator() {
        let sc = simulate_scenario(&gbm_market(0.1, 0.0, vec![]), 0).unwrap();
        assert_eq!(build_piecewise_deflator(&sc), Err(DeflatorError::NoDeflator { piece: 1, asset: 0, mu: 0.1 }));
    }

    #[test]
    fn singular_volatility_rejected() {
        let vol = DMatrix::from_row_slice(2, 2, &[0.2, 0.4, 0.1, 0.2]);
        let drift = DVector::from_vec(vec![0.1, 0.05]);
        assert_eq!(market_price_of_risk(&vol, &drift), Err(DeflatorError::SingularVolatility));
        let vol = DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 0.1, 0.3]);
        let theta = market_price_of_risk(&vol, &drift).unwrap();
        assert!((&vol * theta - drift).norm() < 1e-15);
    }
}
