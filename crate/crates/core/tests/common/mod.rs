#![allow(dead_code)]

use proptest::prelude::{any, Strategy as _};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochdim_core::{
    Action, AssetSpec, DimensionedVector, EventRule, GridSpec, History, HoldingsRule, MarketSpec, MergeRule,
    PathBuilder, PieceModel, PiecewisePath, Strategy, TimeGrid, Trigger,
};

pub fn dv(xs: &[f64]) -> DimensionedVector {
    DimensionedVector::new(xs).unwrap()
}

/// Holdings drawn afresh at every grid time from a stream keyed by
/// `(seed, time index)`. Predictable by construction: it ignores prices.
#[derive(Debug, Clone, Copy)]
pub struct NoiseRule(pub u64);

impl HoldingsRule for NoiseRule {
    fn holdings(&self, history: &History<'_>) -> DimensionedVector {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0.wrapping_mul(0x9e37_79b9).wrapping_add(history.index() as u64));
        let h: Vec<f64> = (0..history.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
        dv(&h)
    }
}

pub fn noise(seed: u64) -> Strategy {
    Strategy::rule(NoiseRule(seed))
}

/// Paths with random values, random dimension changes and some resets at
/// which the path does not actually jump.
pub fn arb_path() -> impl proptest::strategy::Strategy<Value = PiecewisePath> {
    (2usize..30, any::<u64>()).prop_map(|(steps, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = TimeGrid::uniform(1.0, steps).unwrap();
        let mut n: usize = rng.random_range(1..4);
        let draw = |rng: &mut ChaCha8Rng, n: usize| dv(&(0..n).map(|_| rng.random_range(-50.0..50.0)).collect::<Vec<_>>());
        let x0 = draw(&mut rng, n);
        let mut b = PathBuilder::on_grid(grid, x0.clone(), x0).max_pieces(usize::MAX);
        for i in 1..=steps {
            let x = draw(&mut rng, n);
            b.push(x.clone()).unwrap();
            if i < steps && rng.random_bool(0.3) {
                let right = match rng.random_range(0..3) {
                    0 => x,
                    _ => {
                        n = rng.random_range(1..5);
                        draw(&mut rng, n)
                    }
                };
                b.reset(right).unwrap();
            }
        }
        b.finish().unwrap()
    })
}

pub fn gbm(start: f64, mu: f64, sigma: f64) -> AssetSpec {
    AssetSpec { start, model: PieceModel::Gbm { mu, sigma } }
}

/// Market with every kind of corporate action.
pub fn busy_market(seed: u64, n_scenarios: usize, steps: usize) -> MarketSpec {
    let bm = AssetSpec { start: 0.5, model: PieceModel::Bm { sigma: 0.4 } };
    MarketSpec {
        grid: GridSpec { horizon: 1.0, steps },
        assets: vec![gbm(1.0, 0.1, 0.2), gbm(2.0, -0.05, 0.3), bm],
        events: vec![
            EventRule { trigger: Trigger::Poisson { rate: 2.0 }, action: Action::Entry { asset: gbm(1.5, 0.0, 0.25) } },
            EventRule { trigger: Trigger::Poisson { rate: 1.5 }, action: Action::Exit { asset: 1 } },
            EventRule {
                trigger: Trigger::Poisson { rate: 1.0 },
                action: Action::Merge { first: 0, second: 1, rule: MergeRule::Sum },
            },
            EventRule { trigger: Trigger::Poisson { rate: 1.0 }, action: Action::Split { asset: 0, fraction: 0.3 } },
            EventRule { trigger: Trigger::At { time: 0.5 }, action: Action::Entry { asset: bm } },
        ],
        seed,
        n_scenarios,
        max_pieces: 256,
    }
}
