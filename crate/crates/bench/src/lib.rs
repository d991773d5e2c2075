//! Benchmark inputs shared by the criterion targets.

use stochdim_core::{Action, AssetSpec, EventRule, GridSpec, MarketSpec, PieceModel, StrictLocalMartSpec, Trigger};

/// Driftless GBM market with Poisson entries and exits.
pub fn churn_market(steps: usize, n_scenarios: usize) -> MarketSpec {
    let gbm = AssetSpec { start: 1.0, model: PieceModel::Gbm { mu: 0.0, sigma: 0.2 } };
    MarketSpec {
        grid: GridSpec { horizon: 1.0, steps },
        assets: vec![gbm, gbm],
        events: vec![
            EventRule { trigger: Trigger::Poisson { rate: 1.0 }, action: Action::Entry { asset: gbm } },
            EventRule { trigger: Trigger::Poisson { rate: 1.0 }, action: Action::Exit { asset: 0 } },
        ],
        seed: 7,
        n_scenarios,
        max_pieces: 64,
    }
}

pub fn example(steps: usize, n_scenarios: usize) -> StrictLocalMartSpec {
    StrictLocalMartSpec {
        r0: 1.0,
        grid: GridSpec { horizon: 1.0, steps },
        refine_tolerance: 0.01,
        max_refinements: 1 << 22,
        max_pieces: 1 << 22,
        seed: 7,
        n_scenarios,
    }
}
