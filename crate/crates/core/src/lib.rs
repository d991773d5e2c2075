//! Simulation, pathwise integration and portfolio accounting for price
//! processes whose number of assets changes over time.

pub mod deflator;
pub mod dissection;
pub mod integration;
pub mod io;
pub mod market;
pub mod martingale;
pub mod path;
pub mod portfolio;
pub mod rng;
pub mod strategy;

pub use path::{
    local_norm, minimal_reset_sequence, validate_path, DenseRecord, DimensionedVector, PathBuilder, PathError,
    PathPiece, PathRecord, PieceRecord, PiecewisePath, ResetSequence, TimeGrid, Violation,
};
pub use dissection::{dissect_path, dissect_strategy, reassemble, refine_resets, scenario_cells, DissectError, DissectedPiece, ScenarioCell};
pub use integration::{
    integrate, integrate_dissected, integrate_schedule, jump_exposure, piece_integral, reset_levels, GainsPath,
    IntegrationError, ResetLevel, Stop,
};
pub use strategy::{HoldingsRule, HoldingsSchedule, History, NamedRule, StepStrategy, Strategy, StrategyError};
pub use market::{
    map_scenarios, map_strict_local_mart, simulate, simulate_scenario, simulate_strict_local_mart,
    simulate_strict_local_mart_scenario, Action, ActionKind, AssetSpec, Direction, EventRecord, EventRule,
    ExampleScenario, GridSpec, LeftJump, MarketSpec, MergeRule, PieceModel, Scenario, SimError, StrictLocalMartSpec,
    Trigger,
};
pub use deflator::{build_piecewise_deflator, market_price_of_risk, DeflatorError, DeflatorProcess};
pub use martingale::{
    deflate_and_test, deflated_row, martingale_test, CheckpointSamples, IntervalVerdict, MartingaleTestReport,
    TestError, TestMode,
};
pub use portfolio::{
    admissibility_from_inf, admissibility_report, in_nonnegative_class, wealth_ensemble, wealth_process, Admissibility, AdmissibilityReport,
    PortfolioError, WealthProcess,
};
