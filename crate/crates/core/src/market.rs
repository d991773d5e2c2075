//! Scenario generation for markets whose assets enter, exit, merge, split
//! and go bankrupt.
//!
//! Between events every listed asset follows its own piece model, driven by
//! an independent Brownian motion:
//!
//! - `bm`: arithmetic Brownian motion `dX = sigma dW`;
//! - `gbm`: geometric Brownian motion, stepped exactly in log space;
//! - `inv_bes3`: `X = 1 / |W|` for a 3-dimensional Brownian motion with
//!   `|W_0| = 1 / X_0` (reciprocal of a Bessel(3) process).
//!
//! Events fire at grid times. Their effect is applied as a reset: the sample
//! at the event time is the pre-event value and the new layout is stored as
//! the right limit. A bankruptcy additionally sets the sample to 0 (a left
//! jump inside the piece) before the asset is removed.
//!
//! All asset indices in actions are 0-based and refer to the layout at the
//! moment the action is applied. Actions that cannot apply (index out of
//! range, removing the last asset, a merged value that the model cannot
//! carry) are skipped and recorded as such.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::path::{DimensionedVector, PathBuilder, PathError, PiecewisePath, TimeGrid, DEFAULT_MAX_PIECES};
use crate::rng::scenario_rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid market spec: {0}")]
    InvalidSpec(String),
    #[error("{model} start value must be positive, got {start}")]
    NonPositiveStart { model: &'static str, start: f64 },
    #[error("scenario {scenario}: {source}")]
    Scenario {
        scenario: u64,
        #[source]
        source: PathError,
    },
    #[error(transparent)]
    Path(#[from] PathError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub horizon: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn time_grid(&self) -> Result<TimeGrid, PathError> {
        TimeGrid::uniform(self.horizon, self.steps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PieceModel {
    Bm { sigma: f64 },
    Gbm { mu: f64, sigma: f64 },
    InvBes3,
}

impl PieceModel {
    fn name(&self) -> &'static str {
        match self {
            PieceModel::Bm { .. } => "bm",
            PieceModel::Gbm { .. } => "gbm",
            PieceModel::InvBes3 => "inv_bes3",
        }
    }

    fn accepts(&self, value: f64) -> bool {
        match self {
            PieceModel::Bm { .. } => value.is_finite(),
            PieceModel::Gbm { .. } | PieceModel::InvBes3 => value.is_finite() && value > 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetSpec {
    pub start: f64,
    pub model: PieceModel,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Above,
    #[default]
    Below,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Trigger {
    /// Arrivals of a Poisson process, each snapped up to the next grid time.
    Poisson { rate: f64 },
    /// A fixed time in `(0, T)`, snapped up to the grid.
    At { time: f64 },
    /// First grid time at which asset `asset` is at or beyond `level`.
    Hitting {
        asset: usize,
        level: f64,
        #[serde(default)]
        direction: Direction,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MergeRule {
    /// The combined asset starts at the sum of the two right limits.
    #[default]
    Sum,
    Weighted { first: f64, second: f64 },
}

fn half() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    /// A new asset is appended.
    Entry { asset: AssetSpec },
    Exit { asset: usize },
    /// `first` and `second` are replaced by one asset at the lower index,
    /// following the model of `first`.
    Merge {
        first: usize,
        second: usize,
        #[serde(default)]
        rule: MergeRule,
    },
    /// Asset `asset` keeps `fraction` of its value and a copy holding the
    /// rest is inserted right after it.
    Split {
        asset: usize,
        #[serde(default = "half")]
        fraction: f64,
    },
    /// Left jump to 0, then exit.
    Bankruptcy { asset: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Entry,
    Exit,
    Merge,
    Split,
    Bankruptcy,
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Entry { .. } => ActionKind::Entry,
            Action::Exit { .. } => ActionKind::Exit,
            Action::Merge { .. } => ActionKind::Merge,
            Action::Split { .. } => ActionKind::Split,
            Action::Bankruptcy { .. } => ActionKind::Bankruptcy,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRule {
    pub trigger: Trigger,
    pub action: Action,
}

fn default_scenarios() -> usize {
    1000
}

fn default_max_pieces() -> usize {
    DEFAULT_MAX_PIECES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpec {
    pub grid: GridSpec,
    pub assets: Vec<AssetSpec>,
    #[serde(default)]
    pub events: Vec<EventRule>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_scenarios")]
    pub n_scenarios: usize,
    #[serde(default = "default_max_pieces")]
    pub max_pieces: usize,
}

fn check_asset(a: &AssetSpec) -> Result<(), SimError> {
    match a.model {
        PieceModel::Bm { sigma } | PieceModel::Gbm { sigma, .. } if !(sigma.is_finite() && sigma >= 0.0) => {
            return Err(SimError::InvalidSpec(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        PieceModel::Gbm { mu, .. } if !mu.is_finite() => {
            return Err(SimError::InvalidSpec(format!("mu must be finite, got {mu}")));
        }
        _ => {}
    }
    if !a.model.accepts(a.start) {
        return Err(match a.model {
            PieceModel::Bm { .. } => SimError::InvalidSpec(format!("bm start must be finite, got {}", a.start)),
            m => SimError::NonPositiveStart { model: m.name(), start: a.start },
        });
    }
    Ok(())
}

impl MarketSpec {
    pub fn validate(&self) -> Result<TimeGrid, SimError> {
        let grid = self.grid.time_grid()?;
        let horizon = grid.horizon();
        if self.assets.is_empty() {
            return Err(SimError::InvalidSpec("at least one initial asset is required".into()));
        }
        if self.n_scenarios == 0 {
            return Err(SimError::InvalidSpec("n_scenarios must be >= 1".into()));
        }
        if self.max_pieces == 0 {
            return Err(SimError::InvalidSpec("max_pieces must be >= 1".into()));
        }
        self.assets.iter().try_for_each(check_asset)?;
        for (r, ev) in self.events.iter().enumerate() {
            match ev.trigger {
                Trigger::Poisson { rate } if !(rate.is_finite() && rate >= 0.0) => {
                    return Err(SimError::InvalidSpec(format!("event {r}: rate must be finite and >= 0")));
                }
                Trigger::At { time } if !(time > 0.0 && time < horizon) => {
                    return Err(SimError::InvalidSpec(format!("event {r}: time {time} is not inside (0, {horizon})")));
                }
                Trigger::Hitting { level, .. } if !level.is_finite() => {
                    return Err(SimError::InvalidSpec(format!("event {r}: level must be finite")));
                }
                _ => {}
            }
            match &ev.action {
                Action::Entry { asset } => check_asset(asset)?,
                Action::Split { fraction, .. } if !(*fraction > 0.0 && *fraction < 1.0) => {
                    return Err(SimError::InvalidSpec(format!("event {r}: split fraction must be in (0, 1)")));
                }
                Action::Merge { rule: MergeRule::Weighted { first, second }, .. }
                    if !(first.is_finite() && second.is_finite()) =>
                {
                    return Err(SimError::InvalidSpec(format!("event {r}: merge weights must be finite")));
                }
                _ => {}
            }
        }
        Ok(grid)
    }

    /// Fixed event times plus the horizon, with 0 in front: the default
    /// checkpoints for ensemble tests.
    pub fn default_checkpoints(&self) -> Vec<f64> {
        let Ok(grid) = self.grid.time_grid() else { return Vec::new() };
        let mut idx: Vec<usize> = vec![0, grid.last_index()];
        for ev in &self.events {
            if let Trigger::At { time } = ev.trigger {
                if let Some(i) = grid.snap_up(time) {
                    idx.push(i);
                }
            }
        }
        idx.sort_unstable();
        idx.dedup();
        idx.into_iter().map(|i| grid.time(i)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeftJump {
    pub time: f64,
    pub asset: usize,
    pub size: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time: f64,
    pub rule: usize,
    pub kind: ActionKind,
    pub applied: bool,
}

/// One generated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub id: u64,
    pub path: PiecewisePath,
    pub left_jumps: Vec<LeftJump>,
    pub events: Vec<EventRecord>,
    /// Model of every asset, piece by piece.
    pub piece_models: Vec<Vec<PieceModel>>,
}

impl Scenario {
    pub fn jump_times(&self) -> Vec<f64> {
        self.left_jumps.iter().map(|j| j.time).collect()
    }
}

#[derive(Clone, Debug)]
struct AssetState {
    id: u64,
    model: PieceModel,
    value: f64,
    bessel: [f64; 3],
}

impl AssetState {
    fn new(id: u64, model: PieceModel, value: f64) -> Self {
        let bessel = if let PieceModel::InvBes3 = model { [1.0 / value, 0.0, 0.0] } else { [0.0; 3] };
        Self { id, model, value, bessel }
    }

    fn step<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) {
        let sd = dt.sqrt();
        match self.model {
            PieceModel::Bm { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                self.value += sigma * sd * z;
            }
            PieceModel::Gbm { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                self.value *= ((mu - 0.5 * sigma * sigma) * dt + sigma * sd * z).exp();
            }
            PieceModel::InvBes3 => {
                let (w, r) = bessel_step(self.bessel, sd, rng);
                self.bessel = w;
                self.value = 1.0 / r;
            }
        }
    }
}

/// Gaussian move of a 3-d Brownian point with per-axis standard deviation
/// `sd`; redrawn in the probability-zero event that it lands on the origin
/// numerically.
fn bessel_step<R: Rng + ?Sized>(from: [f64; 3], sd: f64, rng: &mut R) -> ([f64; 3], f64) {
    loop {
        let mut w = from;
        for c in &mut w {
            let z: f64 = rng.sample(StandardNormal);
            *c += sd * z;
        }
        let r = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        if r > 0.0 && (1.0 / r).is_finite() {
            return (w, r);
        }
        log::warn!("Bessel(3) radius hit numerical zero; redrawing the increment");
    }
}

fn values(assets: &[AssetState]) -> DimensionedVector {
    DimensionedVector::new(&assets.iter().map(|a| a.value).collect::<Vec<_>>()).expect("at least one asset")
}

fn apply(action: &Action, assets: &mut Vec<AssetState>, next_id: &mut u64) -> Option<u64> {
    let n = assets.len();
    match *action {
        Action::Entry { asset } => {
            assets.push(AssetState::new(*next_id, asset.model, asset.start));
            *next_id += 1;
            Some(u64::MAX)
        }
        Action::Exit { asset } | Action::Bankruptcy { asset } => {
            if asset >= n || n == 1 {
                return None;
            }
            Some(assets.remove(asset).id)
        }
        Action::Merge { first, second, rule } => {
            if first >= n || second >= n || first == second {
                return None;
            }
            let (a, b) = (assets[first].value, assets[second].value);
            let merged = match rule {
                MergeRule::Sum => a + b,
                MergeRule::Weighted { first, second } => first * a + second * b,
            };
            let model = assets[first].model;
            if !model.accepts(merged) {
                return None;
            }
            let (lo, hi) = (first.min(second), first.max(second));
            assets.remove(hi);
            assets[lo] = AssetState::new(*next_id, model, merged);
            *next_id += 1;
            Some(u64::MAX)
        }
        Action::Split { asset, fraction } => {
            if asset >= n {
                return None;
            }
            let (model, x) = (assets[asset].model, assets[asset].value);
            let (keep, rest) = (fraction * x, (1.0 - fraction) * x);
            if !model.accepts(keep) || !model.accepts(rest) {
                return None;
            }
            assets[asset] = AssetState::new(*next_id, model, keep);
            assets.insert(asset + 1, AssetState::new(*next_id + 1, model, rest));
            *next_id += 2;
            Some(u64::MAX)
        }
    }
}

/// Poisson arrivals on `(0, T)`, snapped up to grid indices strictly inside
/// the grid.
fn poisson_indices<R: Rng + ?Sized>(rate: f64, grid: &TimeGrid, rng: &mut R) -> Vec<usize> {
    let mut out = Vec::new();
    if rate == 0.0 {
        return out;
    }
    let exp = Exp::new(rate).expect("rate > 0");
    let mut t = 0.0;
    loop {
        t += exp.sample(rng);
        if t >= grid.horizon() {
            return out;
        }
        if let Some(i) = grid.snap_up(t) {
            if i > 0 && i < grid.last_index() {
                out.push(i);
            }
        }
    }
}

/// Generate scenario `id` of `spec`. A pure function of `(spec, id)`.
pub fn simulate_scenario(spec: &MarketSpec, id: u64) -> Result<Scenario, SimError> {
    let grid = spec.validate()?;
    simulate_on(spec, &grid, id)
}

fn simulate_on(spec: &MarketSpec, grid: &TimeGrid, id: u64) -> Result<Scenario, SimError> {
    let wrap = |source| SimError::Scenario { scenario: id, source };
    let mut rng = scenario_rng(spec.seed, id);
    let last = grid.last_index();

    let mut pending: Vec<Vec<usize>> = vec![Vec::new(); last + 1];
    for (r, ev) in spec.events.iter().enumerate() {
        match ev.trigger {
            Trigger::Poisson { rate } => {
                for i in poisson_indices(rate, grid, &mut rng) {
                    pending[i].push(r);
                }
            }
            Trigger::At { time } => {
                if let Some(i) = grid.snap_up(time).filter(|&i| i > 0 && i < last) {
                    pending[i].push(r);
                }
            }
            Trigger::Hitting { .. } => {}
        }
    }
    let mut fired = vec![false; spec.events.len()];

    let mut next_id = 0u64;
    let mut assets: Vec<AssetState> = spec
        .assets
        .iter()
        .map(|a| {
            next_id += 1;
            AssetState::new(next_id - 1, a.model, a.start)
        })
        .collect();
    let x0 = values(&assets);
    let mut builder = PathBuilder::on_grid(grid.clone(), x0.clone(), x0).max_pieces(spec.max_pieces);
    let mut piece_models = vec![assets.iter().map(|a| a.model).collect::<Vec<_>>()];
    let mut left_jumps = Vec::new();
    let mut events = Vec::new();

    for i in 1..=last {
        let dt = grid.time(i) - grid.time(i - 1);
        for a in &mut assets {
            a.step(dt, &mut rng);
        }
        if i < last {
            for (r, ev) in spec.events.iter().enumerate() {
                if let Trigger::Hitting { asset, level, direction } = ev.trigger {
                    let hit = assets.get(asset).is_some_and(|a| match direction {
                        Direction::Above => a.value >= level,
                        Direction::Below => a.value <= level,
                    });
                    if hit && !fired[r] {
                        fired[r] = true;
                        pending[i].push(r);
                    }
                }
            }
        }
        let mut sample: Vec<f64> = assets.iter().map(|a| a.value).collect();
        let mut rules = std::mem::take(&mut pending[i]);
        if rules.is_empty() {
            builder.push(DimensionedVector::new(&sample).expect("n >= 1")).map_err(wrap)?;
            continue;
        }
        rules.sort(); // list order; stable for repeated Poisson arrivals
        let t = grid.time(i);
        let mut after = assets.clone();
        for r in rules {
            let action = &spec.events[r].action;
            let removed = apply(action, &mut after, &mut next_id);
            if let (Action::Bankruptcy { .. }, Some(gone)) = (action, removed) {
                if let Some(pos) = assets.iter().position(|a| a.id == gone) {
                    left_jumps.push(LeftJump { time: t, asset: pos, size: -sample[pos] });
                    sample[pos] = 0.0;
                }
            }
            events.push(EventRecord { time: t, rule: r, kind: action.kind(), applied: removed.is_some() });
        }
        let sample = DimensionedVector::new(&sample).expect("n >= 1");
        let right = values(&after);
        let jumped = !right.coincides(&sample, 0.0);
        builder.push(sample).map_err(wrap)?;
        if jumped {
            builder.reset(right).map_err(wrap)?;
            piece_models.push(after.iter().map(|a| a.model).collect());
        }
        assets = after;
    }
    let path = builder.finish().map_err(wrap)?;
    Ok(Scenario { id, path, left_jumps, events, piece_models })
}

/// The whole ensemble, in scenario order.
pub fn simulate(spec: &MarketSpec) -> Result<Vec<Scenario>, SimError> {
    map_scenarios(spec, |s| s)
}

/// Generate every scenario and hand it to `f`, in parallel. Results come
/// back in scenario order, so reductions over them are deterministic.
pub fn map_scenarios<T, F>(spec: &MarketSpec, f: F) -> Result<Vec<T>, SimError>
where
    T: Send,
    F: Fn(Scenario) -> T + Sync + Send,
{
    let grid = spec.validate()?;
    (0..spec.n_scenarios as u64).into_par_iter().map(|id| simulate_on(spec, &grid, id).map(&f)).collect()
}

fn one() -> f64 {
    1.0
}

fn default_refine_tolerance() -> f64 {
    0.01
}

fn default_example_pieces() -> usize {
    1 << 20
}

fn default_refinements() -> usize {
    1 << 22
}

/// The bounded piecewise strict local martingale built from
/// `Y = 1/R - 1/r0`, `R` a Bessel(3) process from `r0`: piece `k` is
/// `Y^{tau_k} - Y^{tau_{k-1}}` and `tau_k` is the first time
/// `|Y - Y_{tau_{k-1}}|_1` reaches 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrictLocalMartSpec {
    #[serde(default = "one")]
    pub r0: f64,
    pub grid: GridSpec,
    /// Hitting times are located by Brownian-bridge bisection of the grid
    /// step until the level is overshot by at most this much.
    #[serde(default = "default_refine_tolerance")]
    pub refine_tolerance: f64,
    /// Bisections allowed per path. Paths that use them up continue at the
    /// resolution reached so far and are marked truncated.
    #[serde(default = "default_refinements")]
    pub max_refinements: usize,
    #[serde(default = "default_example_pieces")]
    pub max_pieces: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_scenarios")]
    pub n_scenarios: usize,
}

impl StrictLocalMartSpec {
    pub fn validate(&self) -> Result<TimeGrid, SimError> {
        let grid = self.grid.time_grid()?;
        if !(self.r0.is_finite() && self.r0 > 0.0) {
            return Err(SimError::NonPositiveStart { model: "inv_bes3", start: self.r0 });
        }
        if !(self.refine_tolerance > 0.0 && self.refine_tolerance < 0.05) {
            return Err(SimError::InvalidSpec("refine_tolerance must lie in (0, 0.05)".into()));
        }
        if self.n_scenarios == 0 || self.max_pieces == 0 {
            return Err(SimError::InvalidSpec("n_scenarios and max_pieces must be >= 1".into()));
        }
        Ok(grid)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExampleScenario {
    pub id: u64,
    /// On the base grid plus the bisection points.
    pub path: PiecewisePath,
    /// `Y_T`.
    pub y_terminal: f64,
    /// Largest `|X_{tau_k}|_1 - 1` over the hitting times.
    pub overshoot: f64,
    pub refinements: usize,
    /// Some hitting time could not be located to the tolerance, either because
    /// the bisection budget ran out or because the step fell below the
    /// resolution of `f64` times.
    pub truncated: bool,
}

pub fn simulate_strict_local_mart_scenario(spec: &StrictLocalMartSpec, id: u64) -> Result<ExampleScenario, SimError> {
    let grid = spec.validate()?;
    strict_on(spec, &grid, id)
}

fn strict_on(spec: &StrictLocalMartSpec, grid: &TimeGrid, id: u64) -> Result<ExampleScenario, SimError> {
    let wrap = |source| SimError::Scenario { scenario: id, source };
    let mut rng = scenario_rng(spec.seed, id);
    let y_of = |r: f64| 1.0 / r - 1.0 / spec.r0;
    let zero = DimensionedVector::zeros(1);
    let mut builder = PathBuilder::adaptive(zero.clone(), zero.clone()).max_pieces(spec.max_pieces);

    let mut t = 0.0;
    let mut w = [spec.r0, 0.0, 0.0];
    let mut reference = 0.0;
    let mut overshoot = 0.0_f64;
    let mut refinements = 0;
    let mut unresolved = false;
    let mut y = 0.0;
    let mut stack: Vec<(f64, [f64; 3], f64)> = Vec::new();
    for i in 1..grid.len() {
        let b = grid.time(i);
        let (wb, rb) = bessel_step(w, (b - t).sqrt(), &mut rng);
        stack.push((b, wb, rb));
        while let Some(&(tb, wb, rb)) = stack.last() {
            let yb = y_of(rb);
            let excess = (yb - reference).abs() - 1.0;
            let tm = 0.5 * (t + tb);
            if excess > spec.refine_tolerance && t < tm && tm < tb && refinements < spec.max_refinements {
                // Brownian bridge midpoint of the 3-d motion
                let mid = [(w[0] + wb[0]) / 2.0, (w[1] + wb[1]) / 2.0, (w[2] + wb[2]) / 2.0];
                let (wm, rm) = bessel_step(mid, ((tb - t) / 4.0).sqrt(), &mut rng);
                stack.push((tm, wm, rm));
                refinements += 1;
                continue;
            }
            stack.pop();
            unresolved |= excess > spec.refine_tolerance;
            let x = yb - reference;
            builder.push_at(tb, DimensionedVector::new(&[x]).expect("dim 1")).map_err(wrap)?;
            t = tb;
            w = wb;
            y = yb;
            if excess >= 0.0 {
                overshoot = overshoot.max(excess);
                if tb < grid.horizon() {
                    builder.reset(zero.clone()).map_err(wrap)?;
                    reference = yb;
                }
            }
        }
    }
    let path = builder.finish().map_err(wrap)?;
    Ok(ExampleScenario { id, path, y_terminal: y, overshoot, refinements, truncated: unresolved })
}

pub fn map_strict_local_mart<T, F>(spec: &StrictLocalMartSpec, f: F) -> Result<Vec<T>, SimError>
where
    T: Send,
    F: Fn(ExampleScenario) -> T + Sync + Send,
{
    let grid = spec.validate()?;
    (0..spec.n_scenarios as u64).into_par_iter().map(|id| strict_on(spec, &grid, id).map(&f)).collect()
}

pub fn simulate_strict_local_mart(spec: &StrictLocalMartSpec) -> Result<Vec<ExampleScenario>, SimError> {
    map_strict_local_mart(spec, |s| s)
}
