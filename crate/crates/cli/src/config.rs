//! Run configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stochdim_core::{
    DimensionedVector, GridSpec, MarketSpec, NamedRule, Strategy, StrictLocalMartSpec,
};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepEntry {
    pub time: f64,
    pub holdings: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategySpec {
    Rule(NamedRule),
    Step {
        #[serde(default)]
        initial: Option<Vec<f64>>,
        steps: Vec<StepEntry>,
    },
}

impl Default for StrategySpec {
    fn default() -> Self {
        StrategySpec::Rule(NamedRule::BuyHold)
    }
}

fn vector(xs: &[f64], what: &str) -> Result<DimensionedVector, CliError> {
    DimensionedVector::new(xs).map_err(|e| CliError::Config(format!("{what}: {e}")))
}

impl StrategySpec {
    /// With `seed_term` off the time-0 holdings are dropped.
    pub fn build(&self, seed_term: bool) -> Result<Strategy, CliError> {
        match self {
            StrategySpec::Rule(r) => Ok(r.clone().into()),
            StrategySpec::Step { initial, steps } => {
                let initial = match initial {
                    Some(h) if seed_term => Some(vector(h, "strategy.step.initial")?),
                    _ => None,
                };
                let steps = steps
                    .iter()
                    .enumerate()
                    .map(|(j, s)| Ok((s.time, vector(&s.holdings, &format!("strategy.step.steps[{j}].holdings"))?)))
                    .collect::<Result<_, CliError>>()?;
                Ok(Strategy::step(initial, steps))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    /// Martingale test of the gains `H . X`.
    GainsMartingale,
    /// Supermartingale test of the gains.
    GainsSupermartingale,
    /// Martingale test of the undeflated wealth `v + H . X`.
    WealthMartingale,
    /// Martingale test of the deflator `Z`.
    Deflator,
    /// Supermartingale test of `Z V`.
    DeflatedWealth,
}

fn default_z() -> f64 {
    stochdim_core::martingale::DEFAULT_Z
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestPlan {
    #[serde(default = "default_z")]
    pub z: f64,
    /// Defaults to 0, the fixed event times and the horizon.
    #[serde(default)]
    pub checkpoints: Option<Vec<f64>>,
    /// Defaults to gains-martingale, deflator and deflated-wealth.
    #[serde(default)]
    pub tests: Option<Vec<TestKind>>,
}

impl Default for TestPlan {
    fn default() -> Self {
        Self { z: default_z(), checkpoints: None, tests: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilitySpec {
    pub c_claimed: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Inline market.
    #[serde(default)]
    pub market: Option<MarketSpec>,
    /// Market file, relative to the config file.
    #[serde(default)]
    pub market_path: Option<PathBuf>,
    /// The bounded strict local martingale market instead of `market`.
    #[serde(default)]
    pub example: Option<StrictLocalMartSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub n_scenarios: Option<usize>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub strategy: StrategySpec,
    /// Include `H_0' X_0` in the gains.
    #[serde(default)]
    pub seed_term: bool,
    /// Initial wealth `v`. Integration writes a wealth CSV when it is set;
    /// tests default it to the cost of the first holdings.
    #[serde(default)]
    pub initial_wealth: Option<f64>,
    #[serde(default)]
    pub test: TestPlan,
    #[serde(default)]
    pub admissibility: Option<AdmissibilitySpec>,
    /// Input path CSV for dissect, integrate and verify.
    #[serde(default)]
    pub paths: Option<PathBuf>,
    /// Extra reset times added to every path's minimal reset sequence when
    /// dissecting.
    #[serde(default)]
    pub extra_resets: Vec<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Deserialize, reporting the path of the offending field.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, origin: &Path) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        CliError::Config(format!("{}: field `{at}`: {}", origin.display(), e.into_inner()))
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = parse_json(&text, path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(m) = cfg.market_path.take() {
            if cfg.market.is_some() {
                return Err(CliError::Config("give either `market` or `market_path`, not both".into()));
            }
            let file = base.join(m);
            let text = fs::read_to_string(&file).map_err(|e| CliError::Config(format!("{}: {e}", file.display())))?;
            cfg.market = Some(parse_json(&text, &file)?);
        }
        if let Some(p) = cfg.paths.take() {
            cfg.paths = Some(base.join(p));
        }
        Ok(cfg)
    }

    /// Push `seed`, `n_scenarios` and `grid` into the market description.
    pub fn resolve(&mut self) -> Result<(), CliError> {
        if self.market.is_some() && self.example.is_some() {
            return Err(CliError::Config("give either `market` or `example`, not both".into()));
        }
        if let Some(m) = &mut self.market {
            if let Some(s) = self.seed {
                m.seed = s;
            }
            if let Some(n) = self.n_scenarios {
                m.n_scenarios = n;
            }
            if let Some(g) = &self.grid {
                m.grid = g.clone();
            }
            m.validate().map_err(|e| CliError::Config(format!("market: {e}")))?;
        }
        if let Some(m) = &mut self.example {
            if let Some(s) = self.seed {
                m.seed = s;
            }
            if let Some(n) = self.n_scenarios {
                m.n_scenarios = n;
            }
            if let Some(g) = &self.grid {
                m.grid = g.clone();
            }
            m.validate().map_err(|e| CliError::Config(format!("example: {e}")))?;
        }
        if !(self.test.z > 0.0 && self.test.z.is_finite()) {
            return Err(CliError::Config(format!("test.z must be positive, got {}", self.test.z)));
        }
        Ok(())
    }

    /// SHA-256 of the resolved configuration without its output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn effective_seed(&self) -> Option<u64> {
        self.market.as_ref().map(|m| m.seed).or(self.example.as_ref().map(|e| e.seed)).or(self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_field_reports_path() {
        let text = r#"{"market": {"grid": {"horizon": 1, "steps": 10}, "assets": [{"start": 1, "modle": "inv_bes3"}]}}"#;
        let err = parse_json::<RunConfig>(text, Path::new("c.json")).unwrap_err().to_string();
        assert!(err.contains("market.assets[0]"), "{err}");
    }

    #[test]
    fn strategy_forms() {
        let s: StrategySpec = serde_json::from_str(r#"{"rule": {"constant-share": {"asset": 1, "shares": 2.0}}}"#).unwrap();
        assert_eq!(s, StrategySpec::Rule(NamedRule::ConstantShare { asset: 1, shares: 2.0 }));
        let s: StrategySpec = serde_json::from_str(r#"{"rule": "equal-weight"}"#).unwrap();
        assert_eq!(s, StrategySpec::Rule(NamedRule::EqualWeight));
        let s: StrategySpec =
            serde_json::from_str(r#"{"step": {"steps": [{"time": 0, "holdings": [1, 1]}]}}"#).unwrap();
        assert!(matches!(s.build(false).unwrap(), Strategy::Step(_)));
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = RunConfig { seed: Some(1), out: Some("x".into()), ..Default::default() };
        let b = RunConfig { seed: Some(1), out: Some("y".into()), ..Default::default() };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig { seed: Some(2), ..Default::default() };
        assert_ne!(a.hash(), c.hash());
    }
}
