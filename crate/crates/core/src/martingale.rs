//! Monte-Carlo martingale and supermartingale tests at fixed checkpoints.
//!
//! For checkpoints `c_0 < c_1 < ...` the test looks at the paired
//! differences `D = M_{c_{j+1}} - M_{c_j}` across scenarios. With `d` their
//! sample mean and `se = sd(D) / sqrt(n)`:
//!
//! - martingale: every interval passes iff `|d| <= z se`;
//! - supermartingale: every interval passes iff `d <= z se`.
//!
//! When `se` is 0 the comparison is exact (`d == 0` resp. `d <= 0`).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deflator::DeflatorProcess;
use crate::path::PathError;
use crate::portfolio::WealthProcess;

pub const MIN_SAMPLES: usize = 100;
pub const DEFAULT_Z: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TestError {
    #[error("need at least {MIN_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("need at least 2 checkpoints, got {0}")]
    TooFewCheckpoints(usize),
    #[error("checkpoints must be strictly increasing")]
    UnorderedCheckpoints,
    #[error("sample row {row} has {found} values for {expected} checkpoints")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("sample row {0} is not finite")]
    NonFinite(usize),
    #[error("z must be positive and finite, got {0}")]
    InvalidZ(f64),
    #[error("deflator and wealth ensembles differ in size ({0} vs {1})")]
    EnsembleSize(usize, usize),
    #[error(transparent)]
    Path(#[from] PathError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TestMode {
    Martingale,
    Supermartingale,
}

impl std::fmt::Display for TestMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TestMode::Martingale => "MARTINGALE",
            TestMode::Supermartingale => "SUPERMARTINGALE",
        })
    }
}

/// Values of one process at the checkpoints, one row per scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointSamples {
    pub name: String,
    pub checkpoints: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl CheckpointSamples {
    pub fn new(name: impl Into<String>, checkpoints: Vec<f64>, rows: Vec<Vec<f64>>) -> Self {
        Self { name: name.into(), checkpoints, rows }
    }

    fn check(&self) -> Result<(), TestError> {
        let m = self.checkpoints.len();
        if m < 2 {
            return Err(TestError::TooFewCheckpoints(m));
        }
        if self.checkpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(TestError::UnorderedCheckpoints);
        }
        if self.rows.len() < MIN_SAMPLES {
            return Err(TestError::TooFewSamples(self.rows.len()));
        }
        for (row, r) in self.rows.iter().enumerate() {
            if r.len() != m {
                return Err(TestError::RowLength { row, expected: m, found: r.len() });
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(TestError::NonFinite(row));
            }
        }
        Ok(())
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let ss: f64 = xs.map(|x| (x - mean) * (x - mean)).sum();
    let var = if n > 1.0 { ss / (n - 1.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalVerdict {
    pub from: f64,
    pub to: f64,
    pub mean_difference: f64,
    pub standard_error: f64,
    pub pass: bool,
}

impl IntervalVerdict {
    fn decide(mode: TestMode, d: f64, se: f64, z: f64) -> bool {
        match (mode, se == 0.0) {
            (TestMode::Martingale, true) => d == 0.0,
            (TestMode::Supermartingale, true) => d <= 0.0,
            (TestMode::Martingale, false) => d.abs() <= z * se,
            (TestMode::Supermartingale, false) => d <= z * se,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleTestReport {
    pub process: String,
    pub mode: TestMode,
    pub z: f64,
    pub n_samples: usize,
    pub checkpoints: Vec<f64>,
    pub means: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub intervals: Vec<IntervalVerdict>,
    pub passed: bool,
    pub note: String,
}

impl MartingaleTestReport {
    /// Re-derive every verdict from the stored differences and errors.
    pub fn recompute(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.intervals {
            v.pass = IntervalVerdict::decide(self.mode, v.mean_difference, v.standard_error, self.z);
        }
        out.passed = out.intervals.iter().all(|v| v.pass);
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "{} test of {}: {verdict}", self.mode, self.process);
        let _ = writeln!(s, "n = {}, z = {}", self.n_samples, self.z);
        let _ = writeln!(s, "{:>12}  {:>14}  {:>12}", "checkpoint", "mean", "se");
        for ((t, m), e) in self.checkpoints.iter().zip(&self.means).zip(&self.standard_errors) {
            let _ = writeln!(s, "{t:>12.6}  {m:>14.6e}  {e:>12.4e}");
        }
        let _ = writeln!(s, "{:>12}  {:>12}  {:>14}  {:>12}  {:>6}", "from", "to", "mean diff", "se", "ok");
        for v in &self.intervals {
            let ok = if v.pass { "yes" } else { "no" };
            let _ = writeln!(
                s,
                "{:>12.6}  {:>12.6}  {:>14.6e}  {:>12.4e}  {ok:>6}",
                v.from, v.to, v.mean_difference, v.standard_error
            );
        }
        let _ = writeln!(s, "{}", self.note);
        s
    }
}

const TEST_NOTE: &str = "mean-based test at fixed checkpoints; conditional (filtration-level) behaviour is not tested";

pub fn martingale_test(samples: &CheckpointSamples, mode: TestMode, z: f64) -> Result<MartingaleTestReport, TestError> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(TestError::InvalidZ(z));
    }
    samples.check()?;
    let rows = &samples.rows;
    let m = samples.checkpoints.len();
    let (means, standard_errors): (Vec<f64>, Vec<f64>) =
        (0..m).map(|j| mean_and_se(rows.iter().map(|r| r[j]))).unzip();
    let intervals: Vec<IntervalVerdict> = (0..m - 1)
        .map(|j| {
            let (d, se) = mean_and_se(rows.iter().map(|r| r[j + 1] - r[j]));
            IntervalVerdict {
                from: samples.checkpoints[j],
                to: samples.checkpoints[j + 1],
                mean_difference: d,
                standard_error: se,
                pass: IntervalVerdict::decide(mode, d, se, z),
            }
        })
        .collect();
    Ok(MartingaleTestReport {
        process: samples.name.clone(),
        mode,
        z,
        n_samples: rows.len(),
        checkpoints: samples.checkpoints.clone(),
        means,
        standard_errors,
        passed: intervals.iter().all(|v| v.pass),
        intervals,
        note: TEST_NOTE.to_string(),
    })
}

/// `Z_t V_t` at the checkpoints for one scenario.
pub fn deflated_row(z: &DeflatorProcess, v: &WealthProcess, checkpoints: &[f64]) -> Result<Vec<f64>, TestError> {
    checkpoints
        .iter()
        .map(|&t| {
            let i = z.grid().locate(t)?;
            Ok(z.at_index(i) * v.at(t)?)
        })
        .collect()
}

/// Supermartingale test of `Z V` over the ensemble.
pub fn deflate_and_test(
    deflators: &[DeflatorProcess],
    wealth: &[WealthProcess],
    checkpoints: &[f64],
    z: f64,
) -> Result<MartingaleTestReport, TestError> {
    if deflators.len() != wealth.len() {
        return Err(TestError::EnsembleSize(deflators.len(), wealth.len()));
    }
    let rows = deflators
        .iter()
        .zip(wealth)
        .map(|(d, v)| deflated_row(d, v, checkpoints))
        .collect::<Result<Vec<_>, _>>()?;
    let samples = CheckpointSamples::new("Z*V", checkpoints.to_vec(), rows);
    let mut report = martingale_test(&samples, TestMode::Supermartingale, z)?;
    report.note = deflation_note(1, wealth.iter().all(WealthProcess::is_nonnegative));
    Ok(report)
}

/// What a deflated test does and does not establish.
pub fn deflation_note(tested_processes: usize, nonnegative: bool) -> String {
    let mut s = format!(
        "{TEST_NOTE}; tested on {tested_processes} wealth process(es) only, no claim is made for the whole class \
         of nonnegative wealth processes"
    );
    if !nonnegative {
        s.push_str("; warning: the tested wealth went negative on some sample");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn samples(rows: Vec<Vec<f64>>) -> CheckpointSamples {
        CheckpointSamples::new("x", vec![0.5, 1.0], rows)
    }

    #[test]
    fn constant_process_passes_both_modes() {
        let s = samples(vec![vec![0.1, 0.1]; 200]);
        for mode in [TestMode::Martingale, TestMode::Supermartingale] {
            let r = martingale_test(&s, mode, 3.0).unwrap();
            assert!(r.passed);
            assert_eq!(r.intervals[0].standard_error, 0.0);
        }
    }

    #[test]
    fn degenerate_comparisons_are_exact() {
        let down = samples(vec![vec![1.0, 0.5]; 200]);
        assert!(!martingale_test(&down, TestMode::Martingale, 3.0).unwrap().passed);
        assert!(martingale_test(&down, TestMode::Supermartingale, 3.0).unwrap().passed);
        let up = samples(vec![vec![0.5, 1.0]; 200]);
        assert!(!martingale_test(&up, TestMode::Supermartingale, 3.0).unwrap().passed);
    }

    #[test]
    fn random_walk_passes_and_drift_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows: Vec<Vec<f64>> = (0..5000)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                vec![0.0, a, a + b]
            })
            .collect();
        let s = CheckpointSamples::new("walk", vec![0.0, 1.0, 2.0], rows.clone());
        assert!(martingale_test(&s, TestMode::Martingale, 4.0).unwrap().passed);
        let drift: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0], r[1] - 0.5, r[2] - 1.0]).collect();
        let s = CheckpointSamples::new("walk", vec![0.0, 1.0, 2.0], drift);
        assert!(!martingale_test(&s, TestMode::Martingale, 3.0).unwrap().passed);
        assert!(martingale_test(&s, TestMode::Supermartingale, 3.0).unwrap().passed);
    }

    #[test]
    fn verdicts_recompute_from_stored_numbers() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rows = (0..300).map(|_| vec![0.0, StandardNormal.sample(&mut rng)]).collect();
        let r = martingale_test(&samples(rows), TestMode::Martingale, 3.0).unwrap();
        assert_eq!(r.recompute(), r);
        let json = serde_json::to_string(&r).unwrap();
        let back: MartingaleTestReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.recompute(), r);
    }

    #[test]
    fn precondition_errors() {
        assert_eq!(martingale_test(&samples(vec![vec![0.0, 0.0]; 99]), TestMode::Martingale, 3.0), Err(TestError::TooFewSamples(99)));
        let one = CheckpointSamples::new("x", vec![1.0], vec![vec![0.0]; 100]);
        assert_eq!(martingale_test(&one, TestMode::Martingale, 3.0), Err(TestError::TooFewCheckpoints(1)));
        assert_eq!(martingale_test(&samples(vec![vec![0.0, 0.0]; 100]), TestMode::Martingale, 0.0), Err(TestError::InvalidZ(0.0)));
    }
}
