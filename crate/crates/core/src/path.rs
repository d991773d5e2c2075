//! Paths taking values in the union of all finite-dimensional real spaces.
//!
//! A [`PiecewisePath`] is one scenario of a price process whose number of
//! assets may change over time. It is stored as an initial value `X_0`
//! followed by pieces `(tau_{k-1}, tau_k]` of fixed dimension. Each piece owns
//! its right endpoint and stores the right limit `X^+` at its left endpoint,
//! so a dimension change (or any other right discontinuity) is always a reset
//! on the grid.
//!
//! "No value here" is modelled by the absence of a sample, never by a zero
//! vector.

use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;
use thiserror::Error;

/// Default cap on the number of pieces a generated path may have.
pub const DEFAULT_MAX_PIECES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("time grid: {0}")]
    InvalidGrid(String),
    #[error("vector must have dimension >= 1")]
    EmptyVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("norm order p = {0} is not in [1, inf]")]
    InvalidNormOrder(f64),
    #[error("time {0} is not on the grid")]
    NotOnGrid(f64),
    #[error("no right limit is stored at the horizon t = {0}")]
    NoRightLimit(f64),
    #[error("invalid reset sequence: {0}")]
    InvalidResets(String),
    #[error("path has more than {cap} pieces")]
    PieceCapExceeded { cap: usize },
    #[error("invalid path: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// A point of `R^n` tagged with its dimension `n >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionedVector(SmallVec<[f64; 4]>);

impl DimensionedVector {
    pub fn new(components: &[f64]) -> Result<Self, PathError> {
        if components.is_empty() {
            return Err(PathError::EmptyVector);
        }
        Ok(Self(SmallVec::from_slice(components)))
    }

    /// The zero vector `0^(n)`.
    ///
    /// # Panics
    /// If `n == 0`.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "zero vector needs dimension >= 1");
        Self(SmallVec::from_elem(0.0, n))
    }

    pub fn filled(n: usize, value: f64) -> Self {
        assert!(n >= 1, "vector needs dimension >= 1");
        Self(SmallVec::from_elem(value, n))
    }

    pub(crate) fn from_smallvec(v: SmallVec<[f64; 4]>) -> Self {
        debug_assert!(!v.is_empty());
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.0.get(i).copied()
    }

    fn check_dim(&self, other: &Self) -> Result<(), PathError> {
        if self.dim() != other.dim() {
            return Err(PathError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn dot(&self, other: &Self) -> Result<f64, PathError> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PathError> {
        self.check_dim(other)?;
        Ok(Self(self.0.iter().zip(other.0.iter()).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &Self) -> Result<Self, PathError> {
        self.check_dim(other)?;
        Ok(Self(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect()))
    }

    /// `a * self + b * other`.
    pub fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self, PathError> {
        x.check_dim(y)?;
        Ok(Self(x.0.iter().zip(y.0.iter()).map(|(u, v)| a * u + b * v).collect()))
    }

    pub fn scale(&self, a: f64) -> Self {
        Self(self.0.iter().map(|x| a * x).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Whether two points of the union space coincide: same dimension and
    /// every component within `tolerance` (exact equality when it is 0).
    pub fn coincides(&self, other: &Self, tolerance: f64) -> bool {
        self.dim() == other.dim()
            && self
                .0
                .iter()
                .zip(other.0.iter())
                .all(|(a, b)| if tolerance == 0.0 { a == b } else { (a - b).abs() <= tolerance })
    }

    pub fn local_norm(&self, p: f64) -> Result<f64, PathError> {
        local_norm(self, p)
    }
}

impl fmt::Display for DimensionedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl TryFrom<Vec<f64>> for DimensionedVector {
    type Error = PathError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(&v)
    }
}

/// The `l_p` norm taken inside whichever `R^n` the vector lives in.
/// `p = f64::INFINITY` gives the max norm.
pub fn local_norm(v: &DimensionedVector, p: f64) -> Result<f64, PathError> {
    if p.is_nan() || p < 1.0 {
        return Err(PathError::InvalidNormOrder(p));
    }
    let xs = v.as_slice();
    Ok(if p.is_infinite() {
        xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    } else if p == 1.0 {
        xs.iter().map(|x| x.abs()).sum()
    } else if p == 2.0 {
        xs.iter().map(|x| x * x).sum::<f64>().sqrt()
    } else {
        xs.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    })
}

/// Strictly increasing observation times starting at 0. Cheap to clone.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Arc<[f64]>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self, PathError> {
        if let Some(msg) = grid_problem(&times) {
            return Err(PathError::InvalidGrid(msg));
        }
        Ok(Self { times: times.into() })
    }

    /// `steps + 1` equally spaced points on `[0, horizon]`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self, PathError> {
        if !(horizon.is_finite() && horizon > 0.0) || steps == 0 {
            return Err(PathError::InvalidGrid(format!(
                "uniform grid needs horizon > 0 and steps >= 1 (got {horizon}, {steps})"
            )));
        }
        let times = (0..=steps)
            .map(|i| if i == steps { horizon } else { i as f64 * horizon / steps as f64 })
            .collect();
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn last_index(&self) -> usize {
        self.times.len() - 1
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    /// Exact lookup.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times.binary_search_by(|x| x.total_cmp(&t)).ok()
    }

    /// Lookup that forgives rounding noise much smaller than the local spacing
    /// (decimal inputs such as `0.3` against `3 * 0.1`).
    pub fn locate(&self, t: f64) -> Result<usize, PathError> {
        if let Some(i) = self.index_of(t) {
            return Ok(i);
        }
        let pos = self.times.partition_point(|&x| x < t);
        let candidates = [pos.checked_sub(1), (pos < self.len()).then_some(pos)];
        for i in candidates.into_iter().flatten() {
            let spacing = self.local_spacing(i);
            if (self.times[i] - t).abs() <= 1e-9 * spacing {
                return Ok(i);
            }
        }
        Err(PathError::NotOnGrid(t))
    }

    /// First grid index whose time is at or after `t` (up to rounding noise).
    pub fn snap_up(&self, t: f64) -> Option<usize> {
        if let Ok(i) = self.locate(t) {
            return Some(i);
        }
        let pos = self.times.partition_point(|&x| x < t);
        (pos < self.len()).then_some(pos)
    }

    fn local_spacing(&self, i: usize) -> f64 {
        let left = if i > 0 { self.times[i] - self.times[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < self.len() { self.times[i + 1] - self.times[i] } else { f64::INFINITY };
        left.min(right)
    }
}

fn grid_problem(times: &[f64]) -> Option<String> {
    if times.len() < 2 {
        return Some(format!("needs at least 2 times, got {}", times.len()));
    }
    if times[0] != 0.0 {
        return Some(format!("must start at 0, starts at {}", times[0]));
    }
    if let Some(t) = times.iter().find(|t| !t.is_finite()) {
        return Some(format!("non-finite time {t}"));
    }
    if let Some(w) = times.windows(2).find(|w| w[0] >= w[1]) {
        return Some(format!("not strictly increasing at {} -> {}", w[0], w[1]));
    }
    None
}

/// One piece `(tau_{k-1}, tau_k]` of a validated path. Times are grid indices.
#[derive(Clone, Debug, PartialEq)]
pub struct PathPiece {
    index: usize,
    start: usize,
    end: usize,
    start_right_limit: DimensionedVector,
    samples: Vec<DimensionedVector>,
}

impl PathPiece {
    /// 1-based piece number `k`.
    pub fn index(&self) -> usize {
        self.index
    }
    pub fn start(&self) -> usize {
        self.start
    }
    pub fn end(&self) -> usize {
        self.end
    }
    pub fn dim(&self) -> usize {
        self.start_right_limit.dim()
    }
    /// `X^+` at the left endpoint.
    pub fn start_right_limit(&self) -> &DimensionedVector {
        &self.start_right_limit
    }
    /// Samples at grid indices `start + 1 ..= end`.
    pub fn samples(&self) -> &[DimensionedVector] {
        &self.samples
    }
    pub fn contains(&self, i: usize) -> bool {
        self.start < i && i <= self.end
    }
}

/// Unvalidated path data, as ingested from CSV or assembled by hand.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRecord {
    pub grid: Vec<f64>,
    pub initial: Vec<f64>,
    pub pieces: Vec<PieceRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PieceRecord {
    pub k: usize,
    pub start: f64,
    pub end: f64,
    pub dim: usize,
    pub start_right_limit: Vec<f64>,
    pub samples: Vec<(f64, Vec<f64>)>,
}

/// One broken invariant of a path record.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// 1-based piece number, when the problem belongs to a piece.
    pub piece: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.piece {
            Some(k) => write!(f, "piece {k}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

fn violation(piece: Option<usize>, message: impl Into<String>) -> Violation {
    Violation { piece, message: message.into() }
}

/// Every invariant violation of `record`; empty iff it is a legal piecewise
/// path.
pub fn validate_path(record: &PathRecord) -> Vec<Violation> {
    let mut out = Vec::new();
    if let Some(msg) = grid_problem(&record.grid) {
        out.push(violation(None, format!("time grid {msg}")));
        return out;
    }
    let grid = TimeGrid { times: record.grid.clone().into() };
    if record.initial.is_empty() {
        out.push(violation(None, "initial value has dimension 0"));
    } else if record.initial.iter().any(|x| !x.is_finite()) {
        out.push(violation(None, "initial value is not finite"));
    }
    if record.pieces.is_empty() {
        out.push(violation(None, "path has no pieces"));
        return out;
    }

    let mut covered_to = 0.0_f64;
    for (pos, piece) in record.pieces.iter().enumerate() {
        let k = piece.k;
        let here = Some(k);
        if k != pos + 1 {
            out.push(violation(here, format!("piece at position {} is numbered {k}", pos + 1)));
        }
        if piece.dim == 0 {
            out.push(violation(here, "dimension 0"));
        }
        let start_idx = grid.index_of(piece.start);
        let end_idx = grid.index_of(piece.end);
        if start_idx.is_none() {
            out.push(violation(here, format!("start {} is not a grid time", piece.start)));
        }
        if end_idx.is_none() {
            out.push(violation(here, format!("end {} is not a grid time", piece.end)));
        }
        if piece.start >= piece.end {
            out.push(violation(
                here,
                format!("interval ({}, {}] is empty (coincident resets are not allowed)", piece.start, piece.end),
            ));
        }
        if pos == 0 && piece.start != 0.0 {
            out.push(violation(here, format!("first piece must start at 0, starts at {}", piece.start)));
        }
        if pos > 0 && piece.start != covered_to {
            let kind = if piece.start > covered_to { "gap" } else { "overlap" };
            out.push(violation(
                here,
                format!("{kind} between {covered_to} and {}: pieces do not tile the horizon", piece.start),
            ));
        }
        covered_to = piece.end;

        if piece.start_right_limit.len() != piece.dim {
            out.push(violation(
                here,
                format!(
                    "right limit at {} has dimension {}, piece dimension is {}",
                    piece.start,
                    piece.start_right_limit.len(),
                    piece.dim
                ),
            ));
        }
        if piece.start_right_limit.iter().any(|x| !x.is_finite()) {
            out.push(violation(here, format!("right limit at {} is not finite", piece.start)));
        }
        for (t, v) in &piece.samples {
            if v.len() != piece.dim {
                out.push(violation(
                    here,
                    format!("sample at t={t} has dimension {}, piece dimension is {}", v.len(), piece.dim),
                ));
            }
            if v.iter().any(|x| !x.is_finite()) {
                out.push(violation(here, format!("sample at t={t} is not finite")));
            }
        }
        if let (Some(s), Some(e)) = (start_idx, end_idx) {
            if s < e {
                let expected = &record.grid[s + 1..=e];
                let got: Vec<f64> = piece.samples.iter().map(|(t, _)| *t).collect();
                if got.as_slice() != expected {
                    out.push(violation(
                        here,
                        format!(
                            "samples do not cover exactly the grid times in ({}, {}] ({} expected, {} given)",
                            piece.start,
                            piece.end,
                            expected.len(),
                            got.len()
                        ),
                    ));
                }
            }
        }
    }
    if covered_to != grid.horizon() {
        out.push(violation(
            record.pieces.last().map(|p| p.k),
            format!("last piece ends at {covered_to}, horizon is {}", grid.horizon()),
        ));
    }
    out
}

/// A validated piecewise path. Immutable.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePath {
    grid: TimeGrid,
    initial: DimensionedVector,
    pieces: Vec<PathPiece>,
    // owner[i] = position of the piece containing grid index i (i >= 1)
    owner: Vec<u32>,
}

impl PiecewisePath {
    pub fn from_record(record: &PathRecord) -> Result<Self, PathError> {
        let violations = validate_path(record);
        if !violations.is_empty() {
            return Err(PathError::Invalid(violations));
        }
        let grid = TimeGrid::new(record.grid.clone())?;
        let initial = DimensionedVector::new(&record.initial)?;
        let mut pieces = Vec::with_capacity(record.pieces.len());
        for p in &record.pieces {
            pieces.push(PathPiece {
                index: p.k,
                start: grid.index_of(p.start).expect("validated"),
                end: grid.index_of(p.end).expect("validated"),
                start_right_limit: DimensionedVector::new(&p.start_right_limit)?,
                samples: p
                    .samples
                    .iter()
                    .map(|(_, v)| DimensionedVector::new(v))
                    .collect::<Result<_, _>>()?,
            });
        }
        Ok(Self::assemble(grid, initial, pieces))
    }

    fn assemble(grid: TimeGrid, initial: DimensionedVector, pieces: Vec<PathPiece>) -> Self {
        let mut owner = vec![0u32; grid.len()];
        for (pos, p) in pieces.iter().enumerate() {
            for o in &mut owner[p.start + 1..=p.end] {
                *o = pos as u32;
            }
        }
        Self { grid, initial, pieces, owner }
    }

    pub fn to_record(&self) -> PathRecord {
        let t = self.grid.times();
        PathRecord {
            grid: t.to_vec(),
            initial: self.initial.as_slice().to_vec(),
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceRecord {
                    k: p.index,
                    start: t[p.start],
                    end: t[p.end],
                    dim: p.dim(),
                    start_right_limit: p.start_right_limit.as_slice().to_vec(),
                    samples: p
                        .samples
                        .iter()
                        .enumerate()
                        .map(|(j, v)| (t[p.start + 1 + j], v.as_slice().to_vec()))
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn initial(&self) -> &DimensionedVector {
        &self.initial
    }

    pub fn pieces(&self) -> &[PathPiece] {
        &self.pieces
    }

    /// The piece whose interval contains grid index `i >= 1`.
    pub fn piece_at(&self, i: usize) -> &PathPiece {
        assert!(i >= 1 && i < self.grid.len(), "grid index {i} outside (0, T]");
        &self.pieces[self.owner[i] as usize]
    }

    /// The piece that starts at grid index `i`, if any.
    pub fn piece_starting_at(&self, i: usize) -> Option<&PathPiece> {
        if i + 1 >= self.grid.len() {
            return None;
        }
        let p = self.piece_at(i + 1);
        (p.start == i).then_some(p)
    }

    /// Dimension `N_t` at grid index `i`.
    pub fn dim_at(&self, i: usize) -> usize {
        if i == 0 {
            self.initial.dim()
        } else {
            self.piece_at(i).dim()
        }
    }

    pub fn value_at_index(&self, i: usize) -> &DimensionedVector {
        if i == 0 {
            return &self.initial;
        }
        let p = self.piece_at(i);
        &p.samples[i - p.start - 1]
    }

    /// `X^+` at grid index `i < last`. Stored at piece starts; elsewhere the
    /// samples are already right-continuous.
    pub fn right_limit_at_index(&self, i: usize) -> Result<&DimensionedVector, PathError> {
        if i >= self.grid.last_index() {
            return Err(PathError::NoRightLimit(self.grid.horizon()));
        }
        Ok(match self.piece_starting_at(i) {
            Some(p) => &p.start_right_limit,
            None => self.value_at_index(i),
        })
    }

    pub fn value_at(&self, t: f64) -> Result<&DimensionedVector, PathError> {
        let i = self.grid.index_of(t).ok_or(PathError::NotOnGrid(t))?;
        Ok(self.value_at_index(i))
    }

    pub fn right_limit_at(&self, t: f64) -> Result<&DimensionedVector, PathError> {
        let i = self.grid.index_of(t).ok_or(PathError::NotOnGrid(t))?;
        self.right_limit_at_index(i)
    }

    /// The reset sequence this path is stored with (piece left endpoints).
    pub fn stored_resets(&self) -> ResetSequence {
        ResetSequence(self.pieces.iter().map(|p| p.start).collect())
    }

    /// Same as `minimal_reset_sequence(&self.dense(), 0.0)` without
    /// materializing the dense record: inside a piece the samples are
    /// right-continuous, so only piece starts can jump.
    pub fn minimal_resets(&self) -> ResetSequence {
        let mut out = vec![0];
        out.extend(
            self.pieces
                .iter()
                .filter(|p| p.start > 0 && !p.start_right_limit.coincides(self.value_at_index(p.start), 0.0))
                .map(|p| p.start),
        );
        ResetSequence(out)
    }

    /// The dense record of values and right limits at every grid time.
    pub fn dense(&self) -> DenseRecord {
        let n = self.grid.len();
        DenseRecord {
            grid: self.grid.clone(),
            values: (0..n).map(|i| self.value_at_index(i).clone()).collect(),
            right_limits: (0..n - 1)
                .map(|i| self.right_limit_at_index(i).expect("i < last").clone())
                .collect(),
        }
    }

    /// `X` frozen at grid index `alpha`: the pieces up to the one containing
    /// `alpha`, then the constant `X_alpha` (no reset at `alpha`).
    pub fn stopped_at_index(&self, alpha: usize) -> PiecewisePath {
        let last = self.grid.last_index();
        assert!(alpha <= last);
        if alpha == last {
            return self.clone();
        }
        let frozen = self.value_at_index(alpha).clone();
        let mut pieces: Vec<PathPiece>;
        if alpha == 0 {
            pieces = vec![PathPiece {
                index: 1,
                start: 0,
                end: last,
                start_right_limit: frozen.clone(),
                samples: vec![frozen; last],
            }];
        } else {
            let keep = self.owner[alpha] as usize;
            pieces = self.pieces[..=keep].to_vec();
            let p = pieces.last_mut().expect("nonempty");
            p.samples.truncate(alpha - p.start);
            p.samples.extend(std::iter::repeat_n(frozen, last - alpha));
            p.end = last;
        }
        Self::assemble(self.grid.clone(), self.initial.clone(), pieces)
    }
}

/// Values and right limits at every grid time, before any piece structure
/// has been decided. `right_limits[i]` is `X^+` at grid index `i < last`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseRecord {
    pub grid: TimeGrid,
    pub values: Vec<DimensionedVector>,
    pub right_limits: Vec<DimensionedVector>,
}

/// Reset times as grid indices: starts at 0, strictly increasing, all before
/// the horizon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResetSequence(Vec<usize>);

impl ResetSequence {
    pub fn new(indices: Vec<usize>, grid: &TimeGrid) -> Result<Self, PathError> {
        if indices.first() != Some(&0) {
            return Err(PathError::InvalidResets("must start with tau_0 = 0".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PathError::InvalidResets("reset times must be strictly increasing".into()));
        }
        if indices.iter().any(|&i| i >= grid.last_index()) {
            return Err(PathError::InvalidResets("reset times must lie before the horizon".into()));
        }
        Ok(Self(indices))
    }

    pub fn from_times(times: &[f64], grid: &TimeGrid) -> Result<Self, PathError> {
        let idx = times.iter().map(|&t| grid.locate(t)).collect::<Result<Vec<_>, _>>()?;
        Self::new(idx, grid)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn times(&self, grid: &TimeGrid) -> Vec<f64> {
        self.0.iter().map(|&i| grid.time(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Checks that this is a reset sequence for `path`: it must contain every
    /// time where the path is discontinuous from the right.
    pub fn validate_for(&self, path: &PiecewisePath) -> Result<(), PathError> {
        let grid = path.grid();
        Self::new(self.0.clone(), grid)?;
        let minimal = path.minimal_resets();
        if let Some(&missing) = minimal.0.iter().find(|&&i| !self.contains(i)) {
            return Err(PathError::InvalidResets(format!(
                "missing reset at t = {} where the path jumps from the right",
                grid.time(missing)
            )));
        }
        Ok(())
    }
}

/// The minimal reset sequence: 0 followed by every grid time before the
/// horizon where `X^+ != X`. `tolerance` is 0 for generated data.
pub fn minimal_reset_sequence(record: &DenseRecord, tolerance: f64) -> ResetSequence {
    let mut out = vec![0];
    for (i, (value, right)) in record.values.iter().zip(&record.right_limits).enumerate().skip(1) {
        if !right.coincides(value, tolerance) {
            out.push(i);
        }
    }
    ResetSequence(out)
}

/// Incremental construction of a path, one grid time at a time.
///
/// Generators push the value at each new time and call [`PathBuilder::reset`]
/// right after pushing a time at which the path is discontinuous from the
/// right.
#[derive(Debug)]
pub struct PathBuilder {
    grid: Option<TimeGrid>,
    times: Vec<f64>,
    initial: DimensionedVector,
    pieces: Vec<PathPiece>,
    max_pieces: usize,
}

impl PathBuilder {
    /// Builder on a fixed grid; `right_limit_at_zero` is usually `initial`.
    pub fn on_grid(grid: TimeGrid, initial: DimensionedVector, right_limit_at_zero: DimensionedVector) -> Self {
        let mut b = Self::new_inner(Some(grid), initial, right_limit_at_zero);
        b.times.clear();
        b
    }

    /// Builder that records its own times (adaptive grids).
    pub fn adaptive(initial: DimensionedVector, right_limit_at_zero: DimensionedVector) -> Self {
        Self::new_inner(None, initial, right_limit_at_zero)
    }

    fn new_inner(grid: Option<TimeGrid>, initial: DimensionedVector, right_limit_at_zero: DimensionedVector) -> Self {
        Self {
            grid,
            times: vec![0.0],
            initial,
            pieces: vec![PathPiece {
                index: 1,
                start: 0,
                end: 0,
                start_right_limit: right_limit_at_zero,
                samples: Vec::new(),
            }],
            max_pieces: DEFAULT_MAX_PIECES,
        }
    }

    pub fn max_pieces(mut self, cap: usize) -> Self {
        self.max_pieces = cap;
        self
    }

    fn current(&mut self) -> &mut PathPiece {
        self.pieces.last_mut().expect("always one piece")
    }

    /// Index of the last pushed time.
    pub fn last_index(&self) -> usize {
        self.current_end()
    }

    fn current_end(&self) -> usize {
        self.pieces.last().expect("always one piece").end
    }

    /// Dimension of the open piece.
    pub fn current_dim(&self) -> usize {
        self.pieces.last().expect("always one piece").dim()
    }

    /// Push the sample at the next grid time (fixed-grid builders).
    pub fn push(&mut self, value: DimensionedVector) -> Result<(), PathError> {
        let expected = self.current_dim();
        if value.dim() != expected {
            return Err(PathError::DimensionMismatch { expected, found: value.dim() });
        }
        if let Some(g) = &self.grid {
            if self.current_end() + 1 >= g.len() {
                return Err(PathError::InvalidGrid("pushed past the horizon".into()));
            }
        }
        let p = self.current();
        p.samples.push(value);
        p.end += 1;
        Ok(())
    }

    /// Push the sample at time `t` (adaptive builders).
    pub fn push_at(&mut self, t: f64, value: DimensionedVector) -> Result<(), PathError> {
        if self.grid.is_some() {
            return Err(PathError::InvalidGrid("push_at on a fixed-grid builder".into()));
        }
        let last = *self.times.last().expect("starts with 0");
        if !(t > last) || !t.is_finite() {
            return Err(PathError::InvalidGrid(format!("time {t} does not follow {last}")));
        }
        self.times.push(t);
        self.push(value)
    }

    /// Start a new piece at the last pushed time with right limit `right_limit`.
    pub fn reset(&mut self, right_limit: DimensionedVector) -> Result<(), PathError> {
        let at = self.current_end();
        if at == 0 {
            return Err(PathError::InvalidResets("use the right limit at zero instead of a reset at 0".into()));
        }
        if self.pieces.len() >= self.max_pieces {
            return Err(PathError::PieceCapExceeded { cap: self.max_pieces });
        }
        let index = self.pieces.len() + 1;
        self.pieces.push(PathPiece { index, start: at, end: at, start_right_limit: right_limit, samples: Vec::new() });
        Ok(())
    }

    pub fn finish(self) -> Result<PiecewisePath, PathError> {
        let grid = match self.grid {
            Some(g) => g,
            None => TimeGrid::new(self.times)?,
        };
        let end = self.pieces.last().expect("always one piece").end;
        if end != grid.last_index() {
            return Err(PathError::InvalidGrid(format!(
                "path stops at grid index {end}, horizon index is {}",
                grid.last_index()
            )));
        }
        if self.pieces.last().is_some_and(|p| p.start == p.end) {
            return Err(PathError::InvalidResets("reset at the horizon".into()));
        }
        Ok(PiecewisePath::assemble(grid, self.initial, self.pieces))
    }
}
