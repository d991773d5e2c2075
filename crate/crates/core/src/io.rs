//! Long-format CSV for paths, dissected pieces and gains.
//!
//! Path CSV, one row per component:
//!
//! ```text
//! scenario_id,time,piece,asset_index,side,value
//! ```
//!
//! `side` is `V` for the value `X_t` and `R` for the right limit `X^+_t`
//! stored at the start of a piece. Piece 0 holds `X_0`. Piece `k >= 1` has
//! its `R` rows at `tau_{k-1}` and `V` rows at every grid time of
//! `(tau_{k-1}, tau_k]`. Floats are written with the shortest representation
//! that reads back to the same bits.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use thiserror::Error;

use crate::dissection::DissectedPiece;
use crate::integration::GainsPath;
use crate::path::{validate_path, PathError, PathRecord, PieceRecord, PiecewisePath, TimeGrid, Violation};

pub const PATH_HEADER: [&str; 6] = ["scenario_id", "time", "piece", "asset_index", "side", "value"];
pub const DISSECTED_HEADER: [&str; 7] = ["scenario_id", "time", "piece", "asset_index", "side", "value", "k"];
pub const GAINS_HEADER: [&str; 3] = ["scenario_id", "time", "value"];

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("header must be {expected}, found {found}")]
    Header { expected: String, found: String },
    #[error("scenario {scenario}: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid { scenario: u64, violations: Vec<Violation> },
    #[error("scenario {scenario}: {source}")]
    Path {
        scenario: u64,
        #[source]
        source: PathError,
    },
}

fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn check_header<R: Read>(r: &mut csv::Reader<R>, expected: &[&str]) -> Result<(), IoError> {
    let h = r.headers()?;
    if h.iter().ne(expected.iter().copied()) {
        return Err(IoError::Header { expected: expected.join(","), found: h.iter().collect::<Vec<_>>().join(",") });
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str) -> Result<T, IoError> {
    let line = rec.position().map_or(0, |p| p.line());
    let raw = rec.get(i).ok_or_else(|| IoError::Malformed { line, message: format!("missing {name}") })?;
    raw.trim().parse().map_err(|_| IoError::Malformed { line, message: format!("bad {name} {raw:?}") })
}

pub struct PathCsvWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> PathCsvWriter<W> {
    pub fn new(w: W) -> Result<Self, IoError> {
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(PATH_HEADER)?;
        Ok(Self { inner })
    }

    fn rows(&mut self, id: &str, t: f64, piece: usize, side: &str, v: &[f64]) -> Result<(), IoError> {
        let (t, piece) = (num(t), piece.to_string());
        for (a, x) in v.iter().enumerate() {
            self.inner.write_record([id, &t, &piece, &a.to_string(), side, &num(*x)])?;
        }
        Ok(())
    }

    pub fn write_path(&mut self, scenario_id: u64, path: &PiecewisePath) -> Result<(), IoError> {
        let id = scenario_id.to_string();
        let grid = path.grid();
        self.rows(&id, 0.0, 0, "V", path.initial().as_slice())?;
        for p in path.pieces() {
            let k = p.index();
            self.rows(&id, grid.time(p.start()), k, "R", p.start_right_limit().as_slice())?;
            for (j, x) in p.samples().iter().enumerate() {
                self.rows(&id, grid.time(p.start() + 1 + j), k, "V", x.as_slice())?;
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, IoError> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| IoError::Io(e.into_error()))
    }
}

pub fn write_paths<'a, W: Write>(w: W, paths: impl IntoIterator<Item = (u64, &'a PiecewisePath)>) -> Result<W, IoError> {
    let mut out = PathCsvWriter::new(w)?;
    for (id, p) in paths {
        out.write_path(id, p)?;
    }
    out.finish()
}

#[derive(Default)]
struct Group {
    rows: BTreeMap<usize, f64>,
    line: u64,
}

impl Group {
    fn into_vec(self, what: &str) -> Result<Vec<f64>, IoError> {
        let n = self.rows.len();
        if self.rows.keys().copied().ne(0..n) {
            return Err(IoError::Malformed {
                line: self.line,
                message: format!("{what}: asset indices are not 0..{n}"),
            });
        }
        Ok(self.rows.into_values().collect())
    }
}

#[derive(Default)]
struct ScenarioRows {
    // keyed by piece number
    initial: Group,
    rights: BTreeMap<usize, (f64, Group)>,
    values: BTreeMap<usize, Vec<(f64, Group)>>,
}

/// Read every scenario as an unvalidated record, in scenario order.
pub fn read_path_records<R: Read>(r: R) -> Result<Vec<(u64, PathRecord)>, IoError> {
    let mut rd = csv::Reader::from_reader(r);
    check_header(&mut rd, &PATH_HEADER)?;
    let mut scenarios: BTreeMap<u64, ScenarioRows> = BTreeMap::new();
    for rec in rd.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let id: u64 = field(&rec, 0, "scenario_id")?;
        let t: f64 = field(&rec, 1, "time")?;
        let piece: usize = field(&rec, 2, "piece")?;
        let a: usize = field(&rec, 3, "asset_index")?;
        let side: String = field(&rec, 4, "side")?;
        let x: f64 = field(&rec, 5, "value")?;
        let s = scenarios.entry(id).or_default();
        let group = match (side.as_str(), piece) {
            ("V", 0) => &mut s.initial,
            ("R", 0) => return Err(IoError::Malformed { line, message: "piece 0 has no right limit".into() }),
            ("R", k) => {
                let (t0, g) = s.rights.entry(k).or_insert_with(|| (t, Group::default()));
                if *t0 != t {
                    return Err(IoError::Malformed { line, message: format!("piece {k} has right limits at two times") });
                }
                g
            }
            ("V", k) => {
                let v = s.values.entry(k).or_default();
                if v.last().is_none_or(|(t0, _)| *t0 != t) {
                    v.push((t, Group::default()));
                }
                &mut v.last_mut().expect("just pushed").1
            }
            _ => return Err(IoError::Malformed { line, message: format!("side must be V or R, got {side:?}") }),
        };
        if group.rows.insert(a, x).is_some() {
            return Err(IoError::Malformed { line, message: format!("duplicate entry for asset {a}") });
        }
        if group.line == 0 {
            group.line = line;
        }
    }

    let mut out = Vec::with_capacity(scenarios.len());
    for (id, s) in scenarios {
        let initial = s.initial.into_vec("initial value")?;
        let mut values = s.values;
        let mut grid = vec![0.0];
        let mut pieces = Vec::new();
        for (k, (start, right)) in s.rights {
            let right = right.into_vec(&format!("piece {k} right limit"))?;
            let samples = values
                .remove(&k)
                .unwrap_or_default()
                .into_iter()
                .map(|(t, g)| Ok((t, g.into_vec(&format!("piece {k} sample at t={t}"))?)))
                .collect::<Result<Vec<_>, IoError>>()?;
            grid.extend(samples.iter().map(|(t, _)| *t));
            let end = samples.last().map_or(start, |(t, _)| *t);
            pieces.push(PieceRecord { k, start, end, dim: right.len(), start_right_limit: right, samples });
        }
        if let Some((&k, _)) = values.iter().next() {
            return Err(IoError::Malformed { line: 0, message: format!("scenario {id}: piece {k} has no right limit") });
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        out.push((id, PathRecord { grid, initial, pieces }));
    }
    Ok(out)
}

/// Read and validate every scenario.
pub fn read_paths<R: Read>(r: R) -> Result<Vec<(u64, PiecewisePath)>, IoError> {
    read_path_records(r)?
        .into_iter()
        .map(|(id, rec)| {
            let violations = validate_path(&rec);
            if !violations.is_empty() {
                return Err(IoError::Invalid { scenario: id, violations });
            }
            PiecewisePath::from_record(&rec).map(|p| (id, p)).map_err(|source| IoError::Path { scenario: id, source })
        })
        .collect()
}

/// Dissected pieces of one scenario. `piece` is the path piece owning the
/// grid time (0 at time 0), `k` the dissection piece.
pub fn write_dissected<W: Write>(
    w: &mut csv::Writer<W>,
    scenario_id: u64,
    path: &PiecewisePath,
    pieces: &[DissectedPiece],
) -> Result<(), IoError> {
    let id = scenario_id.to_string();
    let grid = path.grid();
    for p in pieces {
        let k = p.k.to_string();
        for (i, x) in p.values.iter().enumerate() {
            let t = num(grid.time(i));
            let owner = if i == 0 { 0 } else { path.piece_at(i).index() }.to_string();
            for (a, v) in x.as_slice().iter().enumerate() {
                w.write_record([id.as_str(), &t, &owner, &a.to_string(), "V", &num(*v), &k])?;
            }
        }
    }
    Ok(())
}

pub fn dissected_writer<W: Write>(w: W) -> Result<csv::Writer<W>, IoError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(DISSECTED_HEADER)?;
    Ok(out)
}

pub fn gains_writer<W: Write>(w: W) -> Result<csv::Writer<W>, IoError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(GAINS_HEADER)?;
    Ok(out)
}

pub fn write_gains<W: Write>(w: &mut csv::Writer<W>, scenario_id: u64, gains: &GainsPath) -> Result<(), IoError> {
    let id = scenario_id.to_string();
    for (t, v) in gains.grid().times().iter().zip(gains.values()) {
        w.write_record([id.as_str(), &num(*t), &num(*v)])?;
    }
    Ok(())
}

pub fn read_gains<R: Read>(r: R) -> Result<Vec<(u64, GainsPath)>, IoError> {
    let mut rd = csv::Reader::from_reader(r);
    check_header(&mut rd, &GAINS_HEADER)?;
    let mut by_id: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for rec in rd.records() {
        let rec = rec?;
        let e = by_id.entry(field(&rec, 0, "scenario_id")?).or_default();
        e.0.push(field(&rec, 1, "time")?);
        e.1.push(field(&rec, 2, "value")?);
    }
    by_id
        .into_iter()
        .map(|(id, (t, v))| {
            let wrap = |source| IoError::Path { scenario: id, source };
            let grid = TimeGrid::new(t).map_err(wrap)?;
            Ok((id, GainsPath::new(grid, v).map_err(wrap)?))
        })
        .collect()
}
