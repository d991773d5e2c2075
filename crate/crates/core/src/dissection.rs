//! Cutting a path and a strategy into fixed-dimension pieces.
//!
//! Under a reset sequence `(tau_k)`, piece `k` of a path is the `R^n` process
//!
//! ```text
//! X^{k,n}_t = 0                                  t <= tau_{k-1}
//!           = X_{t ^ tau_k} - X^+_{tau_{k-1}}    t >  tau_{k-1}
//! ```
//!
//! with `n` the dimension of `X^+_{tau_{k-1}}`, and the matching strategy piece
//! is `H` on `(tau_{k-1}, tau_k]` and `0^(n)` elsewhere. Pieces are
//! materialized on the full grid.

use thiserror::Error;

use crate::path::{DimensionedVector, PathError, PiecewisePath, ResetSequence};
use crate::strategy::{HoldingsSchedule, StrategyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DissectError {
    #[error(transparent)]
    Resets(#[from] PathError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// The `(k, n)` label of the cell `Omega^{k,n}` a scenario falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScenarioCell {
    pub scenario_id: u64,
    pub k: usize,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DissectedPiece {
    pub k: usize,
    pub n: usize,
    /// Grid index of `tau_{k-1}`.
    pub start: usize,
    /// Grid index of `tau_k` (the horizon for the last piece).
    pub end: usize,
    /// `X^+_{tau_{k-1}}`.
    pub anchor: DimensionedVector,
    /// `X^{k,n}` at every grid time.
    pub values: Vec<DimensionedVector>,
    /// `H^{k,n}` at every grid time; the entry at `t_{i+1}` holds the
    /// holdings for `(t_i, t_{i+1}]`.
    pub strategy_values: Option<Vec<DimensionedVector>>,
}

fn bounds(resets: &ResetSequence, last: usize) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
    let idx = resets.indices();
    idx.iter().enumerate().map(move |(j, &s)| (j + 1, s, idx.get(j + 1).copied().unwrap_or(last)))
}

/// `X^{k,n}` for every piece of `resets`.
pub fn dissect_path(path: &PiecewisePath, resets: &ResetSequence) -> Result<Vec<DissectedPiece>, DissectError> {
    resets.validate_for(path)?;
    let len = path.grid().len();
    let last = len - 1;
    Ok(bounds(resets, last)
        .map(|(k, start, end)| {
            let anchor = path.right_limit_at_index(start).expect("start < horizon").clone();
            let n = anchor.dim();
            let zero = DimensionedVector::zeros(n);
            let mut values = Vec::with_capacity(len);
            values.extend(std::iter::repeat_n(zero, start + 1));
            for i in start + 1..=end {
                values.push(path.value_at_index(i).sub(&anchor).expect("dimension constant on a piece"));
            }
            let frozen = values[end].clone();
            values.extend(std::iter::repeat_n(frozen, last - end));
            DissectedPiece { k, n, start, end, anchor, values, strategy_values: None }
        })
        .collect())
}

/// `X^{k,n}` together with `H^{k,n}`.
pub fn dissect_strategy(
    holdings: &HoldingsSchedule,
    path: &PiecewisePath,
    resets: &ResetSequence,
) -> Result<Vec<DissectedPiece>, DissectError> {
    holdings.check_dims(path)?;
    let mut pieces = dissect_path(path, resets)?;
    let len = path.grid().len();
    for p in &mut pieces {
        let zero = DimensionedVector::zeros(p.n);
        let h = (0..len)
            .map(|i| if p.start < i && i <= p.end { holdings.intervals()[i - 1].clone() } else { zero.clone() })
            .collect();
        p.strategy_values = Some(h);
    }
    Ok(pieces)
}

/// Sorted union of `resets` and `extra_times`. Times at the horizon are
/// dropped since no piece can start there.
pub fn refine_resets(
    resets: &ResetSequence,
    extra_times: &[f64],
    path: &PiecewisePath,
) -> Result<ResetSequence, DissectError> {
    let grid = path.grid();
    let mut idx = resets.indices().to_vec();
    for &t in extra_times {
        let i = grid.locate(t)?;
        if i < grid.last_index() {
            idx.push(i);
        }
    }
    idx.sort_unstable();
    idx.dedup();
    Ok(ResetSequence::new(idx, grid)?)
}

/// The cells `Omega^{k,n}` this scenario belongs to, one per piece.
pub fn scenario_cells(
    scenario_id: u64,
    path: &PiecewisePath,
    resets: &ResetSequence,
) -> Result<Vec<ScenarioCell>, DissectError> {
    resets.validate_for(path)?;
    Ok(resets
        .indices()
        .iter()
        .enumerate()
        .map(|(j, &s)| ScenarioCell {
            scenario_id,
            k: j + 1,
            n: path.right_limit_at_index(s).expect("start < horizon").dim(),
        })
        .collect())
}

/// Inverse of [`dissect_path`]: rebuild `X` at every grid time from the
/// pieces and their anchors.
pub fn reassemble(initial: &DimensionedVector, pieces: &[DissectedPiece]) -> Vec<DimensionedVector> {
    let mut out = vec![initial.clone()];
    for p in pieces {
        for i in p.start + 1..=p.end {
            out.push(p.values[i].add(&p.anchor).expect("same piece dimension"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::tests::{dv, worked_path};
    use crate::path::{PathBuilder, TimeGrid};
    use crate::strategy::Strategy;

    fn w_resets() -> ResetSequence {
        ResetSequence::new(vec![0, 2], worked_path().grid()).unwrap()
    }

    #[test]
    fn worked_path_pieces() {
        let pieces = dissect_path(&worked_path(), &w_resets()).unwrap();
        assert_eq!(pieces.len(), 2);
        assert_eq!((pieces[0].k, pieces[0].n), (1, 2));
        assert_eq!(pieces[0].values, vec![dv(&[0.0, 0.0]), dv(&[1.0, -1.0]), dv(&[2.0, 1.0]), dv(&[2.0, 1.0])]);
        assert_eq!((pieces[1].k, pieces[1].n), (2, 3));
        assert_eq!(pieces[1].values, vec![dv(&[0.0; 3]), dv(&[0.0; 3]), dv(&[0.0; 3]), dv(&[1.0, -1.0, 1.0])]);
    }

    #[test]
    fn single_piece_is_shifted_path() {
        let grid = TimeGrid::uniform(1.0, 3).unwrap();
        let mut b = PathBuilder::on_grid(grid.clone(), dv(&[5.0]), dv(&[5.0]));
        for x in [6.0, 4.0, 7.5] {
            b.push(dv(&[x])).unwrap();
        }
        let p = b.finish().unwrap();
        let pieces = dissect_path(&p, &ResetSequence::new(vec![0], &grid).unwrap()).unwrap();
        let expect: Vec<_> = [0.0, 1.0, -1.0, 2.5].iter().map(|x| dv(&[*x])).collect();
        assert_eq!(pieces[0].values, expect);
    }

    #[test]
    fn missing_minimal_reset_is_rejected() {
        let w = worked_path();
        let r = ResetSequence::new(vec![0], w.grid()).unwrap();
        assert!(matches!(dissect_path(&w, &r), Err(DissectError::Resets(PathError::InvalidResets(_)))));
    }

    #[test]
    fn strategy_pieces() {
        let w = worked_path();
        let h = Strategy::step(None, vec![(0.0, dv(&[1.0, 1.0])), (2.0, dv(&[1.0, 1.0, 2.0]))]).schedule(&w).unwrap();
        let pieces = dissect_strategy(&h, &w, &w_resets()).unwrap();
        let h1 = pieces[0].strategy_values.as_ref().unwrap();
        assert_eq!(h1, &vec![dv(&[0.0, 0.0]), dv(&[1.0, 1.0]), dv(&[1.0, 1.0]), dv(&[0.0, 0.0])]);
        let h2 = pieces[1].strategy_values.as_ref().unwrap();
        assert_eq!(h2, &vec![dv(&[0.0; 3]), dv(&[0.0; 3]), dv(&[0.0; 3]), dv(&[1.0, 1.0, 2.0])]);

        let zero = Strategy::zero().schedule(&w).unwrap();
        for p in dissect_strategy(&zero, &w, &w_resets()).unwrap() {
            assert!(p.strategy_values.unwrap().iter().all(|h| h.is_zero()));
        }
    }

    #[test]
    fn mismatched_strategy_is_rejected() {
        let w = worked_path();
        let bad = HoldingsSchedule::new(None, vec![dv(&[1.0, 1.0]); 3]);
        assert!(matches!(
            dissect_strategy(&bad, &w, &w_resets()),
            Err(DissectError::Strategy(StrategyError::DimensionMismatch { time, .. })) if time == 3.0
        ));
    }

    #[test]
    fn refinement() {
        let w = worked_path();
        assert_eq!(refine_resets(&w_resets(), &[1.0], &w).unwrap().indices(), &[0, 1, 2]);
        assert_eq!(refine_resets(&w_resets(), &[], &w).unwrap(), w_resets());
        assert_eq!(refine_resets(&w_resets(), &[3.0, 2.0], &w).unwrap(), w_resets());
    }

    #[test]
    fn reassembly_is_exact_on_integer_data() {
        let w = worked_path();
        for r in [w_resets(), refine_resets(&w_resets(), &[1.0], &w).unwrap()] {
            let pieces = dissect_path(&w, &r).unwrap();
            let back = reassemble(w.initial(), &pieces);
            assert_eq!(back, w.dense().values);
        }
    }

    #[test]
    fn cells_follow_right_limit_dimension() {
        let w = worked_path();
        let cells = scenario_cells(7, &w, &w_resets()).unwrap();
        assert_eq!(
            cells,
            vec![ScenarioCell { scenario_id: 7, k: 1, n: 2 }, ScenarioCell { scenario_id: 7, k: 2, n: 3 }]
        );
    }
}
