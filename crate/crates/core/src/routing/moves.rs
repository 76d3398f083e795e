use serde::{Deserialize, Serialize};

use super::{GiantTour, RoutingError};

/// Neighborhood moves over a giant tour. Indices are tour positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Move {
    /// Reverse positions `i..=j` (either order).
    TwoOpt { i: usize, j: usize },
    /// Remove the element at `from` and reinsert it so it ends at `to`.
    Relocate { from: usize, to: usize },
    Swap { i: usize, j: usize },
    /// Move the segment `start..start + len` so that it begins at `to` in the
    /// resulting tour.
    OrOpt { start: usize, len: usize, to: usize },
}

impl Move {
    /// The move that undoes `self`.
    pub fn inverse(self) -> Move {
        match self {
            Move::TwoOpt { .. } | Move::Swap { .. } => self,
            Move::Relocate { from, to } => Move::Relocate { from: to, to: from },
            Move::OrOpt { start, len, to } => Move::OrOpt { start: to, len, to: start },
        }
    }

    pub(crate) fn apply_in_place(self, tour: &mut [usize]) {
        match self {
            Move::TwoOpt { i, j } => {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                tour[a..=b].reverse();
            }
            Move::Swap { i, j } => tour.swap(i, j),
            Move::Relocate { from, to } => {
                if from < to {
                    tour[from..=to].rotate_left(1);
                } else {
                    tour[to..=from].rotate_right(1);
                }
            }
            Move::OrOpt { start, len, to } => {
                if len == 0 || start == to {
                    return;
                }
                if to < start {
                    tour[to..start + len].rotate_right(len);
                } else {
                    tour[start..to + len].rotate_left(len);
                }
            }
        }
    }

    fn check(self, n: usize) -> Result<(), RoutingError> {
        let ok = match self {
            Move::TwoOpt { i, j } | Move::Swap { i, j } => i < n && j < n,
            Move::Relocate { from, to } => from < n && to < n,
            Move::OrOpt { start, len, to } => len <= n && start + len <= n && to + len <= n,
        };
        if ok {
            Ok(())
        } else {
            Err(RoutingError::Index(format!("{self:?} on a tour of length {n}")))
        }
    }
}

pub fn apply_move(tour: &GiantTour, mv: Move) -> Result<GiantTour, RoutingError> {
    mv.check(tour.len())?;
    let mut out = tour.0.clone();
    mv.apply_in_place(&mut out);
    Ok(GiantTour(out))
}
