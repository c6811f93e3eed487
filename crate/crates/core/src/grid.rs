//! Finite action/context grids.
//!
//! Every quantity in this crate is indexed by `(action index, context index)`
//! over a fixed finite grid. Grid points are stored action-major: the flat
//! index of pair `(a, c)` is `a * n_contexts + c`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid must contain at least one action and one context")]
    Empty,
    #[error("{set} contains duplicate point at indices {i} and {j}")]
    DuplicatePoint { set: &'static str, i: usize, j: usize },
    #[error("{set} points have inconsistent dimension: expected {expected}, got {got}")]
    DimensionMismatch {
        set: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Finite sets of action and context points.
///
/// Each point is a vector of real coordinates. Points must be distinct within
/// each list; context count `n` must match every weight vector used with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    actions: Vec<Vec<f64>>,
    contexts: Vec<Vec<f64>>,
}

fn check_points(set: &'static str, points: &[Vec<f64>]) -> Result<(), GridError> {
    let dim = points[0].len();
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(GridError::DimensionMismatch {
                set,
                expected: dim,
                got: p.len(),
            });
        }
        for (j, q) in points.iter().enumerate().skip(i + 1) {
            if p == q {
                return Err(GridError::DuplicatePoint { set, i, j });
            }
        }
    }
    Ok(())
}

impl GridSpec {
    pub fn new(actions: Vec<Vec<f64>>, contexts: Vec<Vec<f64>>) -> Result<Self, GridError> {
        if actions.is_empty() || contexts.is_empty() {
            return Err(GridError::Empty);
        }
        check_points("actions", &actions)?;
        check_points("contexts", &contexts)?;
        Ok(Self { actions, contexts })
    }

    /// Grid over 1-d actions and contexts.
    pub fn one_dim(actions: &[f64], contexts: &[f64]) -> Result<Self, GridError> {
        Self::new(
            actions.iter().map(|&a| vec![a]).collect(),
            contexts.iter().map(|&c| vec![c]).collect(),
        )
    }

    pub fn actions(&self) -> &[Vec<f64>] {
        &self.actions
    }

    pub fn contexts(&self) -> &[Vec<f64>] {
        &self.contexts
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn n_contexts(&self) -> usize {
        self.contexts.len()
    }

    pub fn len(&self) -> usize {
        self.actions.len() * self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        false // enforced nonempty at construction
    }

    /// Flat grid index of the pair `(a, c)`, action-major.
    pub fn flat(&self, a: usize, c: usize) -> usize {
        debug_assert!(a < self.n_actions() && c < self.n_contexts());
        a * self.n_contexts() + c
    }

    /// Inverse of [`flat`](Self::flat).
    pub fn unflat(&self, z: usize) -> (usize, usize) {
        (z / self.n_contexts(), z % self.n_contexts())
    }

    /// Context coordinates as scalars; `None` if contexts are not 1-d.
    pub fn contexts_1d(&self) -> Option<Vec<f64>> {
        if self.contexts[0].len() != 1 {
            return None;
        }
        Some(self.contexts.iter().map(|c| c[0]).collect())
    }

    /// Action coordinates as scalars; `None` if actions are not 1-d.
    pub fn actions_1d(&self) -> Option<Vec<f64>> {
        if self.actions[0].len() != 1 {
            return None;
        }
        Some(self.actions.iter().map(|a| a[0]).collect())
    }
}

/// Evenly spaced 1-d coordinates, inclusive of both endpoints.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    let step = (max - min) / (count as f64 - 1.0);
    (0..count).map(|i| min + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_is_action_major() {
        let g = GridSpec::one_dim(&[0.0, 1.0, 2.0], &[10.0, 20.0]).unwrap();
        assert_eq!(g.flat(0, 0), 0);
        assert_eq!(g.flat(0, 1), 1);
        assert_eq!(g.flat(1, 0), 2);
        assert_eq!(g.flat(2, 1), 5);
        assert_eq!(g.unflat(5), (2, 1));
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(GridSpec::one_dim(&[], &[1.0]).is_err());
        assert!(GridSpec::one_dim(&[1.0, 1.0], &[0.0]).is_err());
        assert!(GridSpec::one_dim(&[1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let xs = linspace(-1.0, 1.0, 5);
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(linspace(3.0, 9.0, 1), vec![3.0]);
    }
}
