//! Probability distributions on the context set and MMD geometry.
//!
//! A context distribution is a nonnegative weight vector summing to one. The
//! distance between distributions is the maximum mean discrepancy induced by
//! the context kernel matrix `M`:
//!
//! ```text
//! mmd(w, w') = || w - w' ||_M = sqrt((w - w')^T M (w - w'))
//! ```

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Weights below this magnitude are treated as floating-point dust and clamped
/// to zero before renormalization.
pub const WEIGHT_DUST: f64 = 1e-12;
/// Tolerance on the simplex sum constraint.
pub const SUM_TOL: f64 = 1e-9;

const JITTER_LADDER: [f64; 4] = [0.0, 1e-10, 1e-8, 1e-6];

#[derive(Debug, Error)]
pub enum SimplexError {
    #[error("weight {value} at index {index} is below the clamp threshold")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1 within {SUM_TOL}")]
    SumNotOne { sum: f64 },
    #[error("weight vector is empty")]
    Empty,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not symmetric PSD: min eigenvalue {eig_min}")]
    NotPsd { eig_min: f64 },
    #[error("matrix factorization failed even at jitter {jitter}")]
    Singular { jitter: f64 },
    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),
}

/// A point of the probability simplex over the context set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextDistribution(Vec<f64>);

impl ContextDistribution {
    /// Validates nonnegativity (up to dust) and unit sum, clamping dust to zero.
    pub fn new(weights: Vec<f64>) -> Result<Self, SimplexError> {
        if weights.is_empty() {
            return Err(SimplexError::Empty);
        }
        let mut w = weights;
        for (i, wi) in w.iter_mut().enumerate() {
            if *wi < -WEIGHT_DUST {
                return Err(SimplexError::NegativeWeight {
                    index: i,
                    value: *wi,
                });
            }
            if *wi < 0.0 {
                *wi = 0.0;
            }
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(SimplexError::SumNotOne { sum });
        }
        Ok(Self(w))
    }

    /// Clamps dust, then renormalizes whatever mass remains. Used on solver
    /// outputs that carry floating-point noise.
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self, SimplexError> {
        if weights.is_empty() {
            return Err(SimplexError::Empty);
        }
        let mut w = weights;
        for wi in w.iter_mut() {
            if *wi < 0.0 {
                *wi = 0.0;
            }
        }
        let sum: f64 = w.iter().sum();
        if sum <= 0.0 {
            return Err(SimplexError::SumNotOne { sum });
        }
        for wi in w.iter_mut() {
            *wi /= sum;
        }
        Ok(Self(w))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// All mass on context `i`.
    pub fn point_mass(n: usize, i: usize) -> Self {
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        Self(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    /// Expectation `<w, u>` of a vector of per-context values.
    pub fn dot(&self, u: &[f64]) -> f64 {
        self.0.iter().zip(u).map(|(w, v)| w * v).sum()
    }
}

/// Result of discretizing a Gaussian density onto the context grid.
#[derive(Debug, Clone)]
pub struct DiscretizedGaussian {
    pub distribution: ContextDistribution,
    /// Set when every grid density underflowed and the uniform fallback was used.
    pub underflowed: bool,
}

/// Gaussian density discretized onto 1-d context coordinates and renormalized.
pub fn discretized_gaussian(
    contexts: &[f64],
    mean: f64,
    variance: f64,
) -> Result<DiscretizedGaussian, SimplexError> {
    if contexts.is_empty() {
        return Err(SimplexError::Empty);
    }
    if !(variance > 0.0) {
        return Err(SimplexError::NonPositiveVariance(variance));
    }
    let w: Vec<f64> = contexts
        .iter()
        .map(|&c| (-(c - mean) * (c - mean) / (2.0 * variance)).exp())
        .collect();
    let sum: f64 = w.iter().sum();
    if sum <= 0.0 || !sum.is_finite() {
        return Ok(DiscretizedGaussian {
            distribution: ContextDistribution::uniform(contexts.len()),
            underflowed: true,
        });
    }
    Ok(DiscretizedGaussian {
        distribution: ContextDistribution(w.iter().map(|v| v / sum).collect()),
        underflowed: false,
    })
}

/// Empirical distribution of observed context indices; uniform when empty.
pub fn empirical_distribution(observed: &[usize], n: usize) -> ContextDistribution {
    if observed.is_empty() {
        return ContextDistribution::uniform(n);
    }
    let mut counts = vec![0.0; n];
    for &c in observed {
        counts[c] += 1.0;
    }
    let total = observed.len() as f64;
    ContextDistribution(counts.into_iter().map(|c| c / total).collect())
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_onto_simplex(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cssv = 0.0;
    let mut rho = 0usize;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cssv += ui;
        let t = (cssv - 1.0) / (i as f64 + 1.0);
        if ui - t > 0.0 {
            rho = i + 1;
            theta = t;
        }
    }
    if rho == 0 {
        // All components tied below threshold; fall back to uniform.
        return vec![1.0 / v.len() as f64; v.len()];
    }
    v.iter().map(|&vi| (vi - theta).max(0.0)).collect()
}

/// MMD geometry: the context-kernel matrix `M`, its jittered Cholesky factor,
/// and solves against it.
#[derive(Debug, Clone)]
pub struct MmdMetric {
    m: DMatrix<f64>,
    chol: Cholesky<f64, nalgebra::Dyn>,
    jitter: f64,
}

impl MmdMetric {
    /// Symmetrizes, checks the spectrum is nonnegative up to `-1e-10`, then
    /// factorizes with the escalating jitter ladder.
    pub fn new(m: DMatrix<f64>) -> Result<Self, SimplexError> {
        assert_eq!(m.nrows(), m.ncols(), "M must be square");
        let sym = (&m + m.transpose()) * 0.5;
        let eig_min = sym
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if eig_min < -1e-10 {
            return Err(SimplexError::NotPsd { eig_min });
        }
        let n = sym.nrows();
        for &jitter in &JITTER_LADDER {
            let jittered = &sym + DMatrix::identity(n, n) * jitter;
            if let Some(chol) = Cholesky::new(jittered) {
                return Ok(Self {
                    m: sym,
                    chol,
                    jitter,
                });
            }
        }
        Err(SimplexError::Singular {
            jitter: *JITTER_LADDER.last().unwrap(),
        })
    }

    /// Builds `M` from a context kernel over 1-d or multi-d context points.
    pub fn from_kernel(
        kernel: &crate::kernel::KernelFn,
        contexts: &[Vec<f64>],
    ) -> Result<Self, SimplexError> {
        Self::new(kernel.gram(contexts))
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Seminorm `||v||_M = sqrt(v^T M v)` (clamped at zero against roundoff).
    pub fn norm(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        let q = v.dot(&(&self.m * &v));
        q.max(0.0).sqrt()
    }

    /// MMD distance between two distributions.
    pub fn mmd(
        &self,
        w: &ContextDistribution,
        w2: &ContextDistribution,
    ) -> Result<f64, SimplexError> {
        if w.len() != w2.len() || w.len() != self.n() {
            return Err(SimplexError::DimensionMismatch {
                left: w.len(),
                right: w2.len().max(self.n()),
            });
        }
        let diff: Vec<f64> = w
            .weights()
            .iter()
            .zip(w2.weights())
            .map(|(a, b)| a - b)
            .collect();
        Ok(self.norm(&diff))
    }

    /// Solves `M x = v` against the jittered factor.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        let x = self.chol.solve(&DVector::from_column_slice(v));
        x.as_slice().to_vec()
    }

    /// Quadratic form `v^T M^{-1} v` (clamped at zero).
    pub fn inv_quad(&self, v: &[f64]) -> f64 {
        let x = self.solve(v);
        v.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().max(0.0)
    }

    /// M-distance from `w` to the vertex `e_i` of the simplex.
    pub fn vertex_distance(&self, w: &ContextDistribution, i: usize) -> f64 {
        let mut diff: Vec<f64> = w.weights().iter().map(|x| -x).collect();
        diff[i] += 1.0;
        self.norm(&diff)
    }

    /// Largest pairwise vertex distance: an upper bound on the M-diameter of
    /// the simplex (by convexity, the diameter is attained at vertices).
    pub fn simplex_diameter(&self) -> f64 {
        let n = self.n();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                // ||e_i - e_j||_M^2 = M_ii + M_jj - 2 M_ij
                let d2 = self.m[(i, i)] + self.m[(j, j)] - 2.0 * self.m[(i, j)];
                best = best.max(d2.max(0.0).sqrt());
            }
        }
        best
    }
}

/// `B' = max_x ||f_x||_{M^{-1}}`: the largest M-inverse norm over the rows of
/// a per-action value matrix (rows = actions, columns = contexts).
pub fn b_prime(metric: &MmdMetric, f_rows: &[Vec<f64>]) -> Result<f64, SimplexError> {
    let mut best = 0.0f64;
    for row in f_rows {
        if row.len() != metric.n() {
            return Err(SimplexError::DimensionMismatch {
                left: row.len(),
                right: metric.n(),
            });
        }
        best = best.max(metric.inv_quad(row).sqrt());
    }
    Ok(best)
}
