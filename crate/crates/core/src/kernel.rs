//! Kernel functions and precomputed Gram matrices.
//!
//! The surrogate model uses a product kernel `k((x,c),(x',c')) = k_a(x,x') * k_c(c,c')`
//! over the action/context grid, with unit signal variance so that `k(z,z) = 1`.
//! A [`GridKernel`] precomputes the full Gram matrix once; everything downstream
//! reads kernel values by grid index.

use crate::grid::GridSpec;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("lengthscale must be positive, got {0}")]
    NonPositiveLengthscale(f64),
    #[error("rbf kernel needs one lengthscale per input dimension: {expected} != {got}")]
    LengthscaleCount { expected: usize, got: usize },
}

/// Matern smoothness menu.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaternNu {
    Half,
    ThreeHalves,
    FiveHalves,
}

/// One-argument kernel over points of a single space (actions or contexts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelFn {
    /// Squared-exponential with one lengthscale per input dimension.
    Rbf { lengthscales: Vec<f64> },
    /// Matern with isotropic lengthscale.
    Matern { nu: MaternNu, lengthscale: f64 },
}

impl KernelFn {
    pub fn validate(&self, dim: usize) -> Result<(), KernelError> {
        match self {
            KernelFn::Rbf { lengthscales } => {
                if lengthscales.len() != dim {
                    return Err(KernelError::LengthscaleCount {
                        expected: dim,
                        got: lengthscales.len(),
                    });
                }
                for &l in lengthscales {
                    if !(l > 0.0) {
                        return Err(KernelError::NonPositiveLengthscale(l));
                    }
                }
            }
            KernelFn::Matern { lengthscale, .. } => {
                if !(*lengthscale > 0.0) {
                    return Err(KernelError::NonPositiveLengthscale(*lengthscale));
                }
            }
        }
        Ok(())
    }

    /// Kernel value for a pair of points. `k(p, p) = 1` for all variants.
    pub fn eval(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            KernelFn::Rbf { lengthscales } => {
                let s: f64 = p
                    .iter()
                    .zip(q)
                    .zip(lengthscales)
                    .map(|((a, b), l)| {
                        let d = (a - b) / l;
                        d * d
                    })
                    .sum();
                (-0.5 * s).exp()
            }
            KernelFn::Matern { nu, lengthscale } => {
                let r2: f64 = p
                    .iter()
                    .zip(q)
                    .map(|(a, b)| {
                        let d = a - b;
                        d * d
                    })
                    .sum();
                let r = r2.sqrt() / lengthscale;
                match nu {
                    MaternNu::Half => (-r).exp(),
                    MaternNu::ThreeHalves => {
                        let s = 3.0f64.sqrt() * r;
                        (1.0 + s) * (-s).exp()
                    }
                    MaternNu::FiveHalves => {
                        let s = 5.0f64.sqrt() * r;
                        (1.0 + s + s * s / 3.0) * (-s).exp()
                    }
                }
            }
        }
    }

    /// Gram matrix over a point set.
    pub fn gram(&self, points: &[Vec<f64>]) -> DMatrix<f64> {
        let n = points.len();
        DMatrix::from_fn(n, n, |i, j| self.eval(&points[i], &points[j]))
    }
}

/// Product kernel over the action/context grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub action_kernel: KernelFn,
    pub context_kernel: KernelFn,
}

impl KernelSpec {
    pub fn validate(&self, grid: &GridSpec) -> Result<(), KernelError> {
        self.action_kernel.validate(grid.actions()[0].len())?;
        self.context_kernel.validate(grid.contexts()[0].len())
    }

    pub fn eval(&self, x: &[f64], c: &[f64], x2: &[f64], c2: &[f64]) -> f64 {
        self.action_kernel.eval(x, x2) * self.context_kernel.eval(c, c2)
    }
}

/// A grid together with its precomputed product-kernel Gram matrix.
///
/// The Gram matrix is `len x len` in flat (action-major) indexing; with the
/// grids used here (at most a few thousand points) it fits comfortably in
/// memory and makes each posterior update a matter of lookups.
#[derive(Debug, Clone)]
pub struct GridKernel {
    grid: GridSpec,
    spec: KernelSpec,
    gram: DMatrix<f64>,
}

impl GridKernel {
    pub fn new(grid: GridSpec, spec: KernelSpec) -> Result<Self, KernelError> {
        spec.validate(&grid)?;
        let ka = spec.action_kernel.gram(grid.actions());
        let kc = spec.context_kernel.gram(grid.contexts());
        let (na, nc) = (grid.n_actions(), grid.n_contexts());
        let gram = DMatrix::from_fn(na * nc, na * nc, |z1, z2| {
            let (a1, c1) = (z1 / nc, z1 % nc);
            let (a2, c2) = (z2 / nc, z2 % nc);
            ka[(a1, a2)] * kc[(c1, c2)]
        });
        Ok(Self { grid, spec, gram })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// Kernel value between two flat grid indices.
    pub fn value(&self, z1: usize, z2: usize) -> f64 {
        self.gram[(z1, z2)]
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Gram matrix of the context kernel alone (the matrix behind the MMD metric).
    pub fn context_gram(&self) -> DMatrix<f64> {
        self.spec.context_kernel.gram(self.grid.contexts())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_grid() -> GridSpec {
        GridSpec::one_dim(&[0.0, 1.0], &[0.0, 0.5, 1.5]).unwrap()
    }

    #[test]
    fn diagonal_is_one() {
        let spec = KernelSpec {
            action_kernel: KernelFn::Rbf {
                lengthscales: vec![0.7],
            },
            context_kernel: KernelFn::Matern {
                nu: MaternNu::FiveHalves,
                lengthscale: 2.0,
            },
        };
        let gk = GridKernel::new(unit_grid(), spec).unwrap();
        for z in 0..gk.grid().len() {
            assert_relative_eq!(gk.value(z, z), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn rbf_matches_closed_form() {
        let k = KernelFn::Rbf {
            lengthscales: vec![2.0, 0.5],
        };
        let v = k.eval(&[1.0, 0.0], &[0.0, 1.0]);
        let expected = (-0.5 * ((1.0f64 / 2.0).powi(2) + (1.0f64 / 0.5).powi(2))).exp();
        assert_relative_eq!(v, expected, max_relative = 1e-14);
    }

    #[test]
    fn matern_family_values() {
        let p = [0.0];
        let q = [1.0];
        let half = KernelFn::Matern {
            nu: MaternNu::Half,
            lengthscale: 1.0,
        };
        assert_relative_eq!(half.eval(&p, &q), (-1.0f64).exp(), max_relative = 1e-14);
        let three = KernelFn::Matern {
            nu: MaternNu::ThreeHalves,
            lengthscale: 1.0,
        };
        let s = 3.0f64.sqrt();
        assert_relative_eq!(three.eval(&p, &q), (1.0 + s) * (-s).exp(), max_relative = 1e-14);
        let five = KernelFn::Matern {
            nu: MaternNu::FiveHalves,
            lengthscale: 1.0,
        };
        let s = 5.0f64.sqrt();
        assert_relative_eq!(
            five.eval(&p, &q),
            (1.0 + s + s * s / 3.0) * (-s).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn product_structure() {
        let spec = KernelSpec {
            action_kernel: KernelFn::Rbf {
                lengthscales: vec![0.2],
            },
            context_kernel: KernelFn::Rbf {
                lengthscales: vec![5.0],
            },
        };
        let grid = unit_grid();
        let gk = GridKernel::new(grid.clone(), spec.clone()).unwrap();
        let z1 = grid.flat(0, 1);
        let z2 = grid.flat(1, 2);
        let expected = spec.action_kernel.eval(&[0.0], &[1.0])
            * spec.context_kernel.eval(&[0.5], &[1.5]);
        assert_relative_eq!(gk.value(z1, z2), expected, max_relative = 1e-14);
    }

    #[test]
    fn validation_errors() {
        let bad = KernelFn::Rbf {
            lengthscales: vec![0.0],
        };
        assert!(bad.validate(1).is_err());
        let wrong_dim = KernelFn::Rbf {
            lengthscales: vec![1.0, 1.0],
        };
        assert!(wrong_dim.validate(1).is_err());
    }
}
