use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::stiefel::{orthonormality_violation, qf};
use super::MatrixGeometry;
use crate::error::Result;

/// Subspaces of dimension `p` in `R^n`, stored as orthonormal `n x p` bases.
///
/// Costs on this manifold must satisfy `f(XQ) = f(X)` for orthogonal `Q`;
/// the tangent space is the horizontal space `{U : X'U = 0}`.
#[derive(Clone, Debug)]
pub struct Grassmann {
    n: usize,
    p: usize,
}

impl Grassmann {
    pub fn new(n: usize, p: usize) -> Self {
        Self { n, p }
    }
}

impl MatrixGeometry for Grassmann {
    fn name(&self) -> String {
        format!("Grassmann manifold Gr({}, {})", self.n, self.p)
    }

    fn dim(&self) -> usize {
        self.p * (self.n - self.p)
    }

    fn typical_dist(&self) -> f64 {
        PI * (self.p as f64).sqrt()
    }

    fn shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    fn proj(&self, x: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
        z - x * (x.transpose() * z)
    }

    fn restore(&self, z: DMatrix<f64>) -> Result<DMatrix<f64>> {
        qf(&z)
    }

    fn rhess(
        &self,
        x: &DMatrix<f64>,
        egrad: &DMatrix<f64>,
        ehess_u: &DMatrix<f64>,
        u: &DMatrix<f64>,
    ) -> DMatrix<f64> {
        self.proj(x, ehess_u) - u * (x.transpose() * egrad)
    }

    fn violation(&self, x: &DMatrix<f64>) -> f64 {
        orthonormality_violation(x)
    }
}
