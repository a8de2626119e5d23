use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::MatrixGeometry;
use crate::error::{Error, Result};

/// Factors `Y` (`n x k`, `‖Y‖_F = 1`) of rank-`k` unit-trace PSD matrices `YY'`.
///
/// Embedded geometry: the right orthogonal symmetry `Y ~ YQ` is not
/// quotiented out.
#[derive(Clone, Debug)]
pub struct Spectrahedron {
    n: usize,
    k: usize,
}

impl Spectrahedron {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, k }
    }
}

impl MatrixGeometry for Spectrahedron {
    fn name(&self) -> String {
        format!("Spectrahedron factors {}x{} (rank {})", self.n, self.k, self.k)
    }

    fn dim(&self) -> usize {
        self.n * self.k - 1
    }

    fn typical_dist(&self) -> f64 {
        PI
    }

    fn shape(&self) -> (usize, usize) {
        (self.n, self.k)
    }

    fn proj(&self, y: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
        z - y * y.dot(z)
    }

    fn restore(&self, z: DMatrix<f64>) -> Result<DMatrix<f64>> {
        let nrm = z.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::DegenerateStep("normalizing a zero matrix".into()));
        }
        Ok(z / nrm)
    }

    fn rhess(
        &self,
        y: &DMatrix<f64>,
        egrad: &DMatrix<f64>,
        ehess_u: &DMatrix<f64>,
        u: &DMatrix<f64>,
    ) -> DMatrix<f64> {
        self.proj(y, ehess_u) - u * y.dot(egrad)
    }

    fn violation(&self, y: &DMatrix<f64>) -> f64 {
        (y.norm() - 1.0).abs()
    }
}
