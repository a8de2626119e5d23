use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::MatrixGeometry;
use crate::error::{Error, Result};

/// Unit sphere in `R^n`.
#[derive(Clone, Debug)]
pub struct Sphere {
    n: usize,
}

impl Sphere {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl MatrixGeometry for Sphere {
    fn name(&self) -> String {
        format!("Sphere S^{} in R^{}", self.n - 1, self.n)
    }

    fn dim(&self) -> usize {
        self.n - 1
    }

    fn typical_dist(&self) -> f64 {
        PI
    }

    fn shape(&self) -> (usize, usize) {
        (self.n, 1)
    }

    fn proj(&self, x: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
        z - x * x.dot(z)
    }

    fn restore(&self, z: DMatrix<f64>) -> Result<DMatrix<f64>> {
        let nrm = z.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::DegenerateStep("normalizing a zero vector".into()));
        }
        Ok(z / nrm)
    }

    fn rhess(
        &self,
        x: &DMatrix<f64>,
        egrad: &DMatrix<f64>,
        ehess_u: &DMatrix<f64>,
        u: &DMatrix<f64>,
    ) -> DMatrix<f64> {
        self.proj(x, ehess_u) - u * x.dot(egrad)
    }

    fn violation(&self, x: &DMatrix<f64>) -> f64 {
        (x.norm() - 1.0).abs()
    }
}
