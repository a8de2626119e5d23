use nalgebra::DMatrix;

use super::MatrixGeometry;
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct Euclidean {
    rows: usize,
    cols: usize,
}

impl Euclidean {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }
}

impl MatrixGeometry for Euclidean {
    fn name(&self) -> String {
        format!("Euclidean R^({}x{})", self.rows, self.cols)
    }

    fn dim(&self) -> usize {
        self.rows * self.cols
    }

    fn typical_dist(&self) -> f64 {
        (self.dim() as f64).sqrt()
    }

    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn proj(&self, _x: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
        z.clone()
    }

    fn restore(&self, z: DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(z)
    }

    fn rhess(
        &self,
        _x: &DMatrix<f64>,
        _egrad: &DMatrix<f64>,
        ehess_u: &DMatrix<f64>,
        _u: &DMatrix<f64>,
    ) -> DMatrix<f64> {
        ehess_u.clone()
    }

    fn violation(&self, x: &DMatrix<f64>) -> f64 {
        if x.iter().all(|v| v.is_finite()) {
            0.0
        } else {
            f64::INFINITY
        }
    }
}
