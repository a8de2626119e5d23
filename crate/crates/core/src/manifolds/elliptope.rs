use std::f64::consts::PI;
use std::ops::SubAssign;

use nalgebra::DMatrix;

use super::MatrixGeometry;
use crate::error::{Error, Result};

/// Factors `Y` (`n x k`, unit-norm rows) of rank-`k` correlation matrices
/// `X = YY'`, i.e. `diag(X) = 1`.
///
/// Embedded geometry: rows live on unit spheres of `R^k`, and the right
/// orthogonal symmetry `Y ~ YQ` is not quotiented out.
#[derive(Clone, Debug)]
pub struct Elliptope {
    n: usize,
    k: usize,
}

impl Elliptope {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, k }
    }
}

impl MatrixGeometry for Elliptope {
    fn name(&self) -> String {
        format!("Elliptope factors {}x{} (rank {})", self.n, self.k, self.k)
    }

    fn dim(&self) -> usize {
        self.n * (self.k - 1)
    }

    fn typical_dist(&self) -> f64 {
        PI * (self.n as f64).sqrt()
    }

    fn shape(&self) -> (usize, usize) {
        (self.n, self.k)
    }

    fn proj(&self, y: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = z.clone();
        for i in 0..self.n {
            let c = y.row(i).dot(&z.row(i));
            let row = y.row(i) * c;
            out.row_mut(i).sub_assign(&row);
        }
        out
    }

    fn restore(&self, mut z: DMatrix<f64>) -> Result<DMatrix<f64>> {
        for i in 0..self.n {
            let nrm = z.row(i).norm();
            if nrm == 0.0 || !nrm.is_finite() {
                return Err(Error::DegenerateStep(format!("row {i} has zero norm")));
            }
            z.row_mut(i).scale_mut(1.0 / nrm);
        }
        Ok(z)
    }

    fn rhess(
        &self,
        y: &DMatrix<f64>,
        egrad: &DMatrix<f64>,
        ehess_u: &DMatrix<f64>,
        u: &DMatrix<f64>,
    ) -> DMatrix<f64> {
        let mut out = self.proj(y, ehess_u);
        for i in 0..self.n {
            let c = y.row(i).dot(&egrad.row(i));
            let row = u.row(i) * c;
            out.row_mut(i).sub_assign(&row);
        }
        out
    }

    fn violation(&self, y: &DMatrix<f64>) -> f64 {
        (0..self.n)
            .map(|i| (y.row(i).norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}
