use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::MatrixGeometry;
use crate::error::{Error, Result};

/// Product of `m` unit spheres in `R^n`, one per column of an `n x m` matrix.
#[derive(Clone, Debug)]
pub struct Oblique {
    n: usize,
    m: usize,
}

impl Oblique {
    pub fn new(n: usize, m: usize) -> Self {
        Self { n, m }
    }
}

impl MatrixGeometry for Oblique {
    fn name(&self) -> String {
        format!("Oblique manifold OB({}, {})", self.n, self.m)
    }

    fn dim(&self) -> usize {
        (self.n - 1) * self.m
    }

    fn typical_dist(&self) -> f64 {
        PI * (self.m as f64).sqrt()
    }

    fn shape(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    fn proj(&self, x: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = z.clone();
        for j in 0..self.m {
            let c = x.column(j).dot(&z.column(j));
            out.column_mut(j).axpy(-c, &x.column(j), 1.0);
        }
        out
    }

    fn restore(&self, mut z: DMatrix<f64>) -> Result<DMatrix<f64>> {
        for j in 0..self.m {
            let nrm = z.column(j).norm();
            if nrm == 0.0 || !nrm.is_finite() {
                return Err(Error::DegenerateStep(format!("column {j} has zero norm")));
            }
            z.column_mut(j).scale_mut(1.0 / nrm);
        }
        Ok(z)
    }

    fn rhess(
        &self,
        x: &DMatrix<f64>,
        egrad: &DMatrix<f64>,
        ehess_u: &DMatrix<f64>,
        u: &DMatrix<f64>,
    ) -> DMatrix<f64> {
        let mut out = self.proj(x, ehess_u);
        for j in 0..self.m {
            let c = x.column(j).dot(&egrad.column(j));
            out.column_mut(j).axpy(-c, &u.column(j), 1.0);
        }
        out
    }

    fn violation(&self, x: &DMatrix<f64>) -> f64 {
        (0..self.m)
            .map(|j| (x.column(j).norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}
