use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::stiefel::{orthonormality_violation, qf};
use super::MatrixGeometry;
use crate::error::Result;
use crate::linalg::{skew, sym};

/// The rotation group `SO(n)` as a Riemannian submanifold of `R^{n x n}`.
///
/// Tangent vectors at `X` are ambient matrices `U` with `X'U` skew-symmetric.
#[derive(Clone, Debug)]
pub struct Rotations {
    n: usize,
}

impl Rotations {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl MatrixGeometry for Rotations {
    fn name(&self) -> String {
        format!("Rotations SO({})", self.n)
    }

    fn dim(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    fn typical_dist(&self) -> f64 {
        // SO(1) is a single point; keep the scale positive there.
        PI * ((self.n * (self.n - 1)) as f64 / 2.0).max(1.0).sqrt() / 2.0
    }

    fn shape(&self) -> (usize, usize) {
        (self.n, self.n)
    }

    // QR-based, first order only for n >= 3. On SO(2) the columns of
    // X + tU stay orthogonal and QR just rescales along the geodesic.
    fn second_order_retraction(&self) -> bool {
        self.n <= 2
    }

    fn proj(&self, x: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
        x * skew(&(x.transpose() * z))
    }

    fn restore(&self, z: DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut q = qf(&z)?;
        if q.determinant() < 0.0 {
            q.column_mut(self.n - 1).neg_mut();
        }
        Ok(q)
    }

    // SO(n) is open in O(n) = St(n, n), so the Stiefel correction applies.
    fn rhess(
        &self,
        x: &DMatrix<f64>,
        egrad: &DMatrix<f64>,
        ehess_u: &DMatrix<f64>,
        u: &DMatrix<f64>,
    ) -> DMatrix<f64> {
        let xtg = sym(&(x.transpose() * egrad));
        self.proj(x, &(ehess_u - u * xtg))
    }

    fn violation(&self, x: &DMatrix<f64>) -> f64 {
        orthonormality_violation(x).max((x.determinant() - 1.0).abs())
    }
}
