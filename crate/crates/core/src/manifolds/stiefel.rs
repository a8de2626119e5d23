use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::MatrixGeometry;
use crate::error::{Error, Result};
use crate::linalg::{self, sym};

/// `n x p` matrices with orthonormal columns, as a Riemannian submanifold of
/// `R^{n x p}`.
#[derive(Clone, Debug)]
pub struct Stiefel {
    n: usize,
    p: usize,
}

impl Stiefel {
    pub fn new(n: usize, p: usize) -> Self {
        Self { n, p }
    }
}

/// Q-factor of a thin QR with positive `diag(R)`; fails on rank deficiency.
pub(super) fn qf(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (q, r) = linalg::qr_positive(z);
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let smallest = r.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(smallest > 1e-14 * scale.max(1.0)) {
        return Err(Error::DegenerateStep("QR of a rank-deficient matrix".into()));
    }
    Ok(q)
}

pub(super) fn orthonormality_violation(x: &DMatrix<f64>) -> f64 {
    let p = x.ncols();
    linalg::max_abs(&(x.transpose() * x - DMatrix::identity(p, p)))
}

impl MatrixGeometry for Stiefel {
    fn name(&self) -> String {
        format!("Stiefel manifold St({}, {})", self.n, self.p)
    }

    fn dim(&self) -> usize {
        self.n * self.p - self.p * (self.p + 1) / 2
    }

    fn typical_dist(&self) -> f64 {
        PI * (self.p as f64).sqrt()
    }

    fn shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    // The QR retraction is first order only, except where it reduces to
    // column normalization (p = 1) or to a reparametrized geodesic (O(2)).
    fn second_order_retraction(&self) -> bool {
        self.p == 1 || self.n == 2
    }

    fn proj(&self, x: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
        z - x * sym(&(x.transpose() * z))
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
        let xtg = sym(&(x.transpose() * egrad));
        self.proj(x, &(ehess_u - u * xtg))
    }

    fn violation(&self, x: &DMatrix<f64>) -> f64 {
        orthonormality_violation(x)
    }
}
