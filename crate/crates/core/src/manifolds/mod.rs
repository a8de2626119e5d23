//! Geometry descriptors for the supported search spaces.
//!
//! A descriptor is obtained from one of the factory functions
//! ([`sphere`], [`stiefel`], [`elliptope`], ...) and shared as a
//! [`ManifoldRef`]. It carries the intrinsic dimension, a typical distance
//! scale, and the operations solvers need: tangent projection, metric,
//! retraction, conversion of Euclidean derivatives, random sampling and
//! vector transport.
//!
//! Tangent vectors never store their base point; every operation takes the
//! base point explicitly.
//!
//! | manifold      | retraction                         | Riemannian Hessian correction            |
//! |---------------|------------------------------------|------------------------------------------|
//! | sphere        | `(x + tu) / ‖x + tu‖`              | `P(ehess) - (x'egrad) u`                 |
//! | oblique       | columnwise normalization           | columnwise sphere formula                |
//! | elliptope     | rowwise normalization              | rowwise sphere formula                   |
//! | spectrahedron | Frobenius normalization            | `P(ehess) - tr(Y'egrad) u`               |
//! | Stiefel       | `qf(X + tU)`, `diag(R) > 0`        | `P(ehess - U sym(X'egrad))`              |
//! | Grassmann     | `qf(X + tU)`, `diag(R) > 0`        | `P(ehess) - U (X'egrad)`                 |
//! | rotations     | `qf(X + tU)` with determinant fix  | `P(ehess - U sym(X'egrad))`              |
//! | fixed-rank    | rank-k truncated SVD               | not provided (finite differences)        |
//! | Euclidean     | `x + tu`                           | `ehess`                                  |

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::Rng;

mod elliptope;
mod euclidean;
mod fixed_rank;
mod grassmann;
mod oblique;
mod point;
mod product;
mod rotations;
mod spectrahedron;
mod sphere;
mod stiefel;

pub use elliptope::Elliptope;
pub use euclidean::Euclidean;
pub use fixed_rank::FixedRank;
pub use grassmann::Grassmann;
pub use oblique::Oblique;
pub use point::{Ambient, Layout, LowRankPoint, LowRankTangent, Point, Tangent};
pub use product::Product;
pub use rotations::Rotations;
pub use spectrahedron::Spectrahedron;
pub use sphere::Sphere;
pub use stiefel::Stiefel;

/// Tolerance used for manifold-membership checks (max-norm).
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// Shared, immutable manifold descriptor.
pub type ManifoldRef = Arc<dyn Manifold>;

pub trait Manifold: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// Intrinsic dimension.
    fn dim(&self) -> usize;

    /// Heuristic distance scale, used to size trust regions and first steps.
    fn typical_dist(&self) -> f64;

    fn layout(&self) -> Layout;

    /// Whether the retraction agrees with the exponential map to second order.
    fn second_order_retraction(&self) -> bool {
        true
    }

    /// Whether [`Manifold::ehess2rhess`] is implemented.
    fn supports_ehess2rhess(&self) -> bool {
        true
    }

    fn inner(&self, x: &Point, u: &Tangent, v: &Tangent) -> Result<f64>;

    fn norm(&self, x: &Point, u: &Tangent) -> Result<f64> {
        Ok(self.inner(x, u, u)?.max(0.0).sqrt())
    }

    /// Orthogonal projection of an ambient vector onto the tangent space at `x`.
    fn proj(&self, x: &Point, z: &Ambient) -> Result<Tangent>;

    fn retract(&self, x: &Point, u: &Tangent, t: f64) -> Result<Point>;

    fn egrad2rgrad(&self, x: &Point, egrad: &Ambient) -> Result<Tangent> {
        self.proj(x, egrad)
    }

    /// Riemannian Hessian along `u` from the Euclidean gradient and the
    /// directional derivative of the Euclidean gradient along `u`.
    fn ehess2rhess(
        &self,
        x: &Point,
        egrad: &Ambient,
        ehess_u: &Ambient,
        u: &Tangent,
    ) -> Result<Tangent>;

    fn rand_point(&self, rng: &mut Rng) -> Point;

    /// Standard Gaussian sample of the ambient space at `x`.
    fn rand_ambient(&self, x: &Point, rng: &mut Rng) -> Ambient;

    /// The ambient representation of a tangent vector at `x`.
    fn to_ambient(&self, x: &Point, u: &Tangent) -> Result<Ambient>;

    fn zero_tangent(&self, x: &Point) -> Tangent;

    /// Max-norm violation of the defining constraints.
    fn constraint_violation(&self, x: &Point) -> Result<f64>;

    /// Unit-norm tangent vector: a projected Gaussian sample, rescaled.
    fn rand_tangent(&self, x: &Point, rng: &mut Rng) -> Result<Tangent> {
        for _ in 0..5 {
            let z = self.rand_ambient(x, rng);
            let v = self.proj(x, &z)?;
            let nrm = self.norm(x, &v)?;
            if nrm > 1e-300 && nrm.is_finite() {
                return Ok(v.scale(1.0 / nrm));
            }
        }
        Err(Error::DegenerateStep(format!(
            "random tangent on {} projected to zero five times",
            self.name()
        )))
    }

    /// Projection-based vector transport of `u` from `T_x` to `T_y`.
    fn transport(&self, x: &Point, y: &Point, u: &Tangent) -> Result<Tangent> {
        self.proj(y, &self.to_ambient(x, u)?)
    }
}

/// Geometry of a manifold embedded in a matrix space with the trace inner
/// product. Implementors get [`Manifold`] for free.
pub(crate) trait MatrixGeometry: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn typical_dist(&self) -> f64;
    fn shape(&self) -> (usize, usize);
    fn second_order_retraction(&self) -> bool {
        true
    }
    fn proj(&self, x: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64>;
    /// Maps an ambient matrix onto the manifold (normalization, QR, ...).
    fn restore(&self, z: DMatrix<f64>) -> Result<DMatrix<f64>>;
    fn rhess(
        &self,
        x: &DMatrix<f64>,
        egrad: &DMatrix<f64>,
        ehess_u: &DMatrix<f64>,
        u: &DMatrix<f64>,
    ) -> DMatrix<f64>;
    fn violation(&self, x: &DMatrix<f64>) -> f64;
}

impl<G: MatrixGeometry> Manifold for G {
    fn name(&self) -> String {
        MatrixGeometry::name(self)
    }

    fn dim(&self) -> usize {
        MatrixGeometry::dim(self)
    }

    fn typical_dist(&self) -> f64 {
        MatrixGeometry::typical_dist(self)
    }

    fn layout(&self) -> Layout {
        let (rows, cols) = self.shape();
        Layout::Matrix { rows, cols }
    }

    fn second_order_retraction(&self) -> bool {
        MatrixGeometry::second_order_retraction(self)
    }

    fn inner(&self, x: &Point, u: &Tangent, v: &Tangent) -> Result<f64> {
        self.check_point(x)?;
        let (u, v) = (self.tangent_mat(u)?, self.tangent_mat(v)?);
        Ok(linalg::frob(u, v))
    }

    fn proj(&self, x: &Point, z: &Ambient) -> Result<Tangent> {
        let x = self.check_point(x)?;
        let z = self.ambient_mat(z)?;
        Ok(Tangent::Matrix(MatrixGeometry::proj(self, x, z)))
    }

    fn retract(&self, x: &Point, u: &Tangent, t: f64) -> Result<Point> {
        let xm = self.check_point(x)?;
        let um = self.tangent_mat(u)?;
        if t == 0.0 || um.iter().all(|&v| v == 0.0) {
            return Ok(x.clone());
        }
        Ok(Point::Matrix(self.restore(xm + um * t)?))
    }

    fn ehess2rhess(
        &self,
        x: &Point,
        egrad: &Ambient,
        ehess_u: &Ambient,
        u: &Tangent,
    ) -> Result<Tangent> {
        let x = self.check_point(x)?;
        let g = self.ambient_mat(egrad)?;
        let h = self.ambient_mat(ehess_u)?;
        let u = self.tangent_mat(u)?;
        Ok(Tangent::Matrix(self.rhess(x, g, h, u)))
    }

    fn rand_point(&self, rng: &mut Rng) -> Point {
        let (r, c) = self.shape();
        loop {
            // A Gaussian sample is degenerate with probability zero.
            if let Ok(x) = self.restore(linalg::gaussian(r, c, rng)) {
                return Point::Matrix(x);
            }
        }
    }

    fn rand_ambient(&self, _x: &Point, rng: &mut Rng) -> Ambient {
        let (r, c) = self.shape();
        Ambient::Matrix(linalg::gaussian(r, c, rng))
    }

    fn to_ambient(&self, x: &Point, u: &Tangent) -> Result<Ambient> {
        self.check_point(x)?;
        Ok(Ambient::Matrix(self.tangent_mat(u)?.clone()))
    }

    fn zero_tangent(&self, _x: &Point) -> Tangent {
        let (r, c) = self.shape();
        Tangent::Matrix(DMatrix::zeros(r, c))
    }

    fn constraint_violation(&self, x: &Point) -> Result<f64> {
        Ok(self.violation(self.check_point(x)?))
    }
}

trait MatrixChecks {
    fn check_point<'a>(&self, x: &'a Point) -> Result<&'a DMatrix<f64>>;
    fn tangent_mat<'a>(&self, u: &'a Tangent) -> Result<&'a DMatrix<f64>>;
    fn ambient_mat<'a>(&self, z: &'a Ambient) -> Result<&'a DMatrix<f64>>;
}

impl<G: MatrixGeometry> MatrixChecks for G {
    fn check_point<'a>(&self, x: &'a Point) -> Result<&'a DMatrix<f64>> {
        let m = x.matrix()?;
        same_shape(self.shape(), m)?;
        Ok(m)
    }

    fn tangent_mat<'a>(&self, u: &'a Tangent) -> Result<&'a DMatrix<f64>> {
        let m = u.matrix()?;
        same_shape(self.shape(), m)?;
        Ok(m)
    }

    fn ambient_mat<'a>(&self, z: &'a Ambient) -> Result<&'a DMatrix<f64>> {
        let m = z.matrix()?;
        same_shape(self.shape(), m)?;
        Ok(m)
    }
}

fn same_shape(expected: (usize, usize), m: &DMatrix<f64>) -> Result<()> {
    if m.shape() == expected {
        Ok(())
    } else {
        Err(Error::dim(
            format!("{}x{}", expected.0, expected.1),
            format!("{}x{}", m.nrows(), m.ncols()),
        ))
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Argument(msg()))
    }
}

/// Unit sphere in `R^n`, points stored as `n x 1` columns.
pub fn sphere(n: usize) -> Result<ManifoldRef> {
    require(n >= 1, || format!("sphere needs n >= 1, got {n}"))?;
    Ok(Arc::new(Sphere::new(n)))
}

/// `n x m` matrices with unit-norm columns.
pub fn oblique(n: usize, m: usize) -> Result<ManifoldRef> {
    require(n >= 1 && m >= 1, || format!("oblique needs n, m >= 1, got ({n}, {m})"))?;
    Ok(Arc::new(Oblique::new(n, m)))
}

/// `n x p` matrices with orthonormal columns.
pub fn stiefel(n: usize, p: usize) -> Result<ManifoldRef> {
    require(1 <= p && p <= n, || format!("stiefel needs 1 <= p <= n, got ({n}, {p})"))?;
    Ok(Arc::new(Stiefel::new(n, p)))
}

/// `p`-dimensional subspaces of `R^n`, stored as orthonormal bases.
pub fn grassmann(n: usize, p: usize) -> Result<ManifoldRef> {
    require(1 <= p && p <= n, || format!("grassmann needs 1 <= p <= n, got ({n}, {p})"))?;
    Ok(Arc::new(Grassmann::new(n, p)))
}

/// The special orthogonal group `SO(n)`.
pub fn rotations(n: usize) -> Result<ManifoldRef> {
    require(n >= 1, || format!("rotations needs n >= 1, got {n}"))?;
    Ok(Arc::new(Rotations::new(n)))
}

/// `m x n` matrices of rank `k` with the embedded geometry.
pub fn fixed_rank(m: usize, n: usize, k: usize) -> Result<ManifoldRef> {
    require(1 <= k && k <= m.min(n), || {
        format!("fixed_rank needs 1 <= k <= min(m, n), got ({m}, {n}, {k})")
    })?;
    Ok(Arc::new(FixedRank::new(m, n, k)))
}

/// Rank-`k` correlation matrices `YY'`, parametrized by `n x k` factors with
/// unit-norm rows.
pub fn elliptope(n: usize, k: usize) -> Result<ManifoldRef> {
    require(1 <= k && k <= n, || format!("elliptope needs 1 <= k <= n, got ({n}, {k})"))?;
    Ok(Arc::new(Elliptope::new(n, k)))
}

/// Rank-`k` unit-trace PSD matrices `YY'`, parametrized by `n x k` factors of
/// unit Frobenius norm.
pub fn spectrahedron(n: usize, k: usize) -> Result<ManifoldRef> {
    require(1 <= k && k <= n, || {
        format!("spectrahedron needs 1 <= k <= n, got ({n}, {k})")
    })?;
    Ok(Arc::new(Spectrahedron::new(n, k)))
}

pub fn euclidean(rows: usize, cols: usize) -> Result<ManifoldRef> {
    require(rows >= 1 && cols >= 1, || {
        format!("euclidean needs positive dimensions, got ({rows}, {cols})")
    })?;
    Ok(Arc::new(Euclidean::new(rows, cols)))
}

/// Cartesian product; every operation acts componentwise.
pub fn product(components: Vec<ManifoldRef>) -> Result<ManifoldRef> {
    require(!components.is_empty(), || "product needs at least one component".into())?;
    Ok(Arc::new(Product::new(components)))
}
