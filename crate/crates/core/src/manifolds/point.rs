//! Dense representations of points, tangent vectors and ambient vectors.
//!
//! Every manifold except the fixed-rank one stores points and tangents as
//! plain matrices in the ambient space. Fixed-rank points are kept factored
//! as `U diag(s) V'` and their tangents as `(M, Up, Vp)` triples, so the
//! `m x n` matrix is never formed. Products nest component values.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Shape descriptor used to validate and convert values for a manifold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Layout {
    Matrix { rows: usize, cols: usize },
    LowRank { m: usize, n: usize, k: usize },
    Product(Vec<Layout>),
}

/// A rank-`k` matrix `U diag(s) V'` with orthonormal `U`, `V` and positive `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankPoint {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl LowRankPoint {
    pub fn to_dense(&self) -> DMatrix<f64> {
        &self.u * DMatrix::from_diagonal(&self.s) * self.v.transpose()
    }
}

/// Tangent vector `U M V' + Up V' + U Vp'` at a fixed-rank point.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankTangent {
    pub m: DMatrix<f64>,
    pub up: DMatrix<f64>,
    pub vp: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Matrix(DMatrix<f64>),
    LowRank(LowRankPoint),
    Product(Vec<Point>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tangent {
    Matrix(DMatrix<f64>),
    LowRank(LowRankTangent),
    Product(Vec<Tangent>),
}

/// A vector of the embedding space, e.g. a Euclidean gradient.
///
/// `Factored(terms)` stands for `sum_i A_i B_i'` and is only meaningful for
/// fixed-rank manifolds.
#[derive(Clone, Debug, PartialEq)]
pub enum Ambient {
    Matrix(DMatrix<f64>),
    Factored(Vec<(DMatrix<f64>, DMatrix<f64>)>),
    Product(Vec<Ambient>),
}

fn shape_str(m: &DMatrix<f64>) -> String {
    format!("{}x{} matrix", m.nrows(), m.ncols())
}

impl Point {
    pub fn matrix(&self) -> Result<&DMatrix<f64>> {
        match self {
            Point::Matrix(m) => Ok(m),
            other => Err(Error::dim("matrix point", other.kind())),
        }
    }

    pub fn low_rank(&self) -> Result<&LowRankPoint> {
        match self {
            Point::LowRank(p) => Ok(p),
            other => Err(Error::dim("fixed-rank point", other.kind())),
        }
    }

    pub fn components(&self) -> Result<&[Point]> {
        match self {
            Point::Product(v) => Ok(v),
            other => Err(Error::dim("product point", other.kind())),
        }
    }

    fn kind(&self) -> String {
        match self {
            Point::Matrix(m) => shape_str(m),
            Point::LowRank(_) => "fixed-rank point".into(),
            Point::Product(v) => format!("product of {}", v.len()),
        }
    }

    /// Returns an error unless `self` has the given layout.
    pub fn check_layout(&self, layout: &Layout) -> Result<()> {
        match (self, layout) {
            (Point::Matrix(m), Layout::Matrix { rows, cols }) if m.shape() == (*rows, *cols) => {
                Ok(())
            }
            (Point::LowRank(p), Layout::LowRank { m, n, k })
                if p.u.shape() == (*m, *k) && p.v.shape() == (*n, *k) && p.s.len() == *k =>
            {
                Ok(())
            }
            (Point::Product(ps), Layout::Product(ls)) if ps.len() == ls.len() => ps
                .iter()
                .zip(ls)
                .try_for_each(|(p, l)| p.check_layout(l)),
            _ => Err(Error::dim(format!("{layout:?}"), self.kind())),
        }
    }
}

impl From<DMatrix<f64>> for Point {
    fn from(m: DMatrix<f64>) -> Self {
        Point::Matrix(m)
    }
}

impl From<DMatrix<f64>> for Tangent {
    fn from(m: DMatrix<f64>) -> Self {
        Tangent::Matrix(m)
    }
}

impl From<DMatrix<f64>> for Ambient {
    fn from(m: DMatrix<f64>) -> Self {
        Ambient::Matrix(m)
    }
}

impl Ambient {
    pub fn matrix(&self) -> Result<&DMatrix<f64>> {
        match self {
            Ambient::Matrix(m) => Ok(m),
            Ambient::Factored(_) => Err(Error::dim("dense ambient matrix", "factored ambient")),
            Ambient::Product(_) => Err(Error::dim("dense ambient matrix", "product ambient")),
        }
    }

    pub fn components(&self) -> Result<&[Ambient]> {
        match self {
            Ambient::Product(v) => Ok(v),
            _ => Err(Error::dim("product ambient", "non-product ambient")),
        }
    }

    /// Dense form; factored terms are summed.
    pub fn to_dense(&self, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        match self {
            Ambient::Matrix(m) => Ok(m.clone()),
            Ambient::Factored(terms) => {
                let mut out = DMatrix::zeros(rows, cols);
                for (a, b) in terms {
                    out += a * b.transpose();
                }
                Ok(out)
            }
            Ambient::Product(_) => Err(Error::dim("matrix ambient", "product ambient")),
        }
    }

    /// Frobenius inner product of two dense/product ambient vectors.
    pub fn inner(&self, other: &Ambient) -> Result<f64> {
        match (self, other) {
            (Ambient::Matrix(a), Ambient::Matrix(b)) if a.shape() == b.shape() => Ok(a.dot(b)),
            (Ambient::Product(a), Ambient::Product(b)) if a.len() == b.len() => {
                a.iter().zip(b).map(|(x, y)| x.inner(y)).sum()
            }
            _ => Err(Error::dim("matching dense ambient vectors", "mismatch")),
        }
    }

    pub fn sub(&self, other: &Ambient) -> Result<Ambient> {
        match (self, other) {
            (Ambient::Matrix(a), Ambient::Matrix(b)) if a.shape() == b.shape() => {
                Ok(Ambient::Matrix(a - b))
            }
            (Ambient::Product(a), Ambient::Product(b)) if a.len() == b.len() => Ok(
                Ambient::Product(a.iter().zip(b).map(|(x, y)| x.sub(y)).collect::<Result<_>>()?),
            ),
            _ => Err(Error::dim("matching dense ambient vectors", "mismatch")),
        }
    }
}

impl Tangent {
    pub fn matrix(&self) -> Result<&DMatrix<f64>> {
        match self {
            Tangent::Matrix(m) => Ok(m),
            Tangent::LowRank(_) => Err(Error::dim("matrix tangent", "fixed-rank tangent")),
            Tangent::Product(_) => Err(Error::dim("matrix tangent", "product tangent")),
        }
    }

    pub fn components(&self) -> Result<&[Tangent]> {
        match self {
            Tangent::Product(v) => Ok(v),
            _ => Err(Error::dim("product tangent", "non-product tangent")),
        }
    }

    /// Zero vector with the same structure.
    pub fn zeros_like(&self) -> Tangent {
        self.scale(0.0)
    }

    pub fn scale(&self, a: f64) -> Tangent {
        match self {
            Tangent::Matrix(m) => Tangent::Matrix(m * a),
            Tangent::LowRank(t) => Tangent::LowRank(LowRankTangent {
                m: &t.m * a,
                up: &t.up * a,
                vp: &t.vp * a,
            }),
            Tangent::Product(v) => Tangent::Product(v.iter().map(|c| c.scale(a)).collect()),
        }
    }

    /// `self += a * other`.
    ///
    /// # Panics
    /// If the two vectors do not share the same structure and shapes.
    pub fn axpy(&mut self, a: f64, other: &Tangent) {
        match (self, other) {
            (Tangent::Matrix(x), Tangent::Matrix(y)) => *x += y * a,
            (Tangent::LowRank(x), Tangent::LowRank(y)) => {
                x.m += &y.m * a;
                x.up += &y.up * a;
                x.vp += &y.vp * a;
            }
            (Tangent::Product(x), Tangent::Product(y)) if x.len() == y.len() => {
                for (xi, yi) in x.iter_mut().zip(y) {
                    xi.axpy(a, yi);
                }
            }
            _ => panic!("tangent structure mismatch in axpy"),
        }
    }

    /// `a * u + b * v`.
    pub fn lincomb(a: f64, u: &Tangent, b: f64, v: &Tangent) -> Tangent {
        let mut out = u.scale(a);
        out.axpy(b, v);
        out
    }

    pub fn add(&self, other: &Tangent) -> Tangent {
        Tangent::lincomb(1.0, self, 1.0, other)
    }

    pub fn sub(&self, other: &Tangent) -> Tangent {
        Tangent::lincomb(1.0, self, -1.0, other)
    }

    /// Largest absolute entry over all stored components.
    pub fn max_abs(&self) -> f64 {
        match self {
            Tangent::Matrix(m) => crate::linalg::max_abs(m),
            Tangent::LowRank(t) => crate::linalg::max_abs(&t.m)
                .max(crate::linalg::max_abs(&t.up))
                .max(crate::linalg::max_abs(&t.vp)),
            Tangent::Product(v) => v.iter().fold(0.0, |m, c| m.max(c.max_abs())),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.max_abs().is_finite()
    }
}
