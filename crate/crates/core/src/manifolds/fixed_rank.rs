use nalgebra::{DMatrix, DVector};

use super::point::{Ambient, Layout, LowRankPoint, LowRankTangent, Point, Tangent};
use super::Manifold;
use crate::error::{Error, Result};
use crate::linalg;
use crate::Rng;

/// Singular values below this are treated as a loss of rank.
const RANK_COLLAPSE_TOL: f64 = 1e-14;

/// `m x n` real matrices of rank exactly `k`, embedded in `R^{m x n}`.
///
/// Points are `U diag(s) V'` triples and tangent vectors are
/// `U M V' + Up V' + U Vp'` with `U'Up = 0` and `V'Vp = 0`. Nothing of size
/// `m x n` is formed except when a caller passes a dense ambient vector.
#[derive(Clone, Debug)]
pub struct FixedRank {
    m: usize,
    n: usize,
    k: usize,
}

impl FixedRank {
    pub fn new(m: usize, n: usize, k: usize) -> Self {
        Self { m, n, k }
    }

    fn point<'a>(&self, x: &'a Point) -> Result<&'a LowRankPoint> {
        x.check_layout(&self.layout())?;
        x.low_rank()
    }

    fn tangent<'a>(&self, u: &'a Tangent) -> Result<&'a LowRankTangent> {
        match u {
            Tangent::LowRank(t)
                if t.m.shape() == (self.k, self.k)
                    && t.up.shape() == (self.m, self.k)
                    && t.vp.shape() == (self.n, self.k) =>
            {
                Ok(t)
            }
            _ => Err(Error::dim(
                format!("fixed-rank tangent ({}, {}, {})", self.m, self.n, self.k),
                "other tangent",
            )),
        }
    }

    /// `(Z V, Z' U)` for a dense or factored ambient `Z`.
    fn sketch(&self, p: &LowRankPoint, z: &Ambient) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        match z {
            Ambient::Matrix(z) => {
                if z.shape() != (self.m, self.n) {
                    return Err(Error::dim(
                        format!("{}x{}", self.m, self.n),
                        format!("{}x{}", z.nrows(), z.ncols()),
                    ));
                }
                Ok((z * &p.v, z.transpose() * &p.u))
            }
            Ambient::Factored(terms) => {
                let mut zv = DMatrix::zeros(self.m, self.k);
                let mut ztu = DMatrix::zeros(self.n, self.k);
                for (a, b) in terms {
                    if a.nrows() != self.m || b.nrows() != self.n || a.ncols() != b.ncols() {
                        return Err(Error::dim(
                            format!("factors with {} and {} rows", self.m, self.n),
                            format!("{}x{} and {}x{}", a.nrows(), a.ncols(), b.nrows(), b.ncols()),
                        ));
                    }
                    zv += a * (b.transpose() * &p.v);
                    ztu += b * (a.transpose() * &p.u);
                }
                Ok((zv, ztu))
            }
            Ambient::Product(_) => Err(Error::dim("fixed-rank ambient", "product ambient")),
        }
    }
}

impl Manifold for FixedRank {
    fn name(&self) -> String {
        format!("Fixed-rank {}x{} matrices of rank {}", self.m, self.n, self.k)
    }

    fn dim(&self) -> usize {
        (self.m + self.n - self.k) * self.k
    }

    fn typical_dist(&self) -> f64 {
        (self.dim() as f64).sqrt()
    }

    fn layout(&self) -> Layout {
        Layout::LowRank {
            m: self.m,
            n: self.n,
            k: self.k,
        }
    }

    fn supports_ehess2rhess(&self) -> bool {
        false
    }

    fn inner(&self, x: &Point, u: &Tangent, v: &Tangent) -> Result<f64> {
        self.point(x)?;
        let (u, v) = (self.tangent(u)?, self.tangent(v)?);
        Ok(u.m.dot(&v.m) + u.up.dot(&v.up) + u.vp.dot(&v.vp))
    }

    fn proj(&self, x: &Point, z: &Ambient) -> Result<Tangent> {
        let p = self.point(x)?;
        let (zv, ztu) = self.sketch(p, z)?;
        let m = p.u.transpose() * &zv;
        let up = zv - &p.u * &m;
        let vp = ztu - &p.v * m.transpose();
        Ok(Tangent::LowRank(LowRankTangent { m, up, vp }))
    }

    fn retract(&self, x: &Point, u: &Tangent, t: f64) -> Result<Point> {
        let p = self.point(x)?;
        let xi = self.tangent(u)?;
        if t == 0.0 || u.max_abs() == 0.0 {
            return Ok(x.clone());
        }
        let k = self.k;
        // X + t xi = [U Up] K [V Vp]' with K = [[S + tM, tI], [tI, 0]].
        let mut a = DMatrix::zeros(self.m, 2 * k);
        a.columns_mut(0, k).copy_from(&p.u);
        a.columns_mut(k, k).copy_from(&xi.up);
        let mut b = DMatrix::zeros(self.n, 2 * k);
        b.columns_mut(0, k).copy_from(&p.v);
        b.columns_mut(k, k).copy_from(&xi.vp);
        let mut core = DMatrix::zeros(2 * k, 2 * k);
        core.view_mut((0, 0), (k, k))
            .copy_from(&(DMatrix::from_diagonal(&p.s) + &xi.m * t));
        core.view_mut((0, k), (k, k))
            .copy_from(&(DMatrix::<f64>::identity(k, k) * t));
        core.view_mut((k, 0), (k, k))
            .copy_from(&(DMatrix::<f64>::identity(k, k) * t));

        let (qa, ra) = linalg::qr_positive(&a);
        let (qb, rb) = linalg::qr_positive(&b);
        let small = ra * core * rb.transpose();
        let (uc, sc, vc) = linalg::svd_sorted(&small);
        if sc.len() < k || !(sc[k - 1] >= RANK_COLLAPSE_TOL) {
            return Err(Error::RankCollapse {
                sigma: sc.get(k - 1).copied().unwrap_or(0.0),
            });
        }
        Ok(Point::LowRank(LowRankPoint {
            u: qa * linalg::columns(&uc, 0, k),
            s: DVector::from_iterator(k, sc.iter().take(k).copied()),
            v: qb * linalg::columns(&vc, 0, k),
        }))
    }

    fn ehess2rhess(
        &self,
        _x: &Point,
        _egrad: &Ambient,
        _ehess_u: &Ambient,
        _u: &Tangent,
    ) -> Result<Tangent> {
        Err(Error::Unsupported {
            manifold: self.name(),
            op: "ehess2rhess",
        })
    }

    fn rand_point(&self, rng: &mut Rng) -> Point {
        loop {
            let z = linalg::gaussian(self.m, self.n, rng);
            let (u, s, v) = linalg::svd_sorted(&z);
            if s[self.k - 1] >= RANK_COLLAPSE_TOL {
                return Point::LowRank(LowRankPoint {
                    u: linalg::columns(&u, 0, self.k),
                    s: DVector::from_iterator(self.k, s.iter().take(self.k).copied()),
                    v: linalg::columns(&v, 0, self.k),
                });
            }
        }
    }

    fn rand_ambient(&self, _x: &Point, rng: &mut Rng) -> Ambient {
        Ambient::Matrix(linalg::gaussian(self.m, self.n, rng))
    }

    fn to_ambient(&self, x: &Point, u: &Tangent) -> Result<Ambient> {
        let p = self.point(x)?;
        let t = self.tangent(u)?;
        Ok(Ambient::Factored(vec![
            (&p.u * &t.m + &t.up, p.v.clone()),
            (p.u.clone(), t.vp.clone()),
        ]))
    }

    fn zero_tangent(&self, _x: &Point) -> Tangent {
        Tangent::LowRank(LowRankTangent {
            m: DMatrix::zeros(self.k, self.k),
            up: DMatrix::zeros(self.m, self.k),
            vp: DMatrix::zeros(self.n, self.k),
        })
    }

    fn constraint_violation(&self, x: &Point) -> Result<f64> {
        let p = self.point(x)?;
        let ortho = super::stiefel::orthonormality_violation(&p.u)
            .max(super::stiefel::orthonormality_violation(&p.v));
        let positivity = if p.s.iter().all(|&s| s > 0.0) {
            0.0
        } else {
            f64::INFINITY
        };
        Ok(ortho.max(positivity))
    }
}
