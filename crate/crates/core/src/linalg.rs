//! Dense linear-algebra helpers shared by the manifolds and the max-cut code.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::Rng;

pub fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub fn skew(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a - a.transpose()) * 0.5
}

/// Frobenius inner product `trace(a'b)`.
pub fn frob(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut Rng) -> DMatrix<f64> {
    // Column-major fill order keeps the stream layout independent of nalgebra internals.
    let mut out = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            out[(i, j)] = rng.sample(StandardNormal);
        }
    }
    out
}

pub fn gaussian_vec(len: usize, rng: &mut Rng) -> DVector<f64> {
    DVector::from_iterator(len, (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Thin QR factorization with the diagonal of `R` made nonnegative.
pub fn qr_positive(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let qr = a.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..r.nrows().min(r.ncols()) {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
            r.row_mut(i).neg_mut();
        }
    }
    (q, r)
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues sorted ascending.
pub fn sym_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let eig = sym(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Full thin SVD with singular values sorted in decreasing order.
///
/// Singular vector signs are normalized so that the largest-magnitude entry
/// of each left singular vector is positive.
pub fn svd_sorted(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V'");
    let s = svd.singular_values;
    let r = s.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let mut uo = DMatrix::zeros(a.nrows(), r);
    let mut vo = DMatrix::zeros(a.ncols(), r);
    let mut so = DVector::zeros(r);
    for (dst, &src) in order.iter().enumerate() {
        let mut ucol = u.column(src).into_owned();
        let mut vcol = vt.row(src).transpose();
        let pivot = ucol.iter().fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
        if pivot < 0.0 {
            ucol.neg_mut();
            vcol.neg_mut();
        }
        uo.set_column(dst, &ucol);
        vo.set_column(dst, &vcol);
        so[dst] = s[src];
    }
    (uo, so, vo)
}

/// Columns `lo..hi` copied into an owned matrix.
pub fn columns(a: &DMatrix<f64>, lo: usize, hi: usize) -> DMatrix<f64> {
    a.columns(lo, hi - lo).into_owned()
}
