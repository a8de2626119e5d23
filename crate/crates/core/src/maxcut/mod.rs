//! Max-cut through the low-rank elliptope relaxation.
//!
//! For a graph Laplacian `L`, the relaxation maximizes `tr(Y'LY)/4` over
//! `n x r` matrices `Y` with unit-norm rows. It is solved on the elliptope
//! with a Riemannian solver, rounded to cuts by random hyperplanes, and
//! certified globally optimal through the dual matrix
//! `S = Diag(d) - L`, `d_i = (L Y Y')_ii`. When the certificate fails the
//! rank is increased and the solve restarted from a descent direction
//! built from the most negative eigenvector of `S`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::manifolds::{elliptope, Ambient, Point, Tangent};
use crate::problem::{CacheStore, Problem};
use crate::solvers::{self, RunResult, SolverOptions};
use crate::Rng;

pub mod cli;
mod graph;

pub use graph::{laplacian, load_graph, parse_graph, Graph};

/// Default certification tolerance, relative to `||L||_1`.
pub const CERT_TOL: f64 = 1e-6;
/// Gradient norm, relative to `max(1, ||L||_1)`, below which a point is
/// accepted as critical by [`certify`].
pub const CRITICAL_TOL: f64 = 1e-6;
/// Gradient tolerance used for the solves inside [`rank_escalation`],
/// relative to `max(1, ||L||_1)`.
pub const ESCALATION_GRAD_TOL: f64 = 1e-9;

const LY_KEY: &str = "LY";

/// Largest absolute column sum.
pub fn norm1(l: &DMatrix<f64>) -> f64 {
    l.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// The relaxation as a [`Problem`], plus a count of `L * Y` products.
#[derive(Clone, Debug)]
pub struct MaxCutProblem {
    pub problem: Problem,
    pub laplacian: Arc<DMatrix<f64>>,
    pub rank: usize,
    ly_products: Arc<AtomicUsize>,
}

impl MaxCutProblem {
    /// Number of `L * Y` products computed so far.
    pub fn ly_products(&self) -> usize {
        self.ly_products.load(Ordering::SeqCst)
    }

    pub fn reset_ly_products(&self) {
        self.ly_products.store(0, Ordering::SeqCst);
    }
}

/// Cost `-tr(Y'LY)/4`, Euclidean gradient `-LY/2` and Hessian `-LU/2` on
/// the `n x r` elliptope. The product `LY` is kept in the per-point store,
/// so with caching on the cost and gradient at a point share one product.
pub fn build_problem(l: &DMatrix<f64>, r: usize) -> Result<MaxCutProblem> {
    if l.nrows() != l.ncols() {
        return Err(Error::dim("square Laplacian", format!("{}x{}", l.nrows(), l.ncols())));
    }
    let manifold = elliptope(l.nrows(), r)?;
    let l = Arc::new(l.clone());
    let count = Arc::new(AtomicUsize::new(0));

    let ly = {
        let l = l.clone();
        let count = count.clone();
        move |y: &DMatrix<f64>, store: &mut crate::problem::PointStore| -> DMatrix<f64> {
            store
                .get_or_insert_with(LY_KEY, || {
                    count.fetch_add(1, Ordering::SeqCst);
                    &*l * y
                })
                .clone()
        }
    };
    let ly2 = ly.clone();
    let l_hess = l.clone();
    let problem = Problem::new(manifold, move |x, s| {
        let y = x.matrix()?;
        Ok(-y.dot(&ly(y, s)) / 4.0)
    })
    .with_egrad(move |x, s| Ok(Ambient::Matrix(ly2(x.matrix()?, s) * -0.5)))
    .with_ehess(move |_, u, _| Ok(Ambient::Matrix(&*l_hess * u.matrix()? * -0.5)));

    Ok(MaxCutProblem {
        problem,
        laplacian: l,
        rank: r,
        ly_products: count,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SolverKind {
    #[default]
    TrustRegions,
    ConjugateGradient,
    SteepestDescent,
}

pub fn run_solver(
    kind: SolverKind,
    p: &Problem,
    x0: Option<Point>,
    opts: &SolverOptions,
) -> Result<RunResult> {
    match kind {
        SolverKind::TrustRegions => solvers::trust_regions(p, x0, opts),
        SolverKind::ConjugateGradient => solvers::conjugate_gradient(p, x0, opts),
        SolverKind::SteepestDescent => solvers::steepest_descent(p, x0, opts),
    }
}

/// Solves the rank-`r` relaxation from a random point drawn from `rng`.
pub fn solve_rank_r(
    l: &DMatrix<f64>,
    r: usize,
    kind: SolverKind,
    opts: &SolverOptions,
    rng: &mut Rng,
) -> Result<(DMatrix<f64>, RunResult)> {
    let mc = build_problem(l, r)?;
    let x0 = mc.problem.manifold().rand_point(rng);
    let run = run_solver(kind, &mc.problem, Some(x0), opts)?;
    Ok((run.x.matrix()?.clone(), run))
}

/// `s' L s / 4`.
pub fn cut_value(l: &DMatrix<f64>, s: &[i8]) -> f64 {
    let v = DVector::from_iterator(s.len(), s.iter().map(|&x| f64::from(x)));
    v.dot(&(l * &v)) / 4.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub s: Vec<i8>,
    pub value: f64,
}

/// Random-hyperplane rounding: the best of `trials` cuts `sign(Y z)` with
/// Gaussian `z`. Zero entries go to +1.
pub fn round_cut(l: &DMatrix<f64>, y: &DMatrix<f64>, trials: usize, rng: &mut Rng) -> Result<Cut> {
    if trials == 0 {
        return Err(Error::Argument("rounding needs at least one trial".into()));
    }
    if y.nrows() != l.nrows() {
        return Err(Error::dim(format!("{} rows", l.nrows()), format!("{} rows", y.nrows())));
    }
    let mut best: Option<Cut> = None;
    for _ in 0..trials {
        let z = DVector::from_iterator(y.ncols(), (0..y.ncols()).map(|_| StandardNormal.sample(rng)));
        let proj = y * z;
        let s: Vec<i8> = proj.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect();
        let value = cut_value(l, &s);
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(Cut { s, value });
        }
    }
    Ok(best.expect("at least one trial"))
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub certified: bool,
    pub lambda_min: f64,
    /// Eigenvector for `lambda_min`, unit norm.
    pub eigenvector: DVector<f64>,
    /// `tr(L Y Y')/4`.
    pub relaxation_value: f64,
    /// Valid max-cut upper bound when certified:
    /// `(sum(d) + n max(0, -lambda_min)) / 4`.
    pub upper_bound: Option<f64>,
    /// `||S Y||_F`.
    pub residual: f64,
    pub grad_norm: f64,
}

fn dual_certificate(l: &DMatrix<f64>, y: &DMatrix<f64>, tol: f64) -> Result<Certificate> {
    let n = l.nrows();
    let ly = l * y;
    let d = DVector::from_iterator(n, (0..n).map(|i| ly.row(i).dot(&y.row(i))));
    let s = DMatrix::from_diagonal(&d) - l;
    let (vals, vecs) = linalg::sym_eigen(&s);
    let lambda_min = vals[0];
    let scale = norm1(l);
    let certified = lambda_min >= -tol * scale;
    let sum_d = d.sum();
    let bound = (sum_d + n as f64 * (-lambda_min).max(0.0)) / 4.0;

    let mc = build_problem(l, y.ncols())?;
    let x = Point::Matrix(y.clone());
    let mut store = CacheStore::new();
    let key = store.new_key();
    let g = mc.problem.get_gradient(&x, key, &mut store)?;
    let grad_norm = mc.problem.manifold().norm(&x, &g)?;

    Ok(Certificate {
        certified,
        lambda_min,
        eigenvector: vecs.column(0).into_owned(),
        relaxation_value: sum_d / 4.0,
        upper_bound: certified.then_some(bound),
        residual: (&s * y).norm(),
        grad_norm,
    })
}

/// Checks global optimality of a critical `Y` for the relaxation.
///
/// Certified when `lambda_min(S) >= -tol ||L||_1`. Fails with a
/// precondition error when the Riemannian gradient at `Y` exceeds
/// [`CRITICAL_TOL`]` * max(1, ||L||_1)`.
pub fn certify(l: &DMatrix<f64>, y: &DMatrix<f64>, tol: f64) -> Result<Certificate> {
    if !(tol >= 0.0) {
        return Err(Error::Argument(format!("certification tolerance {tol} must be nonnegative")));
    }
    let cert = dual_certificate(l, y, tol)?;
    let limit = CRITICAL_TOL * norm1(l).max(1.0);
    if cert.grad_norm > limit {
        return Err(Error::Precondition(format!(
            "point is not critical: gradient norm {:.3e} > {limit:.3e}",
            cert.grad_norm
        )));
    }
    Ok(cert)
}

#[derive(Clone, Debug)]
pub struct EscalationOptions {
    pub solver: SolverKind,
    pub solver_options: SolverOptions,
    pub cert_tol: f64,
    pub trials: usize,
}

impl Default for EscalationOptions {
    fn default() -> Self {
        Self {
            solver: SolverKind::TrustRegions,
            solver_options: SolverOptions::default(),
            cert_tol: CERT_TOL,
            trials: 100,
        }
    }
}

/// Outcome of one rank in [`rank_escalation`].
#[derive(Clone, Debug)]
pub struct RankStep {
    pub rank: usize,
    pub run: RunResult,
    pub lambda_min: f64,
    pub certified: bool,
    /// How the next rank was entered; `None` on the last step.
    pub escape: Option<Escape>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Escape {
    Eigenvector,
    RandomTangent,
    /// No tried direction decreased the cost; the padded point was used.
    None,
}

#[derive(Clone, Debug)]
pub struct CutResult {
    pub s: Vec<i8>,
    pub cut_value: f64,
    pub upper_bound: Option<f64>,
    pub certified: bool,
    pub rank_used: usize,
    /// Final relaxation cost `-tr(Y'LY)/4`.
    pub cost: f64,
    pub y: DMatrix<f64>,
    pub steps: Vec<RankStep>,
}

impl CutResult {
    pub fn iterations(&self) -> usize {
        self.steps.iter().map(|s| s.run.iterations()).sum()
    }

    /// Solver histories of all ranks as one CSV, records numbered
    /// consecutively across ranks.
    pub fn history_csv(&self) -> String {
        let mut out = String::from(solvers::HISTORY_CSV_HEADER);
        out.push('\n');
        let mut next = 0;
        for step in &self.steps {
            let mut run = step.run.clone();
            for rec in &mut run.history {
                rec.iter = next;
                next += 1;
            }
            out.extend(run.history_csv().lines().skip(1).map(|l| format!("{l}\n")));
        }
        out
    }
}

fn pad_column(y: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(y.nrows(), y.ncols() + 1);
    out.columns_mut(0, y.ncols()).copy_from(y);
    out
}

/// Looks for `t` in {1e-2, 1e-3, 1e-4} with `f(retract(Y, z, t)) < f(Y)`.
fn descend(mc: &MaxCutProblem, y: &Point, f0: f64, z: &Tangent) -> Result<Option<Point>> {
    let m = mc.problem.manifold();
    let mut store = CacheStore::new();
    for t in [1e-2, 1e-3, 1e-4] {
        let yt = m.retract(y, z, t)?;
        let key = store.new_key();
        if mc.problem.get_cost(&yt, key, &mut store)? < f0 {
            return Ok(Some(yt));
        }
    }
    Ok(None)
}

/// Solves at increasing rank, from `r0`, until the dual certificate holds
/// or the rank reaches `n`. Rounds at every rank and keeps the best cut.
pub fn rank_escalation(
    l: &DMatrix<f64>,
    r0: usize,
    opts: &EscalationOptions,
    rng: &mut Rng,
) -> Result<CutResult> {
    if r0 < 2 {
        return Err(Error::Argument(format!("initial rank must be at least 2, got {r0}")));
    }
    let n = l.nrows();
    let mut solver_opts = opts.solver_options.clone();
    solver_opts.tol_grad_norm = solver_opts
        .tol_grad_norm
        .min(ESCALATION_GRAD_TOL * norm1(l).max(1.0));

    let mut r = r0;
    let mut mc = build_problem(l, r)?;
    let mut y = mc.problem.manifold().rand_point(rng);
    let mut steps: Vec<RankStep> = Vec::new();
    let mut best: Option<Cut> = None;
    loop {
        let run = run_solver(opts.solver, &mc.problem, Some(y), &solver_opts)?;
        let ym = run.x.matrix()?.clone();
        let cut = round_cut(l, &ym, opts.trials, rng)?;
        if best.as_ref().is_none_or(|b| cut.value > b.value) {
            best = Some(cut);
        }
        let cert = dual_certificate(l, &ym, opts.cert_tol)?;
        let critical = cert.grad_norm <= CRITICAL_TOL * norm1(l).max(1.0);
        let certified = cert.certified && critical;
        let done = certified || r >= n;
        steps.push(RankStep {
            rank: r,
            lambda_min: cert.lambda_min,
            certified,
            escape: None,
            run,
        });
        if done {
            let best = best.expect("rounded at least once");
            let last = steps.last().expect("at least one rank");
            return Ok(CutResult {
                s: best.s,
                cut_value: best.value,
                upper_bound: if certified { cert.upper_bound } else { None },
                certified,
                rank_used: r,
                cost: last.run.cost,
                y: ym,
                steps,
            });
        }

        let f0 = steps.last().expect("just pushed").run.cost;
        r += 1;
        mc = build_problem(l, r)?;
        let padded = Point::Matrix(pad_column(&ym));
        let mut z = DMatrix::zeros(n, r);
        z.column_mut(r - 1).copy_from(&cert.eigenvector);
        let (next, escape) = match descend(&mc, &padded, f0, &Tangent::Matrix(z))? {
            Some(p) => (p, Escape::Eigenvector),
            None => {
                let u = mc.problem.manifold().rand_tangent(&padded, rng)?;
                match descend(&mc, &padded, f0, &u)? {
                    Some(p) => (p, Escape::RandomTangent),
                    None => (padded, Escape::None),
                }
            }
        };
        log::debug!("rank {} -> {r}: escape via {escape:?}", r - 1);
        steps.last_mut().expect("just pushed").escape = Some(escape);
        y = next;
    }
}
