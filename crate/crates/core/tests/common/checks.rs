//! Property checks returning a list of failure messages, so that callers can
//! either assert on them or summarize them.

use riemopt::manifolds::{Layout, ManifoldRef, Point};
use riemopt::problem::{CacheStore, HessianSource, Problem};
use riemopt::solvers::{
    conjugate_gradient, steepest_descent, trust_regions, Clock, RunResult, SolverOptions,
};
use riemopt::{rng_from_seed, Result};

use super::{
    cost_coords, cost_dim, flat_problem, flatten_point, flatten_tangent, unflatten, FlatCost,
};

pub const PROJ_IDEMPOTENCE_TOL: f64 = 1e-12;
pub const PROJ_ORTHOGONALITY_TOL: f64 = 1e-10;
pub const CONSTRAINT_TOL: f64 = 1e-12;
pub const RETRACTION_MIN_ORDER: f64 = 2.0;
/// Slack on the two-point order estimate, whose bias is `O(t)`.
pub const ORDER_SLACK: f64 = 0.05;
pub const HESS_FD_STEP: f64 = 1e-5;
pub const HESS_FD_TOL: f64 = 1e-6;
pub const HESS_SYMMETRY_TOL: f64 = 1e-9;
/// Gradient norm of the cost used for the finite-difference Hessian check.
/// Rounding the retracted points perturbs the cost by about `eps |grad f|`,
/// which the second difference amplifies by `1 / h^2 = 1e10`.
pub const HESS_FD_SLOPE: f64 = 0.05;

fn has_low_rank(layout: &Layout) -> bool {
    match layout {
        Layout::LowRank { .. } => true,
        Layout::Matrix { .. } => false,
        Layout::Product(ls) => ls.iter().any(has_low_rank),
    }
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

/// Runs every manifold invariant at one size and returns the failures.
pub fn manifold_invariants(m: &ManifoldRef, seed: u64) -> Vec<String> {
    let mut fails = Vec::new();
    if let Err(e) = invariants_inner(m, seed, &mut fails) {
        fails.push(format!("unexpected error: {e}"));
    }
    fails.into_iter().map(|f| format!("{}: {f}", m.name())).collect()
}

fn invariants_inner(m: &ManifoldRef, seed: u64, fails: &mut Vec<String>) -> Result<()> {
    let mut rng = rng_from_seed(seed);
    let layout = m.layout();
    let x = m.rand_point(&mut rng);
    let again = m.rand_point(&mut rng_from_seed(seed));
    if again != x {
        fails.push("rand_point is not reproducible from the seed".into());
    }
    let v0 = m.constraint_violation(&x)?;
    if v0 > CONSTRAINT_TOL {
        fails.push(format!("random point violates constraints by {v0:e}"));
    }

    // Projection is idempotent.
    let z = m.rand_ambient(&x, &mut rng);
    let p = m.proj(&x, &z)?;
    let pp = m.proj(&x, &m.to_ambient(&x, &p)?)?;
    let err = rel(pp.sub(&p).max_abs(), p.max_abs());
    if err > PROJ_IDEMPOTENCE_TOL {
        fails.push(format!("proj is not idempotent: {err:e}"));
    }

    // The residual of the projection is orthogonal to the tangent space.
    if !has_low_rank(&layout) {
        let r = flatten_ambient_dense(m, &z) - flatten_tangent(m, &x, &p);
        for _ in 0..20 {
            let v = m.rand_tangent(&x, &mut rng)?;
            let ip = r.dot(&flatten_tangent(m, &x, &v)).abs();
            if ip > PROJ_ORTHOGONALITY_TOL {
                fails.push(format!("proj residual not orthogonal: {ip:e}"));
                break;
            }
        }
    }

    // Retraction at zero is the identity, and agrees with x + tu to first order.
    let u = m.rand_tangent(&x, &mut rng)?;
    if m.retract(&x, &m.zero_tangent(&x), 1.0)? != x || m.retract(&x, &u, 0.0)? != x {
        fails.push("retract(x, 0) != x".into());
    }
    let fx = flatten_point(&x);
    let fu = flatten_tangent(m, &x, &u);
    let dev = |t: f64| -> Result<f64> {
        Ok((flatten_point(&m.retract(&x, &u, t)?) - &fx - &fu * t).norm())
    };
    let (e3, e4) = (dev(1e-3)?, dev(1e-4)?);
    if e3 > 1e-14 {
        let order = (e3 / e4).log10();
        if order < RETRACTION_MIN_ORDER - ORDER_SLACK {
            fails.push(format!("retraction error decays at order {order:.3}"));
        }
    }

    // Repeated retraction stays on the manifold.
    let mut y = x.clone();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let step = m.rand_tangent(&y, &mut rng)?;
        y = m.retract(&y, &step, 0.5)?;
        worst = worst.max(m.constraint_violation(&y)?);
    }
    if worst > CONSTRAINT_TOL {
        fails.push(format!("constraint drift after 100 steps: {worst:e}"));
    }

    if m.supports_ehess2rhess() {
        hessian_invariants(m, &x, seed, fails)?;
    }
    Ok(())
}

fn flatten_ambient_dense(m: &ManifoldRef, z: &riemopt::manifolds::Ambient) -> nalgebra::DVector<f64> {
    super::flatten_ambient(z, &m.layout())
}

/// Compares `<Hess u, u>` with the second derivative of the cost along the
/// retraction curve, and checks Hessian symmetry.
///
/// Along `c(t) = R(x, tu)` the second derivative of `f(c(t))` at zero is
/// `<Hess u, u> + <grad f, proj(c''(0))>`. The correction vanishes for
/// second-order retractions; for the others it is estimated by finite
/// differences of the curve.
fn hessian_invariants(m: &ManifoldRef, x: &Point, seed: u64, fails: &mut Vec<String>) -> Result<()> {
    let p = flat_problem(m, FlatCost::local(cost_coords(m, x), HESS_FD_SLOPE, seed ^ 0x5eed));
    let mut rng = rng_from_seed(seed.wrapping_add(1));
    let mut store = CacheStore::new();
    let key = store.new_key();
    let f0 = p.get_cost(x, key, &mut store)?;
    let g = p.get_gradient(x, key, &mut store)?;
    let u = m.rand_tangent(x, &mut rng)?;
    let v = m.rand_tangent(x, &mut rng)?;
    let hu = p.get_hessian(x, key, &u, &mut store)?;
    let hv = p.get_hessian(x, key, &v, &mut store)?;

    let h = HESS_FD_STEP;
    let cost_at = |t: f64, store: &mut CacheStore| -> Result<(f64, Point)> {
        let y = m.retract(x, &u, t)?;
        let k = store.new_key();
        Ok((p.get_cost(&y, k, store)?, y))
    };
    let (fp, yp) = cost_at(h, &mut store)?;
    let (fm, ym) = cost_at(-h, &mut store)?;
    let second = (fp - 2.0 * f0 + fm) / (h * h);
    let accel = (flatten_point(&yp) - flatten_point(x) * 2.0 + flatten_point(&ym)) / (h * h);
    let correction = m.inner(x, &g, &m.proj(x, &unflatten(accel.as_slice(), &m.layout()))?)?;
    let huu = m.inner(x, &hu, &u)?;
    let err = rel((second - correction - huu).abs(), huu.abs());
    if err > HESS_FD_TOL {
        fails.push(format!(
            "<Hess u, u> = {huu:.12e} but finite differences give {:.12e} (rel {err:e})",
            second - correction
        ));
    }

    let a = m.inner(x, &hu, &v)?;
    let b = m.inner(x, &u, &hv)?;
    let scale = m.norm(x, &hu)?.max(m.norm(x, &hv)?);
    let err = rel((a - b).abs(), scale);
    if err > HESS_SYMMETRY_TOL {
        fails.push(format!("Hessian not symmetric: {err:e}"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    SteepestDescent,
    ConjugateGradient,
    TrustRegions,
}

impl Solver {
    pub const ALL: [Solver; 3] = [
        Solver::SteepestDescent,
        Solver::ConjugateGradient,
        Solver::TrustRegions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Solver::SteepestDescent => "SD",
            Solver::ConjugateGradient => "CG",
            Solver::TrustRegions => "RTR",
        }
    }

    pub fn run(self, p: &Problem, x0: Option<Point>, opts: &SolverOptions) -> Result<RunResult> {
        match self {
            Solver::SteepestDescent => steepest_descent(p, x0, opts),
            Solver::ConjugateGradient => conjugate_gradient(p, x0, opts),
            Solver::TrustRegions => trust_regions(p, x0, opts),
        }
    }
}

pub const MATRIX_TOL: f64 = 1e-4;
pub const MATRIX_MAX_ITER: usize = 2000;

/// One cell of the solver matrix: the final gradient norm and iteration
/// count, or an error description.
pub fn matrix_cell(m: &ManifoldRef, cost: usize, solver: Solver, seed: u64) -> std::result::Result<(f64, usize), String> {
    let p = flat_problem(m, FlatCost::new(cost, cost_dim(m), seed));
    let opts = SolverOptions {
        max_iter: MATRIX_MAX_ITER,
        tol_grad_norm: MATRIX_TOL,
        seed,
        clock: Clock::Frozen,
        ..SolverOptions::default()
    };
    let r = solver.run(&p, None, &opts).map_err(|e| e.to_string())?;
    if r.grad_norm <= MATRIX_TOL && r.iterations() <= MATRIX_MAX_ITER {
        Ok((r.grad_norm, r.iterations()))
    } else {
        Err(format!(
            "grad_norm {:e} after {} iterations ({})",
            r.grad_norm,
            r.iterations(),
            r.stop_reason.as_str()
        ))
    }
}

/// Whether a problem uses a finite-difference Hessian.
pub fn fd_hessian(p: &Problem) -> bool {
    p.hessian_source() == HessianSource::FiniteDifference
}
