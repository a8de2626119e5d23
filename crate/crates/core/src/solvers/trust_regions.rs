use crate::error::Result;
use crate::manifolds::{Point, Tangent};
use crate::problem::{CacheStore, HessianSource, PointKey, Problem};

use super::{setup, IterationRecord, Monitor, RunResult, SolverOptions, StopReason};

/// Why the inner solver returned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcgStop {
    NegativeCurvature,
    ExceededTrustRegion,
    /// Residual reached the linear (kappa) target.
    ReachedTargetLinear,
    /// Residual reached the superlinear (theta) target.
    ReachedTargetSuperlinear,
    MaxInnerIterations,
    /// The next CG iterate would have increased the model; the previous
    /// one is returned.
    ModelIncreased,
}

impl TcgStop {
    pub fn hit_boundary(self) -> bool {
        matches!(self, TcgStop::NegativeCurvature | TcgStop::ExceededTrustRegion)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TcgParams {
    pub kappa: f64,
    pub theta: f64,
    pub max_inner: usize,
}

#[derive(Clone, Debug)]
pub struct TcgOutcome {
    pub eta: Tangent,
    /// Hessian applied to `eta`, accumulated alongside it.
    pub heta: Tangent,
    pub stop: TcgStop,
    pub inner: usize,
}

impl TcgOutcome {
    /// Value of the quadratic model at `eta`, relative to the model at zero.
    pub fn model_value(&self, p: &Problem, x: &Point, g: &Tangent) -> Result<f64> {
        let m = p.manifold();
        Ok(m.inner(x, g, &self.eta)? + 0.5 * m.inner(x, &self.eta, &self.heta)?)
    }
}

/// Steihaug-Toint truncated CG on the model `<g, eta> + <eta, H eta>/2`
/// with `||eta|| <= delta`, measured in the preconditioner's norm.
///
/// Stops on small residual `||r|| <= ||r0|| min(||r0||^theta, kappa)`,
/// on nonpositive curvature or a step leaving the region (both moving to
/// the boundary), on a model increase, or at the inner iteration cap.
pub fn tcg_subsolver(
    p: &Problem,
    x: &Point,
    key: PointKey,
    g: &Tangent,
    delta: f64,
    params: TcgParams,
    store: &mut CacheStore,
) -> Result<TcgOutcome> {
    let m = p.manifold();
    let mut eta = g.zeros_like();
    let mut heta = g.zeros_like();
    let mut r = g.clone();
    let mut e_pe = 0.0;

    let norm_r0 = m.norm(x, &r)?;
    let mut z = p.precondition(x, key, &r, store)?;
    let mut z_r = m.inner(x, &z, &r)?;
    let mut d_pd = z_r;
    let mut mdelta = z.scale(-1.0);
    let mut e_pd = 0.0;
    let mut model_value = 0.0;

    if norm_r0 == 0.0 {
        return Ok(TcgOutcome {
            eta,
            heta,
            stop: TcgStop::ReachedTargetSuperlinear,
            inner: 0,
        });
    }

    let mut stop = TcgStop::MaxInnerIterations;
    let mut inner = 0;
    for j in 1..=params.max_inner {
        inner = j;
        let hdelta = p.get_hessian(x, key, &mdelta, store)?;
        let d_hd = m.inner(x, &mdelta, &hdelta)?;
        let alpha = z_r / d_hd;
        let e_pe_new = e_pe + 2.0 * alpha * e_pd + alpha * alpha * d_pd;

        if d_hd <= 0.0 || e_pe_new >= delta * delta || !alpha.is_finite() {
            let tau = (-e_pd + (e_pd * e_pd + d_pd * (delta * delta - e_pe)).sqrt()) / d_pd;
            eta.axpy(tau, &mdelta);
            heta.axpy(tau, &hdelta);
            stop = if d_hd <= 0.0 {
                TcgStop::NegativeCurvature
            } else {
                TcgStop::ExceededTrustRegion
            };
            break;
        }
        e_pe = e_pe_new;

        let eta_new = Tangent::lincomb(1.0, &eta, alpha, &mdelta);
        let heta_new = Tangent::lincomb(1.0, &heta, alpha, &hdelta);
        let new_model = m.inner(x, g, &eta_new)? + 0.5 * m.inner(x, &eta_new, &heta_new)?;
        if new_model >= model_value {
            stop = TcgStop::ModelIncreased;
            break;
        }
        eta = eta_new;
        heta = heta_new;
        model_value = new_model;

        r.axpy(alpha, &hdelta);
        let norm_r = m.norm(x, &r)?;
        if norm_r <= norm_r0 * norm_r0.powf(params.theta).min(params.kappa) {
            stop = if params.kappa < norm_r0.powf(params.theta) {
                TcgStop::ReachedTargetLinear
            } else {
                TcgStop::ReachedTargetSuperlinear
            };
            break;
        }

        z = p.precondition(x, key, &r, store)?;
        let z_r_old = z_r;
        z_r = m.inner(x, &z, &r)?;
        let beta = z_r / z_r_old;
        mdelta = Tangent::lincomb(-1.0, &z, beta, &mdelta);
        e_pd = beta * (e_pd + alpha * d_pd);
        d_pd = z_r + beta * beta * d_pd;
    }
    Ok(TcgOutcome {
        eta,
        heta,
        stop,
        inner,
    })
}

/// Riemannian trust-region method with a truncated CG inner solver.
///
/// A step is accepted when the ratio of actual to predicted decrease
/// exceeds `rho_prime`. The radius shrinks by 4 when the ratio is below
/// 1/4 and doubles, up to `delta_bar`, when it is above 3/4 and the inner
/// solver stopped on the boundary. With finite-difference Hessians the
/// inner solver only aims for a linear residual reduction.
pub fn trust_regions(p: &Problem, x0: Option<Point>, opts: &SolverOptions) -> Result<RunResult> {
    let (mut x, mut store) = setup(p, x0, opts)?;
    let m = p.manifold();
    let delta_bar = opts.delta_bar.unwrap_or_else(|| m.typical_dist());
    let mut delta = opts.delta0.unwrap_or(delta_bar / 8.0);
    let params = TcgParams {
        kappa: opts.kappa,
        theta: if p.hessian_source() == HessianSource::FiniteDifference {
            0.0
        } else {
            opts.theta
        },
        max_inner: opts.max_inner.unwrap_or(2 * m.dim()).max(1),
    };

    let mut key = store.new_key();
    let mut fx = p.get_cost(&x, key, &mut store)?;
    let mut g = p.get_gradient(&x, key, &mut store)?;
    let mut gnorm = m.norm(&x, &g)?;

    let mut monitor = Monitor::new(opts);
    let mut iter = 0;
    let mut stop = monitor.log(IterationRecord::new(0, fx, gnorm));
    while stop.is_none() {
        iter += 1;
        let tcg = tcg_subsolver(p, &x, key, &g, delta, params, &mut store)?;
        let model_decrease = -tcg.model_value(p, &x, &g)?;
        let x_prop = m.retract(&x, &tcg.eta, 1.0)?;
        let key_prop = store.new_key();
        let f_prop = p.get_cost(&x_prop, key_prop, &mut store)?;

        let rho_reg = 1e-15 * fx.abs().max(1.0);
        let mut rho = (fx - f_prop + rho_reg) / (model_decrease + rho_reg);
        if !(model_decrease > 0.0) || rho.is_nan() {
            rho = f64::NEG_INFINITY;
        }
        if rho < 0.25 {
            delta /= 4.0;
        } else if rho > 0.75 && tcg.stop.hit_boundary() {
            delta = (2.0 * delta).min(delta_bar);
        }

        let step = m.norm(&x, &tcg.eta)?;
        if rho > opts.rho_prime {
            store.discard(key);
            x = x_prop;
            key = key_prop;
            fx = f_prop;
            g = p.get_gradient(&x, key, &mut store)?;
            gnorm = m.norm(&x, &g)?;
        } else {
            store.discard(key_prop);
        }

        let mut rec = IterationRecord::new(iter, fx, gnorm);
        rec.step_size = if rho > opts.rho_prime { step } else { 0.0 };
        rec.inner = Some(tcg.inner);
        rec.delta = Some(delta);
        rec.rho = Some(rho);
        stop = monitor.log(rec);
        if stop.is_none() && delta < f64::EPSILON * delta_bar {
            stop = Some(StopReason::StepCollapse);
        }
    }
    Ok(monitor.finish(x, stop.expect("loop exits with a reason"), &store))
}
