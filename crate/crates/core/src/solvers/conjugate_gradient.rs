use crate::error::Result;
use crate::manifolds::{Point, Tangent};
use crate::problem::Problem;

use super::line_search::{self, initial_step};
use super::{setup, BetaRule, IterationRecord, Monitor, RunResult, SolverOptions, StopReason};

/// Preconditioned nonlinear conjugate gradients.
///
/// Directions and preconditioned gradients are carried between tangent
/// spaces by the manifold's transport. Whenever the new direction fails to
/// be a descent direction it is reset to the preconditioned steepest
/// descent direction.
pub fn conjugate_gradient(
    p: &Problem,
    x0: Option<Point>,
    opts: &SolverOptions,
) -> Result<RunResult> {
    let (mut x, mut store) = setup(p, x0, opts)?;
    let m = p.manifold();
    let mut key = store.new_key();
    let mut fx = p.get_cost(&x, key, &mut store)?;
    let mut g = p.get_gradient(&x, key, &mut store)?;
    let mut gnorm = m.norm(&x, &g)?;
    let mut pg = p.precondition(&x, key, &g, &mut store)?;
    let mut g_pg = m.inner(&x, &g, &pg)?;
    let mut d = pg.scale(-1.0);

    let mut monitor = Monitor::new(opts);
    let mut iter = 0;
    let mut prev_decrease = None;
    let mut stop = monitor.log(IterationRecord::new(0, fx, gnorm));
    while stop.is_none() {
        iter += 1;
        let mut df0 = m.inner(&x, &g, &d)?;
        if df0 >= 0.0 {
            d = pg.scale(-1.0);
            df0 = -g_pg;
        }
        if gnorm == 0.0 || df0 == 0.0 {
            stop = monitor.log(IterationRecord::new(iter, fx, gnorm));
            continue;
        }
        let d_norm = m.norm(&x, &d)?;
        let t0 = initial_step(prev_decrease, df0, d_norm, m.typical_dist());
        let found = line_search::search(
            p,
            &mut store,
            opts.line_search,
            &x,
            key,
            fx,
            &d,
            df0,
            t0,
        )?;
        let Some(acc) = found else {
            stop = Some(StopReason::StepCollapse);
            break;
        };
        prev_decrease = Some(fx - acc.cost);
        let step = acc.t * d_norm;

        let x_new = acc.x;
        let key_new = acc.key;
        let g_new = p.get_gradient(&x_new, key_new, &mut store)?;
        let pg_new = p.precondition(&x_new, key_new, &g_new, &mut store)?;
        let g_pg_new = m.inner(&x_new, &g_new, &pg_new)?;
        let beta = match opts.beta_rule {
            BetaRule::PolakRibierePlus => {
                let pg_moved = m.transport(&x, &x_new, &pg)?;
                let diff = pg_new.sub(&pg_moved);
                pr_plus(m.inner(&x_new, &g_new, &diff)?, g_pg)
            }
            BetaRule::FletcherReeves => finite_or_zero(g_pg_new / g_pg),
        };
        let d_moved = m.transport(&x, &x_new, &d)?;
        d = Tangent::lincomb(-1.0, &pg_new, beta, &d_moved);
        if m.inner(&x_new, &g_new, &d)? >= 0.0 {
            d = pg_new.scale(-1.0);
        }

        store.discard(key);
        x = x_new;
        key = key_new;
        fx = acc.cost;
        g = g_new;
        pg = pg_new;
        g_pg = g_pg_new;
        gnorm = m.norm(&x, &g)?;

        let mut rec = IterationRecord::new(iter, fx, gnorm);
        rec.step_size = step;
        rec.beta = Some(beta);
        stop = monitor.log(rec);
    }
    Ok(monitor.finish(x, stop.expect("loop exits with a reason"), &store))
}

/// Polak-Ribiere coefficient clamped at zero. A non-finite ratio restarts.
pub(crate) fn pr_plus(numerator: f64, g_pg: f64) -> f64 {
    finite_or_zero(numerator / g_pg).max(0.0)
}

fn finite_or_zero(beta: f64) -> f64 {
    if beta.is_finite() {
        beta
    } else {
        0.0
    }
}
