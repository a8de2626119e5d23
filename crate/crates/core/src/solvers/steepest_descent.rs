use crate::error::Result;
use crate::manifolds::Point;
use crate::problem::Problem;

use super::line_search::{self, initial_step};
use super::{setup, IterationRecord, Monitor, RunResult, SolverOptions, StopReason};

/// Riemannian steepest descent with Armijo backtracking.
///
/// Accepted iterates never increase the cost. A zero gradient leaves the
/// iterate in place until the stopping rule fires.
pub fn steepest_descent(p: &Problem, x0: Option<Point>, opts: &SolverOptions) -> Result<RunResult> {
    let (mut x, mut store) = setup(p, x0, opts)?;
    let m = p.manifold();
    let mut key = store.new_key();
    let mut fx = p.get_cost(&x, key, &mut store)?;
    let mut g = p.get_gradient(&x, key, &mut store)?;
    let mut gnorm = m.norm(&x, &g)?;

    let mut monitor = Monitor::new(opts);
    let mut iter = 0;
    let mut prev_decrease = None;
    let mut stop = monitor.log(IterationRecord::new(0, fx, gnorm));
    while stop.is_none() {
        iter += 1;
        let mut rec;
        if gnorm == 0.0 {
            rec = IterationRecord::new(iter, fx, gnorm);
        } else {
            let d = g.scale(-1.0);
            let df0 = -gnorm * gnorm;
            let t0 = initial_step(prev_decrease, df0, gnorm, m.typical_dist());
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
            let step = acc.t * gnorm;
            store.discard(key);
            x = acc.x;
            key = acc.key;
            fx = acc.cost;
            g = p.get_gradient(&x, key, &mut store)?;
            gnorm = m.norm(&x, &g)?;
            rec = IterationRecord::new(iter, fx, gnorm);
            rec.step_size = step;
        }
        stop = monitor.log(rec);
    }
    Ok(monitor.finish(x, stop.expect("loop exits with a reason"), &store))
}
