use crate::error::Result;
use crate::manifolds::{Point, Tangent};
use crate::problem::{CacheStore, PointKey, Problem};

use super::LineSearch;

pub(crate) const CONTRACTION: f64 = 0.5;
pub(crate) const SUFFICIENT_DECREASE: f64 = 1e-4;
pub(crate) const MAX_HALVINGS: usize = 25;

pub(crate) struct Accepted {
    pub x: Point,
    pub key: PointKey,
    pub cost: f64,
    /// Multiplier applied to the search direction.
    pub t: f64,
}

/// First trial step along `d`, where `df0 = <g, d> < 0`.
///
/// Doubles the previous decrease over the predicted slope; before any
/// decrease is known, aims for a step of length `typical_dist`, with `t`
/// itself capped at `typical_dist`.
pub(crate) fn initial_step(
    prev_decrease: Option<f64>,
    df0: f64,
    d_norm: f64,
    typical_dist: f64,
) -> f64 {
    match prev_decrease {
        Some(dec) if dec > 0.0 && dec.is_finite() => 2.0 * dec / df0.abs(),
        _ => (typical_dist / d_norm).min(typical_dist),
    }
}

/// Armijo backtracking along `d` from `x`. Returns `None` when every
/// halving fails.
#[allow(clippy::too_many_arguments)]
pub(crate) fn search(
    p: &Problem,
    store: &mut CacheStore,
    kind: LineSearch,
    x: &Point,
    key: PointKey,
    f0: f64,
    d: &Tangent,
    df0: f64,
    fallback_t: f64,
) -> Result<Option<Accepted>> {
    let t0 = match kind {
        LineSearch::Armijo => fallback_t,
        LineSearch::Newton => {
            let hd = p.get_hessian(x, key, d, store)?;
            let curvature = p.manifold().inner(x, d, &hd)?;
            let t = -df0 / curvature;
            if curvature > 0.0 && t.is_finite() {
                t
            } else {
                fallback_t
            }
        }
    };
    let m = p.manifold();
    let mut t = t0;
    for _ in 0..=MAX_HALVINGS {
        let xt = m.retract(x, d, t)?;
        let kt = store.new_key();
        let ft = p.get_cost(&xt, kt, store)?;
        if ft <= f0 + SUFFICIENT_DECREASE * t * df0 {
            return Ok(Some(Accepted {
                x: xt,
                key: kt,
                cost: ft,
                t,
            }));
        }
        store.discard(kt);
        t *= CONTRACTION;
    }
    Ok(None)
}
