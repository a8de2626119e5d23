//! Problem descriptions: a manifold, a cost, and whatever derivatives the
//! user can supply.
//!
//! Derivatives are resolved in priority order. The gradient comes from the
//! Riemannian gradient if given, otherwise from the Euclidean gradient via
//! [`Manifold::egrad2rgrad`](crate::manifolds::Manifold::egrad2rgrad). Hessian-vector products come from the
//! Riemannian Hessian, else from the Euclidean Hessian via
//! [`Manifold::ehess2rhess`](crate::manifolds::Manifold::ehess2rhess), else from finite differences of the gradient.
//! A missing gradient is an error; it is never approximated.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::manifolds::{Ambient, ManifoldRef, Point, Tangent};
use crate::Rng;

mod cache;

pub use cache::{CacheStore, Counters, PointKey, PointStore, CACHE_CAPACITY};

/// Relative step used by the finite-difference Hessian, scaled by the
/// manifold's typical distance.
pub const FD_HESSIAN_STEP: f64 = 1e-4;

pub type CostFn = dyn Fn(&Point, &mut PointStore) -> Result<f64> + Send + Sync;
pub type EgradFn = dyn Fn(&Point, &mut PointStore) -> Result<Ambient> + Send + Sync;
pub type RgradFn = dyn Fn(&Point, &mut PointStore) -> Result<Tangent> + Send + Sync;
pub type EhessFn = dyn Fn(&Point, &Tangent, &mut PointStore) -> Result<Ambient> + Send + Sync;
pub type TangentOpFn =
    dyn Fn(&Point, &Tangent, &mut PointStore) -> Result<Tangent> + Send + Sync;

/// Where Hessian-vector products come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HessianSource {
    Riemannian,
    Euclidean,
    FiniteDifference,
    /// No gradient, so no Hessian either.
    Unavailable,
}

/// A cost on a manifold together with optional derivatives and
/// preconditioner. Cheap to clone; callables are shared.
#[derive(Clone)]
pub struct Problem {
    manifold: ManifoldRef,
    cost: Arc<CostFn>,
    egrad: Option<Arc<EgradFn>>,
    rgrad: Option<Arc<RgradFn>>,
    ehess: Option<Arc<EhessFn>>,
    rhess: Option<Arc<TangentOpFn>>,
    precond: Option<Arc<TangentOpFn>>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("manifold", &self.manifold.name())
            .field("egrad", &self.egrad.is_some())
            .field("rgrad", &self.rgrad.is_some())
            .field("ehess", &self.ehess.is_some())
            .field("rhess", &self.rhess.is_some())
            .field("precond", &self.precond.is_some())
            .finish()
    }
}

fn wrap<T>(what: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Callback {
        what,
        source: Box::new(e),
    })
}

impl Problem {
    pub fn new(
        manifold: ManifoldRef,
        cost: impl Fn(&Point, &mut PointStore) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            manifold,
            cost: Arc::new(cost),
            egrad: None,
            rgrad: None,
            ehess: None,
            rhess: None,
            precond: None,
        }
    }

    pub fn with_egrad(
        mut self,
        f: impl Fn(&Point, &mut PointStore) -> Result<Ambient> + Send + Sync + 'static,
    ) -> Self {
        self.egrad = Some(Arc::new(f));
        self
    }

    /// Riemannian gradient; takes precedence over the Euclidean one.
    pub fn with_rgrad(
        mut self,
        f: impl Fn(&Point, &mut PointStore) -> Result<Tangent> + Send + Sync + 'static,
    ) -> Self {
        self.rgrad = Some(Arc::new(f));
        self
    }

    /// Directional derivative of the Euclidean gradient.
    pub fn with_ehess(
        mut self,
        f: impl Fn(&Point, &Tangent, &mut PointStore) -> Result<Ambient> + Send + Sync + 'static,
    ) -> Self {
        self.ehess = Some(Arc::new(f));
        self
    }

    pub fn with_rhess(
        mut self,
        f: impl Fn(&Point, &Tangent, &mut PointStore) -> Result<Tangent> + Send + Sync + 'static,
    ) -> Self {
        self.rhess = Some(Arc::new(f));
        self
    }

    /// Preconditioner: must be symmetric positive definite on each tangent space.
    pub fn with_precond(
        mut self,
        f: impl Fn(&Point, &Tangent, &mut PointStore) -> Result<Tangent> + Send + Sync + 'static,
    ) -> Self {
        self.precond = Some(Arc::new(f));
        self
    }

    pub fn manifold(&self) -> &ManifoldRef {
        &self.manifold
    }

    pub fn has_gradient(&self) -> bool {
        self.rgrad.is_some() || self.egrad.is_some()
    }

    pub fn has_precond(&self) -> bool {
        self.precond.is_some()
    }

    pub fn hessian_source(&self) -> HessianSource {
        if !self.has_gradient() {
            HessianSource::Unavailable
        } else if self.rhess.is_some() {
            HessianSource::Riemannian
        } else if self.ehess.is_some()
            && self.egrad.is_some()
            && self.manifold.supports_ehess2rhess()
        {
            HessianSource::Euclidean
        } else {
            HessianSource::FiniteDifference
        }
    }

    pub fn get_cost(&self, x: &Point, key: PointKey, store: &mut CacheStore) -> Result<f64> {
        let entry = store.entry(key);
        if let Some(c) = entry.cost {
            return Ok(c);
        }
        let c = wrap("cost", (self.cost)(x, &mut entry.user))?;
        entry.cost = Some(c);
        store.counters.cost_evals += 1;
        Ok(c)
    }

    pub fn get_gradient(&self, x: &Point, key: PointKey, store: &mut CacheStore) -> Result<Tangent> {
        if !self.has_gradient() {
            return Err(Error::MissingDerivative("gradient (egrad or rgrad)"));
        }
        let entry = store.entry(key);
        if let Some(g) = &entry.grad {
            return Ok(g.clone());
        }
        let g = if let Some(rgrad) = &self.rgrad {
            wrap("rgrad", rgrad(x, &mut entry.user))?
        } else {
            let egrad = self.cached_egrad(x, entry)?;
            self.manifold.egrad2rgrad(x, egrad)?
        };
        entry.grad = Some(g.clone());
        store.counters.grad_evals += 1;
        Ok(g)
    }

    fn cached_egrad<'a>(&self, x: &Point, entry: &'a mut cache::Entry) -> Result<&'a Ambient> {
        if entry.egrad.is_none() {
            let f = self
                .egrad
                .as_ref()
                .ok_or(Error::MissingDerivative("egrad"))?;
            entry.egrad = Some(wrap("egrad", f(x, &mut entry.user))?);
        }
        Ok(entry.egrad.as_ref().expect("egrad was just stored"))
    }

    /// Hessian-vector product at `x` along the tangent `u`.
    pub fn get_hessian(
        &self,
        x: &Point,
        key: PointKey,
        u: &Tangent,
        store: &mut CacheStore,
    ) -> Result<Tangent> {
        store.counters.hess_evals += 1;
        match self.hessian_source() {
            HessianSource::Unavailable => Err(Error::MissingDerivative("gradient (egrad or rgrad)")),
            HessianSource::Riemannian => {
                let rhess = self.rhess.as_ref().expect("checked by hessian_source");
                let entry = store.entry(key);
                wrap("rhess", rhess(x, u, &mut entry.user))
            }
            HessianSource::Euclidean => {
                let ehess = self.ehess.as_ref().expect("checked by hessian_source");
                let entry = store.entry(key);
                let ehess_u = wrap("ehess", ehess(x, u, &mut entry.user))?;
                let egrad = self.cached_egrad(x, entry)?;
                match self.manifold.ehess2rhess(x, egrad, &ehess_u, u) {
                    Err(Error::Unsupported { .. }) => {
                        self.note_fd_fallback(store);
                        self.approx_hessian_fd(x, key, u, store)
                    }
                    other => other,
                }
            }
            HessianSource::FiniteDifference => {
                if self.ehess.is_some() {
                    self.note_fd_fallback(store);
                }
                self.approx_hessian_fd(x, key, u, store)
            }
        }
    }

    fn note_fd_fallback(&self, store: &mut CacheStore) {
        if !store.fd_fallback_logged {
            store.fd_fallback_logged = true;
            log::info!(
                "{}: exact Hessian conversion unavailable, using finite differences",
                self.manifold.name()
            );
        }
    }

    /// Finite-difference Hessian from gradients at `x` and at a retracted
    /// point, the latter transported back to `T_x` by projection.
    ///
    /// The step is `FD_HESSIAN_STEP * typical_dist / ‖u‖`. The result is
    /// linear in `u` only approximately and not exactly symmetric.
    pub fn approx_hessian_fd(
        &self,
        x: &Point,
        key: PointKey,
        u: &Tangent,
        store: &mut CacheStore,
    ) -> Result<Tangent> {
        let m = &self.manifold;
        let c = m.norm(x, u)?;
        if c == 0.0 {
            return Ok(m.zero_tangent(x));
        }
        let t = FD_HESSIAN_STEP * m.typical_dist() / c;
        let x1 = m.retract(x, u, t)?;
        let k1 = store.new_key();
        let g1 = self.get_gradient(&x1, k1, store);
        store.discard(k1);
        let g1 = m.transport(&x1, x, &g1?)?;
        let g0 = self.get_gradient(x, key, store)?;
        Ok(Tangent::lincomb(1.0 / t, &g1, -1.0 / t, &g0))
    }

    /// Applies the preconditioner, or the identity when none is set.
    pub fn precondition(
        &self,
        x: &Point,
        key: PointKey,
        v: &Tangent,
        store: &mut CacheStore,
    ) -> Result<Tangent> {
        match &self.precond {
            Some(p) => {
                let entry = store.entry(key);
                wrap("precond", p(x, v, &mut entry.user))
            }
            None => Ok(v.clone()),
        }
    }

    /// Preflight report on available derivatives, with a probe at a random
    /// point.
    pub fn check_problem(&self, rng: &mut Rng) -> ProblemReport {
        let mut report = ProblemReport {
            manifold: self.manifold.name(),
            has_egrad: self.egrad.is_some(),
            has_rgrad: self.rgrad.is_some(),
            has_ehess: self.ehess.is_some(),
            has_rhess: self.rhess.is_some(),
            has_precond: self.precond.is_some(),
            hessian: self.hessian_source(),
            probe_failures: Vec::new(),
        };
        let m = &self.manifold;
        let x = m.rand_point(rng);
        let mut store = CacheStore::new();
        let key = store.new_key();
        match self.get_cost(&x, key, &mut store) {
            Ok(c) if !c.is_finite() => report.probe_failures.push(format!("cost is {c}")),
            Ok(_) => {}
            Err(e) => report.probe_failures.push(format!("cost: {e}")),
        }
        if !self.has_gradient() {
            return report;
        }
        match self.get_gradient(&x, key, &mut store) {
            Ok(g) => {
                if let Err(e) = m.inner(&x, &g, &g) {
                    report.probe_failures.push(format!("gradient shape: {e}"));
                }
            }
            Err(e) => report.probe_failures.push(format!("gradient: {e}")),
        }
        match m.rand_tangent(&x, rng) {
            Ok(u) => match self.get_hessian(&x, key, &u, &mut store) {
                Ok(h) => {
                    if let Err(e) = m.inner(&x, &h, &u) {
                        report.probe_failures.push(format!("hessian shape: {e}"));
                    }
                }
                Err(e) => report.probe_failures.push(format!("hessian: {e}")),
            },
            Err(e) => report.probe_failures.push(format!("random tangent: {e}")),
        }
        report
    }
}

#[derive(Clone, Debug)]
pub struct ProblemReport {
    pub manifold: String,
    pub has_egrad: bool,
    pub has_rgrad: bool,
    pub has_ehess: bool,
    pub has_rhess: bool,
    pub has_precond: bool,
    pub hessian: HessianSource,
    pub probe_failures: Vec<String>,
}

impl ProblemReport {
    pub fn gradient_based(&self) -> bool {
        self.has_egrad || self.has_rgrad
    }

    pub fn hessian_based(&self) -> bool {
        matches!(
            self.hessian,
            HessianSource::Riemannian | HessianSource::Euclidean
        )
    }

    pub fn fd_fallback(&self) -> bool {
        self.hessian == HessianSource::FiniteDifference
    }

    /// One human-readable line per capability or failure.
    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![format!("manifold: {}", self.manifold)];
        let present: Vec<&str> = [
            ("egrad", self.has_egrad),
            ("rgrad", self.has_rgrad),
            ("ehess", self.has_ehess),
            ("rhess", self.has_rhess),
            ("precond", self.has_precond),
        ]
        .iter()
        .filter(|(_, p)| *p)
        .map(|(n, _)| *n)
        .collect();
        out.push(format!("derivatives: cost {}", present.join(" ")).trim_end().to_owned());
        if !self.gradient_based() {
            out.push("gradient missing; gradient-based solvers unavailable".into());
        } else {
            out.push("gradient-based solvers enabled".into());
            match self.hessian {
                HessianSource::Riemannian | HessianSource::Euclidean => {
                    out.push("Hessian-based solvers enabled (exact Hessian)".into())
                }
                _ => out.push("Hessian via FD fallback".into()),
            }
        }
        out.extend(self.probe_failures.iter().map(|f| format!("probe failure: {f}")));
        out
    }
}

impl fmt::Display for ProblemReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}
