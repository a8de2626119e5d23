//! Generic minimization algorithms on manifolds.
//!
//! Every solver talks to the manifold and the cost only through
//! [`Manifold`](crate::manifolds::Manifold) and [`Problem`]; there are no
//! manifold-specific branches. All of them share the stopping rule in
//! [`shared_stopping`] and produce a [`RunResult`] with a per-iteration
//! history.

use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifolds::Point;
use crate::problem::{CacheStore, Counters, Problem};

mod conjugate_gradient;
mod line_search;
mod steepest_descent;
mod trust_regions;

pub use conjugate_gradient::conjugate_gradient;
pub use steepest_descent::steepest_descent;
pub use trust_regions::{tcg_subsolver, trust_regions, TcgOutcome, TcgParams, TcgStop};

pub type StatsCallback = dyn Fn(&IterationRecord) + Send + Sync;
pub type StopCallback = dyn Fn(&IterationRecord) -> bool + Send + Sync;

/// Why a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    MaxIter,
    MaxTime,
    UserStop,
    /// Line search exhausted its halvings, or the trust radius vanished.
    StepCollapse,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::GradientTolerance => "gradient_tolerance",
            StopReason::MaxIter => "max_iter",
            StopReason::MaxTime => "max_time",
            StopReason::UserStop => "user_stop",
            StopReason::StepCollapse => "step_collapse",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Source of the elapsed-time field in iteration records.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Clock {
    #[default]
    Wall,
    /// Reports zero elapsed time, so that histories are reproducible byte
    /// for byte. `max_time_seconds` never triggers under this clock.
    Frozen,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BetaRule {
    #[default]
    PolakRibierePlus,
    FletcherReeves,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LineSearch {
    /// Backtracking from the adaptive initial step.
    #[default]
    Armijo,
    /// Backtracking from the one-dimensional Newton step along the search
    /// direction. Exact for quadratic costs on flat spaces.
    Newton,
}

#[derive(Clone)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub tol_grad_norm: f64,
    pub max_time_seconds: f64,
    pub min_iter: usize,
    /// 0 silent, 1 final summary, 2 one line per iteration.
    pub verbosity: u8,
    pub stats_callback: Option<Arc<StatsCallback>>,
    pub stop_callback: Option<Arc<StopCallback>>,
    /// Seeds the random initial point when none is given.
    pub seed: u64,
    pub caching: bool,
    pub clock: Clock,
    pub line_search: LineSearch,
    pub beta_rule: BetaRule,
    /// Trust-region radius cap; `None` means the manifold's typical distance.
    pub delta_bar: Option<f64>,
    /// Initial radius; `None` means `delta_bar / 8`.
    pub delta0: Option<f64>,
    pub rho_prime: f64,
    pub kappa: f64,
    pub theta: f64,
    /// Inner iteration cap for truncated CG; `None` means twice the dimension.
    pub max_inner: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            tol_grad_norm: 1e-6,
            max_time_seconds: f64::INFINITY,
            min_iter: 3,
            verbosity: 0,
            stats_callback: None,
            stop_callback: None,
            seed: 0,
            caching: true,
            clock: Clock::Wall,
            line_search: LineSearch::Armijo,
            beta_rule: BetaRule::PolakRibierePlus,
            delta_bar: None,
            delta0: None,
            rho_prime: 0.1,
            kappa: 0.1,
            theta: 1.0,
            max_inner: None,
        }
    }
}

impl fmt::Debug for SolverOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolverOptions")
            .field("max_iter", &self.max_iter)
            .field("tol_grad_norm", &self.tol_grad_norm)
            .field("max_time_seconds", &self.max_time_seconds)
            .field("min_iter", &self.min_iter)
            .field("verbosity", &self.verbosity)
            .field("stats_callback", &self.stats_callback.is_some())
            .field("stop_callback", &self.stop_callback.is_some())
            .field("seed", &self.seed)
            .field("caching", &self.caching)
            .field("clock", &self.clock)
            .field("line_search", &self.line_search)
            .field("beta_rule", &self.beta_rule)
            .field("delta_bar", &self.delta_bar)
            .field("delta0", &self.delta0)
            .field("rho_prime", &self.rho_prime)
            .field("kappa", &self.kappa)
            .field("theta", &self.theta)
            .field("max_inner", &self.max_inner)
            .finish()
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol_grad_norm", self.tol_grad_norm),
            ("max_time_seconds", self.max_time_seconds),
            ("kappa", self.kappa),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Argument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iter == 0 || self.max_iter < self.min_iter {
            return Err(Error::Argument(format!(
                "need 1 <= max_iter and min_iter <= max_iter, got max_iter={} min_iter={}",
                self.max_iter, self.min_iter
            )));
        }
        for (name, v) in [("delta_bar", self.delta_bar), ("delta0", self.delta0)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Argument(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if !(0.0..0.25).contains(&self.rho_prime) {
            return Err(Error::Argument(format!(
                "rho_prime must lie in [0, 1/4), got {}",
                self.rho_prime
            )));
        }
        if !(self.theta >= 0.0) {
            return Err(Error::Argument(format!("theta must be nonnegative, got {}", self.theta)));
        }
        Ok(())
    }
}

/// One logged iteration. Iteration 0 describes the initial point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub cost: f64,
    pub grad_norm: f64,
    pub elapsed_seconds: f64,
    /// Length of the step that produced this iterate, 0 for iteration 0.
    pub step_size: f64,
    pub inner: Option<usize>,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    /// CG only.
    pub beta: Option<f64>,
}

impl IterationRecord {
    pub(crate) fn new(iter: usize, cost: f64, grad_norm: f64) -> Self {
        Self {
            iter,
            cost,
            grad_norm,
            elapsed_seconds: 0.0,
            step_size: 0.0,
            inner: None,
            delta: None,
            rho: None,
            beta: None,
        }
    }
}

pub const HISTORY_CSV_HEADER: &str = "iter,cost,gradnorm,time,stepsize,inner,Delta,rho";

#[derive(Clone, Debug)]
pub struct RunResult {
    pub x: Point,
    pub cost: f64,
    pub grad_norm: f64,
    pub stop_reason: StopReason,
    pub history: Vec<IterationRecord>,
    pub counters: Counters,
}

impl RunResult {
    /// Number of iterations performed, not counting the initial point.
    pub fn iterations(&self) -> usize {
        self.history.last().map_or(0, |r| r.iter)
    }

    /// History as CSV. Missing solver-specific fields are left empty.
    pub fn history_csv(&self) -> String {
        fn opt<T: fmt::Display>(v: Option<T>) -> String {
            v.map(|v| v.to_string()).unwrap_or_default()
        }
        let mut out = String::from(HISTORY_CSV_HEADER);
        out.push('\n');
        for r in &self.history {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.iter,
                r.cost,
                r.grad_norm,
                r.elapsed_seconds,
                r.step_size,
                opt(r.inner),
                opt(r.delta),
                opt(r.rho)
            ));
        }
        out
    }

    pub fn write_history_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(self.history_csv().as_bytes())
            .map_err(|e| Error::io(path, e))
    }
}

/// Stopping test applied after each iteration. Criteria are checked in
/// order: gradient tolerance (only once `min_iter` is reached), iteration
/// cap, time limit, user callback.
pub fn shared_stopping(record: &IterationRecord, opts: &SolverOptions) -> Option<StopReason> {
    if record.grad_norm <= opts.tol_grad_norm && record.iter >= opts.min_iter {
        Some(StopReason::GradientTolerance)
    } else if record.iter >= opts.max_iter {
        Some(StopReason::MaxIter)
    } else if record.elapsed_seconds >= opts.max_time_seconds {
        Some(StopReason::MaxTime)
    } else if opts.stop_callback.as_ref().is_some_and(|cb| cb(record)) {
        Some(StopReason::UserStop)
    } else {
        None
    }
}

/// Bookkeeping common to all solvers: timing, history, callbacks, printing.
pub(crate) struct Monitor<'a> {
    opts: &'a SolverOptions,
    start: Instant,
    history: Vec<IterationRecord>,
}

impl<'a> Monitor<'a> {
    pub(crate) fn new(opts: &'a SolverOptions) -> Self {
        Self {
            opts,
            start: Instant::now(),
            history: Vec::new(),
        }
    }

    fn elapsed(&self) -> f64 {
        match self.opts.clock {
            Clock::Wall => self.start.elapsed().as_secs_f64(),
            Clock::Frozen => 0.0,
        }
    }

    /// Stamps, stores and reports `rec`, then applies the stopping rule.
    pub(crate) fn log(&mut self, mut rec: IterationRecord) -> Option<StopReason> {
        rec.elapsed_seconds = self.elapsed();
        if self.opts.verbosity >= 2 {
            let mut line = format!(
                "iter {:5}  cost {:+.10e}  gradnorm {:.4e}",
                rec.iter, rec.cost, rec.grad_norm
            );
            if rec.iter > 0 {
                line.push_str(&format!("  step {:.4e}", rec.step_size));
            }
            if let Some(inner) = rec.inner {
                line.push_str(&format!("  inner {inner}"));
            }
            if let Some(d) = rec.delta {
                line.push_str(&format!("  Delta {d:.4e}"));
            }
            if let Some(r) = rec.rho {
                line.push_str(&format!("  rho {r:+.4e}"));
            }
            println!("{line}");
        }
        if let Some(cb) = &self.opts.stats_callback {
            cb(&rec);
        }
        let stop = shared_stopping(&rec, self.opts);
        self.history.push(rec);
        stop
    }

    pub(crate) fn finish(
        self,
        x: Point,
        reason: StopReason,
        store: &CacheStore,
    ) -> RunResult {
        let last = self.history.last().expect("initial point is always logged");
        let result = RunResult {
            x,
            cost: last.cost,
            grad_norm: last.grad_norm,
            stop_reason: reason,
            counters: store.counters(),
            history: self.history,
        };
        if self.opts.verbosity >= 1 {
            println!(
                "stopped after {} iterations ({}): cost {:+.10e}, gradnorm {:.4e}",
                result.iterations(),
                reason,
                result.cost,
                result.grad_norm
            );
        }
        result
    }
}

/// Validates inputs and produces the starting point and a fresh store.
pub(crate) fn setup(
    p: &Problem,
    x0: Option<Point>,
    opts: &SolverOptions,
) -> Result<(Point, CacheStore)> {
    opts.validate()?;
    if !p.has_gradient() {
        return Err(Error::MissingDerivative("gradient (egrad or rgrad)"));
    }
    let m = p.manifold();
    let x = match x0 {
        Some(x) => {
            x.check_layout(&m.layout())?;
            x
        }
        None => m.rand_point(&mut crate::rng_from_seed(opts.seed)),
    };
    Ok((x, CacheStore::with_caching(opts.caching)))
}
