//! Taylor-remainder checks of user-supplied derivatives.
//!
//! Along a curve `t -> retract(x, u, t)` the remainder of the first-order
//! model decays like `t^2` when the gradient is right, and the remainder of
//! the second-order model like `t^3` when the Hessian is right as well
//! (given a second-order retraction). The checks sample the remainder on a
//! log grid, pick the straightest stretch of the log-log curve and fit its
//! slope.

use std::fmt;
use std::io::Write as _;
use std::path::Path;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::manifolds::{Point, Tangent};
use crate::problem::{CacheStore, HessianSource, Problem};
use crate::Rng;

pub const NUM_SAMPLES: usize = 51;
pub const T_MIN: f64 = 1e-8;
pub const T_MAX: f64 = 1.0;
pub const WINDOW: usize = 13;
pub const GRADIENT_SLOPE: (f64, f64) = (1.8, 2.2);
pub const HESSIAN_SLOPE: (f64, f64) = (2.7, 3.3);
/// Remainders below this, relative to `max(1, |f(x)|)`, count as zero.
pub const EXACT_TOL: f64 = 1e-12;
/// Remainders below this, relative to `max(1, |f(x)|)`, are round-off and
/// excluded from slope windows.
pub const NOISE_FLOOR: f64 = 1e-14;
pub const TANGENCY_TOL: f64 = 1e-8;
pub const SYMMETRY_TOL: f64 = 1e-8;
pub const SYMMETRY_PAIRS: usize = 10;
pub const LINEARITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    Gradient,
    Hessian,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeReport {
    pub kind: CheckKind,
    /// `(t, remainder)` pairs sorted by `t`.
    pub samples: Vec<(f64, f64)>,
    /// NaN when no window could be fitted.
    pub fitted_slope: f64,
    pub window: Option<(f64, f64)>,
    /// Samples at or below this remainder were excluded from windows.
    pub noise_floor: f64,
    pub expected: (f64, f64),
    /// All remainders were below [`EXACT_TOL`].
    pub exact: bool,
    /// Verdict of the slope test alone.
    pub slope_ok: bool,
    /// Normal component of the gradient (or of `Hess u`), relative.
    pub tangency_residual: f64,
    pub symmetry_residual: Option<f64>,
    pub linearity_residual: Option<f64>,
    /// Failed audits.
    pub flags: Vec<String>,
    pub warnings: Vec<String>,
}

impl SlopeReport {
    /// Slope test passed and no audit was flagged.
    pub fn passed(&self) -> bool {
        self.slope_ok && self.flags.is_empty()
    }
}

impl fmt::Display for SlopeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            CheckKind::Gradient => "gradient",
            CheckKind::Hessian => "hessian",
        };
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{what} check: {verdict}")?;
        if self.exact {
            write!(f, " (remainder vanishes, exact branch)")?;
        } else {
            write!(
                f,
                " (slope {:.4}, expected [{}, {}]",
                self.fitted_slope, self.expected.0, self.expected.1
            )?;
            if let Some((lo, hi)) = self.window {
                write!(f, ", window t in [{lo:.3e}, {hi:.3e}]")?;
            }
            write!(f, ")")?;
        }
        write!(f, "\n  tangency residual {:.3e}", self.tangency_residual)?;
        if let Some(s) = self.symmetry_residual {
            write!(f, "\n  symmetry residual {s:.3e}")?;
        }
        if let Some(l) = self.linearity_residual {
            write!(f, "\n  linearity residual {l:.3e}")?;
        }
        for flag in &self.flags {
            write!(f, "\n  flagged: {flag}")?;
        }
        for w in &self.warnings {
            write!(f, "\n  warning: {w}")?;
        }
        Ok(())
    }
}

/// Log-spaced step sizes from [`T_MIN`] to [`T_MAX`].
pub fn sample_steps() -> Vec<f64> {
    let (lo, hi) = (T_MIN.log10(), T_MAX.log10());
    (0..NUM_SAMPLES)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (NUM_SAMPLES - 1) as f64))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowFit {
    pub slope: f64,
    /// Index of the first sample in the window.
    pub start: usize,
    pub residual: f64,
}

/// Least-squares line through `(log10 t, log10 E)`; returns slope and sum
/// of squared residuals.
fn line_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let res = points
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    (slope, res)
}

/// Picks the run of [`WINDOW`] consecutive samples, all above `floor`,
/// whose log-log points lie closest to a line, and returns its slope.
/// Ties go to the smallest `t`.
pub fn fit_slope(samples: &[(f64, f64)], floor: f64) -> Option<WindowFit> {
    if samples.len() < WINDOW {
        return None;
    }
    let logs: Vec<Option<(f64, f64)>> = samples
        .iter()
        .map(|&(t, e)| (t > 0.0 && e > floor && e.is_finite()).then(|| (t.log10(), e.log10())))
        .collect();
    let mut best: Option<WindowFit> = None;
    for start in 0..=samples.len() - WINDOW {
        let Some(points) = logs[start..start + WINDOW]
            .iter()
            .copied()
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        let (slope, residual) = line_fit(&points);
        if best.is_none_or(|b| residual < b.residual) {
            best = Some(WindowFit {
                slope,
                start,
                residual,
            });
        }
    }
    best
}

struct Remainders {
    samples: Vec<(f64, f64)>,
    scale: f64,
}

fn slope_verdict(
    kind: CheckKind,
    rem: Remainders,
    expected: (f64, f64),
    tangency_residual: f64,
) -> SlopeReport {
    let exact = rem.samples.iter().all(|&(_, e)| e <= EXACT_TOL * rem.scale);
    let noise_floor = NOISE_FLOOR * rem.scale;
    let fit = fit_slope(&rem.samples, noise_floor);
    let fitted_slope = fit.map_or(f64::NAN, |f| f.slope);
    let window = fit.map(|f| (rem.samples[f.start].0, rem.samples[f.start + WINDOW - 1].0));
    let slope_ok = exact || (fitted_slope >= expected.0 && fitted_slope <= expected.1);
    let mut flags = Vec::new();
    if tangency_residual > TANGENCY_TOL {
        flags.push(format!(
            "not tangent: residual {tangency_residual:.3e} > {TANGENCY_TOL:e}"
        ));
    }
    SlopeReport {
        kind,
        samples: rem.samples,
        fitted_slope,
        window,
        noise_floor,
        expected,
        exact,
        slope_ok,
        tangency_residual,
        symmetry_residual: None,
        linearity_residual: None,
        flags,
        warnings: Vec::new(),
    }
}

fn resolve_inputs(
    p: &Problem,
    x: Option<&Point>,
    u: Option<&Tangent>,
    rng: &mut Rng,
) -> Result<(Point, Tangent)> {
    let m = p.manifold();
    let x = match x {
        Some(x) => {
            x.check_layout(&m.layout())?;
            x.clone()
        }
        None => m.rand_point(rng),
    };
    let u = match u {
        Some(u) => u.clone(),
        None => m.rand_tangent(&x, rng)?,
    };
    Ok((x, u))
}

/// Relative size of the normal component of `v`.
fn tangency(p: &Problem, x: &Point, v: &Tangent) -> Result<f64> {
    let m = p.manifold();
    let pv = m.proj(x, &m.to_ambient(x, v)?)?;
    Ok(m.norm(x, &v.sub(&pv))? / m.norm(x, v)?.max(1.0))
}

/// Compares the cost along a retraction curve with its first-order model.
/// Random `x` and unit `u` are drawn from `rng` when absent.
pub fn check_gradient(
    p: &Problem,
    x: Option<&Point>,
    u: Option<&Tangent>,
    rng: &mut Rng,
) -> Result<SlopeReport> {
    if !p.has_gradient() {
        return Err(Error::MissingDerivative("gradient (egrad or rgrad)"));
    }
    let (x, u) = resolve_inputs(p, x, u, rng)?;
    let m = p.manifold();
    let mut store = CacheStore::new();
    let key = store.new_key();
    let f0 = p.get_cost(&x, key, &mut store)?;
    let g = p.get_gradient(&x, key, &mut store)?;
    let df = m.inner(&x, &g, &u)?;
    let samples = remainders(p, &x, &u, &mut store, |t| f0 + t * df)?;
    let tangency_residual = tangency(p, &x, &g)?;
    let rem = Remainders {
        samples,
        scale: f0.abs().max(1.0),
    };
    Ok(slope_verdict(CheckKind::Gradient, rem, GRADIENT_SLOPE, tangency_residual))
}

fn remainders(
    p: &Problem,
    x: &Point,
    u: &Tangent,
    store: &mut CacheStore,
    model: impl Fn(f64) -> f64,
) -> Result<Vec<(f64, f64)>> {
    let m = p.manifold();
    let mut out = Vec::with_capacity(NUM_SAMPLES);
    for t in sample_steps() {
        let xt = m.retract(x, u, t)?;
        let k = store.new_key();
        let ft = p.get_cost(&xt, k, store)?;
        store.discard(k);
        out.push((t, (ft - model(t)).abs()));
    }
    Ok(out)
}

/// Compares the cost along a retraction curve with its second-order model
/// and audits the Hessian for symmetry and linearity.
///
/// With a first-order retraction the expected slope drops to 2. With a
/// finite-difference Hessian the audits are skipped and a warning is
/// recorded.
pub fn check_hessian(
    p: &Problem,
    x: Option<&Point>,
    u: Option<&Tangent>,
    rng: &mut Rng,
) -> Result<SlopeReport> {
    let source = p.hessian_source();
    if source == HessianSource::Unavailable {
        return Err(Error::MissingDerivative("gradient (egrad or rgrad)"));
    }
    let (x, u) = resolve_inputs(p, x, u, rng)?;
    let m = p.manifold();
    let mut store = CacheStore::new();
    let key = store.new_key();
    let f0 = p.get_cost(&x, key, &mut store)?;
    let g = p.get_gradient(&x, key, &mut store)?;
    let hu = p.get_hessian(&x, key, &u, &mut store)?;
    let df = m.inner(&x, &g, &u)?;
    let d2f = m.inner(&x, &u, &hu)?;
    let samples = remainders(p, &x, &u, &mut store, |t| f0 + t * df + 0.5 * t * t * d2f)?;
    let tangency_residual = tangency(p, &x, &hu)?;
    let rem = Remainders {
        samples,
        scale: f0.abs().max(1.0),
    };
    // With a first-order retraction the remainder keeps a t^2 term
    // proportional to <grad f, c''(0)>, which may be anywhere from dominant
    // to negligible, so any slope from 2 to 3 is consistent.
    let expected = if m.second_order_retraction() {
        HESSIAN_SLOPE
    } else {
        (GRADIENT_SLOPE.0, HESSIAN_SLOPE.1)
    };
    let mut report = slope_verdict(CheckKind::Hessian, rem, expected, tangency_residual);
    if !m.second_order_retraction() {
        report.warnings.push(
            "retraction is first-order; accepting slopes 2 to 3 and relying on the audits".into(),
        );
    }

    if source == HessianSource::FiniteDifference {
        report
            .warnings
            .push("Hessian is a finite-difference approximation; audits skipped".into());
        return Ok(report);
    }

    let mut sym = 0.0f64;
    for _ in 0..SYMMETRY_PAIRS {
        let a = m.rand_tangent(&x, rng)?;
        let b = m.rand_tangent(&x, rng)?;
        let ha = p.get_hessian(&x, key, &a, &mut store)?;
        let hb = p.get_hessian(&x, key, &b, &mut store)?;
        let hab = m.inner(&x, &ha, &b)?;
        let ahb = m.inner(&x, &a, &hb)?;
        sym = sym.max((hab - ahb).abs() / hab.abs().max(1.0));
    }
    report.symmetry_residual = Some(sym);
    if sym > SYMMETRY_TOL {
        report
            .flags
            .push(format!("not symmetric: residual {sym:.3e} > {SYMMETRY_TOL:e}"));
    }

    let v = m.rand_tangent(&x, rng)?;
    let (a, b): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let combo = Tangent::lincomb(a, &u, b, &v);
    let h_combo = p.get_hessian(&x, key, &combo, &mut store)?;
    let hv = p.get_hessian(&x, key, &v, &mut store)?;
    let expected_combo = Tangent::lincomb(a, &hu, b, &hv);
    let lin = m.norm(&x, &h_combo.sub(&expected_combo))? / m.norm(&x, &expected_combo)?.max(1.0);
    report.linearity_residual = Some(lin);
    if lin > LINEARITY_TOL {
        report
            .flags
            .push(format!("not linear: residual {lin:.3e} > {LINEARITY_TOL:e}"));
    }
    Ok(report)
}

/// Writes `t,remainder` rows with 17 significant digits.
pub fn export_slope_csv(report: &SlopeReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("t,remainder\n");
    for (t, e) in &report.samples {
        out.push_str(&format!("{t:.16e},{e:.16e}\n"));
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Reads back a file written by [`export_slope_csv`].
pub fn read_slope_csv(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "t,remainder")) => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "expected header `t,remainder`".into(),
            })
        }
    }
    lines
        .map(|(i, line)| {
            let bad = |msg: &str| Error::Parse {
                line: i + 1,
                msg: msg.into(),
            };
            let (t, e) = line.split_once(',').ok_or_else(|| bad("expected two fields"))?;
            let t = t.trim().parse().map_err(|_| bad("bad t"))?;
            let e = e.trim().parse().map_err(|_| bad("bad remainder"))?;
            Ok((t, e))
        })
        .collect()
}
