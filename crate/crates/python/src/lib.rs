//! Python bindings for `riemopt`.
//!
//! Values cross the boundary as plain Python structures: a matrix is a list
//! of rows, a fixed-rank point is a `(U, s, V)` tuple and its tangent an
//! `(M, Up, Vp)` tuple, and product values are lists of component values.
//! Euclidean gradients on fixed-rank manifolds are dense `m x n` matrices.

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;

use riemopt_core::diagnostics::{self, CheckKind, SlopeReport};
use riemopt_core::manifolds::{
    self, Ambient, Layout, LowRankPoint, LowRankTangent, ManifoldRef, Point, Tangent,
};
use riemopt_core::maxcut::{self, Graph, RankStep, SolverKind};
use riemopt_core::problem::{CacheStore, HessianSource, Problem};
use riemopt_core::solvers::{
    conjugate_gradient, steepest_descent, trust_regions, Clock, RunResult, SolverOptions,
};
use riemopt_core::{rng_from_seed, Error};

type Rows = Vec<Vec<f64>>;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Dimension { .. }
        | Error::Argument(_)
        | Error::Unsupported { .. }
        | Error::MissingDerivative(_)
        | Error::Precondition(_)
        | Error::Parse { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn from_py_err(e: PyErr) -> Error {
    Error::Other(e.to_string())
}

fn core<T>(r: riemopt_core::Result<T>) -> PyResult<T> {
    r.map_err(to_py_err)
}

fn rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(obj: &Bound<'_, PyAny>, shape: (usize, usize), what: &str) -> PyResult<DMatrix<f64>> {
    let data: Rows = obj.extract()?;
    let (r, c) = shape;
    if data.len() != r || data.iter().any(|row| row.len() != c) {
        let found = data.first().map_or(0, Vec::len);
        return Err(PyValueError::new_err(format!(
            "{what}: expected a {r}x{c} matrix, found {}x{found}",
            data.len()
        )));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| data[i][j]))
}

fn components<'py>(obj: &Bound<'py, PyAny>, n: usize, what: &str) -> PyResult<Vec<Bound<'py, PyAny>>> {
    let parts: Vec<Bound<'py, PyAny>> = obj.extract()?;
    if parts.len() != n {
        return Err(PyValueError::new_err(format!(
            "{what}: expected {n} components, found {}",
            parts.len()
        )));
    }
    Ok(parts)
}

fn point_from_py(obj: &Bound<'_, PyAny>, layout: &Layout) -> PyResult<Point> {
    Ok(match layout {
        Layout::Matrix { rows, cols } => Point::Matrix(matrix(obj, (*rows, *cols), "point")?),
        Layout::LowRank { m, n, k } => {
            let (u, s, v): (Bound<'_, PyAny>, Vec<f64>, Bound<'_, PyAny>) = obj.extract()?;
            if s.len() != *k {
                return Err(PyValueError::new_err(format!(
                    "point: expected {k} singular values, found {}",
                    s.len()
                )));
            }
            Point::LowRank(LowRankPoint {
                u: matrix(&u, (*m, *k), "U")?,
                s: DVector::from_vec(s),
                v: matrix(&v, (*n, *k), "V")?,
            })
        }
        Layout::Product(ls) => Point::Product(
            components(obj, ls.len(), "point")?
                .iter()
                .zip(ls)
                .map(|(o, l)| point_from_py(o, l))
                .collect::<PyResult<_>>()?,
        ),
    })
}

fn tangent_from_py(obj: &Bound<'_, PyAny>, layout: &Layout) -> PyResult<Tangent> {
    Ok(match layout {
        Layout::Matrix { rows, cols } => Tangent::Matrix(matrix(obj, (*rows, *cols), "tangent")?),
        Layout::LowRank { m, n, k } => {
            let (mm, up, vp): (Bound<'_, PyAny>, Bound<'_, PyAny>, Bound<'_, PyAny>) = obj.extract()?;
            Tangent::LowRank(LowRankTangent {
                m: matrix(&mm, (*k, *k), "M")?,
                up: matrix(&up, (*m, *k), "Up")?,
                vp: matrix(&vp, (*n, *k), "Vp")?,
            })
        }
        Layout::Product(ls) => Tangent::Product(
            components(obj, ls.len(), "tangent")?
                .iter()
                .zip(ls)
                .map(|(o, l)| tangent_from_py(o, l))
                .collect::<PyResult<_>>()?,
        ),
    })
}

fn ambient_from_py(obj: &Bound<'_, PyAny>, layout: &Layout) -> PyResult<Ambient> {
    Ok(match layout {
        Layout::Matrix { rows, cols } => Ambient::Matrix(matrix(obj, (*rows, *cols), "ambient")?),
        Layout::LowRank { m, n, .. } => Ambient::Matrix(matrix(obj, (*m, *n), "ambient")?),
        Layout::Product(ls) => Ambient::Product(
            components(obj, ls.len(), "ambient")?
                .iter()
                .zip(ls)
                .map(|(o, l)| ambient_from_py(o, l))
                .collect::<PyResult<_>>()?,
        ),
    })
}

fn point_to_py(py: Python<'_>, x: &Point) -> PyResult<Py<PyAny>> {
    match x {
        Point::Matrix(m) => rows(m).into_py_any(py),
        Point::LowRank(p) => (rows(&p.u), p.s.iter().copied().collect::<Vec<_>>(), rows(&p.v)).into_py_any(py),
        Point::Product(ps) => {
            let items = ps.iter().map(|p| point_to_py(py, p)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_py_any(py)
        }
    }
}

fn tangent_to_py(py: Python<'_>, u: &Tangent) -> PyResult<Py<PyAny>> {
    match u {
        Tangent::Matrix(m) => rows(m).into_py_any(py),
        Tangent::LowRank(t) => (rows(&t.m), rows(&t.up), rows(&t.vp)).into_py_any(py),
        Tangent::Product(ts) => {
            let items = ts.iter().map(|t| tangent_to_py(py, t)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_py_any(py)
        }
    }
}

#[pyclass(name = "Manifold", module = "riemopt", frozen)]
struct PyManifold {
    inner: ManifoldRef,
}

impl PyManifold {
    fn wrap(r: riemopt_core::Result<ManifoldRef>) -> PyResult<Self> {
        Ok(Self { inner: core(r)? })
    }

    fn point(&self, x: &Bound<'_, PyAny>) -> PyResult<Point> {
        point_from_py(x, &self.inner.layout())
    }

    fn tangent(&self, u: &Bound<'_, PyAny>) -> PyResult<Tangent> {
        tangent_from_py(u, &self.inner.layout())
    }
}

#[pymethods]
impl PyManifold {
    #[getter]
    fn name(&self) -> String {
        self.inner.name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn typical_dist(&self) -> f64 {
        self.inner.typical_dist()
    }

    #[getter]
    fn second_order_retraction(&self) -> bool {
        self.inner.second_order_retraction()
    }

    #[pyo3(signature = (seed = 0))]
    fn rand_point(&self, py: Python<'_>, seed: u64) -> PyResult<Py<PyAny>> {
        point_to_py(py, &self.inner.rand_point(&mut rng_from_seed(seed)))
    }

    #[pyo3(signature = (x, seed = 0))]
    fn rand_tangent(&self, py: Python<'_>, x: &Bound<'_, PyAny>, seed: u64) -> PyResult<Py<PyAny>> {
        let u = core(self.inner.rand_tangent(&self.point(x)?, &mut rng_from_seed(seed)))?;
        tangent_to_py(py, &u)
    }

    fn zero_tangent(&self, py: Python<'_>, x: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
        tangent_to_py(py, &self.inner.zero_tangent(&self.point(x)?))
    }

    /// Orthogonal projection of an ambient vector onto the tangent space at `x`.
    fn proj(&self, py: Python<'_>, x: &Bound<'_, PyAny>, z: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
        let z = ambient_from_py(z, &self.inner.layout())?;
        tangent_to_py(py, &core(self.inner.proj(&self.point(x)?, &z))?)
    }

    #[pyo3(signature = (x, u, t = 1.0))]
    fn retract(&self, py: Python<'_>, x: &Bound<'_, PyAny>, u: &Bound<'_, PyAny>, t: f64) -> PyResult<Py<PyAny>> {
        let y = core(self.inner.retract(&self.point(x)?, &self.tangent(u)?, t))?;
        point_to_py(py, &y)
    }

    fn inner(&self, x: &Bound<'_, PyAny>, u: &Bound<'_, PyAny>, v: &Bound<'_, PyAny>) -> PyResult<f64> {
        core(self.inner.inner(&self.point(x)?, &self.tangent(u)?, &self.tangent(v)?))
    }

    fn norm(&self, x: &Bound<'_, PyAny>, u: &Bound<'_, PyAny>) -> PyResult<f64> {
        core(self.inner.norm(&self.point(x)?, &self.tangent(u)?))
    }

    fn egrad2rgrad(&self, py: Python<'_>, x: &Bound<'_, PyAny>, g: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
        let g = ambient_from_py(g, &self.inner.layout())?;
        tangent_to_py(py, &core(self.inner.egrad2rgrad(&self.point(x)?, &g))?)
    }

    fn transport(
        &self,
        py: Python<'_>,
        x: &Bound<'_, PyAny>,
        y: &Bound<'_, PyAny>,
        u: &Bound<'_, PyAny>,
    ) -> PyResult<Py<PyAny>> {
        let v = core(self.inner.transport(&self.point(x)?, &self.point(y)?, &self.tangent(u)?))?;
        tangent_to_py(py, &v)
    }

    fn constraint_violation(&self, x: &Bound<'_, PyAny>) -> PyResult<f64> {
        core(self.inner.constraint_violation(&self.point(x)?))
    }

    fn __repr__(&self) -> String {
        format!("Manifold({})", self.inner.name())
    }
}

#[pyfunction]
fn sphere(n: usize) -> PyResult<PyManifold> {
    PyManifold::wrap(manifolds::sphere(n))
}

#[pyfunction]
fn oblique(n: usize, m: usize) -> PyResult<PyManifold> {
    PyManifold::wrap(manifolds::oblique(n, m))
}

#[pyfunction]
fn stiefel(n: usize, p: usize) -> PyResult<PyManifold> {
    PyManifold::wrap(manifolds::stiefel(n, p))
}

#[pyfunction]
fn grassmann(n: usize, p: usize) -> PyResult<PyManifold> {
    PyManifold::wrap(manifolds::grassmann(n, p))
}

#[pyfunction]
fn rotations(n: usize) -> PyResult<PyManifold> {
    PyManifold::wrap(manifolds::rotations(n))
}

#[pyfunction]
fn fixed_rank(m: usize, n: usize, k: usize) -> PyResult<PyManifold> {
    PyManifold::wrap(manifolds::fixed_rank(m, n, k))
}

#[pyfunction]
fn elliptope(n: usize, k: usize) -> PyResult<PyManifold> {
    PyManifold::wrap(manifolds::elliptope(n, k))
}

#[pyfunction]
fn spectrahedron(n: usize, k: usize) -> PyResult<PyManifold> {
    PyManifold::wrap(manifolds::spectrahedron(n, k))
}

#[pyfunction]
#[pyo3(signature = (rows, cols = 1))]
fn euclidean(rows: usize, cols: usize) -> PyResult<PyManifold> {
    PyManifold::wrap(manifolds::euclidean(rows, cols))
}

#[pyfunction]
fn product(components: Vec<PyRef<'_, PyManifold>>) -> PyResult<PyManifold> {
    PyManifold::wrap(manifolds::product(components.iter().map(|m| m.inner.clone()).collect()))
}

/// A cost on a manifold given by Python callables. `cost(x)` returns a
/// float, `egrad(x)` the Euclidean gradient and `ehess(x, u)` its
/// directional derivative along `u`.
#[pyclass(name = "Problem", module = "riemopt", frozen)]
struct PyProblem {
    inner: Problem,
}

#[pymethods]
impl PyProblem {
    #[new]
    #[pyo3(signature = (manifold, cost, egrad = None, ehess = None))]
    fn new(
        manifold: PyRef<'_, PyManifold>,
        cost: Py<PyAny>,
        egrad: Option<Py<PyAny>>,
        ehess: Option<Py<PyAny>>,
    ) -> Self {
        let m = manifold.inner.clone();
        let layout = m.layout();
        let mut p = Problem::new(m, move |x, _| {
            Python::attach(|py| cost.call1(py, (point_to_py(py, x)?,))?.extract::<f64>(py)).map_err(from_py_err)
        });
        if let Some(f) = egrad {
            let layout = layout.clone();
            p = p.with_egrad(move |x, _| {
                Python::attach(|py| {
                    let r = f.call1(py, (point_to_py(py, x)?,))?;
                    ambient_from_py(r.bind(py), &layout)
                })
                .map_err(from_py_err)
            });
        }
        if let Some(f) = ehess {
            p = p.with_ehess(move |x, u, _| {
                Python::attach(|py| {
                    let r = f.call1(py, (point_to_py(py, x)?, tangent_to_py(py, u)?))?;
                    ambient_from_py(r.bind(py), &layout)
                })
                .map_err(from_py_err)
            });
        }
        Self { inner: p }
    }

    #[getter]
    fn manifold(&self) -> PyManifold {
        PyManifold {
            inner: self.inner.manifold().clone(),
        }
    }

    /// One of "riemannian", "euclidean", "finite_difference", "unavailable".
    #[getter]
    fn hessian_source(&self) -> &'static str {
        match self.inner.hessian_source() {
            HessianSource::Riemannian => "riemannian",
            HessianSource::Euclidean => "euclidean",
            HessianSource::FiniteDifference => "finite_difference",
            HessianSource::Unavailable => "unavailable",
        }
    }

    fn cost(&self, x: &Bound<'_, PyAny>) -> PyResult<f64> {
        let x = point_from_py(x, &self.inner.manifold().layout())?;
        let mut store = CacheStore::new();
        let key = store.new_key();
        core(self.inner.get_cost(&x, key, &mut store))
    }

    /// Riemannian gradient at `x`.
    fn gradient(&self, py: Python<'_>, x: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
        let x = point_from_py(x, &self.inner.manifold().layout())?;
        let mut store = CacheStore::new();
        let key = store.new_key();
        tangent_to_py(py, &core(self.inner.get_gradient(&x, key, &mut store))?)
    }

    /// Riemannian Hessian at `x` applied to `u`.
    fn hessian(&self, py: Python<'_>, x: &Bound<'_, PyAny>, u: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
        let layout = self.inner.manifold().layout();
        let x = point_from_py(x, &layout)?;
        let u = tangent_from_py(u, &layout)?;
        let mut store = CacheStore::new();
        let key = store.new_key();
        tangent_to_py(py, &core(self.inner.get_hessian(&x, key, &u, &mut store))?)
    }

    /// Taylor-remainder check of the gradient at a random point.
    #[pyo3(signature = (seed = 0))]
    fn check_gradient(&self, py: Python<'_>, seed: u64) -> PyResult<PySlopeReport> {
        let p = &self.inner;
        let r = py.detach(|| diagnostics::check_gradient(p, None, None, &mut rng_from_seed(seed)));
        Ok(PySlopeReport { inner: core(r)? })
    }

    /// Taylor-remainder check of the Hessian at a random point.
    #[pyo3(signature = (seed = 0))]
    fn check_hessian(&self, py: Python<'_>, seed: u64) -> PyResult<PySlopeReport> {
        let p = &self.inner;
        let r = py.detach(|| diagnostics::check_hessian(p, None, None, &mut rng_from_seed(seed)));
        Ok(PySlopeReport { inner: core(r)? })
    }

    fn __repr__(&self) -> String {
        format!("Problem({}, hessian={})", self.inner.manifold().name(), self.hessian_source())
    }
}

#[pyclass(name = "SlopeReport", module = "riemopt", frozen)]
struct PySlopeReport {
    inner: SlopeReport,
}

#[pymethods]
impl PySlopeReport {
    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind {
            CheckKind::Gradient => "gradient",
            CheckKind::Hessian => "hessian",
        }
    }

    #[getter]
    fn passed(&self) -> bool {
        self.inner.passed()
    }

    #[getter]
    fn exact(&self) -> bool {
        self.inner.exact
    }

    #[getter]
    fn fitted_slope(&self) -> f64 {
        self.inner.fitted_slope
    }

    #[getter]
    fn expected(&self) -> (f64, f64) {
        self.inner.expected
    }

    #[getter]
    fn window(&self) -> Option<(f64, f64)> {
        self.inner.window
    }

    /// `(t, remainder)` pairs.
    #[getter]
    fn samples(&self) -> Vec<(f64, f64)> {
        self.inner.samples.clone()
    }

    #[getter]
    fn flags(&self) -> Vec<String> {
        self.inner.flags.clone()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("SlopeReport(kind={}, passed={})", self.kind(), self.passed())
    }
}

fn solver_kind(name: &str) -> PyResult<SolverKind> {
    match name {
        "rtr" | "tr" | "trust_regions" => Ok(SolverKind::TrustRegions),
        "cg" | "conjugate_gradient" => Ok(SolverKind::ConjugateGradient),
        "sd" | "steepest_descent" => Ok(SolverKind::SteepestDescent),
        _ => Err(PyValueError::new_err(format!("unknown solver {name:?}; use tr, cg or sd"))),
    }
}

#[derive(Clone, Copy)]
struct OptionArgs {
    max_iter: usize,
    tol_grad_norm: f64,
    min_iter: usize,
    max_time_seconds: f64,
    seed: u64,
    caching: bool,
    deterministic: bool,
}

impl OptionArgs {
    fn build(self) -> SolverOptions {
        SolverOptions {
            max_iter: self.max_iter,
            tol_grad_norm: self.tol_grad_norm,
            min_iter: self.min_iter.min(self.max_iter),
            max_time_seconds: self.max_time_seconds,
            seed: self.seed,
            caching: self.caching,
            clock: if self.deterministic { Clock::Frozen } else { Clock::Wall },
            ..SolverOptions::default()
        }
    }
}

#[pyclass(name = "RunResult", module = "riemopt", frozen)]
struct PyRunResult {
    x: Py<PyAny>,
    inner: RunResult,
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn x(&self, py: Python<'_>) -> Py<PyAny> {
        self.x.clone_ref(py)
    }

    #[getter]
    fn cost(&self) -> f64 {
        self.inner.cost
    }

    #[getter]
    fn grad_norm(&self) -> f64 {
        self.inner.grad_norm
    }

    #[getter]
    fn stop_reason(&self) -> &'static str {
        self.inner.stop_reason.as_str()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations()
    }

    /// `(iter, cost, grad_norm)` per logged iterate.
    #[getter]
    fn history(&self) -> Vec<(usize, f64, f64)> {
        self.inner.history.iter().map(|r| (r.iter, r.cost, r.grad_norm)).collect()
    }

    #[getter]
    fn counters<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = self.inner.counters;
        let d = PyDict::new(py);
        d.set_item("cost_evals", c.cost_evals)?;
        d.set_item("grad_evals", c.grad_evals)?;
        d.set_item("hess_evals", c.hess_evals)?;
        Ok(d)
    }

    fn history_csv(&self) -> String {
        self.inner.history_csv()
    }

    fn __repr__(&self) -> String {
        format!(
            "RunResult(cost={:e}, grad_norm={:e}, iterations={}, stop_reason={})",
            self.inner.cost,
            self.inner.grad_norm,
            self.inner.iterations(),
            self.stop_reason()
        )
    }
}

/// Minimizes `problem` with steepest descent ("sd"), conjugate gradients
/// ("cg") or Riemannian trust regions ("rtr"). With `deterministic` the
/// recorded times are zero so repeated runs give identical histories.
#[pyfunction]
#[pyo3(signature = (problem, solver = "rtr", x0 = None, max_iter = 1000, tol_grad_norm = 1e-6,
                    min_iter = 3, max_time_seconds = f64::INFINITY, seed = 0, caching = true,
                    deterministic = false))]
#[allow(clippy::too_many_arguments)]
fn minimize(
    py: Python<'_>,
    problem: PyRef<'_, PyProblem>,
    solver: &str,
    x0: Option<&Bound<'_, PyAny>>,
    max_iter: usize,
    tol_grad_norm: f64,
    min_iter: usize,
    max_time_seconds: f64,
    seed: u64,
    caching: bool,
    deterministic: bool,
) -> PyResult<PyRunResult> {
    let kind = solver_kind(solver)?;
    let p = &problem.inner;
    let x0 = x0.map(|x| point_from_py(x, &p.manifold().layout())).transpose()?;
    let opts = OptionArgs {
        max_iter,
        tol_grad_norm,
        min_iter,
        max_time_seconds,
        seed,
        caching,
        deterministic,
    }
    .build();
    let run = py.detach(|| match kind {
        SolverKind::TrustRegions => trust_regions(p, x0, &opts),
        SolverKind::ConjugateGradient => conjugate_gradient(p, x0, &opts),
        SolverKind::SteepestDescent => steepest_descent(p, x0, &opts),
    });
    let run = core(run)?;
    Ok(PyRunResult {
        x: point_to_py(py, &run.x)?,
        inner: run,
    })
}

#[pyclass(name = "Graph", module = "riemopt", frozen)]
struct PyGraph {
    inner: Graph,
}

#[pymethods]
impl PyGraph {
    /// `edges` holds 0-based `(i, j, w)` triples; duplicates are summed.
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        Ok(Self {
            inner: core(Graph::new(n, edges))?,
        })
    }

    /// Parses the 1-based edge-list text format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: core(maxcut::parse_graph(text))?,
        })
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: core(maxcut::load_graph(path))?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// 0-based `(i, j, w)` triples with `i < j`.
    #[getter]
    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.edges().to_vec()
    }

    fn laplacian(&self) -> Rows {
        rows(&maxcut::laplacian(&self.inner))
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    /// Total weight of edges whose endpoints have different signs.
    fn cut_weight(&self, s: Vec<i8>) -> PyResult<f64> {
        signs_check(&s, self.inner.n())?;
        Ok(self.inner.cut_weight(&s))
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, edges={})", self.inner.n(), self.inner.edges().len())
    }
}

fn signs_check(s: &[i8], n: usize) -> PyResult<()> {
    if s.len() != n || s.iter().any(|&v| v != 1 && v != -1) {
        return Err(PyValueError::new_err(format!("expected {n} signs, each +1 or -1")));
    }
    Ok(())
}

#[pyclass(name = "CutResult", module = "riemopt", frozen)]
struct PyCutResult {
    inner: maxcut::CutResult,
}

#[pymethods]
impl PyCutResult {
    #[getter]
    fn signs(&self) -> Vec<i8> {
        self.inner.s.clone()
    }

    #[getter]
    fn cut_value(&self) -> f64 {
        self.inner.cut_value
    }

    /// Certified upper bound on the maximum cut, or `None`.
    #[getter]
    fn upper_bound(&self) -> Option<f64> {
        self.inner.upper_bound
    }

    #[getter]
    fn certified(&self) -> bool {
        self.inner.certified
    }

    #[getter]
    fn rank_used(&self) -> usize {
        self.inner.rank_used
    }

    #[getter]
    fn cost(&self) -> f64 {
        self.inner.cost
    }

    #[getter]
    fn y(&self) -> Rows {
        rows(&self.inner.y)
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations()
    }

    fn history_csv(&self) -> String {
        self.inner.history_csv()
    }

    fn __repr__(&self) -> String {
        format!(
            "CutResult(cut_value={}, upper_bound={:?}, certified={}, rank_used={})",
            self.inner.cut_value, self.inner.upper_bound, self.inner.certified, self.inner.rank_used
        )
    }
}

/// Solves the rank-`rank` relaxation, rounds it to a cut and tries to
/// certify it. With `escalate` the rank grows until certification.
#[pyfunction]
#[pyo3(signature = (graph, rank = 2, solver = "rtr", escalate = true, seed = 0, trials = 100,
                    tol = maxcut::CERT_TOL, max_iter = 1000, deterministic = false))]
#[allow(clippy::too_many_arguments)]
fn max_cut(
    py: Python<'_>,
    graph: PyRef<'_, PyGraph>,
    rank: usize,
    solver: &str,
    escalate: bool,
    seed: u64,
    trials: usize,
    tol: f64,
    max_iter: usize,
    deterministic: bool,
) -> PyResult<PyCutResult> {
    let opts = maxcut::EscalationOptions {
        solver: solver_kind(solver)?,
        solver_options: OptionArgs {
            max_iter,
            tol_grad_norm: SolverOptions::default().tol_grad_norm,
            min_iter: SolverOptions::default().min_iter,
            max_time_seconds: f64::INFINITY,
            seed,
            caching: true,
            deterministic,
        }
        .build(),
        cert_tol: tol,
        trials,
    };
    let l = maxcut::laplacian(&graph.inner);
    let res = py.detach(|| -> riemopt_core::Result<maxcut::CutResult> {
        let mut rng = rng_from_seed(seed);
        if escalate {
            return maxcut::rank_escalation(&l, rank, &opts, &mut rng);
        }
        let (y, run) = maxcut::solve_rank_r(&l, rank, opts.solver, &opts.solver_options, &mut rng)?;
        let cut = maxcut::round_cut(&l, &y, trials, &mut rng)?;
        let cert = maxcut::certify(&l, &y, tol).ok();
        let certified = cert.as_ref().is_some_and(|c| c.certified);
        Ok(maxcut::CutResult {
            s: cut.s,
            cut_value: cut.value,
            upper_bound: cert.as_ref().and_then(|c| c.upper_bound),
            certified,
            rank_used: rank,
            cost: run.cost,
            y,
            steps: vec![RankStep {
                rank,
                lambda_min: cert.map_or(f64::NAN, |c| c.lambda_min),
                certified,
                run,
                escape: None,
            }],
        })
    });
    Ok(PyCutResult { inner: core(res)? })
}

/// Dual certificate of a critical point `y` of the relaxation for Laplacian
/// `l`. Raises `ValueError` when `y` is not critical.
#[pyfunction]
#[pyo3(signature = (l, y, tol = maxcut::CERT_TOL))]
fn certify<'py>(py: Python<'py>, l: &Bound<'py, PyAny>, y: &Bound<'py, PyAny>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let l = square(l)?;
    let y = any_matrix(y)?;
    let c = core(maxcut::certify(&l, &y, tol))?;
    let d = PyDict::new(py);
    d.set_item("certified", c.certified)?;
    d.set_item("lambda_min", c.lambda_min)?;
    d.set_item("upper_bound", c.upper_bound)?;
    d.set_item("relaxation_value", c.relaxation_value)?;
    d.set_item("residual", c.residual)?;
    d.set_item("grad_norm", c.grad_norm)?;
    d.set_item("eigenvector", c.eigenvector.iter().copied().collect::<Vec<_>>())?;
    Ok(d)
}

/// `s' L s / 4`.
#[pyfunction]
fn cut_value(l: &Bound<'_, PyAny>, s: Vec<i8>) -> PyResult<f64> {
    let l = square(l)?;
    signs_check(&s, l.nrows())?;
    Ok(maxcut::cut_value(&l, &s))
}

/// Best of `trials` random-hyperplane roundings of `y`, as `(signs, value)`.
#[pyfunction]
#[pyo3(signature = (l, y, trials = 100, seed = 0))]
fn round_cut(l: &Bound<'_, PyAny>, y: &Bound<'_, PyAny>, trials: usize, seed: u64) -> PyResult<(Vec<i8>, f64)> {
    let cut = core(maxcut::round_cut(&square(l)?, &any_matrix(y)?, trials, &mut rng_from_seed(seed)))?;
    Ok((cut.s, cut.value))
}

fn any_matrix(obj: &Bound<'_, PyAny>) -> PyResult<DMatrix<f64>> {
    let data: Rows = obj.extract()?;
    let r = data.len();
    let c = data.first().map_or(0, Vec::len);
    matrix(obj, (r, c), "matrix")
}

fn square(obj: &Bound<'_, PyAny>) -> PyResult<DMatrix<f64>> {
    let m = any_matrix(obj)?;
    if m.nrows() != m.ncols() {
        return Err(PyValueError::new_err(format!(
            "expected a square matrix, found {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m)
}

#[pymodule]
#[pyo3(name = "riemopt")]
fn riemopt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyManifold>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PySlopeReport>()?;
    m.add_class::<PyRunResult>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyCutResult>()?;
    m.add_function(wrap_pyfunction!(sphere, m)?)?;
    m.add_function(wrap_pyfunction!(oblique, m)?)?;
    m.add_function(wrap_pyfunction!(stiefel, m)?)?;
    m.add_function(wrap_pyfunction!(grassmann, m)?)?;
    m.add_function(wrap_pyfunction!(rotations, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_rank, m)?)?;
    m.add_function(wrap_pyfunction!(elliptope, m)?)?;
    m.add_function(wrap_pyfunction!(spectrahedron, m)?)?;
    m.add_function(wrap_pyfunction!(euclidean, m)?)?;
    m.add_function(wrap_pyfunction!(product, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(max_cut, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(cut_value, m)?)?;
    m.add_function(wrap_pyfunction!(round_cut, m)?)?;
    m.add("CERT_TOL", maxcut::CERT_TOL)?;
    Ok(())
}
