//! Shared fixtures for the integration and acceptance tests.
#![allow(dead_code)]

pub mod checks;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;

use riemopt::manifolds::{self, Ambient, Layout, ManifoldRef, Point, Tangent};
use riemopt::maxcut::Graph;
use riemopt::problem::Problem;
use riemopt::{rng_from_seed, Rng};

/// The ten factories, each at a small, medium and large size.
pub fn factory_grid() -> Vec<(String, [ManifoldRef; 3])> {
    let m = |r: riemopt::Result<ManifoldRef>| r.unwrap();
    vec![
        ("sphere".into(), [m(manifolds::sphere(3)), m(manifolds::sphere(10)), m(manifolds::sphere(50))]),
        (
            "oblique".into(),
            [m(manifolds::oblique(3, 2)), m(manifolds::oblique(5, 4)), m(manifolds::oblique(10, 6))],
        ),
        (
            "stiefel".into(),
            [m(manifolds::stiefel(3, 1)), m(manifolds::stiefel(5, 2)), m(manifolds::stiefel(10, 4))],
        ),
        (
            "grassmann".into(),
            [m(manifolds::grassmann(3, 1)), m(manifolds::grassmann(5, 2)), m(manifolds::grassmann(10, 3))],
        ),
        (
            "rotations".into(),
            [m(manifolds::rotations(2)), m(manifolds::rotations(3)), m(manifolds::rotations(5))],
        ),
        (
            "fixed_rank".into(),
            [
                m(manifolds::fixed_rank(3, 3, 1)),
                m(manifolds::fixed_rank(5, 4, 2)),
                m(manifolds::fixed_rank(10, 8, 3)),
            ],
        ),
        (
            "elliptope".into(),
            [m(manifolds::elliptope(3, 2)), m(manifolds::elliptope(6, 3)), m(manifolds::elliptope(10, 4))],
        ),
        (
            "spectrahedron".into(),
            [
                m(manifolds::spectrahedron(3, 2)),
                m(manifolds::spectrahedron(6, 3)),
                m(manifolds::spectrahedron(10, 4)),
            ],
        ),
        (
            "euclidean".into(),
            [m(manifolds::euclidean(1, 1)), m(manifolds::euclidean(3, 2)), m(manifolds::euclidean(10, 5))],
        ),
        (
            "product".into(),
            [
                m(manifolds::product(vec![m(manifolds::sphere(3)), m(manifolds::euclidean(2, 1))])),
                m(manifolds::product(vec![m(manifolds::stiefel(5, 2)), m(manifolds::sphere(4))])),
                m(manifolds::product(vec![
                    m(manifolds::oblique(4, 3)),
                    m(manifolds::rotations(3)),
                    m(manifolds::euclidean(2, 2)),
                ])),
            ],
        ),
    ]
}

/// Number of entries in the dense flattening of a layout.
pub fn flat_len(layout: &Layout) -> usize {
    match layout {
        Layout::Matrix { rows, cols } => rows * cols,
        Layout::LowRank { m, n, .. } => m * n,
        Layout::Product(ls) => ls.iter().map(flat_len).sum(),
    }
}

pub fn flatten_point(x: &Point) -> DVector<f64> {
    match x {
        Point::Matrix(m) => DVector::from_column_slice(m.as_slice()),
        Point::LowRank(p) => DVector::from_column_slice(p.to_dense().as_slice()),
        Point::Product(ps) => concat(ps.iter().map(flatten_point)),
    }
}

pub fn flatten_ambient(z: &Ambient, layout: &Layout) -> DVector<f64> {
    match (z, layout) {
        (Ambient::Product(zs), Layout::Product(ls)) => {
            concat(zs.iter().zip(ls).map(|(z, l)| flatten_ambient(z, l)))
        }
        (_, Layout::Matrix { rows, cols }) | (_, Layout::LowRank { m: rows, n: cols, .. }) => {
            DVector::from_column_slice(z.to_dense(*rows, *cols).unwrap().as_slice())
        }
        _ => panic!("ambient does not match layout {layout:?}"),
    }
}

pub fn flatten_tangent(m: &ManifoldRef, x: &Point, u: &Tangent) -> DVector<f64> {
    flatten_ambient(&m.to_ambient(x, u).unwrap(), &m.layout())
}

/// Inverse of [`flatten_ambient`] for dense layouts.
pub fn unflatten(v: &[f64], layout: &Layout) -> Ambient {
    match layout {
        Layout::Matrix { rows, cols } | Layout::LowRank { m: rows, n: cols, .. } => {
            Ambient::Matrix(DMatrix::from_column_slice(*rows, *cols, v))
        }
        Layout::Product(ls) => {
            let mut out = Vec::new();
            let mut start = 0;
            for l in ls {
                let len = flat_len(l);
                out.push(unflatten(&v[start..start + len], l));
                start += len;
            }
            Ambient::Product(out)
        }
    }
}

fn concat(parts: impl Iterator<Item = DVector<f64>>) -> DVector<f64> {
    let v: Vec<f64> = parts.flat_map(|p| p.iter().copied().collect::<Vec<_>>()).collect();
    DVector::from_vec(v)
}

/// A smooth function of a flat vector with hand-derived derivatives.
#[derive(Clone, Debug)]
pub enum FlatCost {
    /// `z'Az/2 + b'z`.
    Quadratic { a: DMatrix<f64>, b: DVector<f64> },
    /// `sum w_i z_i^4 / 4 + |z - b|^2 / 2`.
    Quartic { w: DVector<f64>, b: DVector<f64> },
    /// `sum log cosh(z_i - b_i) + 0.05 |z|^2`.
    LogCosh { b: DVector<f64> },
    /// `b'd + d'Ad/2 + sum w_i d_i^4 / 4` with `d = z - z0`. Vanishes at
    /// `z0`, so finite differences near `z0` lose little to round-off.
    Local {
        z0: DVector<f64>,
        a: DMatrix<f64>,
        w: DVector<f64>,
        b: DVector<f64>,
    },
}

pub const COST_NAMES: [&str; 3] = ["quadratic", "quartic", "logcosh"];

impl FlatCost {
    /// Builds cost number `which` (an index into [`COST_NAMES`]) on `R^n`.
    pub fn new(which: usize, n: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let b = DVector::from_fn(n, |_, _| gaussian(&mut rng));
        match which {
            0 => {
                let g = DMatrix::from_fn(n, n, |_, _| gaussian(&mut rng));
                let s = (&g + g.transpose()) * (0.125 / (n as f64).sqrt());
                FlatCost::Quadratic {
                    a: DMatrix::identity(n, n) + s,
                    b,
                }
            }
            1 => FlatCost::Quartic {
                w: DVector::from_fn(n, |_, _| rng.random_range(0.5..1.5)),
                b,
            },
            2 => FlatCost::LogCosh { b },
            _ => panic!("no cost {which}"),
        }
    }

    /// A [`FlatCost::Local`] around `z0` whose linear term has norm `slope`.
    pub fn local(z0: DVector<f64>, slope: f64, seed: u64) -> Self {
        let n = z0.len();
        let mut rng = rng_from_seed(seed);
        let b = DVector::from_fn(n, |_, _| gaussian(&mut rng));
        let b = &b * (slope / b.norm());
        let g = DMatrix::from_fn(n, n, |_, _| gaussian(&mut rng));
        let a = (&g + g.transpose()) * (0.5 / (n as f64).sqrt());
        let w = DVector::from_fn(n, |_, _| rng.random_range(0.5..1.5));
        FlatCost::Local { z0, a, w, b }
    }

    pub fn is_polynomial(&self) -> bool {
        !matches!(self, FlatCost::LogCosh { .. })
    }

    pub fn value(&self, z: &DVector<f64>) -> f64 {
        match self {
            FlatCost::Quadratic { a, b } => 0.5 * z.dot(&(a * z)) + b.dot(z),
            FlatCost::Quartic { w, b } => {
                z.iter().zip(w.iter()).map(|(zi, wi)| wi * zi.powi(4) / 4.0).sum::<f64>()
                    + 0.5 * (z - b).norm_squared()
            }
            FlatCost::LogCosh { b } => {
                (z - b).iter().map(|d| d.cosh().ln()).sum::<f64>() + 0.05 * z.norm_squared()
            }
            FlatCost::Local { z0, a, w, b } => {
                let d = z - z0;
                b.dot(&d)
                    + 0.5 * d.dot(&(a * &d))
                    + d.iter().zip(w.iter()).map(|(di, wi)| wi * di.powi(4) / 4.0).sum::<f64>()
            }
        }
    }

    pub fn grad(&self, z: &DVector<f64>) -> DVector<f64> {
        match self {
            FlatCost::Quadratic { a, b } => a * z + b,
            FlatCost::Quartic { w, b } => w.zip_map(z, |wi, zi| wi * zi.powi(3)) + (z - b),
            FlatCost::LogCosh { b } => (z - b).map(f64::tanh) + z * 0.1,
            FlatCost::Local { z0, a, w, b } => {
                let d = z - z0;
                b + a * &d + w.zip_map(&d, |wi, di| wi * di.powi(3))
            }
        }
    }

    pub fn hess(&self, z: &DVector<f64>, dz: &DVector<f64>) -> DVector<f64> {
        match self {
            FlatCost::Quadratic { a, .. } => a * dz,
            FlatCost::Quartic { w, .. } => {
                DVector::from_fn(z.len(), |i, _| 3.0 * w[i] * z[i] * z[i] * dz[i] + dz[i])
            }
            FlatCost::LogCosh { b } => {
                DVector::from_fn(z.len(), |i, _| {
                    let c = (z[i] - b[i]).cosh();
                    dz[i] / (c * c) + 0.1 * dz[i]
                })
            }
            FlatCost::Local { z0, a, w, .. } => {
                let d = z - z0;
                a * dz + DVector::from_fn(z.len(), |i, _| 3.0 * w[i] * d[i] * d[i] * dz[i])
            }
        }
    }
}

fn gaussian(rng: &mut Rng) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

/// Whether the manifold is a quotient on which costs must be invariant
/// under `X -> XQ`.
fn is_quotient(m: &ManifoldRef) -> bool {
    m.name().starts_with("Grassmann")
}

/// Length of the vector a flat cost sees on `m`.
pub fn cost_dim(m: &ManifoldRef) -> usize {
    match m.layout() {
        Layout::Matrix { rows, .. } if is_quotient(m) => rows * rows,
        l => flat_len(&l),
    }
}

/// The vector a flat cost sees at `x`.
pub fn cost_coords(m: &ManifoldRef, x: &Point) -> DVector<f64> {
    if is_quotient(m) {
        gram(x.matrix().unwrap())
    } else {
        flatten_point(x)
    }
}

/// Wraps a flat cost as a problem with Euclidean gradient and Hessian.
///
/// On quotient manifolds the cost is applied to `vec(XX')` instead of
/// `vec(X)`, which makes it invariant.
pub fn flat_problem(m: &ManifoldRef, cost: FlatCost) -> Problem {
    let layout = m.layout();
    let quotient = is_quotient(m);
    let cost = Arc::new(cost);
    let (c1, c2, c3) = (cost.clone(), cost.clone(), cost);
    let (l2, l3) = (layout.clone(), layout);
    Problem::new(m.clone(), move |x, _| {
        Ok(if quotient {
            c1.value(&gram(x.matrix()?))
        } else {
            c1.value(&flatten_point(x))
        })
    })
    .with_egrad(move |x, _| {
        if quotient {
            let x = x.matrix()?;
            let g = square(&c2.grad(&gram(x)), x.nrows());
            return Ok(Ambient::Matrix((&g + g.transpose()) * x));
        }
        Ok(unflatten(c2.grad(&flatten_point(x)).as_slice(), &l2))
    })
    .with_ehess(move |x, u, _| {
        if quotient {
            let x = x.matrix()?;
            let u = u.matrix()?;
            let n = x.nrows();
            let g = square(&c3.grad(&gram(x)), n);
            let dp = u * x.transpose() + x * u.transpose();
            let dg = square(&c3.hess(&gram(x), &DVector::from_column_slice(dp.as_slice())), n);
            return Ok(Ambient::Matrix((&dg + dg.transpose()) * x + (&g + g.transpose()) * u));
        }
        let du = flatten_tangent_ambient(x, u, &l3);
        Ok(unflatten(c3.hess(&flatten_point(x), &du).as_slice(), &l3))
    })
}

/// Flattens a tangent vector given only the layout, for use inside
/// callbacks that do not hold the manifold.
fn flatten_tangent_ambient(x: &Point, u: &Tangent, layout: &Layout) -> DVector<f64> {
    match (x, u, layout) {
        (_, Tangent::Matrix(m), _) => DVector::from_column_slice(m.as_slice()),
        (Point::LowRank(p), Tangent::LowRank(t), _) => {
            let d = &p.u * &t.m * p.v.transpose() + &t.up * p.v.transpose() + &p.u * t.vp.transpose();
            DVector::from_column_slice(d.as_slice())
        }
        (Point::Product(xs), Tangent::Product(us), Layout::Product(ls)) => concat(
            xs.iter()
                .zip(us)
                .zip(ls)
                .map(|((x, u), l)| flatten_tangent_ambient(x, u, l)),
        ),
        _ => panic!("tangent does not match layout {layout:?}"),
    }
}

fn gram(x: &DMatrix<f64>) -> DVector<f64> {
    let p = x * x.transpose();
    DVector::from_column_slice(p.as_slice())
}

fn square(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, n, v.as_slice())
}

/// Exhaustive max-cut; node 0 is pinned to one side.
pub fn brute_force_max_cut(g: &Graph) -> f64 {
    let n = g.n();
    let mut best = 0.0f64;
    for mask in 0u64..(1 << (n - 1)) {
        let mut total = 0.0;
        for &(i, j, w) in g.edges() {
            let side = |k: usize| k > 0 && mask >> (k - 1) & 1 == 1;
            if side(i) != side(j) {
                total += w;
            }
        }
        best = best.max(total);
    }
    best
}

/// Whether the graph admits a two-colouring, by breadth-first search.
pub fn is_bipartite(g: &Graph) -> bool {
    let n = g.n();
    let mut adj = vec![Vec::new(); n];
    for &(i, j, _) in g.edges() {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut colour = vec![-1i8; n];
    for s in 0..n {
        if colour[s] >= 0 {
            continue;
        }
        colour[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if colour[w] < 0 {
                    colour[w] = 1 - colour[v];
                    queue.push_back(w);
                } else if colour[w] == colour[v] {
                    return false;
                }
            }
        }
    }
    true
}

pub fn complete(n: usize) -> Graph {
    Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0)))).unwrap()
}

pub fn cycle(n: usize) -> Graph {
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0))).unwrap()
}

pub fn petersen() -> Graph {
    let outer = (0..5).map(|i| (i, (i + 1) % 5, 1.0));
    let spokes = (0..5).map(|i| (i, i + 5, 1.0));
    let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5, 1.0));
    Graph::new(10, outer.chain(spokes).chain(inner)).unwrap()
}

/// Connected Erdos-Renyi graph `G(n, p)`: the first connected draw from
/// the stream seeded with `seed`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = rng_from_seed(seed);
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((i, j, 1.0));
                }
            }
        }
        let g = Graph::new(n, edges).unwrap();
        if g.is_connected() {
            return g;
        }
    }
}

/// The small test corpus, with names.
pub fn corpus() -> Vec<(String, Graph)> {
    let mut out = vec![
        ("K3".to_string(), complete(3)),
        ("C4".to_string(), cycle(4)),
        ("C5".to_string(), cycle(5)),
        ("K5".to_string(), complete(5)),
        ("Petersen".to_string(), petersen()),
    ];
    for seed in [1, 2, 3] {
        out.push((format!("ER(10, 0.4, seed {seed})"), erdos_renyi(10, 0.4, seed)));
    }
    out
}

/// Writes `g` in the edge-list format.
pub fn edge_list(g: &Graph) -> String {
    let mut s = format!("p {} {}\n", g.n(), g.edges().len());
    for &(i, j, w) in g.edges() {
        s.push_str(&format!("{} {} {}\n", i + 1, j + 1, w));
    }
    s
}
