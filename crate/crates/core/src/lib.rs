//! Smooth optimization on Riemannian matrix manifolds.
//!
//! The crate is organized around a separation between manifolds
//! ([`manifolds`]), problem descriptions ([`problem`]) and generic solvers
//! ([`solvers`]). [`diagnostics`] checks user-supplied derivatives against
//! the cost, and [`maxcut`] solves low-rank max-cut relaxations end to end.
//!
//! ```
//! use nalgebra::DMatrix;
//! use riemopt::manifolds::{self, Ambient};
//! use riemopt::problem::Problem;
//! use riemopt::solvers::{trust_regions, SolverOptions};
//!
//! let a = DMatrix::from_diagonal(&nalgebra::dvector![3.0, 2.0, 1.0]);
//! let (a1, a2) = (a.clone(), a.clone());
//! let m = manifolds::sphere(3)?;
//! let p = Problem::new(m, move |x, _| {
//!     let x = x.matrix()?;
//!     Ok(-(x.transpose() * &a * x)[(0, 0)])
//! })
//! .with_egrad(move |x, _| Ok(Ambient::Matrix(&a1 * x.matrix()? * -2.0)))
//! .with_ehess(move |_, u, _| Ok(Ambient::Matrix(&a2 * u.matrix()? * -2.0)));
//! let run = trust_regions(&p, None, &SolverOptions::default())?;
//! assert!((run.cost + 3.0).abs() < 1e-10);
//! # Ok::<(), riemopt::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod manifolds;
pub mod problem;
pub mod solvers;
pub mod diagnostics;
pub mod maxcut;

pub use error::{Error, Result};

/// Seeded generator used by every randomized operation.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Convenience constructor for [`Rng`].
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
