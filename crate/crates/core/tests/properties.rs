mod common;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

use riemopt::manifolds::{self, Point, Tangent};
use riemopt::maxcut::{self, cut_value, laplacian, parse_graph, Graph};
use riemopt::rng_from_seed;

/// Weighted graphs on 2..=8 nodes; weights are multiples of 1/4 so that
/// sums are exact.
fn graphs() -> impl Strategy<Value = Graph> {
    (2usize..=8).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        proptest::collection::vec(proptest::option::of(1u32..=12), pairs.len()).prop_map(move |ws| {
            let edges = pairs
                .iter()
                .zip(ws)
                .filter_map(|(&(i, j), w)| w.map(|w| (i, j, f64::from(w) / 4.0)));
            Graph::new(n, edges).unwrap()
        })
    })
}

fn signs(n: usize) -> impl Strategy<Value = Vec<i8>> {
    proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_lists_round_trip(g in graphs()) {
        let parsed = parse_graph(&common::edge_list(&g)).unwrap();
        prop_assert_eq!(parsed, g);
    }

    #[test]
    fn cut_formulas_agree((g, s) in graphs().prop_flat_map(|g| { let n = g.n(); (Just(g), signs(n)) })) {
        let l = laplacian(&g);
        prop_assert!((cut_value(&l, &s) - g.cut_weight(&s)).abs() <= 1e-9);
    }

    #[test]
    fn laplacians_are_psd_with_constant_kernel(g in graphs()) {
        let l = laplacian(&g);
        prop_assert!(l.column_sum().amax() <= 1e-12);
        prop_assert_eq!(&l, &l.transpose());
        let eig = SymmetricEigen::new(l.clone()).eigenvalues;
        prop_assert!(eig.min() >= -1e-10 * l.norm().max(1.0));
    }

    #[test]
    fn rounded_cuts_never_beat_brute_force(g in graphs(), seed in 0u64..1000) {
        let l = laplacian(&g);
        let r = 2.min(g.n());
        let (y, _) = maxcut::solve_rank_r(&l, r, maxcut::SolverKind::TrustRegions, &Default::default(), &mut rng_from_seed(seed)).unwrap();
        let cut = maxcut::round_cut(&l, &y, 20, &mut rng_from_seed(seed)).unwrap();
        prop_assert!(cut.value <= common::brute_force_max_cut(&g) + 1e-9);
        prop_assert!((cut.value - g.cut_weight(&cut.s)).abs() <= 1e-9);
    }

    #[test]
    fn sphere_retraction_lands_on_the_sphere(
        v in proptest::collection::vec(-10.0f64..10.0, 5),
        t in -100.0f64..100.0,
        seed in 0u64..1000,
    ) {
        let m = manifolds::sphere(5).unwrap();
        let x = m.rand_point(&mut rng_from_seed(seed));
        let u = m.proj(&x, &DMatrix::from_column_slice(5, 1, &v).into()).unwrap();
        let y = m.retract(&x, &u, t).unwrap();
        prop_assert!(m.constraint_violation(&y).unwrap() <= 1e-12);
    }

    #[test]
    fn stiefel_projection_is_tangent(seed in 0u64..1000, scale in 1e-3f64..1e3) {
        let m = manifolds::stiefel(6, 3).unwrap();
        let mut rng = rng_from_seed(seed);
        let x = m.rand_point(&mut rng);
        let z = riemopt::linalg::gaussian(6, 3, &mut rng) * scale;
        let u = m.proj(&x, &z.into()).unwrap();
        let (Point::Matrix(xm), Tangent::Matrix(um)) = (&x, &u) else { unreachable!() };
        let xu = xm.transpose() * um;
        prop_assert!((&xu + xu.transpose()).amax() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn elliptope_points_have_unit_rows(seed in 0u64..1000, t in 0.0f64..5.0) {
        let m = manifolds::elliptope(7, 3).unwrap();
        let mut rng = rng_from_seed(seed);
        let x = m.rand_point(&mut rng);
        let u = m.rand_tangent(&x, &mut rng).unwrap();
        let y = m.retract(&x, &u, t).unwrap();
        let ym = y.matrix().unwrap();
        for i in 0..7 {
            prop_assert!((ym.row(i).norm() - 1.0).abs() <= 1e-12);
        }
    }
}
