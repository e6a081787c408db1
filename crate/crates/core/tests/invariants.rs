use proptest::prelude::*;
use widomlab::cheb_complex::{chebyshev_complex, ComplexOptions, Weight};
use widomlab::cheb_real::{build_period_set, RealSolver};
use widomlab::potential::{potential_for, solve_finite_gap, DEFAULT_QUAD_PTS};
use widomlab::sets::{discretize, DiscretizationConfig, SetDescriptor};
use widomlab::zeros::{zeros_of, AnySolution};
use widomlab::C64;

/// Two or three disjoint intervals inside [-3, 3] with gaps of at least 0.05.
fn interval_sets() -> impl Strategy<Value = Vec<(f64, f64)>> {
    (2usize..=3).prop_flat_map(|k| {
        prop::collection::vec(0.0f64..1.0, 2 * k).prop_map(|mut u| {
            u.sort_by(f64::total_cmp);
            let min_gap = 0.05;
            let span = 6.0 - min_gap * (u.len() - 1) as f64;
            let pts: Vec<f64> = u.iter().enumerate().map(|(i, t)| -3.0 + t * span + i as f64 * min_gap).collect();
            pts.chunks(2).map(|c| (c[0], c[1])).collect()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn widom_factor_at_least_two(ivs in interval_sets(), n in 1usize..10) {
        let solver = RealSolver::from_intervals(&ivs).unwrap();
        let sol = solver.solve(n, 1e-12).unwrap();
        prop_assert!(sol.widom_factor.unwrap() >= 2.0 - 1e-8);
        prop_assert_eq!(sol.alternation.len(), n + 1);
    }

    #[test]
    fn period_set_contains_the_set(ivs in interval_sets(), n in 1usize..10) {
        let sol = RealSolver::from_intervals(&ivs).unwrap().solve(n, 1e-12).unwrap();
        let ps = build_period_set(&sol).unwrap();
        let merged = ps.merged_bands();
        for &(a, b) in &ivs {
            prop_assert!(merged.iter().any(|&(c, d)| c <= a + 1e-9 && b <= d + 1e-9));
        }
        let cap = ps.potential().unwrap().capacity();
        prop_assert!((sol.norm - 2.0 * cap.powi(n as i32)).abs() <= 1e-6 * sol.norm);
    }

    #[test]
    fn capacity_is_affine_covariant(ivs in interval_sets(), scale in 0.2f64..5.0, shift in -4.0f64..4.0) {
        let base = solve_finite_gap(&ivs, DEFAULT_QUAD_PTS).unwrap();
        let moved: Vec<(f64, f64)> = ivs.iter().map(|&(a, b)| (scale * a + shift, scale * b + shift)).collect();
        let fg = solve_finite_gap(&moved, DEFAULT_QUAD_PTS).unwrap();
        prop_assert!((fg.capacity() - scale * base.capacity()).abs() <= 1e-10 * fg.capacity());
        let total: f64 = fg.harmonic_measures().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn zeros_are_real_and_in_the_hull(ivs in interval_sets(), n in 1usize..12) {
        let sol = RealSolver::from_intervals(&ivs).unwrap().solve(n, 1e-12).unwrap();
        let zm = zeros_of(AnySolution::Real(&sol)).unwrap();
        prop_assert_eq!(zm.zeros.len(), n);
        let (lo, hi) = (ivs[0].0, ivs[ivs.len() - 1].1);
        for z in &zm.zeros {
            prop_assert!(z.im.abs() <= 1e-9);
            prop_assert!(z.re >= lo - 1e-9 && z.re <= hi + 1e-9);
        }
    }

    #[test]
    fn disk_polynomial_is_a_power(cx in -2.0f64..2.0, cy in -2.0f64..2.0, r in 0.3f64..3.0, n in 1usize..7) {
        let disk = SetDescriptor::Disk { center: [cx, cy], radius: r };
        let grid = discretize(&disk, &DiscretizationConfig::with_points(256)).unwrap();
        let sol = chebyshev_complex(&grid, n, Weight::Unit, &ComplexOptions::default()).unwrap();
        prop_assert!((sol.norm / r.powi(n as i32) - 1.0).abs() <= 1e-8);
        // (z - c)^n expanded
        let c = C64::new(cx, cy);
        let mut binom = 1.0;
        for k in (0..=n).rev() {
            let want = binom * (-c).powi((n - k) as i32);
            prop_assert!((sol.coeffs[k] - want).norm() <= 1e-7 * (1.0 + want.norm()));
            binom = binom * k as f64 / (n - k + 1) as f64;
        }
        let pd = potential_for(&disk).unwrap();
        prop_assert!((pd.capacity - r).abs() <= 1e-12);
    }
}

#[test]
fn complex_solver_matches_remez_on_a_two_interval_grid() {
    // an equal-level system on four points has a spurious solution above the minimax value
    let ivs = [(-0.671349966044874, -0.04982689546642993), (0.27991204011785326, 0.6713499660448738)];
    let solver = RealSolver::from_intervals(&ivs).unwrap();
    let grid = discretize(&SetDescriptor::interval_union(&ivs), &DiscretizationConfig::with_points(1024)).unwrap();
    for n in 1..=10 {
        let real = solver.solve(n, 1e-12).unwrap();
        let cx = chebyshev_complex(&grid, n, Weight::Unit, &ComplexOptions::default()).unwrap();
        assert!((cx.norm - real.norm).abs() <= 1e-9 * real.norm, "n={n}: {} vs {}", cx.norm, real.norm);
        assert!(cx.duality_gap <= 1e-8);
    }
}

#[test]
fn narrow_gap_period_set_has_a_potential() {
    let bands = [(-0.8143014691159454, -0.5093402415951869), (-0.29022056651029493, -0.17504661003828917), (-0.17491438577035506, 0.8143014691159454)];
    let fg = solve_finite_gap(&bands, DEFAULT_QUAD_PTS).unwrap();
    let total: f64 = fg.harmonic_measures().iter().sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn vanishing_weight_on_the_circle_is_certified() {
    let circle = SetDescriptor::Disk { center: [0.0, 0.0], radius: 1.0 };
    let grid = discretize(&circle, &DiscretizationConfig::with_points(1024)).unwrap();
    let sine = |z: C64| z.arg().sin().abs();
    let opts = ComplexOptions { maxiter: 5000, ..ComplexOptions::default() };
    let sol = chebyshev_complex(&grid, 8, Weight::Function(&sine), &opts).unwrap();
    assert!(sol.duality_gap <= 1e-8);
    // z T_8 is admissible for degree 9 and has the same weighted norm
    let sol9 = chebyshev_complex(&grid, 9, Weight::Function(&sine), &opts).unwrap();
    assert!((sol9.norm - sol.norm).abs() <= 1e-8);
}

#[test]
fn high_degree_period_set_matches_its_norm() {
    // a period set at this degree has a band of width ~1e-7 inside the gap
    let ivs = [(-0.4121372718836032, -0.18153894521768588), (0.18978696583243782, 0.4121372718836032)];
    let solver = RealSolver::from_intervals(&ivs).unwrap();
    for n in [33, 35] {
        let sol = solver.solve(n, 1e-12).unwrap();
        let ps = build_period_set(&sol).unwrap();
        let fg = ps.potential().unwrap();
        assert!((sol.norm - 2.0 * fg.capacity().powi(n as i32)).abs() <= 1e-9 * sol.norm);
        let nf = n as f64;
        for m in fg.harmonic_measures() {
            assert!((m * nf - (m * nf).round()).abs() < 1e-8, "{m}");
        }
    }
}
