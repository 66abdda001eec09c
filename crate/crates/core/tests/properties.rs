use num_complex::Complex64;
use proptest::prelude::*;
use rfh_core::distributions::{compute_hf_profile, MomentumDistribution};
use rfh_core::dynamics::{free_step, sv_step, FreePropagator};
use rfh_core::fields::{density_from_fields, SpectralGrid};
use rfh_core::norms::{mixed_norm, spatial_norm, NormSpec, SpaceNorm};
use rfh_core::quadrature::QuadConfig;
use rfh_core::response::{check_cs, check_sc, Potential, PotentialKind};

fn field(values: &[(f64, f64)]) -> Vec<Complex64> {
    values.iter().map(|(a, b)| Complex64::new(*a, *b)).collect()
}

fn grid16() -> SpectralGrid {
    SpectralGrid::new(1, 7.0, 16).unwrap()
}

fn spaces() -> impl Strategy<Value = SpaceNorm> {
    prop_oneof![
        (-1.0..2.0f64).prop_map(|sigma| SpaceNorm::Sobolev { sigma, homogeneous: false }),
        (0.0..2.0f64).prop_map(|sigma| SpaceNorm::Sobolev { sigma, homogeneous: true }),
        prop_oneof![Just(1.0), Just(2.0), Just(3.0), Just(f64::INFINITY)].prop_map(|q| SpaceNorm::Lebesgue { q }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norms_are_subadditive_and_homogeneous(
        a in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 16),
        b in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 16),
        c in -3.0..3.0f64,
        space in spaces(),
    ) {
        let grid = grid16();
        let (u, v) = (field(&a), field(&b));
        let sum: Vec<Complex64> = u.iter().zip(&v).map(|(x, y)| x + y).collect();
        let (nu, nv) = (spatial_norm(&u, &grid, space), spatial_norm(&v, &grid, space));
        prop_assert!(spatial_norm(&sum, &grid, space) <= (nu + nv) * (1.0 + 1e-12) + 1e-14);
        let scaled: Vec<Complex64> = u.iter().map(|x| x * c).collect();
        let ns = spatial_norm(&scaled, &grid, space);
        prop_assert!((ns - c.abs() * nu).abs() <= 1e-12 * (1.0 + nu * c.abs()));
    }

    #[test]
    fn inhomogeneous_sobolev_norms_increase_with_order(
        a in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 16),
        lo in -1.0..1.0f64,
        step in 0.0..1.0f64,
    ) {
        let (grid, u) = (grid16(), field(&a));
        let n = |sigma| spatial_norm(&u, &grid, SpaceNorm::Sobolev { sigma, homogeneous: false });
        prop_assert!(n(lo) <= n(lo + step) * (1.0 + 1e-12));
    }

    #[test]
    fn norm_strings_round_trip(time in prop::option::of(prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY)]), space in spaces()) {
        let spec = NormSpec { time, space };
        let back: NormSpec = spec.to_string().parse().unwrap();
        prop_assert_eq!(back, spec);
    }

    #[test]
    fn time_norm_of_constant_path(v in 0.1..3.0f64, steps in 2usize..20, dt in 0.01..0.5f64) {
        let grid = grid16();
        let path = vec![vec![v; 16]; steps + 1];
        let spec: NormSpec = "L2t:L2".parse().unwrap();
        let want = v * 7f64.sqrt() * (steps as f64 * dt).sqrt();
        prop_assert!((mixed_norm(&path, dt, &grid, spec) - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn free_flow_is_unitary(a in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 16), m in -2.0..2.0f64, dt in -0.1..0.1f64) {
        let grid = grid16();
        let mut u = field(&a);
        let before = grid.l2_norm(&u);
        free_step(&mut u, &grid, m, dt).unwrap();
        prop_assert!((grid.l2_norm(&u) - before).abs() <= 1e-12 * (1.0 + before));
    }

    #[test]
    fn split_step_is_unitary_and_reversible(
        a in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 16),
        v0 in prop::collection::vec(-3.0..3.0f64, 16),
        v1 in prop::collection::vec(-3.0..3.0f64, 16),
    ) {
        let grid = grid16();
        let u0 = field(&a);
        let mut u = u0.clone();
        let fwd = FreePropagator::new(&grid, 0.4, 0.1, false).unwrap();
        let back = FreePropagator::new(&grid, 0.4, -0.1, false).unwrap();
        sv_step(&mut u, &v0, &v1, &fwd).unwrap();
        prop_assert!((grid.l2_norm(&u) - grid.l2_norm(&u0)).abs() <= 1e-12 * (1.0 + grid.l2_norm(&u0)));
        sv_step(&mut u, &v1, &v0, &back).unwrap();
        prop_assert!(u.iter().zip(&u0).all(|(x, y)| (x - y).norm() <= 1e-12));
    }

    #[test]
    fn density_ignores_a_common_phase(
        y in prop::collection::vec(prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 8), 3),
        z in prop::collection::vec(prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 8), 3),
        theta in 0.0..6.3f64,
    ) {
        let ys: Vec<Vec<Complex64>> = y.iter().map(|f| field(f)).collect();
        let zs: Vec<Vec<Complex64>> = z.iter().map(|f| field(f)).collect();
        let ph = Complex64::from_polar(1.0, theta);
        let rot = |fs: &[Vec<Complex64>]| fs.iter().map(|f| f.iter().map(|x| x * ph).collect()).collect::<Vec<Vec<Complex64>>>();
        let a = density_from_fields(&ys, &zs, &[]);
        let b = density_from_fields(&rot(&ys), &rot(&zs), &[]);
        prop_assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() <= 1e-12));
    }

    #[test]
    fn smallness_constants_scale_with_the_potential(weight in 0.01..5.0f64, lambda in -4.0..4.0f64) {
        prop_assume!(lambda.abs() > 1e-3);
        let profile = compute_hf_profile(&MomentumDistribution::boltzmann(1.0, 0.0, 3).unwrap(), 20.0, 400, &QuadConfig::default()).unwrap();
        let w = Potential::point_mass(weight).unwrap();
        let ws = w.scaled(lambda);
        // ŵ(0) = 0 keeps sup|ŵ|/|ξ| finite.
        let v = Potential::new(PotentialKind::CustomFourier { k: vec![0.0, 1.0, 2.0], values: vec![0.0, weight, 0.5 * weight] }).unwrap();
        let vs = v.scaled(lambda);
        for (a, b) in [(check_sc(&profile, 3, &w).value, check_sc(&profile, 3, &ws).value), (check_cs(&profile, 3, &v).value, check_cs(&profile, 3, &vs).value)] {
            prop_assert!((b - lambda.abs() * a).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}
