use std::f64::consts::PI;

use hofer_bounds::geometry::{
    epsilon_delta, fiber_extent, in_polytope, moment_map, sample_torus, theta_delta, theta_delta_inverse,
    torus_in_image, torus_projection_extent, DiskPoint,
};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn embedding_round_trips(r in 0.0f64..0.999, a in 0.0f64..(2.0 * PI), delta in 0.51f64..=1.0) {
        let z = Complex64::from_polar(r, a);
        let v = theta_delta(DiskPoint::new(z).unwrap(), delta);
        let n: f64 = v.v().iter().map(|x| x * x).sum();
        prop_assert!((n - 1.0).abs() < 1e-12);
        prop_assert!((theta_delta_inverse(&v, delta).unwrap().z() - z).norm() < 1e-10);
    }

    #[test]
    fn torus_samples_sit_over_one_point(tau in 0.01f64..=0.5, i in 0usize..40, j in 0usize..40) {
        let samples = sample_torus(tau, (40, 40));
        let (v, w) = &samples[i * 40 + j];
        let u = moment_map(v, w).unwrap();
        prop_assert!((u[0] - tau).abs() < 1e-9 && (u[1] - (1.0 - tau)).abs() < 1e-9);
        prop_assert!(in_polytope(u, 1e-12));
    }

    #[test]
    fn window_tori_fit(delta in 0.94f64..=1.0, s in 0.0f64..0.999) {
        let eps = epsilon_delta(delta).unwrap();
        let tau = 0.5 - s * eps;
        prop_assert!(torus_in_image(tau, delta, (60, 60)));
    }

    #[test]
    fn fiber_extent_matches_torus_extent(tau in 0.01f64..=0.5) {
        let extent = fiber_extent([tau, 1.0 - tau]);
        prop_assert!((extent - torus_projection_extent(tau)).abs() < 1e-12);
    }
}
