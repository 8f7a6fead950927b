//! Structural invariants checked on random inputs.

use htype::anisotropic::{aniso_distance, AnisoPoint, AnisoSpec};
use htype::certificates::herbst_chain;
use htype::geometry::{dilate, group_mul, point_distance, sr_distance, GroupSpec, Point, RadialProfile};
use htype::heatkernel::{kernel, kernel_with, KernelOptions};
use htype::potential::{w_potential, PotentialParams};
use htype::specialfn::{bessel_quartic_j, theta, theta_inv};
use proptest::prelude::*;

fn point(spec: &GroupSpec) -> impl Strategy<Value = Point> {
    (
        prop::collection::vec(-3.0..3.0f64, 2 * spec.n),
        prop::collection::vec(-3.0..3.0f64, spec.m),
    )
        .prop_map(|(x, z)| Point::new(x, z))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_positive(r in 0.0..30.0f64, zeta in 0.0..30.0f64, dims in prop::sample::select(vec![(1usize, 1usize), (2, 1), (2, 3), (1, 2)])) {
        let spec = GroupSpec::for_dims(dims.0, dims.1).unwrap();
        let p = kernel(RadialProfile::new(r, zeta).unwrap(), 1.0, &spec).unwrap();
        prop_assert!(p.mantissa > 0.0);
        prop_assert!(p.ln().is_finite());
    }

    #[test]
    fn kernel_time_scaling(r in 0.0..4.0f64, zeta in 0.0..4.0f64, t in 0.2..5.0f64) {
        let spec = GroupSpec::heisenberg(2).unwrap();
        let prof = RadialProfile::new(r, zeta).unwrap();
        let pt = kernel(prof, t, &spec).unwrap();
        let scaled = RadialProfile::new(r / t, zeta / t).unwrap();
        let p1 = kernel(scaled, 1.0, &spec).unwrap();
        prop_assert!(close(pt.value(), p1.value() * t.powi(-3), 1e-10));
    }

    #[test]
    fn routes_agree(r in 0.0..6.0f64, zeta in 0.01..8.0f64, dims in prop::sample::select(vec![(1usize, 1usize), (1, 2), (2, 3), (2, 4)])) {
        let spec = GroupSpec::for_dims(dims.0, dims.1).unwrap();
        let prof = RadialProfile::new(r, zeta).unwrap();
        let radial = kernel_with(prof, 1.0, &spec, &KernelOptions { route: htype::heatkernel::Route::Radial, ..Default::default() }).unwrap();
        let contour = kernel_with(prof, 1.0, &spec, &KernelOptions { route: htype::heatkernel::Route::Contour, ..Default::default() }).unwrap();
        let tol = 1e-9 + 10.0 * (radial.relative_error() + contour.relative_error());
        prop_assert!((radial.ratio(&contour) - 1.0).abs() <= tol);
    }

    #[test]
    fn w_is_affine_in_c(r in 0.0..20.0f64, zeta in 0.0..20.0f64, c1 in 0.5..8.0f64, c2 in 0.5..8.0f64) {
        let spec = GroupSpec::heisenberg(1).unwrap();
        let prof = RadialProfile::new(r, zeta).unwrap();
        let w = |c: f64| w_potential(prof, PotentialParams::new(c, 1.0).unwrap(), &spec).unwrap().value;
        let mid = w(0.5 * (c1 + c2));
        prop_assert!((w(c1) + w(c2) - 2.0 * mid).abs() <= 1e-8 * (1.0 + mid.abs()));
    }

    #[test]
    fn group_law_is_associative_with_inverses(
        (a, b, c) in (point(&GroupSpec::quaternionic(2).unwrap()), point(&GroupSpec::quaternionic(2).unwrap()), point(&GroupSpec::quaternionic(2).unwrap()))
    ) {
        let spec = GroupSpec::quaternionic(2).unwrap();
        let left = group_mul(&spec, &group_mul(&spec, &a, &b).unwrap(), &c).unwrap();
        let right = group_mul(&spec, &a, &group_mul(&spec, &b, &c).unwrap()).unwrap();
        for (u, v) in left.x.iter().chain(&left.z).zip(right.x.iter().chain(&right.z)) {
            prop_assert!((u - v).abs() < 1e-12);
        }
        let e = group_mul(&spec, &a, &a.inverse()).unwrap();
        prop_assert!(e.x.iter().chain(&e.z).all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn distance_is_symmetric_and_homogeneous(g in point(&GroupSpec::heisenberg(2).unwrap()), lambda in 0.1..10.0f64) {
        let spec = GroupSpec::heisenberg(2).unwrap();
        let d = point_distance(&g);
        prop_assert!(close(d, point_distance(&g.inverse()), 1e-13));
        let dl = point_distance(&dilate(&spec, lambda, &g).unwrap());
        prop_assert!(close(dl, lambda * d, 1e-10));
    }

    #[test]
    fn distance_dominates_horizontal_norm(r in 0.0..20.0f64, zeta in 0.0..50.0f64) {
        let d = sr_distance(RadialProfile::new(r, zeta).unwrap());
        prop_assert!(d.d2_quarter >= r * (1.0 - 1e-14));
        prop_assert!(4.0 * d.d2_quarter >= 2.0 * std::f64::consts::PI * zeta * (1.0 - 1e-12));
    }

    #[test]
    fn theta_inverse_roundtrip(omega in 0.0..1e6f64) {
        let y = theta_inv(omega);
        prop_assert!((0.0..std::f64::consts::PI).contains(&y));
        prop_assert!(close(theta(y).unwrap(), omega, 1e-9) || omega < 1e-300);
    }

    #[test]
    fn bessel_quartic_j_is_nonnegative(n in 1u32..8, kappa in 1e-6..200.0f64) {
        prop_assert!(bessel_quartic_j(n, kappa).unwrap() >= 0.0);
    }

    #[test]
    fn aniso_distance_is_homogeneous(b1 in 0.05..3.0f64, b2 in 0.05..3.0f64, z in -10.0..10.0f64, lambda in 0.2..5.0f64) {
        let spec = AnisoSpec::new(vec![1.0, 2.5], vec![1, 2]).unwrap();
        let pt = AnisoPoint::new(vec![b1, b2], z).unwrap();
        let d = aniso_distance(&pt, &spec).unwrap();
        let dl = aniso_distance(&pt.dilated(lambda), &spec).unwrap();
        prop_assert!(close(dl, lambda * d, 1e-10));
    }

    #[test]
    fn herbst_bound_is_a_probability_and_monotone(eta in 0.0..5.0f64, theta_ in 4.01..10.0f64, t in 0.1..4.0f64, k1 in 0.0..5.0f64, r in 0.0..30.0f64, dr in 0.0..5.0f64) {
        let a = herbst_chain(eta, theta_, t, k1, r).unwrap();
        let b = herbst_chain(eta, theta_, t, k1, r + dr).unwrap();
        prop_assert!((0.0..=1.0).contains(&a.bound));
        prop_assert!(b.bound <= a.bound * (1.0 + 1e-12));
    }
}
