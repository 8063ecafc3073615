mod common;

use opmetric::ball::{BallAutomorphism, BallPoint};
use opmetric::chk::{self, ClosedOperator};
use opmetric::dynamics::{self, FixedPointOptions, HBiholomorphicMap, IsometryGroup};
use opmetric::linalg::{self, C64};
use opmetric::oracles::Sampler;
use proptest::prelude::*;

use common::{gap, instance, operators};

fn random_map(seed: u64, m: usize, n: usize) -> HBiholomorphicMap {
    HBiholomorphicMap::new(Sampler::new(seed).automorphism(m, n, 0.9).unwrap())
}

fn finite_rotations(seed: u64, m: usize, n: usize) -> IsometryGroup {
    IsometryGroup::new(Sampler::new(seed).finite_rotation_generators(m, n).unwrap()).unwrap()
}

fn scalar_translation(a: f64) -> IsometryGroup {
    let g = BallAutomorphism::translation(BallPoint::scalar(C64::new(a, 0.0)).unwrap()).unwrap();
    IsometryGroup::new(vec![HBiholomorphicMap::new(g)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn maps_preserve_distance_and_intertwine_hat((seed, m, n) in instance()) {
        let g = random_map(seed, m, n);
        let p = operators(seed ^ 3, m, n, 2);
        let (a, b) = (g.apply(&p[0]).unwrap(), g.apply(&p[1]).unwrap());
        let before = chk::distance(&p[0], &p[1]).unwrap();
        prop_assert!((chk::distance(&a, &b).unwrap() - before).abs() <= 1e-9);
        let via_ball = g.automorphism().apply(&chk::hat(&p[0]).unwrap()).unwrap();
        prop_assert!(gap(chk::hat(&a).unwrap().matrix(), via_ball.matrix()) <= 1e-10);
    }

    #[test]
    fn conjugation_covariance((seed, m, n) in instance()) {
        let group = IsometryGroup::new(vec![random_map(seed, m, n), random_map(seed ^ 1, m, n)]).unwrap();
        let h = random_map(seed ^ 2, m, n);
        let p = &operators(seed ^ 3, m, n, 1)[0];
        let before = dynamics::fixed_point_residual(&group, p).unwrap();
        let after = dynamics::fixed_point_residual(&group.conjugate_by(&h).unwrap(), &h.apply(p).unwrap()).unwrap();
        prop_assert!((before - after).abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rotation_orbits_stay_on_a_sphere((seed, m, n) in instance()) {
        let mut s = Sampler::new(seed);
        let gens = (0..2)
            .map(|_| HBiholomorphicMap::new(BallAutomorphism::rotation(s.unitary(m), s.unitary(n)).unwrap()))
            .collect();
        let group = IsometryGroup::new(gens).unwrap();
        let t0 = s.operator(m, n, 0.95).unwrap();
        let bound = 2.0 * chk::distance(&t0, &ClosedOperator::zero(m, n)).unwrap() + 1e-8;
        let orbit = dynamics::orbit(&group, &t0, 3).unwrap();
        prop_assert!(orbit.diameter_by_depth.iter().all(|&d| d <= bound));
        prop_assert!(orbit.diameter_by_depth.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn finite_rotation_group_is_bounded_and_fixes_zero() {
    for seed in 0..4 {
        let (m, n) = (2 + seed as usize, 1 + seed as usize % 3);
        let group = finite_rotations(seed, m, n);
        let t0 = &operators(seed ^ 9, m, n, 1)[0];
        assert!(dynamics::is_orbit_bounded(&group, t0, 5, None).unwrap());
        let fp = dynamics::find_fixed_point(&group, t0, 1e-7, 200, &FixedPointOptions::default()).unwrap();
        assert!(fp.converged && fp.orbit_bounded);
        assert!(fp.residual <= 1e-7);
        assert!(chk::hat(&fp.point).unwrap().norm() <= 1e-6);
    }
}

#[test]
fn conjugated_rotation_group_recovers_planted_point() {
    for seed in 0..4 {
        let (m, n) = (1 + 2 * seed as usize, 1 + seed as usize % 3);
        let pts = operators(seed ^ 21, m, n, 2);
        let (t0, planted) = (&pts[0], &pts[1]);
        let h = HBiholomorphicMap::new(chk::psi_automorphism(planted).unwrap().inverse().unwrap());
        let group = finite_rotations(seed, m, n).conjugate_by(&h).unwrap();
        assert!(dynamics::fixed_point_residual(&group, planted).unwrap() <= 1e-12);
        assert!(dynamics::is_orbit_bounded(&group, t0, 4, None).unwrap());
        let tol = 1e-7;
        let fp = dynamics::find_fixed_point(&group, t0, tol, 200, &FixedPointOptions::default()).unwrap();
        assert!(fp.converged);
        assert!(chk::distance(&fp.point, planted).unwrap() <= 10.0 * tol);
    }
}

#[test]
fn translation_group_grows_linearly_and_is_flagged() {
    let group = scalar_translation(0.5);
    let zero = ClosedOperator::zero(1, 1);
    assert!(!dynamics::is_orbit_bounded(&group, &zero, 8, None).unwrap());
    let orbit = dynamics::orbit(&group, &zero, 8).unwrap();
    for (k, r) in orbit.radius_by_depth.iter().enumerate() {
        assert!((r - k as f64 * 0.5f64.atanh()).abs() <= 1e-9);
    }
    let fp = dynamics::find_fixed_point(&group, &zero, 1e-7, 3, &FixedPointOptions::default()).unwrap();
    assert!(!fp.orbit_bounded);
    assert!(!fp.converged);
    assert!(fp.residual > 0.5);
}

#[test]
fn orbit_deduplicates_finite_groups() {
    // The cyclic group of order 4 acting on a scalar: exactly four points.
    let i = C64::new(0.0, 1.0);
    let g = BallAutomorphism::rotation(linalg::diag(&[i]), linalg::identity(1)).unwrap();
    let group = IsometryGroup::new(vec![HBiholomorphicMap::new(g)]).unwrap();
    let orbit = dynamics::orbit(&group, &ClosedOperator::scalar(C64::new(0.3, 0.1)), 6).unwrap();
    assert_eq!(orbit.points.len(), 4);
    assert!(!orbit.truncated);
    assert!(dynamics::plateaus(&orbit, None));
}

#[test]
fn orbit_size_is_capped() {
    let mut s = Sampler::new(4);
    let gens = (0..3).map(|_| HBiholomorphicMap::new(s.automorphism(2, 1, 0.3).unwrap())).collect();
    let group = IsometryGroup::new(gens).unwrap();
    let orbit = dynamics::orbit_with_limit(&group, &ClosedOperator::zero(2, 1), 4, 40).unwrap();
    assert!(orbit.truncated);
    assert_eq!(orbit.points.len(), 40);
    assert!(orbit.diameter_by_depth.windows(2).all(|w| w[0] <= w[1]));
}
