mod common;

use opmetric::ball::{self, BallAutomorphism, BallPoint};
use opmetric::linalg::{self, C64};
use opmetric::oracles::Sampler;
use opmetric::Error;
use proptest::prelude::*;

use common::{ball_points, gap, instance};

fn automorphism(seed: u64, m: usize, n: usize) -> BallAutomorphism {
    Sampler::new(seed).automorphism(m, n, 0.9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn automorphisms_are_isometries((seed, m, n) in instance()) {
        let g = automorphism(seed, m, n);
        let pts = ball_points(seed ^ 1, m, n, 2);
        let (gx, gy) = (g.apply(&pts[0]).unwrap(), g.apply(&pts[1]).unwrap());
        prop_assert!(gx.norm() < 1.0 && gy.norm() < 1.0);
        let before = ball::kobayashi(&pts[0], &pts[1]).unwrap();
        prop_assert!((ball::kobayashi(&gx, &gy).unwrap() - before).abs() <= 1e-9);
        prop_assert!((ball::kobayashi(&pts[0].neg(), &pts[1].neg()).unwrap() - before).abs() <= 1e-12);
    }

    #[test]
    fn kobayashi_triangle((seed, m, n) in instance()) {
        let p = ball_points(seed, m, n, 3);
        let k = |a: &BallPoint, b: &BallPoint| ball::kobayashi(a, b).unwrap();
        prop_assert!(k(&p[0], &p[2]) <= k(&p[0], &p[1]) + k(&p[1], &p[2]) + 1e-9);
        prop_assert!((k(&p[0], &p[1]) - k(&p[1], &p[0])).abs() <= 1e-9);
    }

    #[test]
    fn group_laws((seed, m, n) in instance()) {
        let (f, g, h) = (automorphism(seed, m, n), automorphism(seed ^ 2, m, n), automorphism(seed ^ 3, m, n));
        let x = &ball_points(seed ^ 4, m, n, 1)[0];
        let left = f.compose(&g).unwrap().compose(&h).unwrap().apply(x).unwrap();
        let right = f.compose(&g.compose(&h).unwrap()).unwrap().apply(x).unwrap();
        prop_assert!(gap(left.matrix(), right.matrix()) <= 1e-9);
        let direct = f.apply(&g.apply(&h.apply(x).unwrap()).unwrap()).unwrap();
        prop_assert!(gap(left.matrix(), direct.matrix()) <= 1e-9);

        let inv = g.inverse().unwrap();
        prop_assert!(gap(inv.apply(&g.apply(x).unwrap()).unwrap().matrix(), x.matrix()) <= 1e-9);
        let id = g.compose(&inv).unwrap();
        prop_assert!(id.parameter().norm() <= 1e-9);
        prop_assert!(linalg::unitarity_defect(id.left_unitary()) <= 1e-9);
    }
}

#[test]
fn poincare_examples() {
    let c = |re: f64| C64::new(re, 0.0);
    assert_eq!(ball::poincare(c(0.0), c(0.0)).unwrap(), 0.0);
    assert!((ball::poincare(c(0.0), c(0.5)).unwrap() - 0.5f64.atanh()).abs() < 1e-15);
    assert!(matches!(ball::poincare(c(1.0), c(0.0)), Err(Error::OutsideDisc { .. })));
}

#[test]
fn boundary_points_rejected() {
    let near = linalg::real_diag(&[1.0 - 1e-9]);
    assert!(BallPoint::new(near).is_err());
    assert!(BallPoint::new(linalg::real_diag(&[0.5])).is_ok());
}

#[test]
fn translation_moves_origin_to_parameter() {
    let mut s = Sampler::new(9);
    let a = s.ball_point(3, 2, 0.9).unwrap();
    let g = BallAutomorphism::translation(a.clone()).unwrap();
    let image = g.apply(&BallPoint::zero(3, 2)).unwrap();
    assert!(gap(image.matrix(), a.matrix()) <= 1e-12);
}
