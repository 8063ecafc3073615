#![allow(dead_code)]

use opmetric::ball::BallPoint;
use opmetric::chk::ClosedOperator;
use opmetric::linalg::ComplexMatrix;
use opmetric::oracles::Sampler;
use proptest::prelude::*;

pub const MAX_HAT: f64 = 0.95;

/// `(seed, dim H, dim K)` at desk scale.
pub fn instance() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 1usize..=8, 1usize..=3)
}

pub fn operators(seed: u64, m: usize, n: usize, count: usize) -> Vec<ClosedOperator> {
    let mut s = Sampler::new(seed);
    (0..count).map(|_| s.operator(m, n, MAX_HAT).unwrap()).collect()
}

pub fn ball_points(seed: u64, m: usize, n: usize, count: usize) -> Vec<BallPoint> {
    let mut s = Sampler::new(seed);
    (0..count).map(|_| s.ball_point(m, n, MAX_HAT).unwrap()).collect()
}

pub fn gap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    opmetric::linalg::op_norm(&(a - b))
}
