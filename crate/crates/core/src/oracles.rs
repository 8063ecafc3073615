//! Independent ground truth and reproducible random instances.
//!
//! The distance oracles here use only scalar arithmetic on the unit disc and
//! never call into [`crate::chk`] or [`crate::ball`]; they exist to check
//! those modules.
//!
//! Random instances come from `Xoshiro256PlusPlus` seeded through SplitMix64
//! (`seed_from_u64`). Uniform doubles are `(next_u64 >> 11) * 2^-53`, and
//! complex Gaussians use one Box–Muller pair per entry:
//! `r = sqrt(-2 ln(1 - u1))`, `z = r (cos 2πu2 + i sin 2πu2)`, with entries
//! filled in row-major order.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::ball::{BallAutomorphism, BallPoint};
use crate::chk::{self, ClosedOperator};
use crate::dynamics::HBiholomorphicMap;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64};

/// Largest hat-norm the factory will produce.
pub const MAX_SAMPLE_HAT_NORM: f64 = 0.95;

fn scalar_hat(t: C64) -> C64 {
    t.conj() / (1.0 + t.norm_sqr()).sqrt()
}

fn disc_distance(a: C64, b: C64) -> f64 {
    let num = (a - b).norm();
    let den = (C64::new(1.0, 0.0) - a.conj() * b).norm();
    (num / den).atanh()
}

/// `d([[t]], [[s]])` through the scalar Poincaré metric of the transforms.
pub fn scalar_distance(t: C64, s: C64) -> f64 {
    if t == s {
        return 0.0;
    }
    disc_distance(scalar_hat(t), scalar_hat(s))
}

/// `d(diag(t), diag(s))`: the largest entrywise scalar distance.
pub fn diagonal_distance(t_diag: &[C64], s_diag: &[C64]) -> Result<f64> {
    if t_diag.len() != s_diag.len() {
        return Err(Error::LengthMismatch { left: t_diag.len(), right: s_diag.len() });
    }
    Ok(t_diag
        .iter()
        .zip(s_diag)
        .map(|(&t, &s)| scalar_distance(t, s))
        .fold(0.0, f64::max))
}

/// Seeded factory for test corpora.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: Xoshiro256PlusPlus,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: Xoshiro256PlusPlus::seed_from_u64(seed) }
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, len: usize) -> usize {
        ((self.uniform() * len as f64) as usize).min(len - 1)
    }

    /// Standard complex Gaussian with `E|z|^2 = 2`.
    pub fn complex_gaussian(&mut self) -> C64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        C64::new(r * theta.cos(), r * theta.sin())
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        let entries: Vec<C64> = (0..rows * cols).map(|_| self.complex_gaussian()).collect();
        ComplexMatrix::from_row_slice(rows, cols, &entries)
    }

    /// Ball point of shape `m x n` with norm uniform in `(0, max_norm]`.
    pub fn ball_point(&mut self, m: usize, n: usize, max_norm: f64) -> Result<BallPoint> {
        if !(max_norm > 0.0 && max_norm <= MAX_SAMPLE_HAT_NORM) {
            return Err(Error::InvalidArgument(format!(
                "maximum hat-norm must lie in (0, {MAX_SAMPLE_HAT_NORM}], got {max_norm}"
            )));
        }
        let w = self.gaussian_matrix(m, n);
        let radius = max_norm * (1.0 - self.uniform());
        let norm = linalg::op_norm(&w);
        BallPoint::new(w.scale(radius / norm))
    }

    /// Operator `H -> K` (an `n x m` matrix, `m = dim H`, `n = dim K`) whose
    /// bounded transform has norm uniform in `(0, max_hat_norm]`.
    pub fn operator(&mut self, m: usize, n: usize, max_hat_norm: f64) -> Result<ClosedOperator> {
        chk::unhat(&self.ball_point(m, n, max_hat_norm)?)
    }

    /// Unitary `k x k` matrix: the unitary polar factor of a Gaussian matrix.
    pub fn unitary(&mut self, k: usize) -> ComplexMatrix {
        linalg::nearest_unitary(&self.gaussian_matrix(k, k))
    }

    /// Random Hermitian positive semidefinite `k x k` matrix.
    pub fn psd(&mut self, k: usize) -> ComplexMatrix {
        let g = self.gaussian_matrix(k, k);
        linalg::hermitian_part(&(&g * g.adjoint()))
    }

    /// A point of the unit disc with modulus at most `max_modulus`.
    pub fn disc_point(&mut self, max_modulus: f64) -> C64 {
        let r = max_modulus * self.uniform().sqrt();
        C64::from_polar(r, 2.0 * std::f64::consts::PI * self.uniform())
    }

    /// Random ball automorphism `Z -> eta_A(U Z V)` with `|A| <= max_norm`.
    pub fn automorphism(&mut self, m: usize, n: usize, max_norm: f64) -> Result<BallAutomorphism> {
        let a = self.ball_point(m, n, max_norm)?;
        let (u, v) = (self.unitary(m), self.unitary(n));
        BallAutomorphism::new(a, u, v)
    }

    /// Two commuting generators of a rotation group of order at most 8 whose
    /// only fixed point is the origin: the basis reversal `Z -> J Z` and
    /// `Z -> w Z E`, where `w = exp(2 pi i / q)` for `q` in `{3, 4}` and `E` is
    /// diagonal with entries `w^k`, `0 <= k <= q - 2`.
    pub fn finite_rotation_generators(&mut self, m: usize, n: usize) -> Result<Vec<HBiholomorphicMap>> {
        let q = 3 + self.index(2);
        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / q as f64);
        let e: Vec<C64> = (0..n).map(|_| w.powu(self.index(q - 1) as u32)).collect();
        let reversal = ComplexMatrix::from_fn(m, m, |i, j| C64::new(if i + j == m - 1 { 1.0 } else { 0.0 }, 0.0));
        Ok(vec![
            HBiholomorphicMap::new(BallAutomorphism::rotation(reversal, linalg::identity(n))?),
            HBiholomorphicMap::new(BallAutomorphism::rotation(linalg::identity(m) * w, linalg::diag(&e))?),
        ])
    }

    /// A complex scalar whose bounded transform has modulus at most `max_hat_norm`.
    pub fn scalar_operator(&mut self, max_hat_norm: f64) -> C64 {
        let a = self.disc_point(max_hat_norm);
        a.conj() / (1.0 - a.norm_sqr()).sqrt()
    }
}

/// One operator from a fresh generator seeded with `seed`.
pub fn random_operator(seed: u64, m: usize, n: usize, max_hat_norm: f64) -> Result<ClosedOperator> {
    Sampler::new(seed).operator(m, n, max_hat_norm)
}
