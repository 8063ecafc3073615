//! The open unit ball of `L(K, H)` (complex `m x n` matrices of operator norm
//! below one), its Möbius automorphisms and the Kobayashi distance.
//!
//! The automorphisms handled here are the maps `Z -> eta_A(U Z V)` with
//!
//! ```text
//! eta_A(Z) = (I - A A*)^{-1/2} (Z + A) (I + A* Z)^{-1} (I - A* A)^{1/2}
//! ```
//!
//! for a ball point `A` and unitaries `U` (`m x m`), `V` (`n x n`). They form
//! a group; [`BallAutomorphism::compose`] and [`BallAutomorphism::inverse`]
//! keep every element in this `(A, U, V)` normal form.
//!
//! The distance is evaluated in closed form by transporting one argument to
//! the origin: `K(x, y) = atanh |eta_{-x}(y)|`.

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ScalarFn, C64};

/// Points whose norm exceeds `1 - NORM_MARGIN` are rejected.
pub const NORM_MARGIN: f64 = 1e-8;

/// Largest condition number accepted for the resolvent `I + A* Z`.
pub const MAX_RESOLVENT_CONDITION: f64 = 1e12;

/// Tolerance on `|U*U - I|` for the unitary factors of an automorphism.
pub const UNITARY_TOL: f64 = 1e-10;

/// Largest transported norm for which `atanh` is evaluated.
const ATANH_CLAMP: f64 = 1.0 - 1e-15;

/// A point strictly inside the unit ball of `m x n` complex matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    mat: ComplexMatrix,
}

impl BallPoint {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        linalg::ensure_finite(&mat)?;
        let norm = linalg::op_norm(&mat);
        if norm > 1.0 - NORM_MARGIN {
            return Err(Error::NormTooCloseToOne { norm });
        }
        Ok(BallPoint { mat })
    }

    pub fn zero(dim_h: usize, dim_k: usize) -> Self {
        BallPoint { mat: ComplexMatrix::zeros(dim_h, dim_k) }
    }

    /// Scalar point of the unit disc, as a `1 x 1` matrix.
    pub fn scalar(z: C64) -> Result<Self> {
        Self::new(ComplexMatrix::from_element(1, 1, z))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// `m`, the number of rows.
    pub fn dim_h(&self) -> usize {
        self.mat.nrows()
    }

    /// `n`, the number of columns.
    pub fn dim_k(&self) -> usize {
        self.mat.ncols()
    }

    pub fn norm(&self) -> f64 {
        linalg::op_norm(&self.mat)
    }

    pub fn neg(&self) -> Self {
        BallPoint { mat: -&self.mat }
    }

    fn check_same_shape(&self, other: &BallPoint) -> Result<()> {
        if self.mat.shape() != other.mat.shape() {
            return Err(Error::shape_mismatch(self.mat.shape(), other.mat.shape()));
        }
        Ok(())
    }
}

/// Poincaré distance on the unit disc: `atanh(|a - b| / |1 - conj(a) b|)`.
pub fn poincare(a: C64, b: C64) -> Result<f64> {
    for z in [a, b] {
        if !(z.norm() < 1.0) {
            return Err(Error::OutsideDisc { modulus: z.norm() });
        }
    }
    if a == b {
        return Ok(0.0);
    }
    let ratio = (a - b).norm() / (C64::new(1.0, 0.0) - a.conj() * b).norm();
    Ok(ratio.min(ATANH_CLAMP).atanh())
}

/// An automorphism `Z -> eta_A(U Z V)` of the ball.
///
/// The square-root factors of `eta_A` are computed once at construction.
#[derive(Debug, Clone)]
pub struct BallAutomorphism {
    a: BallPoint,
    u: ComplexMatrix,
    v: ComplexMatrix,
    /// `(I - A A*)^{-1/2}`, `m x m`.
    left: ComplexMatrix,
    /// `(I - A* A)^{1/2}`, `n x n`.
    right: ComplexMatrix,
}

impl PartialEq for BallAutomorphism {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.u == other.u && self.v == other.v
    }
}

impl BallAutomorphism {
    pub fn new(a: BallPoint, u: ComplexMatrix, v: ComplexMatrix) -> Result<Self> {
        let (m, n) = (a.dim_h(), a.dim_k());
        if u.shape() != (m, m) {
            return Err(Error::shape_mismatch((m, m), u.shape()));
        }
        if v.shape() != (n, n) {
            return Err(Error::shape_mismatch((n, n), v.shape()));
        }
        for w in [&u, &v] {
            linalg::ensure_finite(w)?;
            let deviation = linalg::unitarity_defect(w);
            if deviation > UNITARY_TOL {
                return Err(Error::NotUnitary { deviation });
            }
        }
        let am = a.matrix();
        let left = linalg::herm_fun_sym(&(linalg::identity(m) - am * am.adjoint()), &ScalarFn::inv_sqrt())?;
        let right = linalg::herm_fun_sym(&(linalg::identity(n) - am.adjoint() * am), &ScalarFn::sqrt())?;
        Ok(BallAutomorphism { a, u, v, left, right })
    }

    pub fn identity(dim_h: usize, dim_k: usize) -> Self {
        BallAutomorphism {
            a: BallPoint::zero(dim_h, dim_k),
            u: linalg::identity(dim_h),
            v: linalg::identity(dim_k),
            left: linalg::identity(dim_h),
            right: linalg::identity(dim_k),
        }
    }

    /// The Möbius map `eta_A` alone (`U = I`, `V = I`); sends `0` to `A`.
    pub fn translation(a: BallPoint) -> Result<Self> {
        let (m, n) = (a.dim_h(), a.dim_k());
        Self::new(a, linalg::identity(m), linalg::identity(n))
    }

    /// The linear isometry `Z -> U Z V`; fixes the origin.
    pub fn rotation(u: ComplexMatrix, v: ComplexMatrix) -> Result<Self> {
        let (m, n) = (u.nrows(), v.nrows());
        Self::new(BallPoint::zero(m, n), u, v)
    }

    pub fn parameter(&self) -> &BallPoint {
        &self.a
    }

    pub fn left_unitary(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn right_unitary(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn dim_h(&self) -> usize {
        self.a.dim_h()
    }

    pub fn dim_k(&self) -> usize {
        self.a.dim_k()
    }

    /// `eta_A(U Z V)`.
    pub fn apply(&self, z: &BallPoint) -> Result<BallPoint> {
        BallPoint::new(self.apply_matrix(z)?)
    }

    /// [`apply`](Self::apply) without the margin check on the image.
    pub(crate) fn apply_matrix(&self, z: &BallPoint) -> Result<ComplexMatrix> {
        self.a.check_same_shape(z)?;
        let rotated = &self.u * z.matrix() * &self.v;
        let am = self.a.matrix();
        let n = self.dim_k();
        let resolvent = linalg::identity(n) + am.adjoint() * &rotated;
        let numerator = &self.left * (rotated + am);
        Ok(linalg::right_divide(&numerator, &resolvent, MAX_RESOLVENT_CONDITION)? * &self.right)
    }

    /// Inverse in normal form: `Z -> U* eta_{-A}(Z) V* = eta_{-U*AV*}(U* Z V*)`.
    pub fn inverse(&self) -> Result<Self> {
        let u_inv = self.u.adjoint();
        let v_inv = self.v.adjoint();
        let a = BallPoint::new(-(&u_inv * self.a.matrix() * &v_inv))?;
        Self::new(a, u_inv, v_inv)
    }

    /// `self ∘ inner`, reduced to normal form.
    ///
    /// The new parameter is `A' = (self ∘ inner)(0)`. What remains after
    /// undoing `eta_{A'}` fixes the origin and is therefore linear,
    /// `Z -> U' Z V'`; it is sampled on the scaled matrix units `s E_ij`,
    /// `U'` and `V'` are read off a pivot row/column of the resulting rank-one
    /// tensor, and each is projected onto the unitary group.
    pub fn compose(&self, inner: &BallAutomorphism) -> Result<Self> {
        if self.a.matrix().shape() != inner.a.matrix().shape() {
            return Err(Error::shape_mismatch(self.a.matrix().shape(), inner.a.matrix().shape()));
        }
        let (m, n) = (self.dim_h(), self.dim_k());
        let origin = BallPoint::zero(m, n);
        let a_new = self.apply(&inner.apply(&origin)?).map_err(|e| match e {
            Error::NormTooCloseToOne { norm } => Error::NormalFormFailure {
                reason: format!("composite moves the origin to norm {norm}"),
            },
            other => other,
        })?;
        let undo = Self::translation(a_new.neg())?;

        const PROBE: f64 = 0.5;
        // samples[i][j] = L(E_ij) with L = eta_{-A'} ∘ self ∘ inner, so that
        // samples[i][j][(a, b)] = U'[a, i] V'[j, b].
        let mut samples = Vec::with_capacity(m);
        let mut best = (0.0, 0, 0, 0, 0);
        for i in 0..m {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let mut e = ComplexMatrix::zeros(m, n);
                e[(i, j)] = C64::new(PROBE, 0.0);
                let image = undo.apply(&self.apply(&inner.apply(&BallPoint::new(e)?)?)?)?;
                let k = image.into_matrix().unscale(PROBE);
                for a in 0..m {
                    for b in 0..n {
                        let mag = k[(a, b)].norm();
                        if mag > best.0 {
                            best = (mag, i, j, a, b);
                        }
                    }
                }
                row.push(k);
            }
            samples.push(row);
        }
        let (mag, i0, j0, a0, b0) = best;
        if mag < 1e-6 {
            return Err(Error::NormalFormFailure { reason: "linear part vanished".into() });
        }
        let pivot = samples[i0][j0][(a0, b0)];
        // U'[a, i] V'[j0, b0] and U'[a0, i0] V'[j, b]; the pivot is their product of scales
        let u_est = ComplexMatrix::from_fn(m, m, |a, i| samples[i][j0][(a, b0)] / pivot);
        let v_est = ComplexMatrix::from_fn(n, n, |j, b| samples[i0][j][(a0, b)]);
        let u = linalg::nearest_unitary(&u_est);
        let v = linalg::nearest_unitary(&v_est);
        Self::new(a_new, u, v).map_err(|e| Error::NormalFormFailure { reason: e.to_string() })
    }
}

/// Kobayashi distance `atanh |eta_{-x}(y)|`.
pub fn kobayashi(x: &BallPoint, y: &BallPoint) -> Result<f64> {
    x.check_same_shape(y)?;
    if x == y {
        return Ok(0.0);
    }
    let transported = transport_to_origin(x, y)?;
    norm_to_distance(linalg::op_norm(&transported))
}

/// `eta_{-x}(y)` without the ball-membership check on the result, which may
/// legitimately sit closer to the boundary than `NORM_MARGIN` allows.
pub(crate) fn transport_to_origin(x: &BallPoint, y: &BallPoint) -> Result<ComplexMatrix> {
    let (m, n) = (x.dim_h(), x.dim_k());
    let xm = x.matrix();
    let left = linalg::herm_fun_sym(&(linalg::identity(m) - xm * xm.adjoint()), &ScalarFn::inv_sqrt())?;
    let right = linalg::herm_fun_sym(&(linalg::identity(n) - xm.adjoint() * xm), &ScalarFn::sqrt())?;
    let resolvent = linalg::identity(n) - xm.adjoint() * y.matrix();
    let numerator = left * (y.matrix() - xm);
    Ok(linalg::right_divide(&numerator, &resolvent, MAX_RESOLVENT_CONDITION)? * right)
}

/// `atanh` of a transported norm, refusing values at the boundary.
pub(crate) fn norm_to_distance(norm: f64) -> Result<f64> {
    if norm > ATANH_CLAMP {
        return Err(Error::SingularResolvent { condition: 1.0 / (1.0 - norm.min(1.0)).max(f64::MIN_POSITIVE) });
    }
    Ok(norm.atanh())
}
