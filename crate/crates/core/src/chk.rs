//! The metric space of operators `H -> K` with the invariant distance `d`.
//!
//! At finite dimension every `n x m` complex matrix (`n = dim K`,
//! `m = dim H`) is a closed densely-defined operator. The bounded transform
//!
//! ```text
//! hat(T) = (I + T*T)^{-1/2} T*
//! ```
//!
//! identifies this space with the open unit ball of `m x n` matrices, and the
//! distance is
//!
//! ```text
//! d(T, S) = atanh | L_T(S) R_S(T)^{-1} |
//! L_T(X)  = (I + T*T)^{1/2} X* - T* (I + X X*)^{1/2}
//! R_T(X)  = (I + X X*)^{1/2} (I + T T*)^{1/2} - X T*
//! ```
//!
//! which agrees with the Kobayashi distance between `hat(T)` and `hat(S)`.
//! Geodesics, midpoints and barycenters are built by transporting to the
//! origin of the ball, where geodesics through zero are `V tanh(t atanh|B|)`.

use rayon::prelude::*;

use crate::ball::{self, BallAutomorphism, BallPoint};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ScalarFn, C64};

/// Above this condition number of `R_S(T)` the distance is evaluated through
/// the bounded transform instead.
pub const MAX_RS_CONDITION: f64 = 1e10;

/// An operator `H -> K`, stored as an `n x m` matrix with `n = dim K`, `m = dim H`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedOperator {
    mat: ComplexMatrix,
}

impl ClosedOperator {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        linalg::ensure_finite(&mat)?;
        if mat.is_empty() {
            return Err(Error::InvalidArgument("operator must have positive dimensions".into()));
        }
        Ok(ClosedOperator { mat })
    }

    pub fn zero(dim_h: usize, dim_k: usize) -> Self {
        ClosedOperator { mat: ComplexMatrix::zeros(dim_k, dim_h) }
    }

    pub fn scalar(z: C64) -> Self {
        ClosedOperator { mat: ComplexMatrix::from_element(1, 1, z) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim_h(&self) -> usize {
        self.mat.ncols()
    }

    pub fn dim_k(&self) -> usize {
        self.mat.nrows()
    }

    pub fn neg(&self) -> Self {
        ClosedOperator { mat: -&self.mat }
    }

    pub(crate) fn check_same_shape(&self, other: &ClosedOperator) -> Result<()> {
        if self.mat.shape() != other.mat.shape() {
            return Err(Error::shape_mismatch(self.mat.shape(), other.mat.shape()));
        }
        Ok(())
    }
}

/// Bounded transform `(I + T*T)^{-1/2} T*`, computed as `T* (I + T T*)^{-1/2}`
/// so that only an `n x n` matrix is factored.
///
/// Fails only when `|T|` is so large that the image is within
/// [`ball::NORM_MARGIN`] of the boundary.
pub fn hat(t: &ClosedOperator) -> Result<BallPoint> {
    let tm = t.matrix();
    let n = t.dim_k();
    let factor = linalg::herm_fun_sym(&(linalg::identity(n) + tm * tm.adjoint()), &ScalarFn::inv_sqrt())?;
    BallPoint::new(tm.adjoint() * factor)
}

/// Inverse of [`hat`]: `(I - A*A)^{-1/2} A*`.
pub fn unhat(a: &BallPoint) -> Result<ClosedOperator> {
    let am = a.matrix();
    let norm = a.norm();
    if norm > 1.0 - ball::NORM_MARGIN {
        return Err(Error::NormTooCloseToOne { norm });
    }
    let n = a.dim_k();
    let factor = linalg::herm_fun_sym(&(linalg::identity(n) - am.adjoint() * am), &ScalarFn::inv_sqrt())?;
    ClosedOperator::new(factor * am.adjoint())
}

/// `L_T(X) = (I + T*T)^{1/2} X* - T* (I + X X*)^{1/2}`, an `m x n` matrix.
pub fn l_map(t: &ClosedOperator, x: &ClosedOperator) -> Result<ComplexMatrix> {
    t.check_same_shape(x)?;
    let (tm, xm) = (t.matrix(), x.matrix());
    let (m, n) = (t.dim_h(), t.dim_k());
    let lhs = linalg::herm_fun_sym(&(linalg::identity(m) + tm.adjoint() * tm), &ScalarFn::sqrt())?;
    let rhs = linalg::herm_fun_sym(&(linalg::identity(n) + xm * xm.adjoint()), &ScalarFn::sqrt())?;
    Ok(lhs * xm.adjoint() - tm.adjoint() * rhs)
}

/// `R_T(X) = (I + X X*)^{1/2} (I + T T*)^{1/2} - X T*`, an `n x n` matrix.
pub fn r_map(t: &ClosedOperator, x: &ClosedOperator) -> Result<ComplexMatrix> {
    t.check_same_shape(x)?;
    let (tm, xm) = (t.matrix(), x.matrix());
    let n = t.dim_k();
    let xx = linalg::herm_fun_sym(&(linalg::identity(n) + xm * xm.adjoint()), &ScalarFn::sqrt())?;
    let tt = linalg::herm_fun_sym(&(linalg::identity(n) + tm * tm.adjoint()), &ScalarFn::sqrt())?;
    Ok(xx * tt - xm * tm.adjoint())
}

/// `atanh |L_T(S) R_S(T)^{-1}|`, with no fallback.
pub fn distance_lr(t: &ClosedOperator, s: &ClosedOperator) -> Result<f64> {
    let l = l_map(t, s)?;
    let r = r_map(s, t)?;
    let q = linalg::right_divide(&l, &r, MAX_RS_CONDITION)?;
    ball::norm_to_distance(linalg::op_norm(&q))
}

/// The Kobayashi distance of the bounded transforms.
pub fn distance_hat(t: &ClosedOperator, s: &ClosedOperator) -> Result<f64> {
    t.check_same_shape(s)?;
    ball::kobayashi(&hat(t)?, &hat(s)?)
}

/// `d(T, S)`.
///
/// Evaluated with the `L`/`R` formula; when `R_S(T)` is ill-conditioned the
/// equivalent Kobayashi form in hat coordinates is used instead.
pub fn distance(t: &ClosedOperator, s: &ClosedOperator) -> Result<f64> {
    t.check_same_shape(s)?;
    if t == s {
        return Ok(0.0);
    }
    match distance_lr(t, s) {
        Err(Error::SingularResolvent { .. }) => distance_hat(t, s),
        other => other,
    }
}

/// `psi_T(X) = eta_{-hat T}(X)`; sends `hat(T)` to the origin.
pub fn psi(t: &ClosedOperator, x: &BallPoint) -> Result<BallPoint> {
    psi_automorphism(t)?.apply(x)
}

/// `psi_T` as a ball automorphism.
pub fn psi_automorphism(t: &ClosedOperator) -> Result<BallAutomorphism> {
    BallAutomorphism::translation(hat(t)?.neg())
}

/// Polar factors of `psi_T(hat S)` with the modulus pushed through `f`:
/// returns `V f(|B|)`.
fn transported_ray(t: &ClosedOperator, s: &ClosedOperator, f: &ScalarFn) -> Result<BallPoint> {
    let b = ball::transport_to_origin(&hat(t)?, &hat(s)?)?;
    let pd = linalg::polar(&b);
    let scaled = linalg::herm_fun(&pd.modulus, f)?;
    BallPoint::new(pd.isometry * scaled)
}

/// The point at fraction `t` of the way from `T` to `S` along the geodesic
/// `psi_{-T}(V tanh(t atanh|B|))`, `B = psi_T(hat S) = V|B|`.
pub fn geodesic_point(t_op: &ClosedOperator, s_op: &ClosedOperator, t: f64) -> Result<ClosedOperator> {
    t_op.check_same_shape(s_op)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("geodesic parameter {t} outside [0, 1]")));
    }
    if t == 0.0 || t_op == s_op {
        return Ok(t_op.clone());
    }
    if t == 1.0 {
        return Ok(s_op.clone());
    }
    let ray = transported_ray(t_op, s_op, &ScalarFn::rescale_hyperbolic(t))?;
    let back = psi(&t_op.neg(), &ray)?;
    unhat(&back)
}

/// Geodesic midpoint, `geodesic_point(T, S, 1/2)`.
pub fn midpoint(t: &ClosedOperator, s: &ClosedOperator) -> Result<ClosedOperator> {
    geodesic_point(t, s, 0.5)
}

/// An automorphism `phi` of the ball with `phi(hat T) = -phi(hat S)`.
///
/// With `B = psi_{-T}(-hat S) = V|B|`, `C = tanh(atanh(|B|) / 2)` and
/// `A = V C`, this is `phi = psi_{A0} ∘ (X -> psi_{-T}(-X))` where
/// `hat(A0) = A`; it sends `hat T` to `-A` and `hat S` to `A`.
pub fn symmetrize(t: &ClosedOperator, s: &ClosedOperator) -> Result<BallAutomorphism> {
    t.check_same_shape(s)?;
    let (m, n) = (t.dim_h(), t.dim_k());
    let t_hat = hat(t)?;
    let b = ball::transport_to_origin(&t_hat.neg(), &hat(s)?.neg())?;
    let pd = linalg::polar(&b);
    let c = linalg::herm_fun(&pd.modulus, &ScalarFn::rescale_hyperbolic(0.5))?;
    let a = BallPoint::new(pd.isometry * c)?;
    let reflect_then_shift = BallAutomorphism::new(t_hat, -linalg::identity(m), linalg::identity(n))?;
    BallAutomorphism::translation(a.neg())?.compose(&reflect_then_shift)
}

/// Midpoint obtained from [`symmetrize`]: `unhat(phi^{-1}(0))`.
///
/// An independent route to the same point as [`midpoint`]; the two are
/// cross-checked in tests.
pub fn midpoint_by_symmetry(t: &ClosedOperator, s: &ClosedOperator) -> Result<ClosedOperator> {
    let phi = symmetrize(t, s)?;
    let q = phi.inverse()?.apply(&BallPoint::zero(t.dim_h(), t.dim_k()))?;
    unhat(&q)
}

/// Recursive pairwise-midpoint barycenter.
///
/// Inputs whose length is not a power of two are first padded by repeating
/// the sequence cyclically. Pairs are formed in input order at every level.
pub fn barycenter(points: &[ClosedOperator]) -> Result<ClosedOperator> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidArgument("barycenter of an empty sequence".into()))?;
    for p in points {
        first.check_same_shape(p)?;
    }
    let mut level = padded_to_power_of_two(points);
    while level.len() > 1 {
        level = level
            .par_chunks(2)
            .map(|pair| midpoint(&pair[0], &pair[1]))
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(level.pop().expect("nonempty"))
}

/// `points` repeated cyclically up to the next power of two.
pub fn padded_to_power_of_two(points: &[ClosedOperator]) -> Vec<ClosedOperator> {
    let target = points.len().next_power_of_two();
    (0..target).map(|i| points[i % points.len()].clone()).collect()
}
