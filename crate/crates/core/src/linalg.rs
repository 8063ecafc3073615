//! Dense complex-matrix kernel.
//!
//! Everything geometric in this crate reduces to a handful of primitives on
//! small dense complex matrices: the operator norm, the Hermitian functional
//! calculus `P -> W f(L) W*`, and the polar decomposition `B = V|B|`. The
//! factorizations themselves come from `nalgebra`; this module pins down the
//! conventions on top of them (tolerances, eigenvalue clipping, ordering and
//! phase of eigenvectors, partial-isometry factor on rank-deficient inputs).

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix, stored by `nalgebra` (column-major internally).
pub type ComplexMatrix = DMatrix<C64>;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERM_TOL: f64 = 1e-10;

/// Relative width of the band below zero in which eigenvalues are clipped to zero.
pub const CLIP_TOL: f64 = 1e-10;

/// Relative gap under which two eigenvalues are treated as tied for ordering.
const TIE_TOL: f64 = 1e-12;

/// Builds a matrix from row-major entries, rejecting bad lengths and non-finite values.
pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<ComplexMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(format!(
            "matrix dimensions must be positive, got {rows}x{cols}"
        )));
    }
    if entries.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: format!("{} entries ({rows}x{cols})", rows * cols),
            found: format!("{} entries", entries.len()),
        });
    }
    let m = ComplexMatrix::from_row_slice(rows, cols, entries);
    ensure_finite(&m)?;
    Ok(m)
}

/// Row-major copy of the entries.
pub fn to_row_major(m: &ComplexMatrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFiniteEntry { row: i, col: j });
            }
        }
    }
    Ok(())
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn diag(values: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

pub fn real_diag(values: &[f64]) -> ComplexMatrix {
    let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
    diag(&v)
}

/// Singular values sorted in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Operator (spectral) norm: the largest singular value.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return 0.0;
    }
    singular_values(m)[0]
}

/// Ratio of extreme singular values of a square matrix; infinite when singular.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let s = singular_values(m);
    let (hi, lo) = (s[0], s[s.len() - 1]);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// `(M + M*) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `|U*U - I|`, the distance of `U` from the unitary group's defining relation.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    op_norm(&(u.adjoint() * u - identity(u.ncols())))
}

/// Computes `X M^{-1}` for square `M`, refusing when `M` is too ill-conditioned.
pub fn right_divide(x: &ComplexMatrix, m: &ComplexMatrix, max_condition: f64) -> Result<ComplexMatrix> {
    if !m.is_square() || x.ncols() != m.nrows() {
        return Err(Error::shape_mismatch((x.ncols(), x.ncols()), m.shape()));
    }
    let condition = condition_number(m);
    if !(condition <= max_condition) {
        return Err(Error::SingularResolvent { condition });
    }
    // X M^{-1} = (M^{-T} X^T)^T
    let lu = m.transpose().lu();
    lu.solve(&x.transpose())
        .map(|y| y.transpose())
        .ok_or(Error::SingularResolvent { condition: f64::INFINITY })
}

/// Where a scalar function may be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Real,
    NonNegative,
    Positive,
    /// The open interval (-1, 1).
    OpenUnit,
}

impl Domain {
    fn contains(self, x: f64) -> bool {
        match self {
            Domain::Real => x.is_finite(),
            Domain::NonNegative => x >= 0.0,
            Domain::Positive => x > 0.0,
            Domain::OpenUnit => x > -1.0 && x < 1.0,
        }
    }

    fn clips_negative_noise(self) -> bool {
        matches!(self, Domain::NonNegative | Domain::Positive)
    }
}

/// A real function applied to Hermitian matrices through their spectrum.
#[derive(Clone)]
pub struct ScalarFn {
    name: String,
    domain: Domain,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFn")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish()
    }
}

impl ScalarFn {
    pub fn new(
        name: impl Into<String>,
        domain: Domain,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScalarFn { name: name.into(), domain, f: Arc::new(f) }
    }

    pub fn identity() -> Self {
        Self::new("identity", Domain::Real, |x| x)
    }

    pub fn sqrt() -> Self {
        Self::new("sqrt", Domain::NonNegative, f64::sqrt)
    }

    pub fn inv_sqrt() -> Self {
        Self::new("inv_sqrt", Domain::Positive, |x| 1.0 / x.sqrt())
    }

    pub fn atanh() -> Self {
        Self::new("atanh", Domain::OpenUnit, f64::atanh)
    }

    pub fn tanh() -> Self {
        Self::new("tanh", Domain::Real, f64::tanh)
    }

    /// `x -> tanh(t * atanh(x))`: rescales hyperbolic length along a ray by `t`.
    pub fn rescale_hyperbolic(t: f64) -> Self {
        Self::new(format!("tanh({t}*atanh)"), Domain::OpenUnit, move |x| (t * x.atanh()).tanh())
    }

    /// `self ∘ inner`, evaluated on the domain of `inner`.
    pub fn compose(&self, inner: &ScalarFn) -> Self {
        let (outer, inner_f) = (self.f.clone(), inner.f.clone());
        ScalarFn {
            name: format!("{}∘{}", self.name, inner.name),
            domain: inner.domain,
            f: Arc::new(move |x| outer(inner_f(x))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

/// Spectral decomposition `P = W diag(values) W*` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

fn check_hermitian(p: &ComplexMatrix) -> Result<()> {
    if !p.is_square() {
        return Err(Error::shape_mismatch((p.nrows(), p.nrows()), p.shape()));
    }
    let deviation = op_norm(&(p - p.adjoint()));
    let tolerance = HERM_TOL * (1.0 + op_norm(p));
    if deviation > tolerance {
        return Err(Error::NotHermitian { deviation, tolerance });
    }
    Ok(())
}

fn first_significant_index(v: &ComplexMatrix, col: usize) -> usize {
    let threshold = 0.5 / (v.nrows() as f64).sqrt();
    (0..v.nrows()).find(|&i| v[(i, col)].norm() >= threshold).unwrap_or(0)
}

/// Eigendecomposition of a Hermitian matrix with reproducible ordering.
///
/// Eigenvalues come out descending; numerically tied eigenvalues are ordered
/// by the first coordinate their eigenvector overlaps with, and each
/// eigenvector is rotated so that this coordinate is real and positive.
pub fn hermitian_eigen(p: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(p)?;
    let eig = SymmetricEigen::new(hermitian_part(p));
    let n = p.nrows();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n
            && eig.eigenvalues[order[end - 1]] - eig.eigenvalues[order[end]] <= TIE_TOL * (1.0 + scale)
        {
            end += 1;
        }
        order[start..end].sort_by_key(|&k| first_significant_index(&eig.eigenvectors, k));
        start = end;
    }

    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let pivot = eig.eigenvectors[(first_significant_index(&eig.eigenvectors, src), src)];
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            vectors[(i, dst)] = eig.eigenvectors[(i, src)] * phase;
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Hermitian functional calculus: `f(P) = W f(L) W*`.
///
/// `P` must be Hermitian within [`HERM_TOL`] (relative). For functions defined
/// only on `[0, inf)`, eigenvalues in `[-CLIP_TOL (1 + |P|), 0)` are clipped to
/// zero first; anything still outside the domain is an error.
pub fn herm_fun(p: &ComplexMatrix, f: &ScalarFn) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(p)?;
    let norm = eig.values.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let n = p.nrows();
    let mut mapped = Vec::with_capacity(n);
    for &lambda in &eig.values {
        let mut x = lambda;
        if f.domain().clips_negative_noise() && x < 0.0 && x >= -CLIP_TOL * (1.0 + norm) {
            x = 0.0;
        }
        if !f.domain().contains(x) {
            return Err(Error::SpectrumOutOfDomain { function: f.name().to_string(), eigenvalue: lambda });
        }
        let y = f.eval(x);
        if !y.is_finite() {
            return Err(Error::SpectrumOutOfDomain { function: f.name().to_string(), eigenvalue: lambda });
        }
        mapped.push(y);
    }
    let w = &eig.vectors;
    let mut scaled = w.clone();
    for (j, y) in mapped.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*y);
    }
    Ok(hermitian_part(&(scaled * w.adjoint())))
}

/// [`herm_fun`] on the Hermitian part of `p`, for internal products such as
/// `I + T*T` that are Hermitian only up to rounding.
pub(crate) fn herm_fun_sym(p: &ComplexMatrix, f: &ScalarFn) -> Result<ComplexMatrix> {
    herm_fun(&hermitian_part(p), f)
}

/// Thin SVD `B = U diag(s) W*` with singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    /// `W` itself (not its adjoint); columns are right singular vectors.
    pub w: ComplexMatrix,
}

pub fn svd(b: &ComplexMatrix) -> Svd {
    let raw = SVD::new(b.clone(), true, true);
    let (u_raw, vt_raw) = (raw.u.expect("requested U"), raw.v_t.expect("requested V^T"));
    let k = raw.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &c| raw.singular_values[c].total_cmp(&raw.singular_values[a]));
    let mut u = ComplexMatrix::zeros(b.nrows(), k);
    let mut w = ComplexMatrix::zeros(b.ncols(), k);
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        s.push(raw.singular_values[src]);
        u.set_column(dst, &u_raw.column(src));
        w.set_column(dst, &vt_raw.row(src).adjoint());
    }
    Svd { u, s, w }
}

/// Polar decomposition `B = V P`.
#[derive(Debug, Clone)]
pub struct Polar {
    /// Partial isometry, zero on the kernel of `modulus`.
    pub isometry: ComplexMatrix,
    /// `|B| = (B*B)^{1/2}`, Hermitian positive semidefinite.
    pub modulus: ComplexMatrix,
}

/// Polar decomposition through the compact SVD: `V = U_r W_r*`, `|B| = W_r S_r W_r*`.
pub fn polar(b: &ComplexMatrix) -> Polar {
    let (m, n) = b.shape();
    let d = svd(b);
    let cutoff = d.s.first().copied().unwrap_or(0.0) * (m.max(n) as f64) * f64::EPSILON;
    let rank = d.s.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
    let mut isometry = ComplexMatrix::zeros(m, n);
    let mut modulus = ComplexMatrix::zeros(n, n);
    for k in 0..rank {
        let uk = d.u.column(k);
        let wk = d.w.column(k);
        isometry += &uk * wk.adjoint();
        modulus += (&wk * wk.adjoint()).scale(d.s[k]);
    }
    Polar { isometry, modulus: hermitian_part(&modulus) }
}

/// Nearest unitary in any unitarily invariant norm (orthogonal Procrustes).
pub fn nearest_unitary(m: &ComplexMatrix) -> ComplexMatrix {
    let d = svd(m);
    &d.u * d.w.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn max_abs(m: &ComplexMatrix) -> f64 {
        m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    #[test]
    fn op_norm_of_diagonal() {
        assert_abs_diff_eq!(op_norm(&real_diag(&[1.0, 2.0])), 2.0, epsilon = 1e-15);
        assert_eq!(op_norm(&ComplexMatrix::zeros(3, 2)), 0.0);
    }

    #[test]
    fn op_norm_matches_gram_eigenvalue() {
        let m = from_row_major(
            4,
            2,
            &[c(0.3, -1.2), c(2.0, 0.1), c(-0.7, 0.4), c(0.0, 1.5), c(1.1, 1.1), c(-0.2, 0.0), c(0.5, -0.9), c(0.8, 0.3)],
        )
        .unwrap();
        let gram = m.adjoint() * &m;
        let eig = SymmetricEigen::new(hermitian_part(&gram));
        let top = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max).sqrt();
        assert_abs_diff_eq!(op_norm(&m), top, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let q = herm_fun(&real_diag(&[4.0, 9.0]), &ScalarFn::sqrt()).unwrap();
        assert!(max_abs(&(q - real_diag(&[2.0, 3.0]))) < 1e-14);
    }

    #[test]
    fn scalar_functions() {
        let f = ScalarFn::new("(1+x)^-1/2", Domain::NonNegative, |x| 1.0 / (1.0 + x).sqrt());
        let q = herm_fun(&real_diag(&[1.0]), &f).unwrap();
        assert_abs_diff_eq!(q[(0, 0)].re, 0.70710678, epsilon = 1e-8);
        let q = herm_fun(&real_diag(&[0.5]), &ScalarFn::atanh()).unwrap();
        assert_abs_diff_eq!(q[(0, 0)].re, 0.54930614, epsilon = 1e-8);
        assert_abs_diff_eq!(q[(0, 0)].re, 0.5 * 3f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let p = from_row_major(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(herm_fun(&p, &ScalarFn::sqrt()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn atanh_outside_domain() {
        let err = herm_fun(&real_diag(&[1.0, 0.2]), &ScalarFn::atanh()).unwrap_err();
        assert!(matches!(err, Error::SpectrumOutOfDomain { .. }));
    }

    #[test]
    fn clips_tiny_negative_eigenvalues() {
        let q = herm_fun(&real_diag(&[1.0, -1e-12]), &ScalarFn::sqrt()).unwrap();
        assert_eq!(q[(1, 1)].re, 0.0);
        let err = herm_fun(&real_diag(&[1.0, -1e-6]), &ScalarFn::sqrt()).unwrap_err();
        assert!(matches!(err, Error::SpectrumOutOfDomain { .. }));
    }

    #[test]
    fn eigen_ordering_is_descending_with_positive_pivots() {
        let p = from_row_major(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]).unwrap();
        let eig = hermitian_eigen(&p).unwrap();
        assert_abs_diff_eq!(eig.values[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.values[1], 1.0, epsilon = 1e-14);
        for k in 0..2 {
            let i = first_significant_index(&eig.vectors, k);
            assert!(eig.vectors[(i, k)].im.abs() < 1e-15 && eig.vectors[(i, k)].re > 0.0);
        }
        // ties: identity keeps the canonical order
        let eig = hermitian_eigen(&identity(3)).unwrap();
        assert!(max_abs(&(eig.vectors - identity(3))) < 1e-15);
    }

    #[test]
    fn polar_scalar_and_unitary() {
        let pd = polar(&real_diag(&[-0.5]));
        assert_abs_diff_eq!(pd.isometry[(0, 0)].re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pd.modulus[(0, 0)].re, 0.5, epsilon = 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = from_row_major(2, 2, &[c(s, 0.0), c(0.0, s), c(0.0, s), c(s, 0.0)]).unwrap();
        let pd = polar(&u);
        assert!(max_abs(&(&pd.isometry - &u)) < 1e-14);
        assert!(max_abs(&(&pd.modulus - identity(2))) < 1e-14);
    }

    #[test]
    fn polar_of_zero() {
        let pd = polar(&ComplexMatrix::zeros(2, 2));
        assert_eq!(max_abs(&pd.isometry), 0.0);
        assert_eq!(max_abs(&pd.modulus), 0.0);
    }

    #[test]
    fn polar_rank_deficient_is_partial_isometry() {
        let b = from_row_major(3, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0), c(0.0, 2.0), c(1.0, 1.0), c(2.0, 2.0)]).unwrap();
        let pd = polar(&b);
        assert!(op_norm(&(&pd.isometry * &pd.modulus - &b)) < 1e-12);
        // V*V is the projection onto the range of |B|, here of rank one
        let proj = pd.isometry.adjoint() * &pd.isometry;
        assert!(op_norm(&(&proj * &proj - &proj)) < 1e-12);
        assert_abs_diff_eq!(proj.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn right_divide_rejects_singular() {
        let m = real_diag(&[1.0, 0.0]);
        let x = identity(2);
        assert!(matches!(right_divide(&x, &m, 1e12), Err(Error::SingularResolvent { .. })));
        let y = right_divide(&x, &real_diag(&[2.0, 4.0]), 1e12).unwrap();
        assert!(max_abs(&(y - real_diag(&[0.5, 0.25]))) < 1e-15);
    }

    #[test]
    fn row_major_validation() {
        assert!(matches!(from_row_major(2, 2, &[c(1.0, 0.0)]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            from_row_major(1, 1, &[c(f64::NAN, 0.0)]),
            Err(Error::NonFiniteEntry { row: 0, col: 0 })
        ));
        let m = from_row_major(2, 3, &(0..6).map(|k| c(k as f64, -(k as f64))).collect::<Vec<_>>()).unwrap();
        assert_eq!(m[(1, 0)], c(3.0, -3.0));
        assert_eq!(to_row_major(&m)[4], c(4.0, -4.0));
    }
}
