//! h-biholomorphic isometries, orbits of finitely generated groups, and a
//! fixed-point search for groups with bounded orbits.
//!
//! A map `phi` of the operator space is h-biholomorphic when some ball
//! automorphism `psi` satisfies `psi(hat X) = hat(phi(X))`; here `phi` is
//! always induced from a [`BallAutomorphism`] as `X -> unhat(psi(hat X))`.
//! Such maps preserve `d`.
//!
//! Existence of a fixed point for a group with a bounded orbit is a theorem;
//! finding one is not. [`find_fixed_point`] iterates Chebyshev centers of the
//! current point and its images under the generators, and reports the residual
//! `max_i d(g_i P, P)` it reached.
//!
//! Orbit distances are evaluated in hat coordinates as Kobayashi distances,
//! which equal `d` between the corresponding operators.

use rayon::prelude::*;

use crate::ball::{self, BallAutomorphism, BallPoint};
use crate::chk::{self, ClosedOperator};
use crate::convexity::{self, FiniteConfiguration};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};

/// Orbit points closer than this in hat coordinates are merged.
pub const DEDUP_TOL: f64 = 1e-8;
pub const DEFAULT_ORBIT_DEPTH: usize = 6;
pub const MAX_ORBIT_POINTS: usize = 5000;

/// A map of the operator space induced by a ball automorphism.
#[derive(Debug, Clone, PartialEq)]
pub struct HBiholomorphicMap {
    auto: BallAutomorphism,
}

impl HBiholomorphicMap {
    pub fn new(auto: BallAutomorphism) -> Self {
        HBiholomorphicMap { auto }
    }

    pub fn identity(dim_h: usize, dim_k: usize) -> Self {
        Self::new(BallAutomorphism::identity(dim_h, dim_k))
    }

    pub fn automorphism(&self) -> &BallAutomorphism {
        &self.auto
    }

    pub fn dim_h(&self) -> usize {
        self.auto.dim_h()
    }

    pub fn dim_k(&self) -> usize {
        self.auto.dim_k()
    }

    /// `unhat(psi(hat T))`.
    pub fn apply(&self, t: &ClosedOperator) -> Result<ClosedOperator> {
        chk::unhat(&self.auto.apply(&chk::hat(t)?)?)
    }

    pub fn apply_hat(&self, x: &BallPoint) -> Result<BallPoint> {
        self.auto.apply(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(Self::new(self.auto.inverse()?))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &HBiholomorphicMap) -> Result<Self> {
        Ok(Self::new(self.auto.compose(&inner.auto)?))
    }

    /// `h ∘ self ∘ h^{-1}`.
    pub fn conjugate_by(&self, h: &HBiholomorphicMap) -> Result<Self> {
        h.compose(&self.compose(&h.inverse()?)?)
    }
}

/// Apply `g` to `t`.
pub fn apply_map(g: &HBiholomorphicMap, t: &ClosedOperator) -> Result<ClosedOperator> {
    g.apply(t)
}

/// The group generated by finitely many maps; inverses are adjoined.
#[derive(Debug, Clone)]
pub struct IsometryGroup {
    generators: Vec<HBiholomorphicMap>,
    inverses: Vec<HBiholomorphicMap>,
}

impl IsometryGroup {
    pub fn new(generators: Vec<HBiholomorphicMap>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::InvalidArgument("a group needs at least one generator".into()))?;
        let shape = (first.dim_h(), first.dim_k());
        for g in &generators {
            if (g.dim_h(), g.dim_k()) != shape {
                return Err(Error::shape_mismatch(shape, (g.dim_h(), g.dim_k())));
            }
        }
        let inverses = generators.iter().map(|g| g.inverse()).collect::<Result<_>>()?;
        Ok(IsometryGroup { generators, inverses })
    }

    pub fn generators(&self) -> &[HBiholomorphicMap] {
        &self.generators
    }

    pub fn inverses(&self) -> &[HBiholomorphicMap] {
        &self.inverses
    }

    /// Generators followed by their inverses: the letters of a word.
    pub fn letters(&self) -> impl Iterator<Item = &HBiholomorphicMap> {
        self.generators.iter().chain(self.inverses.iter())
    }

    pub fn dim_h(&self) -> usize {
        self.generators[0].dim_h()
    }

    pub fn dim_k(&self) -> usize {
        self.generators[0].dim_k()
    }

    /// `h ∘ g ∘ h^{-1}` for every generator `g`.
    pub fn conjugate_by(&self, h: &HBiholomorphicMap) -> Result<Self> {
        Self::new(self.generators.iter().map(|g| g.conjugate_by(h)).collect::<Result<_>>()?)
    }

    fn check_operator(&self, t: &ClosedOperator) -> Result<()> {
        if (t.dim_h(), t.dim_k()) != (self.dim_h(), self.dim_k()) {
            return Err(Error::shape_mismatch((self.dim_k(), self.dim_h()), t.matrix().shape()));
        }
        Ok(())
    }
}

/// Words of bounded length applied to a starting point.
#[derive(Debug, Clone)]
pub struct Orbit {
    /// Distinct orbit points in breadth-first order; `points[0]` is the start.
    pub points: Vec<ClosedOperator>,
    /// `diameter_by_depth[k]`: diameter of the points reached by words of length `<= k`.
    pub diameter_by_depth: Vec<f64>,
    /// `radius_by_depth[k]`: largest distance from the start among those points.
    pub radius_by_depth: Vec<f64>,
    /// Set when [`MAX_ORBIT_POINTS`] cut the enumeration short.
    pub truncated: bool,
}

fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).norm()
}

/// Breadth-first enumeration of `{ w(T0) : |w| <= depth }`, merging points
/// within [`DEDUP_TOL`] (Frobenius norm, which dominates the operator norm)
/// in hat coordinates. At most [`MAX_ORBIT_POINTS`] points are kept.
pub fn orbit(group: &IsometryGroup, start: &ClosedOperator, depth: usize) -> Result<Orbit> {
    orbit_with_limit(group, start, depth, MAX_ORBIT_POINTS)
}

/// [`orbit`] with an explicit cap on the number of points.
pub fn orbit_with_limit(group: &IsometryGroup, start: &ClosedOperator, depth: usize, max_points: usize) -> Result<Orbit> {
    if depth == 0 {
        return Err(Error::InvalidArgument("orbit depth must be at least 1".into()));
    }
    if max_points == 0 {
        return Err(Error::InvalidArgument("orbit point limit must be positive".into()));
    }
    group.check_operator(start)?;
    let letters: Vec<&HBiholomorphicMap> = group.letters().collect();

    let first = chk::hat(start)?;
    // eta_{-x} for every orbit point x, so pairwise distances reuse its factors.
    let mut frames = vec![BallAutomorphism::translation(first.neg())?];
    let mut hats = vec![first];
    let mut diameter_by_depth = vec![0.0f64];
    let mut radius_by_depth = vec![0.0f64];
    let mut frontier = vec![0usize];
    let mut truncated = false;

    for _ in 0..depth {
        let images: Vec<BallPoint> = frontier
            .par_iter()
            .map(|&i| letters.iter().map(|g| g.apply_hat(&hats[i])).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();

        let level_start = hats.len();
        let mut next = Vec::new();
        for image in images {
            if hats.iter().any(|h| frobenius_distance(h.matrix(), image.matrix()) <= DEDUP_TOL) {
                continue;
            }
            if hats.len() >= max_points {
                truncated = true;
                break;
            }
            frames.push(BallAutomorphism::translation(image.neg())?);
            hats.push(image);
            next.push(hats.len() - 1);
        }

        let (mut diam, mut rad) = (*diameter_by_depth.last().unwrap(), *radius_by_depth.last().unwrap());
        let fresh: Vec<(f64, f64)> = (level_start..hats.len())
            .into_par_iter()
            .map(|i| {
                let mut far = 0.0f64;
                for j in 0..i {
                    far = far.max(ball::norm_to_distance(linalg::op_norm(&frames[i].apply_matrix(&hats[j])?))?);
                }
                let from_start = ball::norm_to_distance(linalg::op_norm(&frames[0].apply_matrix(&hats[i])?))?;
                Ok((far, from_start))
            })
            .collect::<Result<_>>()?;
        for (far, from_start) in fresh {
            diam = diam.max(far);
            rad = rad.max(from_start);
        }
        diameter_by_depth.push(diam);
        radius_by_depth.push(rad);
        frontier = next;
    }
    let mut points = vec![start.clone()];
    for h in &hats[1..] {
        points.push(chk::unhat(h)?);
    }
    Ok(Orbit { points, diameter_by_depth, radius_by_depth, truncated })
}

/// Default plateau tolerance: `1e-3 (1 + diameter)`.
pub fn default_growth_tol(diameter: f64) -> f64 {
    1e-3 * (1.0 + diameter)
}

/// Plateau test on an orbit's diameter sequence: the increase over the last
/// quarter of the depths must stay below `growth_tol` (defaulting to
/// [`default_growth_tol`] of the final diameter).
pub fn plateaus(orbit: &Orbit, growth_tol: Option<f64>) -> bool {
    let d = &orbit.diameter_by_depth;
    let depth = d.len() - 1;
    let quarter = depth.div_ceil(4).max(1);
    let last = d[depth];
    let tol = growth_tol.unwrap_or_else(|| default_growth_tol(last));
    last - d[depth - quarter] < tol
}

/// Heuristic: does the orbit of `start` look bounded at this sampling depth?
pub fn is_orbit_bounded(
    group: &IsometryGroup,
    start: &ClosedOperator,
    depth: usize,
    growth_tol: Option<f64>,
) -> Result<bool> {
    if depth < 4 {
        return Err(Error::InvalidArgument("boundedness test needs depth >= 4".into()));
    }
    Ok(plateaus(&orbit(group, start, depth)?, growth_tol))
}

/// `max_i d(g_i P, P)` over the generators.
pub fn fixed_point_residual(group: &IsometryGroup, p: &ClosedOperator) -> Result<f64> {
    let ds = group
        .generators
        .par_iter()
        .map(|g| chk::distance(&g.apply(p)?, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ds.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone)]
pub struct FixedPointOptions {
    /// Word length of the orbit sample used for the seed and the boundedness check.
    pub seed_depth: usize,
    pub growth_tol: Option<f64>,
    /// Tolerance of the Chebyshev center of the orbit sample.
    pub seed_center_tol: f64,
    /// Tolerance of the Chebyshev centers inside the iteration.
    pub center_tol: f64,
    pub center_max_iter: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            seed_depth: 4,
            growth_tol: None,
            seed_center_tol: convexity::DEFAULT_CENTER_TOL,
            center_tol: 1e-12,
            center_max_iter: convexity::DEFAULT_CENTER_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub point: ClosedOperator,
    pub residual: f64,
    pub iterations: usize,
    /// `residual <= tol` was reached.
    pub converged: bool,
    /// Outcome of the orbit plateau test on the seed sample.
    pub orbit_bounded: bool,
}

/// Searches for a common fixed point of the group's generators.
///
/// Seeds at the Chebyshev center of the orbit sample of `start`, then
/// repeatedly replaces `P` by the Chebyshev center of
/// `{P} ∪ {g_i P} ∪ {g_i^{-1} P}`. Returns the best point found; the caller
/// inspects `converged` and `orbit_bounded`.
pub fn find_fixed_point(
    group: &IsometryGroup,
    start: &ClosedOperator,
    tol: f64,
    max_iter: usize,
    options: &FixedPointOptions,
) -> Result<FixedPoint> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    group.check_operator(start)?;
    let sample = orbit(group, start, options.seed_depth.max(4))?;
    let orbit_bounded = plateaus(&sample, options.growth_tol);

    let seed_config = FiniteConfiguration::new(sample.points)?;
    let mut p = convexity::chebyshev_center(&seed_config, options.seed_center_tol, options.center_max_iter)?.center;
    let mut residual = fixed_point_residual(group, &p)?;
    let mut best = FixedPoint { point: p.clone(), residual, iterations: 0, converged: residual <= tol, orbit_bounded };

    for k in 0..max_iter {
        if residual <= tol {
            break;
        }
        let mut neighbourhood = vec![p.clone()];
        for g in group.letters() {
            neighbourhood.push(g.apply(&p)?);
        }
        let config = FiniteConfiguration::new(neighbourhood)?;
        p = convexity::chebyshev_center(&config, options.center_tol, options.center_max_iter)?.center;
        residual = fixed_point_residual(group, &p)?;
        best.iterations = k + 1;
        if residual < best.residual {
            best.point = p.clone();
            best.residual = residual;
        }
    }
    best.converged = best.residual <= tol;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, C64};
    use approx::assert_abs_diff_eq;

    fn scalar_translation(a: f64) -> HBiholomorphicMap {
        HBiholomorphicMap::new(BallAutomorphism::translation(BallPoint::scalar(C64::new(a, 0.0)).unwrap()).unwrap())
    }

    #[test]
    fn identity_map_fixes_everything() {
        let t = ClosedOperator::scalar(C64::new(0.7, -0.2));
        let g = HBiholomorphicMap::identity(1, 1);
        let image = apply_map(&g, &t).unwrap();
        assert!((image.matrix() - t.matrix()).norm() < 1e-14);
    }

    #[test]
    fn scalar_translation_of_zero() {
        let image = apply_map(&scalar_translation(0.3), &ClosedOperator::zero(1, 1)).unwrap();
        assert_abs_diff_eq!(image.matrix()[(0, 0)].re, 0.31448545, epsilon = 1e-8);
        assert_abs_diff_eq!(image.matrix()[(0, 0)].re, 0.3 / 0.91f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn rotation_fixes_zero() {
        let u = linalg::diag(&[C64::new(0.0, 1.0), C64::new(-1.0, 0.0)]);
        let g = HBiholomorphicMap::new(BallAutomorphism::rotation(u, linalg::identity(1)).unwrap());
        let zero = ClosedOperator::zero(2, 1);
        assert_eq!(apply_map(&g, &zero).unwrap(), zero);
    }

    #[test]
    fn identity_group_orbit_is_a_point() {
        let group = IsometryGroup::new(vec![HBiholomorphicMap::identity(1, 1)]).unwrap();
        let t = ClosedOperator::scalar(C64::new(0.4, 0.1));
        let orb = orbit(&group, &t, 3).unwrap();
        assert_eq!(orb.points.len(), 1);
        assert!(orb.diameter_by_depth.iter().all(|&d| d == 0.0));
        let fp = find_fixed_point(&group, &t, 1e-9, 10, &FixedPointOptions::default()).unwrap();
        assert_eq!(fp.point, t);
        assert_eq!(fp.residual, 0.0);
        assert!(fp.converged);
    }

    #[test]
    fn translation_orbit_grows_linearly() {
        let group = IsometryGroup::new(vec![scalar_translation(0.5)]).unwrap();
        let orb = orbit(&group, &ClosedOperator::zero(1, 1), 5).unwrap();
        for k in 1..=5 {
            assert_abs_diff_eq!(orb.radius_by_depth[k], k as f64 * 0.5f64.atanh(), epsilon = 1e-9);
            assert_abs_diff_eq!(orb.diameter_by_depth[k], 2.0 * k as f64 * 0.5f64.atanh(), epsilon = 1e-9);
        }
        assert!(!plateaus(&orb, None));
    }

    #[test]
    fn orbit_rejects_bad_arguments() {
        let group = IsometryGroup::new(vec![scalar_translation(0.5)]).unwrap();
        assert!(orbit(&group, &ClosedOperator::zero(1, 1), 0).is_err());
        assert!(orbit(&group, &ClosedOperator::zero(2, 1), 2).is_err());
        assert!(is_orbit_bounded(&group, &ClosedOperator::zero(1, 1), 3, None).is_err());
        assert!(IsometryGroup::new(vec![]).is_err());
    }
}
