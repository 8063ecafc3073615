//! Admissible sets, radius functionals and Chebyshev centers of finite
//! configurations.

use rayon::prelude::*;

use crate::chk::{self, ClosedOperator};
use crate::error::{Error, Result};

/// Slack allowed on ball membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Below this diameter a configuration counts as a single point.
pub const DEGENERATE_DIAMETER: f64 = 1e-9;

pub const DEFAULT_CENTER_TOL: f64 = 1e-9;
pub const DEFAULT_CENTER_MAX_ITER: usize = 10_000;

/// Consecutive non-improving steps that end the Chebyshev iteration.
const STALL_STEPS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedBall {
    pub center: ClosedOperator,
    pub radius: f64,
}

impl ClosedBall {
    pub fn new(center: ClosedOperator, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::InvalidArgument(format!("ball radius must be finite and nonnegative, got {radius}")));
        }
        Ok(ClosedBall { center, radius })
    }
}

/// Intersection of finitely many closed balls.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleSet {
    balls: Vec<ClosedBall>,
}

impl AdmissibleSet {
    pub fn new(balls: Vec<ClosedBall>) -> Result<Self> {
        let first = balls
            .first()
            .ok_or_else(|| Error::InvalidArgument("admissible set needs at least one ball".into()))?;
        for b in &balls {
            first.center.check_same_shape(&b.center)?;
        }
        Ok(AdmissibleSet { balls })
    }

    pub fn balls(&self) -> &[ClosedBall] {
        &self.balls
    }

    /// Intersects with one more ball.
    pub fn with_ball(mut self, ball: ClosedBall) -> Result<Self> {
        self.balls[0].center.check_same_shape(&ball.center)?;
        self.balls.push(ball);
        Ok(self)
    }
}

/// `true` iff `d(x, c) <= r + MEMBERSHIP_TOL` for every ball `(c, r)`.
pub fn contains(set: &AdmissibleSet, x: &ClosedOperator) -> Result<bool> {
    for b in &set.balls {
        if chk::distance(x, &b.center)? > b.radius + MEMBERSHIP_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A nonempty finite set of operators of one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteConfiguration {
    points: Vec<ClosedOperator>,
}

impl FiniteConfiguration {
    pub fn new(points: Vec<ClosedOperator>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidArgument("configuration must be nonempty".into()))?;
        for p in &points {
            first.check_same_shape(p)?;
        }
        Ok(FiniteConfiguration { points })
    }

    pub fn points(&self) -> &[ClosedOperator] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Radius of the 0-centered ball in hat coordinates matching the d-ball of
/// radius `r`: `d(T, 0) <= r` iff `|hat T| <= tanh r`.
pub fn hat_ball_radius(r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be nonnegative, got {r}")));
    }
    Ok(r.tanh())
}

/// Distances from `a` to every point, in order.
fn distances_from(a: &ClosedOperator, config: &FiniteConfiguration) -> Result<Vec<f64>> {
    config.points.par_iter().map(|p| chk::distance(a, p)).collect()
}

/// `r_a(F) = max_x d(a, x)`.
pub fn radius_at(a: &ClosedOperator, config: &FiniteConfiguration) -> Result<f64> {
    if let Some(p) = config.points.first() {
        a.check_same_shape(p)?;
    }
    Ok(distances_from(a, config)?.into_iter().fold(0.0, f64::max))
}

/// Largest pairwise distance.
pub fn diameter(config: &FiniteConfiguration) -> Result<f64> {
    let pts = &config.points;
    let per_row: Vec<f64> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            pts[i + 1..]
                .iter()
                .map(|q| chk::distance(&pts[i], q))
                .try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))
        })
        .collect::<Result<_>>()?;
    Ok(per_row.into_iter().fold(0.0, f64::max))
}

/// Outcome of the Chebyshev-center iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevCenter {
    /// Best center seen.
    pub center: ClosedOperator,
    /// `radius_at(center, F)`.
    pub radius: f64,
    pub iterations: usize,
    /// `false` when `max_iter` ran out before the stopping rule fired.
    pub converged: bool,
}

/// Approximate minimizer of `radius_at(., F)`.
///
/// Starts from `barycenter(F)`. Step `k` moves the center toward the farthest
/// point (lowest index on ties) along the geodesic, by the fraction
/// `1 / (k + 2)`. The iteration stops once the best radius has improved by
/// less than `tol` over `STALL_STEPS` consecutive steps, and returns the best
/// center seen.
pub fn chebyshev_center(config: &FiniteConfiguration, tol: f64, max_iter: usize) -> Result<ChebyshevCenter> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut center = chk::barycenter(&config.points)?;
    let mut dists = distances_from(&center, config)?;
    let mut best = ChebyshevCenter {
        radius: dists.iter().copied().fold(0.0, f64::max),
        center: center.clone(),
        iterations: 0,
        converged: true,
    };
    if best.radius == 0.0 {
        return Ok(best);
    }
    let mut stalled = 0;
    for k in 0..max_iter {
        let far = farthest(&dists);
        center = chk::geodesic_point(&center, &config.points[far], 1.0 / (k as f64 + 2.0))?;
        dists = distances_from(&center, config)?;
        let radius = dists.iter().copied().fold(0.0, f64::max);
        if best.radius - radius >= tol {
            stalled = 0;
        } else {
            stalled += 1;
        }
        if radius < best.radius {
            best.radius = radius;
            best.center = center.clone();
        }
        best.iterations = k + 1;
        if stalled >= STALL_STEPS {
            return Ok(best);
        }
    }
    best.converged = false;
    Ok(best)
}

fn farthest(dists: &[f64]) -> usize {
    let mut idx = 0;
    for (i, &d) in dists.iter().enumerate() {
        if d > dists[idx] {
            idx = i;
        }
    }
    idx
}

/// A point of the configuration's hull that is not diametral, with the gap
/// `diameter(F) - radius_at(point, F)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonDiametralWitness {
    pub point: ClosedOperator,
    pub margin: f64,
    pub diameter: f64,
    pub radius: f64,
}

pub fn find_nondiametral(config: &FiniteConfiguration) -> Result<NonDiametralWitness> {
    let diam = diameter(config)?;
    if diam <= DEGENERATE_DIAMETER {
        return Err(Error::DegenerateConfiguration { diameter: diam });
    }
    let cc = chebyshev_center(config, DEFAULT_CENTER_TOL, DEFAULT_CENTER_MAX_ITER)?;
    Ok(NonDiametralWitness { margin: diam - cc.radius, point: cc.center, diameter: diam, radius: cc.radius })
}
