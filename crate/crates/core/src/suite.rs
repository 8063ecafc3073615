//! Seeded property checks behind the `check` command.
//!
//! Every property draws its instances from its own [`Sampler`], seeded from
//! the run seed and the property's position in the table, so results do not
//! depend on which suites run or in what order. Each property reports the
//! worst value of its defect over all samples and passes when that value is
//! at most the tolerance.

use crate::ball::{self, BallAutomorphism, BallPoint};
use crate::chk::{self, ClosedOperator};
use crate::convexity::{self, AdmissibleSet, ClosedBall, FiniteConfiguration};
use crate::dynamics::{self, FixedPointOptions, HBiholomorphicMap, IsometryGroup};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::oracles::{self, Sampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Metric,
    Ball,
    Convexity,
    Dynamics,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Metric => "metric",
            Suite::Ball => "ball",
            Suite::Convexity => "convexity",
            Suite::Dynamics => "dynamics",
            Suite::All => "all",
        }
    }

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metric" => Ok(Suite::Metric),
            "ball" => Ok(Suite::Ball),
            "convexity" => Ok(Suite::Convexity),
            "dynamics" => Ok(Suite::Dynamics),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidArgument(format!("unknown suite `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub suite: &'static str,
    pub name: &'static str,
    pub samples: usize,
    /// Largest defect seen; NaN if the property raised an error.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub error: Option<String>,
}

type Check = fn(&mut Sampler, usize) -> Result<f64>;

struct Property {
    suite: Suite,
    name: &'static str,
    tolerance: f64,
    /// Samples used per requested sample, for the expensive properties.
    divisor: usize,
    check: Check,
}

const fn prop(suite: Suite, name: &'static str, tolerance: f64, divisor: usize, check: Check) -> Property {
    Property { suite, name, tolerance, divisor, check }
}

const PROPERTIES: &[Property] = &[
    prop(Suite::Metric, "symmetry", 1e-9, 1, symmetry),
    prop(Suite::Metric, "identity", 1e-9, 1, identity),
    prop(Suite::Metric, "triangle_inequality", 1e-9, 1, triangle),
    prop(Suite::Metric, "formula_equivalence", 1e-9, 1, formula_equivalence),
    prop(Suite::Metric, "scalar_oracle", 1e-10, 1, scalar_oracle),
    prop(Suite::Metric, "diagonal_oracle", 1e-9, 1, diagonal_oracle),
    prop(Suite::Metric, "doubling", 1e-9, 1, doubling),
    prop(Suite::Metric, "geodesic_parameterization", 1e-8, 1, geodesic_parameterization),
    prop(Suite::Metric, "barycenter_inequality", 1e-8, 5, barycenter_inequality),
    prop(Suite::Metric, "ball_radius_law", 0.0, 1, ball_radius_law),
    prop(Suite::Ball, "psi_identities", 1e-9, 1, psi_identities),
    prop(Suite::Ball, "mobius_isometry", 1e-9, 1, mobius_isometry),
    prop(Suite::Ball, "inverse_law", 1e-9, 1, inverse_law),
    prop(Suite::Ball, "composition_law", 1e-9, 1, composition_law),
    prop(Suite::Ball, "symmetrize_antipodal", 1e-8, 1, symmetrize_antipodal),
    prop(Suite::Ball, "midpoint_routes_agree", 1e-8, 1, midpoint_routes_agree),
    prop(Suite::Ball, "hat_round_trip", 1e-9, 1, hat_round_trip),
    prop(Suite::Convexity, "two_point_center", 1e-6, 5, two_point_center),
    prop(Suite::Convexity, "normal_structure", 0.999, 5, normal_structure),
    prop(Suite::Convexity, "midpoint_in_lens", 0.0, 1, midpoint_in_lens),
    prop(Suite::Convexity, "center_beats_barycenter", 1e-12, 5, center_beats_barycenter),
    prop(Suite::Dynamics, "hbiholomorphic_isometry", 1e-9, 1, hbiholomorphic_isometry),
    prop(Suite::Dynamics, "hat_intertwining", 1e-10, 1, hat_intertwining),
    prop(Suite::Dynamics, "rotation_orbit_bound", 1e-8, 10, rotation_orbit_bound),
    prop(Suite::Dynamics, "conjugation_covariance", 1e-8, 1, conjugation_covariance),
    prop(Suite::Dynamics, "rotation_fixed_point", 1e-6, 10, rotation_fixed_point),
    prop(Suite::Dynamics, "conjugated_fixed_point", 1e-5, 10, conjugated_fixed_point),
    prop(Suite::Dynamics, "translation_growth", 1e-6, 10, translation_growth),
];

/// Runs every property of `suite` with `samples` instances each (fewer for the
/// expensive ones, never less than one).
pub fn run(suite: Suite, samples: usize, seed: u64) -> Vec<PropertyOutcome> {
    PROPERTIES
        .iter()
        .enumerate()
        .filter(|(_, p)| suite.includes(p.suite))
        .map(|(index, p)| {
            let count = samples.div_ceil(p.divisor).max(1);
            let mut sampler = Sampler::new(property_seed(seed, index));
            let (worst, error) = match (p.check)(&mut sampler, count) {
                Ok(w) => (w, None),
                Err(e) => (f64::NAN, Some(e.to_string())),
            };
            PropertyOutcome {
                suite: p.suite.name(),
                name: p.name,
                samples: count,
                worst,
                tolerance: p.tolerance,
                passed: worst <= p.tolerance,
                error,
            }
        })
        .collect()
}

/// Seed of the property at `index`: `seed + (index + 1) * 0x9E3779B97F4A7C15` (wrapping).
pub fn property_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

const MAX_HAT: f64 = oracles::MAX_SAMPLE_HAT_NORM;

/// Dimensions `(dim H, dim K)` with `dim H <= 8`, `dim K <= 3`.
fn dims(s: &mut Sampler) -> (usize, usize) {
    (1 + s.index(8), 1 + s.index(3))
}

fn ops<const N: usize>(s: &mut Sampler) -> Result<[ClosedOperator; N]> {
    let (m, n) = dims(s);
    let v: Vec<ClosedOperator> = (0..N).map(|_| s.operator(m, n, MAX_HAT)).collect::<Result<_>>()?;
    Ok(v.try_into().expect("length N"))
}

fn worst_of(count: usize, mut f: impl FnMut() -> Result<f64>) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..count {
        let v = f()?;
        if v.is_nan() {
            return Ok(f64::NAN);
        }
        worst = worst.max(v);
    }
    Ok(worst)
}

fn symmetry(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [t, r] = ops(s)?;
        Ok((chk::distance(&t, &r)? - chk::distance(&r, &t)?).abs())
    })
}

fn identity(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [t] = ops(s)?;
        Ok(chk::distance_lr(&t, &t)?.max(chk::distance(&t, &t)?))
    })
}

fn triangle(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [t, u, r] = ops(s)?;
        Ok(chk::distance(&t, &r)? - chk::distance(&t, &u)? - chk::distance(&u, &r)?)
    })
}

fn formula_equivalence(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [t, r] = ops(s)?;
        let k = ball::kobayashi(&chk::hat(&t)?, &chk::hat(&r)?)?;
        Ok((chk::distance_lr(&t, &r)? - k).abs())
    })
}

fn scalar_oracle(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let (t, r) = (s.scalar_operator(MAX_HAT), s.scalar_operator(MAX_HAT));
        let d = chk::distance(&ClosedOperator::scalar(t), &ClosedOperator::scalar(r))?;
        Ok((d - oracles::scalar_distance(t, r)).abs())
    })
}

fn diagonal_oracle(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let len = 1 + s.index(3);
        let t: Vec<C64> = (0..len).map(|_| s.scalar_operator(MAX_HAT)).collect();
        let r: Vec<C64> = (0..len).map(|_| s.scalar_operator(MAX_HAT)).collect();
        let d = chk::distance(&ClosedOperator::new(linalg::diag(&t))?, &ClosedOperator::new(linalg::diag(&r))?)?;
        Ok((d - oracles::diagonal_distance(&t, &r)?).abs())
    })
}

fn doubling(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [x] = ops(s)?;
        let zero = ClosedOperator::zero(x.dim_h(), x.dim_k());
        Ok((chk::distance(&x, &x.neg())? - 2.0 * chk::distance(&x, &zero)?).abs())
    })
}

fn geodesic_parameterization(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [t, r] = ops(s)?;
        let d = chk::distance(&t, &r)?;
        let mut w = 0.0f64;
        for frac in [0.25, 0.5, 0.75] {
            let g = chk::geodesic_point(&t, &r, frac)?;
            w = w.max((chk::distance(&t, &g)? - frac * d).abs());
            w = w.max((chk::distance(&g, &r)? - (1.0 - frac) * d).abs());
        }
        Ok(w)
    })
}

fn barycenter_inequality(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let (m, n) = dims(s);
        let size = [2, 4, 8][s.index(3)];
        let pts: Vec<ClosedOperator> = (0..size).map(|_| s.operator(m, n, MAX_HAT)).collect::<Result<_>>()?;
        let q = chk::barycenter(&pts)?;
        let mut w = f64::NEG_INFINITY;
        for _ in 0..5 {
            let x = s.operator(m, n, MAX_HAT)?;
            let mut mean = 0.0;
            for p in &pts {
                mean += chk::distance(p, &x)?;
            }
            w = w.max(chk::distance(&q, &x)? - mean / size as f64);
        }
        Ok(w)
    })
}

/// Number of samples on which `d(T, 0) <= r` and `|hat T| <= tanh r` disagree.
fn ball_radius_law(s: &mut Sampler, count: usize) -> Result<f64> {
    let mut mismatches = 0usize;
    for _ in 0..count {
        let r: f64 = [0.25, 0.5, 1.0][s.index(3)];
        let (m, n) = dims(s);
        // Relative offset of the hat norm from tanh r, on either side.
        let offset = 10f64.powf(s.uniform_in(-6.0, -1.0)) * if s.uniform() < 0.5 { -1.0 } else { 1.0 };
        let w = s.gaussian_matrix(m, n);
        let target = r.tanh() * (1.0 + offset);
        let x = BallPoint::new(w.scale(target / linalg::op_norm(&w)))?;
        let t = chk::unhat(&x)?;
        let inside_d = chk::distance(&t, &ClosedOperator::zero(m, n))? <= r;
        let inside_hat = chk::hat(&t)?.norm() <= convexity::hat_ball_radius(r)?;
        if inside_d != inside_hat || inside_d != (offset < 0.0) {
            mismatches += 1;
        }
    }
    Ok(mismatches as f64)
}

fn diff_norm(a: &BallPoint, b: &BallPoint) -> f64 {
    linalg::op_norm(&(a.matrix() - b.matrix()))
}

fn psi_identities(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [t] = ops(s)?;
        let (m, n) = (t.dim_h(), t.dim_k());
        let t_hat = chk::hat(&t)?;
        let probe = s.ball_point(m, n, MAX_HAT)?;
        let zero = BallPoint::zero(m, n);
        let a = chk::psi(&t, &t_hat)?.norm();
        let b = diff_norm(&chk::psi(&t, &zero)?, &t_hat.neg());
        let c = diff_norm(&chk::psi(&t.neg(), &chk::psi(&t, &probe)?)?, &probe);
        Ok(a.max(b).max(c))
    })
}

fn mobius_isometry(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let (m, n) = dims(s);
        let g = s.automorphism(m, n, 0.9)?;
        let (x, y) = (s.ball_point(m, n, MAX_HAT)?, s.ball_point(m, n, MAX_HAT)?);
        Ok((ball::kobayashi(&g.apply(&x)?, &g.apply(&y)?)? - ball::kobayashi(&x, &y)?).abs())
    })
}

fn inverse_law(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let (m, n) = dims(s);
        let g = s.automorphism(m, n, 0.9)?;
        let x = s.ball_point(m, n, MAX_HAT)?;
        let inv = g.inverse()?;
        Ok(diff_norm(&inv.apply(&g.apply(&x)?)?, &x).max(diff_norm(&g.apply(&inv.apply(&x)?)?, &x)))
    })
}

fn composition_law(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let (m, n) = dims(s);
        let g = s.automorphism(m, n, 0.9)?;
        let h = s.automorphism(m, n, 0.9)?;
        let x = s.ball_point(m, n, MAX_HAT)?;
        Ok(diff_norm(&g.compose(&h)?.apply(&x)?, &g.apply(&h.apply(&x)?)?))
    })
}

fn symmetrize_antipodal(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [t, r] = ops(s)?;
        let phi = chk::symmetrize(&t, &r)?;
        let sum = phi.apply(&chk::hat(&t)?)?.into_matrix() + phi.apply(&chk::hat(&r)?)?.into_matrix();
        Ok(linalg::op_norm(&sum))
    })
}

fn midpoint_routes_agree(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [t, r] = ops(s)?;
        chk::distance(&chk::midpoint(&t, &r)?, &chk::midpoint_by_symmetry(&t, &r)?)
    })
}

fn hat_round_trip(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let (m, n) = dims(s);
        let x = s.ball_point(m, n, MAX_HAT)?;
        Ok(diff_norm(&chk::hat(&chk::unhat(&x)?)?, &x))
    })
}

fn two_point_center(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [t, r] = ops(s)?;
        let d = chk::distance(&t, &r)?;
        let f = FiniteConfiguration::new(vec![t, r])?;
        let cc = convexity::chebyshev_center(&f, convexity::DEFAULT_CENTER_TOL, convexity::DEFAULT_CENTER_MAX_ITER)?;
        Ok((cc.radius - d / 2.0).abs())
    })
}

/// Worst ratio `chebyshev radius / diameter`; margins must also be positive.
fn normal_structure(s: &mut Sampler, count: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < count {
        let (m, n) = dims(s);
        let size = 2 + s.index(7);
        let pts: Vec<ClosedOperator> = (0..size).map(|_| s.operator(m, n, MAX_HAT)).collect::<Result<_>>()?;
        let f = FiniteConfiguration::new(pts)?;
        if convexity::diameter(&f)? < 0.1 {
            continue;
        }
        let w = convexity::find_nondiametral(&f)?;
        if !(w.margin > 0.0) {
            return Ok(f64::INFINITY);
        }
        worst = worst.max(w.radius / w.diameter);
        done += 1;
    }
    Ok(worst)
}

/// Count of failures of `midpoint(T, S)` to lie in both balls of radius `d/2`.
fn midpoint_in_lens(s: &mut Sampler, count: usize) -> Result<f64> {
    let mut failures = 0usize;
    for _ in 0..count {
        let [t, r] = ops(s)?;
        let half = chk::distance(&t, &r)? / 2.0;
        let lens = AdmissibleSet::new(vec![ClosedBall::new(t.clone(), half)?, ClosedBall::new(r.clone(), half)?])?;
        if !convexity::contains(&lens, &chk::midpoint(&t, &r)?)? {
            failures += 1;
        }
    }
    Ok(failures as f64)
}

fn center_beats_barycenter(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let (m, n) = dims(s);
        let size = 1 + s.index(6);
        let pts: Vec<ClosedOperator> = (0..size).map(|_| s.operator(m, n, MAX_HAT)).collect::<Result<_>>()?;
        let f = FiniteConfiguration::new(pts)?;
        let cc = convexity::chebyshev_center(&f, convexity::DEFAULT_CENTER_TOL, convexity::DEFAULT_CENTER_MAX_ITER)?;
        Ok(cc.radius - convexity::radius_at(&chk::barycenter(f.points())?, &f)?)
    })
}

fn random_map(s: &mut Sampler, m: usize, n: usize) -> Result<HBiholomorphicMap> {
    Ok(HBiholomorphicMap::new(s.automorphism(m, n, 0.9)?))
}

fn hbiholomorphic_isometry(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [t, r] = ops(s)?;
        let g = random_map(s, t.dim_h(), t.dim_k())?;
        Ok((chk::distance(&g.apply(&t)?, &g.apply(&r)?)? - chk::distance(&t, &r)?).abs())
    })
}

fn hat_intertwining(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [t] = ops(s)?;
        let g = random_map(s, t.dim_h(), t.dim_k())?;
        Ok(diff_norm(&chk::hat(&g.apply(&t)?)?, &g.automorphism().apply(&chk::hat(&t)?)?))
    })
}

fn random_rotation_group(s: &mut Sampler, m: usize, n: usize) -> Result<IsometryGroup> {
    let gens = (0..2)
        .map(|_| Ok(HBiholomorphicMap::new(BallAutomorphism::rotation(s.unitary(m), s.unitary(n))?)))
        .collect::<Result<_>>()?;
    IsometryGroup::new(gens)
}

fn rotation_orbit_bound(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [t0] = ops(s)?;
        let group = random_rotation_group(s, t0.dim_h(), t0.dim_k())?;
        let orbit = dynamics::orbit(&group, &t0, 3)?;
        let bound = 2.0 * chk::distance(&t0, &ClosedOperator::zero(t0.dim_h(), t0.dim_k()))?;
        Ok(orbit.diameter_by_depth.iter().fold(f64::NEG_INFINITY, |w, &d| w.max(d - bound)))
    })
}

fn conjugation_covariance(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [p] = ops(s)?;
        let (m, n) = (p.dim_h(), p.dim_k());
        let group = IsometryGroup::new(vec![random_map(s, m, n)?, random_map(s, m, n)?])?;
        let h = random_map(s, m, n)?;
        let conj = group.conjugate_by(&h)?;
        let before = dynamics::fixed_point_residual(&group, &p)?;
        let after = dynamics::fixed_point_residual(&conj, &h.apply(&p)?)?;
        Ok((before - after).abs())
    })
}

fn rotation_fixed_point(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [t0] = ops(s)?;
        let group = IsometryGroup::new(s.finite_rotation_generators(t0.dim_h(), t0.dim_k())?)?;
        let fp = dynamics::find_fixed_point(&group, &t0, 1e-7, 200, &FixedPointOptions::default())?;
        Ok(fp.residual.max(chk::hat(&fp.point)?.norm()))
    })
}

fn conjugated_fixed_point(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let [t0, planted] = ops(s)?;
        let rotations = IsometryGroup::new(s.finite_rotation_generators(t0.dim_h(), t0.dim_k())?)?;
        let to_planted = HBiholomorphicMap::new(chk::psi_automorphism(&planted)?.inverse()?);
        let group = rotations.conjugate_by(&to_planted)?;
        let fp = dynamics::find_fixed_point(&group, &t0, 1e-7, 200, &FixedPointOptions::default())?;
        chk::distance(&fp.point, &planted)
    })
}

/// Scalar translation by `a`: radius must grow by `atanh a` per word length
/// and the orbit must be flagged unbounded.
fn translation_growth(s: &mut Sampler, count: usize) -> Result<f64> {
    worst_of(count, || {
        let a = s.uniform_in(0.2, 0.6);
        let g = HBiholomorphicMap::new(BallAutomorphism::translation(BallPoint::scalar(C64::new(a, 0.0))?)?);
        let group = IsometryGroup::new(vec![g])?;
        let orbit = dynamics::orbit(&group, &ClosedOperator::zero(1, 1), 6)?;
        if dynamics::plateaus(&orbit, None) {
            return Ok(f64::INFINITY);
        }
        let step = a.atanh();
        Ok(orbit.radius_by_depth.windows(2).fold(0.0, |w: f64, r| w.max((r[1] - r[0] - step).abs())))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let a = run(Suite::All, 3, 11);
        let b = run(Suite::All, 3, 11);
        assert_eq!(a.len(), PROPERTIES.len());
        for (x, y) in a.iter().zip(&b) {
            assert!(x.passed, "{x:?}");
            assert_eq!(x.worst.to_bits(), y.worst.to_bits());
        }
    }

    #[test]
    fn suite_filter() {
        let metric = run(Suite::Metric, 1, 0);
        assert!(metric.iter().all(|p| p.suite == "metric"));
        assert!("bogus".parse::<Suite>().is_err());
    }
}
