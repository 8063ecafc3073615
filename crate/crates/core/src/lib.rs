//! Hyperbolic metric geometry on spaces of closed operators between
//! finite-dimensional Hilbert spaces.
//!
//! The modules build on each other bottom-up:
//!
//! - [`linalg`]: dense complex kernel (operator norm, Hermitian functional
//!   calculus, polar decomposition).
//! - [`ball`]: the open unit ball of matrices, its Möbius automorphisms and
//!   Kobayashi distance.
//! - [`chk`]: operators with the invariant distance `d`, geodesics, midpoints
//!   and barycenters.
//! - [`convexity`]: admissible sets, radii, diameters, Chebyshev centers.
//! - [`dynamics`]: isometry groups, orbits and fixed points.
//! - [`oracles`]: independent scalar/diagonal ground truth and seeded samplers.
//! - [`io`] and [`suite`]: the file format and property checks behind the CLI.

pub mod ball;
pub mod chk;
pub mod convexity;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod oracles;
pub mod suite;

pub use ball::{kobayashi, poincare, BallAutomorphism, BallPoint};
pub use chk::{barycenter, distance, geodesic_point, hat, midpoint, psi, symmetrize, unhat, ClosedOperator};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
