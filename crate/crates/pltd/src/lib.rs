//! Poisson-Lie T-duality for quasitriangular Lie bialgebras.
//!
//! The crate builds the Drinfeld double of a factorisable bialgebra, the
//! two-parameter family of orthogonal splittings of the double, and the
//! sigma models on `G` and on the dual group that those splittings define.
//! Point-particle and field simulators evolve the first-order flow on the
//! double and check both factorized descriptions against each other.

pub mod bialgebra;
pub mod duality;
pub mod field;
pub mod group;
pub mod lie;
pub mod limits;
pub mod particle;
pub mod zoo;

pub use lie::{CMat, CVec, LieAlgebra, C64};
