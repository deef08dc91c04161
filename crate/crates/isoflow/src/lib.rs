//! Area-constrained geodesics in a plane metric with degenerate conformal
//! factor `F = sqrt(W)`, and the traveling waves of the bi-stable Hamiltonian
//! system they induce.
//!
//! The modules build on each other: [`potentials`] evaluates `W`, [`curves`]
//! carries the energy and momentum functionals, [`onewell`] and [`twowell`]
//! solve the constrained problems, [`series`] handles analytic wells and
//! [`wave`] turns minimizers into profiles and classifies admissible speeds.

pub mod curves;
pub mod error;
pub mod geom;
pub mod numerics;
pub mod onewell;
pub mod potentials;
pub mod series;
pub mod twowell;
pub mod wave;

pub use error::{Error, Result};
pub use geom::{Mat2, Vec2};
pub use potentials::{Potential, PotentialConfig, WellData};
