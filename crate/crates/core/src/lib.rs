//! Cyclic projections onto intersections of affine subspaces, with
//! Gearhart-Koshy line-search acceleration that works without knowing a
//! point of the intersection.
//!
//! * [`geometry`]: affine sets, projectors, reflectors.
//! * [`operators`]: cyclic, symmetric and Douglas-Rachford composites with
//!   stage traces.
//! * [`acceleration`]: step rules and the iteration driver.
//! * [`analysis`]: exact nearest points, Friederichs angles, rate constants.
//! * [`instances`]: seeded random problems.
//! * [`cli`]: problem files, experiments and CSV output behind the binary.

pub mod acceleration;
pub mod analysis;
pub mod cli;
mod error;
pub mod geometry;
pub mod instances;
mod linalg;
pub mod operators;

pub use error::{Error, Result};
pub use linalg::RANK_CUTOFF;

/// A point of the ambient space `R^d`.
pub type Vector = nalgebra::DVector<f64>;
