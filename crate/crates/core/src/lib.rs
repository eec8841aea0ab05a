//! Branched transport on the flat torus: energies of tree-shaped transport
//! plans, explicit competitor constructions, periodic optimal transport,
//! negative Sobolev norms and the one-dimensional toy model.
//!
//! The data model in [`model`] is generic over the floating point type (see
//! [`Scalar`]); the numerical solvers work in `f64` through the aliases below.

pub mod analysis;
pub mod constants;
pub mod constructions;
pub mod error;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod sobolev;
pub mod toy1d;
pub mod transport;

pub use error::{Error, Result};
pub use model::{
    BranchedPlan, DiscreteMeasure, EnergyBreakdown, GridDensity, BoxDensity, MeasureData,
    ModelConfig, TorusPoint, Violation,
};
pub use scalar::Scalar;

/// Torus point with `f64` coordinates.
pub type Point = TorusPoint<f64>;
/// Discrete measure with `f64` masses.
pub type Measure = DiscreteMeasure<f64>;
/// Branched plan with `f64` times, positions and fluxes.
pub type Plan = BranchedPlan<f64>;
/// Energy breakdown in `f64`.
pub type Energy = EnergyBreakdown<f64>;
/// Single precision plan, mostly useful for compact storage.
pub type PlanF32 = BranchedPlan<f32>;
