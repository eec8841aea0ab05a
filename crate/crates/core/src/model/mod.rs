//! Plans, measures and the internal energy.

mod density;
mod energy;
mod measure;
mod plan;
mod point;

pub use density::{BoxDensity, DensityBox, GridDensity, MeasureData};
pub use energy::{
    internal_energy, perimeter_power, toy_energy, torus_energy, EnergyBreakdown, ModelConfig,
};
pub use measure::{Atom, DiscreteMeasure, MERGE_TOL};
pub use plan::{BranchedPlan, Edge, Node, PlanBuilder, Violation, KIRCHHOFF_TOL};
pub use point::{displacement, periodic_distance, reduce, wrap, Tie, TorusPoint};
