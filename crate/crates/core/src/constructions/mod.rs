//! Explicit competitors with certified energy bounds.

mod block;
mod certificate;
mod dyadic;
mod scaling;
mod shear;

pub use block::{building_block, subcell_grid, Cube};
pub use certificate::Certificate;
pub use dyadic::{discretize, dyadic_interpolation, DyadicInterpolation, DyadicSchedule, HalfCertificate, StageSupport};
pub use scaling::{
    choose_parameters, nonuniform_branching, refinement_level, uniform_branching, Parameters, Regime, ScalingPlan,
    TRACE_K_FACTOR,
};
pub use shear::{shear_competitor, ShearCompetitor};
