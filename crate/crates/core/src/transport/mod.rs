//! Periodic optimal transport: sparse discrete plans, the exact circle
//! solver, McCann interpolation and a grid proxy for the distance to Lebesgue.

mod discrete;
mod periodic1d;
mod simplex;

pub use discrete::{
    grid_measure, mccann_interpolate, sq_dist, w2_periodic_discrete, wasserstein_to_lebesgue_2d,
    wasserstein_to_lebesgue_2d_extrapolated, MAX_GRID,
};
pub use periodic1d::{w2_periodic_1d, w2_periodic_1d_cost, w2_to_lebesgue_1d, MonotoneMap};
pub use simplex::{solve_transport, SparsePlan, MASS_TOL};
