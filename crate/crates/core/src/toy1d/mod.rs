//! The two-dimensional toy model: one horizontal dimension, perimeter
//! counting branches, boundary penalty `λ W²(μ_{±T}, 1)`.

mod cone;
mod equipartition;
mod full;
mod lagrangian;
mod segments;
mod subtree;

pub use cone::{check_cone_property, cone_bounds, ConeViolation, CONE_TOL};
pub use equipartition::{equipartition_residual, equipartition_residual_with_power, Equipartition};
pub use full::{solve_toy, symmetric_plan, ToySolution};
pub use lagrangian::{lagrangian_energy, lagrangian_energy_of_plan, FieldNode, LagrangianField};
pub use segments::{lagrangian_lower_bound, optimal_segment_count, segment_energy};
pub use subtree::{
    branching_threshold, child_threshold, rescale, solve_e, SubtreeProblem, SubtreeSolution, SubtreeTree,
};
