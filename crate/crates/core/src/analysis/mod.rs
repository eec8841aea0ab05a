//! Dimension estimators, exponent bookkeeping and scaling-law fits.

mod boxcount;
mod cells;
mod exponents;
mod fit;
mod prune;
mod quantization;

pub use boxcount::{box_counting_dimension, MASS_FRACTION};
pub use cells::cell_masses;
pub use exponents::{dim_bounds_from_beta, lower_exponent, upper_exponent};
pub use fit::{local_energies, local_energy_exponent, ScalingFit};
pub use prune::{local_mass_ok, prune_alpha_regular, regularity_radii};
pub use quantization::{quantization_check, QuantizationCheck, MULTISTARTS};
