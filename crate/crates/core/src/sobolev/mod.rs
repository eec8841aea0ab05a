//! Negative Sobolev norms on the torus through Fourier coefficients, their
//! scale-integral form, Riesz energies and the shear damping multiplier.

mod fourier;
mod norms;
mod riesz;

pub use fourier::{FourierTable, TailModel, MAX_TABLE_ENTRIES};
pub use norms::{
    h_negative_norm_sq, lattice_tail_sum, semigroup_norm_sq, shear_damping, shear_gap, NormSq, ZERO_MODE_TOL,
};
pub use num_complex::Complex64;
pub use riesz::riesz_energy;
