//! Periodic grids, spectral fields, differential operators and the Leray
//! projection.

mod fft;
mod field;
mod grid;
mod ops;

pub use fft::{fft_forward, fft_inverse};
pub use field::{physical_inner, ScalarField, TensorField, VectorField};
pub use grid::Grid;
pub use ops::{
    common_grid, dealias, divergence_ratio_tensor, divergence_ratio_vec, divergence_tensor,
    divergence_vec, gradient, project_divfree_tensor, project_divfree_vec, transfer,
    transfer_tensor, transfer_vec,
};
pub(crate) use ops::{project_in_place, project_tensor_in_place};
