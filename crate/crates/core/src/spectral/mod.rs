//! Fourier representation of fields on the periodic box `[0, 2π)³`.

pub mod checkpoint;
pub mod fft;
mod field;
mod grid;
mod ops;

pub use field::{PhysicalVector, ScalarSpectralField, SpectralVelocity};
pub use grid::GridSpec;
pub use ops::{
    box_volume, dealias, dealias_in_place, gradient_norm_sq, laplacian_norm_sq, leray_project,
    leray_project_in_place, sobolev_norm_sq, sup_norm, sup_norm_physical, SobolevOrder,
};
pub(crate) use ops::derivative;
