//! Shapes, parameter vectors, dense tensors and their file formats.

mod dense;
pub mod io;
pub(crate) mod params;
mod shape;

pub use dense::{cpdgen, frobenius_norm, kron, rank_one, DenseTensor};
pub use params::{unvecr, vecr, Params, Representative};
pub use shape::Shape;
