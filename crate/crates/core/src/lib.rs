pub mod brownian;
pub mod contour;
pub mod dd;
pub mod error;
pub mod heatflow;
pub mod kernels;
pub mod quadrature;
pub mod real;
pub mod scripti;
pub mod specfun;

pub use error::{Error, Result};
pub use real::Precision;
