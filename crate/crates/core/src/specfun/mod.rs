//! Special functions: gamma, normalized Bessel functions, orthogonal
//! polynomials.

pub mod bessel;
pub mod gamma;
pub mod orthopoly;

pub use bessel::{
    bessel_i_norm, bessel_i_norm_contour, bessel_i_norm_deriv, bessel_i_norm_with, bessel_i_scaled, bessel_j_norm, bessel_j_real,
    Evaluated,
};
pub use gamma::{gamma_fn, ln_gamma_pos, reciprocal_gamma_contour, rgamma};
pub use orthopoly::{gegenbauer, gegenbauer_norm, gegenbauer_norm_at_one, gegenbauer_norm_deriv, gegenbauer_norm_sum, laguerre, zonal};
