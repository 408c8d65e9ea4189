//! Harmonic polynomials and the eigenfunctions
//! `Φ_{l,m}(x) = K L^{(λ_{a,m})}_l((2/a)|x|^a) e^{-|x|^a/a} h(x)` of
//! `(1/a)(|x|^{2-a}Δ - |x|^a)`.

use crate::error::{invalid, Result};
use crate::quadrature::{gauss_laguerre, sphere_rule};
use crate::specfun::{gegenbauer_norm, laguerre};

use super::DeformParams;

/// A homogeneous harmonic polynomial on `R^N`.
pub trait Harmonic: Send + Sync {
    fn degree(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
}

pub struct Constant(pub f64);

impl Harmonic for Constant {
    fn degree(&self) -> usize {
        0
    }
    fn eval(&self, _: &[f64]) -> f64 {
        self.0
    }
}

/// `x_k`.
pub struct Coordinate(pub usize);

impl Harmonic for Coordinate {
    fn degree(&self) -> usize {
        1
    }
    fn eval(&self, x: &[f64]) -> f64 {
        x[self.0]
    }
}

/// `|x|^m Č^{(N-2)/2}_m(⟨x/|x|, axis⟩)`, harmonic of degree `m`.
pub struct ZonalHarmonic {
    pub axis: Vec<f64>,
    pub m: usize,
}

impl Harmonic for ZonalHarmonic {
    fn degree(&self) -> usize {
        self.m
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            return if self.m == 0 { 1.0 } else { 0.0 };
        }
        let u = x.iter().zip(&self.axis).map(|(a, b)| a * b).sum::<f64>() / r;
        let nu = (self.axis.len() as f64 - 2.0) / 2.0;
        r.powi(self.m as i32) * gegenbauer_norm(self.m, nu, u.clamp(-1.0, 1.0))
    }
}

/// `K` with `∫ |Φ_{l,m}|^2 dx/|x|^{2-a} = 1` for the given harmonic.
///
/// Radially, with `X = (2/a)|x|^a`, the integral is
/// `(a/2)^{λ_{a,m}}/2 ∫ L_l(X)^2 X^{λ_{a,m}} e^{-X} dX`, done by Gauss–Laguerre;
/// the sphere part is `∫_{S^{N-1}} h^2` by a product rule.
pub fn eigen_norm_const(params: &DeformParams, l: usize, harmonic: &dyn Harmonic) -> Result<f64> {
    let m = harmonic.degree();
    let lam = params.lambda_am(m);
    let rule = gauss_laguerre(l + 2, lam);
    let radial: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * laguerre(l, lam, *x).powi(2)).sum::<f64>()
        * (params.a / 2.0).powf(lam)
        / 2.0;
    let (pts, wts) = sphere_rule(params.n, m + 2);
    let mean: f64 = pts.iter().zip(&wts).map(|(p, w)| w * harmonic.eval(p).powi(2)).sum();
    let sphere = mean * params.sphere_volume();
    if !(radial * sphere > 0.0) {
        return invalid("harmonic vanishes identically on the sphere");
    }
    Ok(1.0 / (radial * sphere).sqrt())
}

pub fn eigenfunction(params: &DeformParams, l: usize, harmonic: &dyn Harmonic, x: &[f64]) -> Result<f64> {
    if x.len() != params.n {
        return invalid(format!("point has dimension {}, expected N = {}", x.len(), params.n));
    }
    let k = eigen_norm_const(params, l, harmonic)?;
    Ok(k * eigen_unnormalized(params, l, harmonic, x))
}

pub(crate) fn eigen_unnormalized(params: &DeformParams, l: usize, harmonic: &dyn Harmonic, x: &[f64]) -> f64 {
    let ra = x.iter().map(|v| v * v).sum::<f64>().sqrt().powf(params.a);
    let lam = params.lambda_am(harmonic.degree());
    laguerre(l, lam, 2.0 * ra / params.a) * (-ra / params.a).exp() * harmonic.eval(x)
}

/// Second-order central difference Laplacian with fourth-order accuracy.
pub fn fd_laplacian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
    let f0 = f(x);
    let mut y = x.to_vec();
    let mut lap = 0.0;
    for k in 0..x.len() {
        let mut d = [0.0; 4];
        for (j, s) in [-2.0, -1.0, 1.0, 2.0].iter().enumerate() {
            y[k] = x[k] + s * h;
            d[j] = f(&y);
        }
        y[k] = x[k];
        lap += (-d[0] + 16.0 * d[1] - 30.0 * f0 + 16.0 * d[2] - d[3]) / (12.0 * h * h);
    }
    lap
}
