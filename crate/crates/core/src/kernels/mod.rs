//! The deformation parameters and the closed-form kernels built on 𝓘:
//! the Fourier kernel `B_a`, the heat kernel `h_a`, the Laguerre
//! semigroup kernels `Λ_a` and `Λ_a^{(m)}`, plus the eigenbasis and the
//! moment polynomials of the flow.

mod eigen;
mod moments;
mod spectral;
mod weber;

pub use eigen::{eigenfunction, eigen_norm_const, fd_laplacian, Constant, Coordinate, Harmonic, ZonalHarmonic};
pub use moments::{moment_flow_f, moment_poly_coeffs, moment_poly_p, poly_flow};
pub use spectral::{heat_kernel_spectral_oracle, SpectralRule};
pub use weber::{weber_integral_check, WeberCheck};

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scripti::{script_i, script_i_series_with, Expansion, Method, RealExpansion, ScriptIArgs};
use crate::Precision;
use crate::specfun::{bessel_i_norm, gamma_fn, ln_gamma_pos};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformParams {
    pub a: f64,
    pub n: usize,
    pub lambda_a: f64,
    pub c_a: f64,
    /// `(a-1)(N-2)/2 + a`, the growth exponent of `B_a`.
    pub m_const: f64,
    pub nu: f64,
}

/// Surface area of the unit sphere `S^{d-1}` in `R^d`.
pub fn sphere_volume(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_fn(d as f64 / 2.0).expect("positive argument")
}

impl DeformParams {
    pub fn new(a: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return invalid(format!("dimension N must be at least 2, got {n}"));
        }
        if !a.is_finite() || !(a > 0.0f64.max(2.0 - n as f64)) {
            return invalid(format!("need a > max(0, 2 - N), got a = {a}, N = {n}"));
        }
        let nf = n as f64;
        let lambda_a = (nf - 2.0) / a;
        let ln_c = -(lambda_a * a.ln() + ln_gamma_pos(lambda_a + 1.0) + sphere_volume(n).ln());
        Ok(DeformParams {
            a,
            n,
            lambda_a,
            c_a: ln_c.exp(),
            m_const: (a - 1.0) * (nf - 2.0) / 2.0 + a,
            nu: (nf - 2.0) / 2.0,
        })
    }

    /// `b = 2/a`, the first argument of 𝓘 in every kernel.
    pub fn b(&self) -> f64 {
        2.0 / self.a
    }

    pub fn lambda_am(&self, m: usize) -> f64 {
        (self.n as f64 + 2.0 * m as f64 - 2.0) / self.a
    }

    pub fn sphere_volume(&self) -> f64 {
        sphere_volume(self.n)
    }

    /// `|x|^a / a`, the radial variable in which every kernel is Gamma-like.
    pub fn big_r(&self, r: f64) -> f64 {
        r.powf(self.a) / self.a
    }

    /// Inverse of [`DeformParams::big_r`].
    pub fn radius_of(&self, big_r: f64) -> f64 {
        (self.a * big_r).powf(1.0 / self.a)
    }
}

pub fn lambda_am(params: &DeformParams, m: usize) -> f64 {
    params.lambda_am(m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub omega: Vec<f64>,
}

impl PolarPoint {
    pub fn new(r: f64, omega: Vec<f64>) -> Result<Self> {
        let norm: f64 = omega.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(r >= 0.0) || !r.is_finite() {
            return invalid(format!("radius must be finite and >= 0, got {r}"));
        }
        if (norm - 1.0).abs() > 1e-12 {
            return invalid(format!("direction must be a unit vector, |omega| = {norm}"));
        }
        Ok(PolarPoint { r, omega })
    }

    /// Polar form of a Cartesian point; the origin gets direction `e_1`.
    pub fn from_cartesian(x: &[f64]) -> Result<Self> {
        if x.is_empty() {
            return invalid("empty point");
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !r.is_finite() {
            return invalid("non-finite coordinates");
        }
        let omega = if r == 0.0 {
            let mut e = vec![0.0; x.len()];
            e[0] = 1.0;
            e
        } else {
            x.iter().map(|v| v / r).collect()
        };
        Ok(PolarPoint { r, omega })
    }

    pub fn cartesian(&self) -> Vec<f64> {
        self.omega.iter().map(|w| w * self.r).collect()
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }
}

/// `⟨ω, μ⟩`, clamped to `[-1, 1]`.
pub fn cos_angle(x: &PolarPoint, y: &PolarPoint) -> f64 {
    x.omega.iter().zip(&y.omega).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0)
}

fn check_dims(params: &DeformParams, pts: &[&PolarPoint]) -> Result<()> {
    for p in pts {
        if p.dim() != params.n {
            return invalid(format!("point has dimension {}, expected N = {}", p.dim(), params.n));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    pub value: Complex64,
    pub method: Method,
    pub terms: usize,
    pub err_estimate: f64,
}

/// `B_a(rω, sμ) = 𝓘(2/a, (N-2)/2, -2i(rs)^{a/2}/a, ⟨ω,μ⟩)`.
pub fn fourier_kernel(params: &DeformParams, x: &PolarPoint, y: &PolarPoint) -> Result<KernelEval> {
    check_dims(params, &[x, y])?;
    let w = Complex64::new(0.0, -2.0 * (x.r * y.r).powf(params.a / 2.0) / params.a);
    let r = script_i(&ScriptIArgs::new(params.b(), params.nu, w, cos_angle(x, y))?)?;
    Ok(KernelEval { value: r.value, method: r.method, terms: r.terms_or_nodes, err_estimate: r.err_estimate })
}

/// `h_a(rω, sμ; t)` as a function of `u = ⟨ω, μ⟩` at fixed radii and time.
#[derive(Clone, Debug)]
pub struct HeatRadial {
    /// `t^{-(λ_a+1)} e^{-(√R - √S)²/t}`; the `e^{-w}` of the expansion is
    /// folded in.
    pub prefactor: f64,
    pub expansion: RealExpansion,
}

impl HeatRadial {
    pub fn new(params: &DeformParams, r: f64, s: f64, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return invalid(format!("heat kernel time must be positive, got {t}"));
        }
        if !(r >= 0.0 && s >= 0.0) {
            return invalid(format!("radii must be >= 0, got {r}, {s}"));
        }
        let (br, bs) = (params.big_r(r), params.big_r(s));
        let w = 2.0 * (br * bs).sqrt() / t;
        let d = br.sqrt() - bs.sqrt();
        let prefactor = (-(params.lambda_a + 1.0) * t.ln() - d * d / t).exp();
        Ok(HeatRadial { prefactor, expansion: RealExpansion::real(params.b(), params.nu, w)? })
    }

    pub fn at(&self, u: f64) -> f64 {
        if self.prefactor == 0.0 {
            return 0.0;
        }
        self.prefactor * self.expansion.eval(u.clamp(-1.0, 1.0))
    }
}

/// `h_a(x, y; t) = t^{-(λ_a+1)} e^{-(r^a+s^a)/(at)} 𝓘(2/a, (N-2)/2, 2(rs)^{a/2}/(at), ⟨ω,μ⟩)`.
pub fn heat_kernel(params: &DeformParams, x: &PolarPoint, y: &PolarPoint, t: f64) -> Result<f64> {
    Ok(heat_kernel_eval(params, x, y, t)?.value.re)
}

// The f64 Gegenbauer sum is trusted while it keeps six digits; past that
// (far tails, u near -1) the point is redone by the series in double-double,
// which holds relative accuracy up to about this w.
const SUM_DIGITS_KEPT: f64 = 1e-6;
const DD_SERIES_MAX_W: f64 = 80.0;

pub fn heat_kernel_eval(params: &DeformParams, x: &PolarPoint, y: &PolarPoint, t: f64) -> Result<KernelEval> {
    check_dims(params, &[x, y])?;
    let hr = HeatRadial::new(params, x.r, y.r, t)?;
    let u = cos_angle(x, y);
    let scaled = hr.expansion.eval(u);
    let bound = hr.expansion.abs_bound();
    let w = hr.expansion.log_scale;
    if scaled.abs() >= SUM_DIGITS_KEPT * bound || w > DD_SERIES_MAX_W || hr.prefactor == 0.0 {
        return Ok(KernelEval {
            value: Complex64::new(hr.prefactor * scaled, 0.0),
            method: Method::Series,
            terms: hr.expansion.coeffs.len(),
            err_estimate: 1e-16 * hr.prefactor * bound * hr.expansion.coeffs.len() as f64,
        });
    }
    let args = ScriptIArgs::new(params.b(), params.nu, Complex64::new(w, 0.0), u)?;
    let r = script_i_series_with(&args, 1e-15, Precision::DoubleDouble)?;
    let lead = -(params.lambda_a + 1.0) * t.ln() - (params.big_r(x.r) + params.big_r(y.r)) / t;
    let scale = lead.exp();
    Ok(KernelEval {
        value: Complex64::new(scale * r.value.re, 0.0),
        method: r.method,
        terms: r.terms_or_nodes,
        err_estimate: scale * r.err_estimate,
    })
}

/// Heat kernel at complex time `t` with `Re t > 0`, through the complex
/// Gegenbauer expansion.
pub fn heat_kernel_complex(params: &DeformParams, x: &PolarPoint, y: &PolarPoint, t: Complex64) -> Result<Complex64> {
    check_dims(params, &[x, y])?;
    if !(t.re > 0.0) {
        return invalid(format!("complex time needs Re t > 0, got {t}"));
    }
    let (br, bs) = (params.big_r(x.r), params.big_r(y.r));
    let w = 2.0 * (br * bs).sqrt() / t;
    let e = Expansion::general(params.b(), params.nu, w)?;
    let lead = -(params.lambda_a + 1.0) * t.ln() - (br + bs) / t + e.log_scale;
    Ok(lead.exp() * e.eval(cos_angle(x, y)))
}

static LAGUERRE_CALLS: AtomicUsize = AtomicUsize::new(0);

/// `Λ_a(rω, sμ; z) = sinh(z)^{-(λ_a+1)} e^{-((r^a+s^a)/a) coth z} 𝓘(2/a, (N-2)/2, 2(rs)^{a/2}/(a sinh z), ⟨ω,μ⟩)`.
///
/// The value is cross-checked against `e^{-((r^a+s^a)/a)(coth z - 1/sinh z)} h_a(x, y; sinh z)`
/// on every call in debug builds and on one call in 64 otherwise.
pub fn laguerre_semigroup_kernel(params: &DeformParams, x: &PolarPoint, y: &PolarPoint, z: Complex64) -> Result<KernelEval> {
    let direct = laguerre_direct(params, x, y, z)?;
    let n = LAGUERRE_CALLS.fetch_add(1, Ordering::Relaxed);
    if cfg!(debug_assertions) || n % 64 == 0 {
        let via = laguerre_via_heat(params, x, y, z)?;
        let gap = (via - direct.value).norm() / direct.value.norm().max(1e-300);
        if gap > 1e-9 {
            return Err(Error::Inconsistent(format!(
                "Laguerre kernel at z = {z}: direct {} vs heat-kernel form {via} (relative gap {gap:e})",
                direct.value
            )));
        }
    }
    Ok(direct)
}

pub fn laguerre_direct(params: &DeformParams, x: &PolarPoint, y: &PolarPoint, z: Complex64) -> Result<KernelEval> {
    check_dims(params, &[x, y])?;
    if !(z.re > 0.0) {
        return invalid(format!("Laguerre kernel needs Re z > 0, got {z}"));
    }
    let sh = z.sinh();
    let coth = z.cosh() / sh;
    let ra_sa = (x.r.powf(params.a) + y.r.powf(params.a)) / params.a;
    let w = 2.0 * (x.r * y.r).powf(params.a / 2.0) / (params.a * sh);
    let r = script_i(&ScriptIArgs::new(params.b(), params.nu, w, cos_angle(x, y))?)?;
    let lead = (-(params.lambda_a + 1.0) * sh.ln() - ra_sa * coth).exp();
    Ok(KernelEval {
        value: lead * r.value,
        method: r.method,
        terms: r.terms_or_nodes,
        err_estimate: lead.norm() * r.err_estimate,
    })
}

pub fn laguerre_via_heat(params: &DeformParams, x: &PolarPoint, y: &PolarPoint, z: Complex64) -> Result<Complex64> {
    let sh = z.sinh();
    let ra_sa = (x.r.powf(params.a) + y.r.powf(params.a)) / params.a;
    let factor = (-ra_sa * (z.cosh() / sh - 1.0 / sh)).exp();
    Ok(factor * heat_kernel_complex(params, x, y, sh)?)
}

/// `Λ_a^{(m)}(r, s; z) = (rs)^m a^{-λ_{a,m}} sinh(z)^{-(λ_{a,m}+1)} e^{-((r^a+s^a)/a) coth z} Ĩ_{λ_{a,m}}((2/a)(rs)^{a/2}/sinh z)`.
pub fn radial_kernel(params: &DeformParams, m: usize, r: f64, s: f64, z: Complex64) -> Result<Complex64> {
    if !(z.re > 0.0) {
        return invalid(format!("radial kernel needs Re z > 0, got {z}"));
    }
    if !(r >= 0.0 && s >= 0.0) {
        return invalid(format!("radii must be >= 0, got {r}, {s}"));
    }
    let lam = params.lambda_am(m);
    if !(params.a > 0.0f64.max(2.0 - 2.0 * m as f64 - params.n as f64)) {
        return invalid(format!("need a > max(0, 2 - 2m - N) for m = {m}"));
    }
    let sh = z.sinh();
    let coth = z.cosh() / sh;
    let rs = r * s;
    if m > 0 && rs == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let arg = 2.0 / params.a * rs.powf(params.a / 2.0) / sh;
    let ln_pow = if m == 0 { 0.0 } else { m as f64 * rs.ln() };
    let lead = Complex64::new(ln_pow - lam * params.a.ln(), 0.0)
        - (lam + 1.0) * sh.ln()
        - (r.powf(params.a) + s.powf(params.a)) / params.a * coth;
    Ok(lead.exp() * bessel_i_norm(lam, arg)?)
}

/// `c_a vol(S^{N-1})` times the degree-`m` zonal coefficient of `Λ_a(rω, s·; z)`,
/// obtained by angular quadrature. It reproduces `Λ_a^{(m)}(r, s; z)`.
pub fn radial_sector_projection(params: &DeformParams, m: usize, r: f64, s: f64, z: Complex64, n_ang: usize) -> Result<Complex64> {
    let n = params.n;
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let x = PolarPoint::new(r, e1)?;
    let (us, ws) = angular_rule(n, n_ang);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&u, &wt) in us.iter().zip(&ws) {
        let mut mu = vec![0.0; n];
        mu[0] = u;
        mu[1] = (1.0 - u * u).max(0.0).sqrt();
        let y = PolarPoint { r: s, omega: mu };
        let v = laguerre_direct(params, &x, &y, z)?.value;
        acc += v * wt * crate::specfun::gegenbauer_norm(m, params.nu, u);
    }
    let dim = crate::specfun::gegenbauer_norm_at_one(m, params.nu);
    Ok(acc / dim * params.c_a * params.sphere_volume())
}

/// Nodes and weights for the mean over `S^{N-1}` of a function of `⟨ω, μ⟩`:
/// weight `(1-u^2)^{(N-3)/2}` normalized to total mass one.
pub fn angular_rule(n: usize, nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = crate::quadrature::gegenbauer_rule(nodes, (n as f64 - 2.0) / 2.0);
    let tot: f64 = rule.weights.iter().sum();
    (rule.nodes.clone(), rule.weights.iter().map(|w| w / tot).collect())
}
