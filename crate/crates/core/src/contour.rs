//! Integrals over the keyhole path `C_{ε,w}` around the negative `w`-ray.
//!
//! With `α = arg w` the path runs in from infinity along `arg z = -α-π`,
//! round the circle `|z| = 1+ε` counterclockwise to `arg z = -α+π`, and out
//! again. In the variable `ζ = ln z` it is a rectangle without its left side
//! and `dz/z = dζ`. `arg z` is tracked continuously along the path, so powers
//! of `z` never cross a branch cut.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_integrate, PanelRule};
use crate::real::{cabs_f64, cexp, cln, cx, cx_of, Cx, Real};

#[derive(Clone, Copy, Debug)]
pub struct ContourOpts {
    pub eps: f64,
    /// Target error relative to the value of the integral.
    pub rel_tol: f64,
    /// Uniform panels on the circle before adaptive refinement.
    pub base_panels: usize,
    pub max_evals: usize,
}

impl ContourOpts {
    pub fn new(eps: f64, rel_tol: f64) -> Self {
        ContourOpts { eps, rel_tol, base_panels: 16, max_evals: 4_000_000 }
    }
}

/// Default radius offset for argument `w`.
pub fn default_eps(w_abs: f64) -> f64 {
    (1.0 / w_abs).clamp(1e-3, 0.5)
}

#[derive(Clone, Debug)]
pub struct ContourOut<R: Real> {
    /// Integral times `exp(-log_scale)`.
    pub value: Cx<R>,
    pub log_scale: f64,
    pub abs_integral: f64,
    pub err: f64,
    pub evals: usize,
}

impl<R: Real> ContourOut<R> {
    pub fn condition(&self) -> f64 {
        self.abs_integral / cabs_f64(self.value).max(1e-300)
    }
}

/// `(w/2)^{-p} / (2πi) ∫_{C_{ε,w}} z^{-p} g(z^{-b}) e^{(w/2)(z + 1/z)} dz/z`.
///
/// `breaks` lists values of `arg z` on the circle where `g` is known to
/// peak; panels are split there before refinement.
pub fn w_contour<R, G>(w: Complex64, p: R, b: R, g: G, breaks: &[f64], opts: ContourOpts) -> Result<ContourOut<R>>
where
    R: PanelRule,
    G: Fn(Cx<R>) -> Cx<R>,
{
    if w.norm() == 0.0 || !w.is_finite() {
        return Err(Error::InvalidParameter(format!("contour argument w = {w}")));
    }
    if !(opts.eps > 0.0) {
        return Err(Error::InvalidParameter(format!("contour offset eps = {}", opts.eps)));
    }
    let alpha = w.arg();
    let rho = 1.0 + opts.eps;
    let delta = R::of(rho).ln();
    let phi1 = -alpha - PI;
    let phi3 = -alpha + PI;
    let half_w: Cx<R> = cx_of(w / 2.0);
    let lw = cln(half_w);
    let shift = 0.5 * w.norm() * (rho + 1.0 / rho);
    let shift_r = R::of(shift);

    let integrand = |zeta: Cx<R>| -> Cx<R> {
        let ez = cexp(zeta);
        let emz = cexp(-zeta);
        let expo = -(lw + zeta) * p + half_w * (ez + emz) - cx(shift_r, R::zero());
        let x = cexp(-zeta * b);
        cexp(expo) * g(x)
    };

    // magnitude scale from a coarse sweep of the circle
    let mut peak = 0.0f64;
    for k in 0..512 {
        let phi = phi1 + 2.0 * PI * (k as f64 + 0.5) / 512.0;
        let v = cabs_f64(integrand(cx(delta, R::of(phi))));
        if v.is_finite() {
            peak = peak.max(v);
        }
    }
    if peak == 0.0 {
        peak = f64::MIN_POSITIVE;
    }

    // ray length: |integrand| below peak * 1e-40 on both rays
    let floor = peak * 1e-40 * opts.rel_tol.min(1.0);
    let mut s_max = delta.f64() + 0.25;
    loop {
        let m1 = cabs_f64(integrand(cx(R::of(s_max), R::of(phi1))));
        let m3 = cabs_f64(integrand(cx(R::of(s_max), R::of(phi3))));
        if m1 < floor && m3 < floor {
            break;
        }
        s_max += 0.25 + 0.25 * s_max;
        if s_max > 60.0 {
            return Err(Error::QuadratureNonConvergence(format!(
                "contour rays do not decay for w = {w}"
            )));
        }
    }

    // circle breakpoints
    let mut cuts: Vec<f64> = (0..=opts.base_panels)
        .map(|k| phi1 + 2.0 * PI * k as f64 / opts.base_panels as f64)
        .collect();
    for &t in breaks.iter().chain(std::iter::once(&(-alpha))) {
        let mut t = t;
        while t < phi1 {
            t += 2.0 * PI;
        }
        while t > phi3 {
            t -= 2.0 * PI;
        }
        cuts.push(t);
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    // rounding in the exponent is amplified by its size
    let noise = 64.0 * R::EPS * (1.0 + 2.0 * shift + p.f64().abs() * (lw.norm_sqr().f64().sqrt() + 2.0 * PI));
    let mut abs_tol = opts.rel_tol * peak * 2.0 * PI;
    for pass in 0..3 {
        let mut total = cx(R::zero(), R::zero());
        let mut abs_int = 0.0;
        let mut err = 0.0;
        let mut evals = 0;
        let nseg = (cuts.len() - 1) as f64;
        for pair in cuts.windows(2) {
            let r = adaptive_integrate(
                |phi: R| integrand(cx(delta, phi)),
                R::of(pair[0]),
                R::of(pair[1]),
                abs_tol / (nseg + 2.0),
                noise,
                opts.max_evals,
            )?;
            // dζ = i dφ, then divide by 2πi
            total = total + r.value;
            abs_int += r.abs_integral;
            err += r.err;
            evals += r.evals;
        }
        let mut rays = cx(R::zero(), R::zero());
        for (phi, sign) in [(phi1, -1.0), (phi3, 1.0)] {
            let r = adaptive_integrate(
                |s: R| integrand(cx(s, R::of(phi))),
                delta,
                R::of(s_max),
                abs_tol / (nseg + 2.0),
                noise,
                opts.max_evals,
            )?;
            rays = rays + r.value * R::of(sign);
            abs_int += r.abs_integral;
            err += r.err;
            evals += r.evals;
        }
        let two_pi = R::of(2.0) * R::pi();
        // (rays)/(2πi) = -i rays / 2π
        let value = Cx::new(total.re + rays.im, total.im - rays.re) / Cx::new(two_pi, R::zero());
        let out = ContourOut {
            value,
            log_scale: shift,
            abs_integral: abs_int / (2.0 * PI),
            err: (err + noise * abs_int) / (2.0 * PI),
            evals,
        };
        let target = 2.0 * PI * opts.rel_tol * cabs_f64(out.value);
        // with cancellation, refine against the size of the result
        if abs_tol <= target || target == 0.0 || pass == 2 {
            return Ok(out);
        }
        abs_tol = target;
    }
    unreachable!()
}
