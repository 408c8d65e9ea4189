//! 𝓘 at fixed `(b, ν, w)` as a Gegenbauer expansion in `t`, for kernels
//! that are evaluated at many angles with the same radial arguments.
//!
//! The coefficient of `Č^ν_m(t)` is
//! `Γ(bν+1) (w/2)^{bm} Ĩ_{b(m+ν)}(w) = Γ(bν+1) (w/2)^{-bν} I_{b(m+ν)}(w)`.
//! On the real and imaginary axes the right-hand form is summed from
//! scaled real Bessel values, so no overflow or cancellation enters the
//! coefficients themselves.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::bessel::normalized_series;
use crate::specfun::{bessel_i_norm, bessel_i_scaled, bessel_j_real, gegenbauer_norm_at_one, gegenbauer_norm_sum, ln_gamma_pos};

const MAX_TERMS: usize = 200_000;
const TAIL: f64 = 1e-17;

fn check(b: f64, nu: f64) -> Result<()> {
    if !(b > 0.0) || !(nu >= 0.0) {
        return Err(Error::InvalidParameter(format!("expansion needs b > 0 and nu >= 0, got b = {b}, nu = {nu}")));
    }
    Ok(())
}

// Tracks Σ |c_m| Č_m(1) and decides when the tail is negligible.
struct Tail {
    nu: f64,
    dim: f64,
    abs_sum: f64,
    small: usize,
    prev: f64,
}

impl Tail {
    fn new(nu: f64) -> Self {
        Tail { nu, dim: 1.0, abs_sum: 0.0, small: 0, prev: f64::INFINITY }
    }

    /// Feed `|c_m|`; true once three consecutive terms are negligible past
    /// the peak, which the caller signals.
    /// `Č_m(1)` without advancing.
    fn dim_next(&self, m: usize) -> f64 {
        let mut t = Tail { ..*self };
        t.step_dim(m);
        t.dim
    }

    fn step_dim(&mut self, m: usize) {
        if m > 0 {
            let mf = m as f64;
            self.dim = if self.nu == 0.0 {
                2.0
            } else if m == 1 {
                (1.0 + self.nu) / self.nu * 2.0 * self.nu
            } else {
                self.dim * (mf + self.nu) / (mf - 1.0 + self.nu) * (2.0 * self.nu + mf - 1.0) / mf
            };
        }
    }

    fn done(&mut self, m: usize, c_abs: f64, past_peak: bool) -> bool {
        self.step_dim(m);
        let x = c_abs * self.dim;
        self.abs_sum += x;
        self.prev = x;
        if past_peak && x <= TAIL * self.abs_sum {
            self.small += 1;
        } else {
            self.small = 0;
        }
        self.small >= 3
    }
}

/// `e^{-log_scale} 𝓘(b, ν, w, t) = Σ_m coeffs[m] Č^ν_m(t)` with real coefficients.
#[derive(Clone, Debug)]
pub struct RealExpansion {
    pub nu: f64,
    pub coeffs: Vec<f64>,
    pub log_scale: f64,
}

impl RealExpansion {
    /// Real `w >= 0`; scaled by `e^{-w}`.
    pub fn real(b: f64, nu: f64, w: f64) -> Result<Self> {
        check(b, nu)?;
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::InvalidParameter(format!("real expansion needs finite w >= 0, got {w}")));
        }
        let bnu = b * nu;
        let lg = ln_gamma_pos(bnu + 1.0);
        let mut coeffs = Vec::new();
        let mut tail = Tail::new(nu);
        let h = 0.5 * w;
        for m in 0..MAX_TERMS {
            let beta = b * (m as f64 + nu);
            let c = if w < 2.0 {
                // Γ(bν+1) h^{bm} Ĩ_β(w) e^{-w}, no small-w overflow of h^{-bν}
                if w == 0.0 {
                    if m == 0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    let (s, _, _) = normalized_series(beta, Complex64::new(h * h, 0.0))?;
                    (lg + b * m as f64 * h.ln() - w).exp() * s.re
                }
            } else {
                let sc = bessel_i_scaled(beta, w);
                if sc == 0.0 {
                    0.0
                } else {
                    (lg - bnu * h.ln() + sc.ln()).exp()
                }
            };
            coeffs.push(c);
            // I_β(w) decreases in β, so |c_m| Č_m(1) is unimodal; falling means past the peak
            let falling = c.abs() * tail.dim_next(m) <= tail.prev;
            if tail.done(m, c.abs(), falling) {
                return Ok(RealExpansion { nu, coeffs, log_scale: w });
            }
        }
        Err(Error::SeriesNonConvergence { terms: MAX_TERMS })
    }

    /// Scaled value `e^{-log_scale} 𝓘(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        gegenbauer_norm_sum(&self.coeffs, self.nu, t)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t) * self.log_scale.exp()
    }

    /// `Σ |c_m| Č_m(1)`, a bound on the scaled sum at every `t`.
    pub fn abs_bound(&self) -> f64 {
        self.coeffs.iter().enumerate().map(|(m, c)| c.abs() * gegenbauer_norm_at_one(m, self.nu)).sum()
    }
}

/// `e^{-log_scale} 𝓘(b, ν, w, t) = Σ_m coeffs[m] Č^ν_m(t)`, complex coefficients.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub nu: f64,
    re: Vec<f64>,
    im: Vec<f64>,
    pub log_scale: f64,
}

impl Expansion {
    fn from_coeffs(nu: f64, c: Vec<Complex64>, log_scale: f64) -> Self {
        Expansion { nu, re: c.iter().map(|z| z.re).collect(), im: c.iter().map(|z| z.im).collect(), log_scale }
    }

    pub fn coeffs(&self) -> Vec<Complex64> {
        self.re.iter().zip(&self.im).map(|(&r, &i)| Complex64::new(r, i)).collect()
    }

    /// `w = -i y` for real `y`, the argument of the Fourier kernel. The
    /// coefficients are `Γ(bν+1) (|y|/2)^{-bν} e^{∓iπbm/2} J_{b(m+ν)}(|y|)`.
    pub fn imaginary(b: f64, nu: f64, y: f64) -> Result<Self> {
        check(b, nu)?;
        if !y.is_finite() {
            return Err(Error::InvalidParameter(format!("imaginary expansion needs finite y, got {y}")));
        }
        let ya = y.abs();
        let bnu = b * nu;
        let lg = ln_gamma_pos(bnu + 1.0);
        let h = 0.5 * ya;
        let mut out = Vec::new();
        let mut tail = Tail::new(nu);
        for m in 0..MAX_TERMS {
            let beta = b * (m as f64 + nu);
            let mag = if ya == 0.0 {
                if m == 0 {
                    1.0
                } else {
                    0.0
                }
            } else if ya <= 8.0 {
                let (s, _, _) = normalized_series(beta, Complex64::new(-h * h, 0.0))?;
                (lg + b * m as f64 * h.ln()).exp() * s.re
            } else {
                (lg - bnu * h.ln()).exp() * bessel_j_real(beta, ya)
            };
            let phase = -0.5 * std::f64::consts::PI * b * m as f64 * y.signum();
            out.push(Complex64::from_polar(1.0, phase) * mag);
            // J_β is only known to absolute accuracy, so truncate on the
            // bound |J̃_β| <= 1/Γ(β+1) rather than on the computed value
            let bound = if ya == 0.0 {
                mag.abs()
            } else {
                (lg + b * m as f64 * h.ln() - ln_gamma_pos(beta + 1.0)).exp()
            };
            if tail.done(m, bound, b * m as f64 > ya) {
                return Ok(Self::from_coeffs(nu, out, 0.0));
            }
        }
        Err(Error::SeriesNonConvergence { terms: MAX_TERMS })
    }

    /// Any complex `w` of moderate size, from normalized Bessel values;
    /// scaled by `e^{-|Re w|}`.
    pub fn general(b: f64, nu: f64, w: Complex64) -> Result<Self> {
        check(b, nu)?;
        if !w.is_finite() {
            return Err(Error::InvalidParameter(format!("expansion needs finite w, got {w}")));
        }
        let scale = w.re.abs();
        let lg = ln_gamma_pos(b * nu + 1.0);
        let h = w / 2.0;
        let lh = if w.norm() == 0.0 { Complex64::new(f64::NEG_INFINITY, 0.0) } else { h.ln() };
        let mut out = Vec::new();
        let mut tail = Tail::new(nu);
        for m in 0..MAX_TERMS {
            let beta = b * (m as f64 + nu);
            let c = if w.norm() == 0.0 {
                Complex64::new(if m == 0 { 1.0 } else { 0.0 }, 0.0)
            } else {
                (lh * (b * m as f64) + lg - scale).exp() * bessel_i_norm(beta, w)?
            };
            out.push(c);
            if tail.done(m, c.norm(), b * m as f64 > w.norm()) {
                return Ok(Self::from_coeffs(nu, out, scale));
            }
        }
        Err(Error::SeriesNonConvergence { terms: MAX_TERMS })
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        Complex64::new(gegenbauer_norm_sum(&self.re, self.nu, t), gegenbauer_norm_sum(&self.im, self.nu, t))
    }

    pub fn value(&self, t: f64) -> Complex64 {
        self.eval(t) * self.log_scale.exp()
    }
}
