//! Normalized Bessel functions `Ĩ_ν(w) = (w/2)^{-ν} I_ν(w)` and
//! `J̃_ν(w) = (w/2)^{-ν} J_ν(w)`, both entire in `w`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::contour::{w_contour, ContourOpts};
use crate::dd::DD;
use crate::error::{Error, Result};
use crate::quadrature::{gl_cached, PanelRule};
use crate::real::{cabs_f64, cscale, cx, cx_f64, cx_of, Cx, Precision, Real};
use crate::specfun::gamma::{ln_gamma_dd, ln_gamma_pos};

pub const MAX_SERIES_TERMS: usize = 500;

/// Value with the bookkeeping needed to judge its accuracy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluated {
    pub value: Complex64,
    /// Sum of moduli over modulus of the sum.
    pub condition: f64,
    pub terms: usize,
    pub precision: Precision,
}

/// 1/Γ(x) in the working precision; zero at the poles.
pub fn rgamma_in<R: Real>(x: R) -> R {
    if x > R::zero() {
        return (-x.ln_gamma()).exp();
    }
    let xf = x.f64();
    if xf == xf.floor() {
        return R::zero();
    }
    let n = (-xf).ceil() as usize + 1;
    let mut prod = R::one();
    let mut y = x;
    for _ in 0..n {
        prod *= y;
        y += R::one();
    }
    prod * (-y.ln_gamma()).exp()
}

/// `Σ_k q^k / (k! Γ(ν+k+1))` with `q = (w/2)^2`.
pub(crate) fn normalized_series<R: Real>(nu: R, q: Cx<R>) -> Result<(Cx<R>, f64, usize)> {
    let mut term = cx(rgamma_in(nu + R::one()), R::zero());
    let mut sum = term;
    let mut abs_sum = cabs_f64(term);
    let mut small = 0;
    let qa = cabs_f64(q);
    for k in 1..MAX_SERIES_TERMS {
        let kr = R::of(k as f64);
        let denom = kr * (nu + kr);
        if denom == R::zero() {
            // passing through a pole of Γ(ν+k+1): restart from the exact term
            term = cscale(pow_c(q, k), rgamma_in(nu + kr + R::one()) * rgamma_in(kr + R::one()));
        } else {
            term = term * q / cx(denom, R::zero());
        }
        sum = sum + term;
        let ta = cabs_f64(term);
        abs_sum += ta;
        if (k as f64) > qa.sqrt() && ta <= R::EPS * cabs_f64(sum) {
            small += 1;
            if small == 3 {
                return Ok((sum, abs_sum, k + 1));
            }
        } else {
            small = 0;
        }
        if ta == 0.0 && k as f64 > qa.sqrt() + 2.0 {
            return Ok((sum, abs_sum, k + 1));
        }
    }
    Err(Error::SeriesNonConvergence { terms: MAX_SERIES_TERMS })
}

fn pow_c<R: Real>(q: Cx<R>, k: usize) -> Cx<R> {
    let mut r = cx(R::one(), R::zero());
    for _ in 0..k {
        r = r * q;
    }
    r
}

const AUTO_REL_TARGET: f64 = 1e-13;

fn series_at<R: Real>(nu: f64, w: Complex64) -> Result<(Complex64, f64, usize)> {
    let h: Cx<R> = cx_of(w / 2.0);
    let (s, a, n) = normalized_series(R::of(nu), h * h)?;
    Ok((cx_f64(s), a / cabs_f64(s).max(f64::MIN_POSITIVE), n))
}

/// `Ĩ_ν(w)` by its power series, escalating to double-double when the
/// f64 sum is too ill-conditioned for `Precision::Auto`.
pub fn bessel_i_norm_with(nu: f64, w: Complex64, precision: Precision) -> Result<Evaluated> {
    if !nu.is_finite() || !w.is_finite() {
        return Err(Error::InvalidParameter(format!("Bessel arguments nu = {nu}, w = {w}")));
    }
    let run = |p: Precision| -> Result<Evaluated> {
        let (value, condition, terms) = match p {
            Precision::DoubleDouble => series_at::<DD>(nu, w)?,
            _ => series_at::<f64>(nu, w)?,
        };
        Ok(Evaluated { value, condition, terms, precision: p })
    };
    match precision {
        Precision::Auto => {
            let e = run(Precision::Double)?;
            if e.condition * f64::EPSILON > AUTO_REL_TARGET {
                run(Precision::DoubleDouble)
            } else {
                Ok(e)
            }
        }
        p => run(p),
    }
}

pub fn bessel_i_norm(nu: f64, w: Complex64) -> Result<Complex64> {
    Ok(bessel_i_norm_with(nu, w, Precision::Auto)?.value)
}

/// `d/dw Ĩ_ν(w) = (w/2) Ĩ_{ν+1}(w)`.
pub fn bessel_i_norm_deriv(nu: f64, w: Complex64) -> Result<Complex64> {
    Ok(0.5 * w * bessel_i_norm(nu + 1.0, w)?)
}

/// `J̃_ν(w) = Ĩ_ν(i w)`.
pub fn bessel_j_norm(nu: f64, w: Complex64) -> Result<Complex64> {
    bessel_i_norm(nu, Complex64::new(-w.im, w.re))
}

/// `Ĩ_ν(w)` from the loop integral
/// `(w/2)^{-ν} (2πi)^{-1} ∫_{C_{ε,w}} z^{-ν} e^{(w/2)(z+1/z)} dz/z`.
/// `nodes` sets the number of uniform starting panels (twenty points each)
/// on the circle.
pub fn bessel_i_norm_contour(nu: f64, w: Complex64, eps: f64, nodes: usize) -> Result<Complex64> {
    Ok(bessel_i_norm_contour_with(nu, w, eps, nodes, Precision::Auto)?.value)
}

pub fn bessel_i_norm_contour_with(
    nu: f64,
    w: Complex64,
    eps: f64,
    nodes: usize,
    precision: Precision,
) -> Result<Evaluated> {
    if w.norm() > 700.0 {
        return Err(Error::InvalidParameter(format!("|w| = {} overflows the loop integral", w.norm())));
    }
    let mut opts = ContourOpts::new(eps, 1e-14);
    opts.base_panels = (nodes / 20).max(4);
    fn go<R: PanelRule>(nu: f64, w: Complex64, opts: ContourOpts) -> Result<Evaluated> {
        let out = w_contour(w, R::of(nu), R::one(), |_x: Cx<R>| cx(R::one(), R::zero()), &[], opts)?;
        let value = cx_f64(out.value) * out.log_scale.exp();
        let p = if R::EPS < 1e-20 { Precision::DoubleDouble } else { Precision::Double };
        Ok(Evaluated { value, condition: out.condition(), terms: out.evals, precision: p })
    }
    match precision {
        Precision::DoubleDouble => go::<DD>(nu, w, opts),
        Precision::Double => go::<f64>(nu, w, opts),
        Precision::Auto => {
            let e = go::<f64>(nu, w, opts)?;
            if e.condition * f64::EPSILON > AUTO_REL_TARGET {
                go::<DD>(nu, w, opts)
            } else {
                Ok(e)
            }
        }
    }
}

/// `e^{-w} I_β(w)` for real `w >= 0`, `β >= 0`, summed outward from the
/// largest term in log space so neither overflow nor cancellation occurs.
pub fn bessel_i_scaled(beta: f64, w: f64) -> f64 {
    debug_assert!(w >= 0.0 && beta >= 0.0);
    if w == 0.0 {
        return if beta == 0.0 { 1.0 } else { 0.0 };
    }
    let h = 0.5 * w;
    let q = h * h;
    let ln_h = h.ln();
    let kp = (0.5 * ((beta * beta + w * w).sqrt() - beta)).floor().max(0.0);
    let lead = (2.0 * kp + beta) * ln_h.abs() + w;
    let ln_peak = if lead < 200.0 {
        (2.0 * kp + beta) * ln_h - ln_gamma_pos(kp + 1.0) - ln_gamma_pos(beta + kp + 1.0) - w
    } else {
        // large cancelling logarithms: form the exponent in double-double
        let e = DD::from_f64(2.0 * kp + beta) * DD::from_f64(h).ln()
            - ln_gamma_dd(DD::from_f64(kp + 1.0))
            - ln_gamma_dd(DD::from_f64(beta) + DD::from_f64(kp + 1.0))
            - DD::from_f64(w);
        e.to_f64()
    };
    let peak = ln_peak.exp();
    if peak == 0.0 {
        return 0.0;
    }
    let mut sum = peak;
    let mut t = peak;
    let mut k = kp;
    loop {
        t *= q / ((k + 1.0) * (beta + k + 1.0));
        k += 1.0;
        sum += t;
        if t < 1e-18 * sum {
            break;
        }
    }
    let mut t = peak;
    let mut k = kp;
    while k > 0.0 {
        t *= k * (beta + k) / q;
        k -= 1.0;
        sum += t;
        if t < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// `J_β(y)` for real `y >= 0`, `β >= 0`, absolute accuracy near 1e-15.
///
/// Small arguments use the power series; otherwise Schläfli's integral
/// `π J_β(y) = ∫_0^π cos(βθ - y sin θ) dθ - sin(βπ) ∫_0^∞ e^{-y sinh t - βt} dt`.
pub fn bessel_j_real(beta: f64, y: f64) -> f64 {
    debug_assert!(y >= 0.0 && beta >= 0.0);
    if y == 0.0 {
        return if beta == 0.0 { 1.0 } else { 0.0 };
    }
    if y <= 8.0 {
        let h = 0.5 * y;
        let (s, _, _) = normalized_series(beta, Complex64::new(-h * h, 0.0)).expect("small-argument J series");
        return s.re * h.powf(beta);
    }
    let gl = gl_cached(24);
    let panels = ((y + beta) / 3.0).ceil() as usize + 1;
    let mut first = 0.0;
    for p in 0..panels {
        let a = PI * p as f64 / panels as f64;
        let b = PI * (p + 1) as f64 / panels as f64;
        let m = gl.mapped(a, b);
        first += m.integrate(|th| (beta * th - y * th.sin()).cos());
    }
    let sb = (beta * PI).sin();
    let mut second = 0.0;
    if sb.abs() > 1e-300 {
        let t_max = (45.0 / y).asinh().min(45.0 / beta.max(1e-300));
        let panels = 4;
        for p in 0..panels {
            let a = t_max * p as f64 / panels as f64;
            let b = t_max * (p + 1) as f64 / panels as f64;
            second += gl.mapped(a, b).integrate(|t| (-y * t.sinh() - beta * t).exp());
        }
    }
    (first - sb * second) / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn normalized_i_reference() {
        let cases = [
            (0.5, Complex64::new(3.2, 0.0), Complex64::new(4.3181251201227616978, 0.0)),
            (2.25, Complex64::new(1.5, -4.0), Complex64::new(0.051062554592049139906, -0.13587882030278523395)),
            (0.0, Complex64::new(0.0, 40.0), Complex64::new(0.0073668905842372895535, 0.0)),
            (1.0 / 3.0, Complex64::new(-7.0, 0.0), Complex64::new(110.08854432635552333, 0.0)),
        ];
        for (nu, w, v) in cases {
            let got = bessel_i_norm(nu, w).unwrap();
            assert!(close(got, v, 1e-13), "nu={nu} w={w}: {got}");
        }
        // imaginary 40 needs the extended format
        let e = bessel_i_norm_with(0.0, Complex64::new(0.0, 40.0), Precision::Auto).unwrap();
        assert_eq!(e.precision, Precision::DoubleDouble);
    }

    #[test]
    fn normalized_j_reference() {
        let got = bessel_j_norm(0.5, Complex64::new(3.2, 0.0)).unwrap();
        assert!(close(got, Complex64::new(-0.020583802293977126196, 0.0), 1e-13));
        let got = bessel_j_norm(1.5, Complex64::new(25.0, 0.0)).unwrap();
        assert!(close(got, Complex64::new(-0.0035981642290393431371, 0.0), 1e-12));
    }

    #[test]
    fn contour_matches_series() {
        for (nu, w) in [
            (0.5, Complex64::new(3.2, 0.0)),
            (2.25, Complex64::new(1.5, -4.0)),
            (0.0, Complex64::new(0.0, 20.0)),
            (1.0 / 3.0, Complex64::new(-7.0, 0.0)),
            (4.0, Complex64::new(-3.0, 5.0)),
        ] {
            let s = bessel_i_norm(nu, w).unwrap();
            let c = bessel_i_norm_contour(nu, w, 0.2, 64).unwrap();
            assert!(close(c, s, 1e-11), "nu={nu} w={w}: {c} vs {s}");
        }
    }

    #[test]
    fn derivative_matches_differences() {
        for (nu, w) in [(0.0, Complex64::new(1.3, 0.0)), (1.5, Complex64::new(-2.0, 3.0)), (-0.4, Complex64::new(0.0, 6.0))] {
            let h = 1e-5;
            let fd = (bessel_i_norm(nu, w + h).unwrap() - bessel_i_norm(nu, w - h).unwrap()) / (2.0 * h);
            assert!(close(bessel_i_norm_deriv(nu, w).unwrap(), fd, 1e-8), "nu={nu} w={w}");
        }
    }

    #[test]
    fn series_cap_is_an_error() {
        let r = bessel_i_norm(0.0, Complex64::new(900.0, 0.0));
        assert!(matches!(r, Err(Error::SeriesNonConvergence { .. })));
    }

    #[test]
    fn real_j_reference() {
        let cases = [
            (0.0, 0.5, 0.93846980724081290423),
            (0.5, 10.0, -0.13726373575505048121),
            (2.25, 30.0, 0.11805700336617249427),
            (7.0 / 3.0, 60.0, 0.059437186764735564893),
            (40.5, 60.0, -0.10826115920255145413),
            (80.0, 60.0, 1.2112523039822090348e-6),
            (0.2, 8.5, 0.12283078234846226951),
        ];
        for (b, y, v) in cases {
            let got = bessel_j_real(b, y);
            assert!((got - v).abs() < 2e-15, "beta={b} y={y}: {got} vs {v}");
        }
    }

    #[test]
    fn scaled_i_reference() {
        let cases = [
            (0.0, 0.5, 0.64503527044915006811),
            (0.5, 10.0, 0.12615662584097981553),
            (3.0, 300.0, 0.022698932738915835318),
            (150.0, 1000.0, 1.6666051994897061902e-7),
            (7.0 / 3.0, 1e4, 0.003988386745006827131),
        ];
        for (b, w, v) in cases {
            let got = bessel_i_scaled(b, w);
            assert!(((got - v) / v).abs() < 1e-11, "beta={b} w={w}: {got} vs {v}");
        }
    }
}
