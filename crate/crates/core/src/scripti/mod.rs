//! The function
//! `𝓘(b,ν,w,t) = Γ(bν+1) Σ_m (w/2)^{bm} Ĩ_{b(m+ν)}(w) Č^ν_m(t)`
//! evaluated by its Gegenbauer series and by a loop integral.
//!
//! For `b = 1` it reduces to `e^{wt}`; for `b = 2/a`, `ν = (N-2)/2` it is
//! the angular part of the deformed Fourier and heat kernels.

mod expansion;

pub use expansion::{Expansion, RealExpansion};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{default_eps, w_contour, ContourOpts};
use crate::dd::DD;
use crate::error::{Error, Result};
use crate::quadrature::PanelRule;
use crate::real::{cabs_f64, cexp, cln, cscale, cx, cx_f64, cx_of, Cx, Precision, Real};

pub const SERIES_MAX_M: usize = 400;
pub const DEFAULT_W_SWITCH: f64 = 20.0;
const AUTO_REL_TARGET: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScriptIArgs {
    pub b: f64,
    pub nu: f64,
    pub w: Complex64,
    pub t: f64,
}

impl ScriptIArgs {
    pub fn new(b: f64, nu: f64, w: Complex64, t: f64) -> Result<Self> {
        let a = ScriptIArgs { b, nu, w, t };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(Error::InvalidParameter(format!("b must be positive, got {}", self.b)));
        }
        if !self.nu.is_finite() || !(1.0 + self.b * self.nu > 0.0) {
            return Err(Error::InvalidParameter(format!("need 1 + b nu > 0, got b = {}, nu = {}", self.b, self.nu)));
        }
        if !(self.t.abs() <= 1.0) {
            return Err(Error::InvalidParameter(format!("t must lie in [-1, 1], got {}", self.t)));
        }
        if !self.w.is_finite() {
            return Err(Error::InvalidParameter(format!("w must be finite, got {}", self.w)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Series,
    Contour,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScriptIResult {
    pub value: Complex64,
    pub method: Method,
    pub terms_or_nodes: usize,
    pub err_estimate: f64,
    pub precision: Precision,
    /// Sum of moduli over modulus of the result.
    pub condition: f64,
}

// Č^ν_m(t) for m = 0, 1, ... generated on demand.
struct GegenbauerIter<R: Real> {
    nu: R,
    t: R,
    k: usize,
    c0: R,
    c1: R,
}

impl<R: Real> GegenbauerIter<R> {
    fn new(nu: R, t: R) -> Self {
        GegenbauerIter { nu, t, k: 0, c0: R::zero(), c1: R::zero() }
    }

    fn next_norm(&mut self) -> R {
        let two = R::of(2.0);
        let k = self.k;
        self.k += 1;
        let cheb = self.nu == R::zero();
        if k == 0 {
            self.c1 = R::one();
            return R::one();
        }
        let c = if k == 1 {
            if cheb {
                self.t
            } else {
                two * self.nu * self.t
            }
        } else if cheb {
            two * self.t * self.c1 - self.c0
        } else {
            (two * self.t * (R::of(k as f64 - 1.0) + self.nu) * self.c1
                - (R::of(k as f64 - 2.0) + two * self.nu) * self.c0)
                / R::of(k as f64)
        };
        self.c0 = self.c1;
        self.c1 = c;
        if cheb {
            two * c
        } else {
            (R::of(k as f64) + self.nu) / self.nu * c
        }
    }
}

struct SeriesOut {
    value: Complex64,
    terms: usize,
    last_term: f64,
    abs_sum: f64,
}

fn series_in<R: Real>(args: &ScriptIArgs, tol: f64) -> Result<SeriesOut> {
    let b = R::of(args.b);
    let nu = R::of(args.nu);
    let bnu = b * nu;
    let gpre = (bnu + R::one()).ln_gamma().exp();
    if args.w.norm() == 0.0 {
        return Ok(SeriesOut { value: Complex64::new(1.0, 0.0), terms: 1, last_term: 0.0, abs_sum: 1.0 });
    }
    let h: Cx<R> = cx_of(args.w / 2.0);
    let lh = cln(h);
    let q = h * h;
    let mut geg = GegenbauerIter::new(nu, R::of(args.t));
    let mut sum = cx(R::zero(), R::zero());
    let mut abs_sum = 0.0;
    let mut small = 0;
    let wa = args.w.norm();
    for m in 0..SERIES_MAX_M {
        let mr = R::of(m as f64);
        let beta = b * (mr + nu);
        let (inner, inner_abs, _) = crate::specfun::bessel::normalized_series(beta, q)?;
        let lead = cscale(cexp(lh * (b * mr)), gpre);
        let cm = geg.next_norm();
        let term = lead * inner * cm;
        sum = sum + term;
        let ta = cabs_f64(term);
        abs_sum += cabs_f64(lead) * inner_abs * cm.f64().abs();
        let dim = crate::specfun::gegenbauer_norm_at_one(m, args.nu).max(1.0);
        let tail_bound = cabs_f64(lead) * inner_abs * dim;
        let past_peak = args.b * m as f64 > wa;
        if past_peak && tail_bound <= tol * cabs_f64(sum).max(f64::MIN_POSITIVE) {
            small += 1;
            if small == 3 {
                return Ok(SeriesOut { value: cx_f64(sum), terms: m + 1, last_term: ta, abs_sum });
            }
        } else {
            small = 0;
        }
    }
    Err(Error::SeriesNonConvergence { terms: SERIES_MAX_M })
}

/// Gegenbauer series, truncated after three consecutive terms whose
/// magnitude bound falls below `tol` relative to the partial sum.
pub fn script_i_series(args: &ScriptIArgs, tol: f64) -> Result<ScriptIResult> {
    script_i_series_with(args, tol, Precision::Auto)
}

pub fn script_i_series_with(args: &ScriptIArgs, tol: f64, precision: Precision) -> Result<ScriptIResult> {
    args.validate()?;
    if !(tol >= 1e-15) {
        return Err(Error::InvalidParameter(format!("series tolerance must be >= 1e-15, got {tol}")));
    }
    let run = |p: Precision| -> Result<ScriptIResult> {
        let (out, eps) = match p {
            Precision::DoubleDouble => (series_in::<DD>(args, tol.min(1e-15))?, DD::EPS),
            _ => (series_in::<f64>(args, tol)?, f64::EPS),
        };
        let mag = out.value.norm().max(f64::MIN_POSITIVE);
        let condition = out.abs_sum / mag;
        Ok(ScriptIResult {
            value: out.value,
            method: Method::Series,
            terms_or_nodes: out.terms,
            err_estimate: out.last_term.max(16.0 * eps * out.abs_sum),
            precision: p,
            condition,
        })
    };
    match precision {
        Precision::Auto => {
            let r = run(Precision::Double)?;
            if r.err_estimate > AUTO_REL_TARGET * r.value.norm() && r.condition * f64::EPSILON > 1e-15 {
                run(Precision::DoubleDouble)
            } else {
                Ok(r)
            }
        }
        p => run(p),
    }
}

/// Directions `arg z` on the circle at which `z^{-b}` meets `e^{±iθ}`.
fn singular_args(b: f64, t: f64, w: Complex64) -> Vec<f64> {
    let theta = t.clamp(-1.0, 1.0).acos();
    let alpha = w.arg();
    let (lo, hi) = (-alpha - PI, -alpha + PI);
    let kmax = (b + 2.0).ceil() as i64;
    let mut out = Vec::new();
    for k in -kmax..=kmax {
        for s in [-1.0, 1.0] {
            let phi = (s * theta - 2.0 * PI * k as f64) / b;
            if phi > lo && phi < hi {
                out.push(phi);
            }
        }
    }
    out
}

fn contour_in<R: PanelRule>(args: &ScriptIArgs, eps: f64, base_panels: usize) -> Result<(ScriptIResult, f64)> {
    let b = R::of(args.b);
    let nu = R::of(args.nu);
    let t = R::of(args.t);
    let s = (R::one() - t * t).sqrt();
    let e_plus = cx(t, s);
    let e_minus = cx(t, -s);
    let np1 = nu + R::one();
    let min_den = std::cell::Cell::new(f64::INFINITY);
    let g = |x: Cx<R>| -> Cx<R> {
        let one = cx(R::one(), R::zero());
        let f1 = one - e_plus * x;
        let f2 = one - e_minus * x;
        let d = cabs_f64(f1 * f2);
        if d < min_den.get() {
            min_den.set(d);
        }
        let l = cln(f1) + cln(f2);
        (one - x * x) * cexp(-l * np1)
    };
    let mut opts = ContourOpts::new(eps, 1e-14);
    opts.base_panels = base_panels;
    let out = w_contour(args.w, b * nu, b, g, &singular_args(args.b, args.t, args.w), opts)?;
    if min_den.get() < 1e-12 {
        return Err(Error::Singular(format!(
            "|1 - 2t z^-b + z^-2b| = {:e} on the contour",
            min_den.get()
        )));
    }
    let gpre = (b * nu + R::one()).ln_gamma().exp().f64();
    let scale = out.log_scale.exp() * gpre;
    let value = cx_f64(out.value) * scale;
    let condition = out.condition();
    Ok((
        ScriptIResult {
            value,
            method: Method::Contour,
            terms_or_nodes: out.evals,
            err_estimate: out.err * scale,
            precision: if R::EPS < 1e-20 { Precision::DoubleDouble } else { Precision::Double },
            condition,
        },
        condition,
    ))
}

/// Loop-integral evaluation on `C_{ε,w}`. `nodes` is the number of
/// twenty-point starting panels on the circle.
pub fn script_i_contour(args: &ScriptIArgs, eps: f64, nodes: usize) -> Result<ScriptIResult> {
    script_i_contour_with(args, eps, nodes, Precision::Auto)
}

pub fn script_i_contour_with(args: &ScriptIArgs, eps: f64, nodes: usize, precision: Precision) -> Result<ScriptIResult> {
    args.validate()?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("contour offset eps must be positive, got {eps}")));
    }
    if args.w.norm() == 0.0 {
        return Err(Error::InvalidParameter("the loop integral needs w != 0".into()));
    }
    if args.w.norm() > 700.0 {
        return Err(Error::InvalidParameter(format!("|w| = {} overflows the loop integral", args.w.norm())));
    }
    let panels = (nodes / 20).max(8);
    match precision {
        Precision::Double => Ok(contour_in::<f64>(args, eps, panels)?.0),
        Precision::DoubleDouble => Ok(contour_in::<DD>(args, eps, panels)?.0),
        Precision::Auto => {
            let (r, cond) = contour_in::<f64>(args, eps, panels)?;
            if cond * f64::EPSILON > AUTO_REL_TARGET {
                Ok(contour_in::<DD>(args, eps, panels)?.0)
            } else {
                Ok(r)
            }
        }
    }
}

/// Series for `|w| <= w_switch`, loop integral beyond.
pub fn script_i(args: &ScriptIArgs) -> Result<ScriptIResult> {
    script_i_switch(args, DEFAULT_W_SWITCH)
}

pub fn script_i_switch(args: &ScriptIArgs, w_switch: f64) -> Result<ScriptIResult> {
    args.validate()?;
    let wa = args.w.norm();
    if wa <= w_switch {
        script_i_series(args, 1e-15)
    } else {
        script_i_contour(args, default_eps(wa), 256.max((8.0 * wa).ceil() as usize))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub series: ScriptIResult,
    pub contour: ScriptIResult,
    pub rel_gap: f64,
}

/// Both methods at the same point and their relative disagreement.
pub fn script_i_cross_check(args: &ScriptIArgs) -> Result<CrossCheck> {
    args.validate()?;
    let series = script_i_series(args, 1e-15)?;
    let wa = args.w.norm();
    let contour = script_i_contour(args, default_eps(wa), 256.max((8.0 * wa).ceil() as usize))?;
    let rel_gap = (series.value - contour.value).norm() / series.value.norm().max(f64::MIN_POSITIVE);
    Ok(CrossCheck { series, contour, rel_gap })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    RealAxis,
    ImaginaryAxis,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub w_abs: f64,
    pub value_abs: f64,
    /// `|𝓘| / (|w|^{(2-b)ν+2} e^{|Re w|})` for `|w| >= 1`, `|𝓘|` below.
    pub bound_ratio: f64,
}

/// `|𝓘|` along a ray of `w` against the large-`|w|` bound
/// `|w|^{(2-b)ν+2} e^{|Re w|}`.
pub fn growth_scan(b: f64, nu: f64, t: f64, w_list: &[f64], direction: Direction) -> Result<Vec<GrowthPoint>> {
    if w_list.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::InvalidParameter("growth scan needs |w| sorted ascending".into()));
    }
    let mut out = Vec::with_capacity(w_list.len());
    for &r in w_list {
        let w = match direction {
            Direction::RealAxis => Complex64::new(r, 0.0),
            Direction::ImaginaryAxis => Complex64::new(0.0, r),
        };
        let args = ScriptIArgs::new(b, nu, w, t)?;
        let v = script_i(&args)?.value.norm();
        let ratio = if r >= 1.0 { v / (r.powf((2.0 - b) * nu + 2.0) * w.re.abs().exp()) } else { v };
        out.push(GrowthPoint { w_abs: r, value_abs: v, bound_ratio: ratio });
    }
    Ok(out)
}
