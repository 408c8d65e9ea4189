//! Scalar abstraction shared by the f64 and double-double evaluators.

use std::fmt::Debug;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use num_complex::Complex;
use num_traits::Num;

use crate::dd::DD;
use crate::specfun::gamma::{ln_gamma_dd, ln_gamma_pos};

pub trait Real:
    Copy
    + Num
    + Neg<Output = Self>
    + PartialOrd
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + Debug
    + 'static
{
    /// Unit roundoff of the format.
    const EPS: f64;

    fn of(x: f64) -> Self;
    fn f64(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn atan2(self, x: Self) -> Self;
    fn abs(self) -> Self;
    fn pi() -> Self;
    /// ln Γ(x) for x > 0.
    fn ln_gamma(self) -> Self;
}

impl Real for f64 {
    const EPS: f64 = f64::EPSILON / 2.0;

    #[inline]
    fn of(x: f64) -> Self {
        x
    }
    #[inline]
    fn f64(self) -> f64 {
        self
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn ln_gamma(self) -> Self {
        ln_gamma_pos(self)
    }
}

impl Real for DD {
    const EPS: f64 = 4.93e-32;

    #[inline]
    fn of(x: f64) -> Self {
        DD::from_f64(x)
    }
    #[inline]
    fn f64(self) -> f64 {
        self.to_f64()
    }
    fn exp(self) -> Self {
        DD::exp(self)
    }
    fn ln(self) -> Self {
        DD::ln(self)
    }
    fn sqrt(self) -> Self {
        DD::sqrt(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        DD::sin_cos(self)
    }
    fn atan2(self, x: Self) -> Self {
        DD::atan2(self, x)
    }
    fn abs(self) -> Self {
        DD::abs(self)
    }
    fn pi() -> Self {
        DD::PI
    }
    fn ln_gamma(self) -> Self {
        ln_gamma_dd(self)
    }
}

pub type Cx<R> = Complex<R>;

#[inline]
pub fn cx<R: Real>(re: R, im: R) -> Cx<R> {
    Complex::new(re, im)
}

#[inline]
pub fn cx_of<R: Real>(z: Complex<f64>) -> Cx<R> {
    Complex::new(R::of(z.re), R::of(z.im))
}

#[inline]
pub fn cx_f64<R: Real>(z: Cx<R>) -> Complex<f64> {
    Complex::new(z.re.f64(), z.im.f64())
}

pub fn cexp<R: Real>(z: Cx<R>) -> Cx<R> {
    let m = z.re.exp();
    let (s, c) = z.im.sin_cos();
    Complex::new(m * c, m * s)
}

/// Principal logarithm.
pub fn cln<R: Real>(z: Cx<R>) -> Cx<R> {
    let r = (z.re * z.re + z.im * z.im).sqrt();
    Complex::new(r.ln(), z.im.atan2(z.re))
}

#[inline]
pub fn cabs_f64<R: Real>(z: Cx<R>) -> f64 {
    z.re.f64().hypot(z.im.f64())
}

#[inline]
pub fn cscale<R: Real>(z: Cx<R>, s: R) -> Cx<R> {
    Complex::new(z.re * s, z.im * s)
}

/// Arithmetic used by an evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    /// f64 first, double-double when the f64 result is ill-conditioned.
    Auto,
    Double,
    DoubleDouble,
}
