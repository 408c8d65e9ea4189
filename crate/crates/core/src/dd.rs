//! Double-double arithmetic.
//!
//! A [`DD`] is an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, giving
//! about 32 significant decimal digits. Only the operations needed by the
//! series and contour evaluators are provided. Products use Dekker splitting
//! so no hardware FMA is assumed.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{Num, One, Zero};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };
    pub const PI: DD = DD { hi: 3.141592653589793116e+00, lo: 1.224646799147353207e-16 };
    pub const TAU: DD = DD { hi: 6.283185307179586232e+00, lo: 2.449293598294706414e-16 };
    pub const FRAC_PI_2: DD = DD { hi: 1.570796326794896558e+00, lo: 6.123233995736766036e-17 };
    pub const LN_2: DD = DD { hi: 6.931471805599452862e-01, lo: 2.319046813846299558e-17 };

    #[inline]
    pub const fn new(hi: f64, lo: f64) -> Self {
        DD { hi, lo }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        DD { hi: x, lo: 0.0 }
    }

    /// Exact ratio of two integers representable in f64, rounded to DD.
    pub fn ratio(num: f64, den: f64) -> Self {
        DD::from_f64(num) / DD::from_f64(den)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (s, e) = quick_two_sum(p, e + self.lo * b);
        DD { hi: s, lo: e }
    }

    /// Multiplication by a power of two, exact.
    #[inline]
    pub fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        DD { hi: self.hi * f, lo: self.lo * f }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { DD::ZERO } else { DD::from_f64(f64::NAN) };
        }
        let q = DD::from_f64(self.hi.sqrt());
        q + (self - q.sqr()) / q.mul_f64(2.0)
    }

    pub fn round(self) -> Self {
        let h = self.hi.round();
        if h == self.hi {
            let l = self.lo.round();
            let (s, e) = quick_two_sum(h, l);
            DD { hi: s, lo: e }
        } else if (h - self.hi).abs() == 0.5 && self.lo != 0.0 {
            // tie broken by the low word
            let h = if self.lo > 0.0 && h < self.hi { h + 1.0 } else if self.lo < 0.0 && h > self.hi { h - 1.0 } else { h };
            DD::from_f64(h)
        } else {
            DD::from_f64(h)
        }
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return DD::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return DD::ZERO;
        }
        let k = (self.hi / DD::LN_2.hi).round();
        let r = (self - DD::LN_2.mul_f64(k)).ldexp(-10);
        // expm1 by Taylor on |r| < 3.4e-4
        let mut term = r;
        let mut s = r;
        let mut n = 2.0;
        loop {
            term = (term * r) / DD::from_f64(n);
            s += term;
            if term.hi.abs() <= 1e-36 * s.hi.abs() {
                break;
            }
            n += 1.0;
        }
        for _ in 0..10 {
            s = s * (s + DD::from_f64(2.0));
        }
        let v = s + DD::ONE;
        // scale in two steps so 2^k never overflows on its own
        let k = k as i32;
        let k1 = k / 2;
        v.ldexp(k1).ldexp(k - k1)
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return DD::from_f64(if self.hi == 0.0 { f64::NEG_INFINITY } else { f64::NAN });
        }
        let mut y = DD::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - DD::ONE;
        }
        y
    }

    fn sin_taylor(r: DD) -> DD {
        let r2 = r.sqr();
        let mut term = r;
        let mut s = r;
        let mut n = 1.0;
        loop {
            term = -(term * r2) / DD::from_f64((n + 1.0) * (n + 2.0));
            s += term;
            n += 2.0;
            if term.hi.abs() < 1e-35 {
                break;
            }
        }
        s
    }

    fn cos_taylor(r: DD) -> DD {
        let r2 = r.sqr();
        let mut term = DD::ONE;
        let mut s = DD::ONE;
        let mut n = 0.0;
        loop {
            term = -(term * r2) / DD::from_f64((n + 1.0) * (n + 2.0));
            s += term;
            n += 2.0;
            if term.hi.abs() < 1e-35 {
                break;
            }
        }
        s
    }

    pub fn sin_cos(self) -> (Self, Self) {
        let k = (self.hi / DD::FRAC_PI_2.hi).round();
        let r = self - DD::FRAC_PI_2.mul_f64(k);
        let (s, c) = (DD::sin_taylor(r), DD::cos_taylor(r));
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn sin(self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(self) -> Self {
        self.sin_cos().1
    }

    pub fn atan2(y: DD, x: DD) -> DD {
        if x.hi == 0.0 && y.hi == 0.0 {
            return DD::ZERO;
        }
        let mut z = DD::from_f64(y.hi.atan2(x.hi));
        for _ in 0..2 {
            let (s, c) = z.sin_cos();
            z += (y * c - x * s) / (x * c + y * s);
        }
        z
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return DD::ONE;
        }
        let mut base = if n < 0 { DD::ONE / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = DD::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            e >>= 1;
        }
        acc
    }
}

impl From<f64> for DD {
    fn from(x: f64) -> Self {
        DD::from_f64(x)
    }
}

impl Add for DD {
    type Output = DD;
    #[inline]
    fn add(self, b: DD) -> DD {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (s, e) = quick_two_sum(s, e + f);
        DD { hi: s, lo: e }
    }
}

impl Sub for DD {
    type Output = DD;
    #[inline]
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Neg for DD {
    type Output = DD;
    #[inline]
    fn neg(self) -> DD {
        DD { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for DD {
    type Output = DD;
    #[inline]
    fn mul(self, b: DD) -> DD {
        let (p, e) = two_prod(self.hi, b.hi);
        let (s, e) = quick_two_sum(p, e + (self.hi * b.lo + self.lo * b.hi));
        DD { hi: s, lo: e }
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, b: DD) -> DD {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (s, e) = quick_two_sum(q1, q2);
        DD { hi: s, lo: e } + DD::from_f64(q3)
    }
}

impl Rem for DD {
    type Output = DD;
    fn rem(self, b: DD) -> DD {
        let q = self / b;
        let t = DD::from_f64(q.hi.trunc());
        self - b * t
    }
}

macro_rules! assign_op {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr for DD {
            #[inline]
            fn $f(&mut self, b: DD) {
                *self = *self $op b;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);

impl PartialOrd for DD {
    fn partial_cmp(&self, other: &DD) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Zero for DD {
    fn zero() -> Self {
        DD::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DD {
    fn one() -> Self {
        DD::ONE
    }
}

impl Num for DD {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        s.parse::<f64>().map(DD::from_f64)
    }
}

impl fmt::Display for DD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: DD, b: DD) -> f64 {
        ((a - b) / b).to_f64().abs()
    }

    // reference values computed at 40 digits
    #[test]
    fn exp_log_reference() {
        let e1 = DD::new(2.718281828459045091e+00, 1.445646891729250158e-16);
        assert!(rel(DD::ONE.exp(), e1) < 1e-31);
        let x = DD::from_f64(-40.3);
        let ex = DD::new(3.1472582402307286e-18, -1.238307780579342e-34);
        assert!(rel(x.exp(), ex) < 1e-30, "{}", rel(x.exp(), ex));
        let l10 = DD::new(2.302585092994045901e+00, -2.170756223382249351e-16);
        assert!(rel(DD::from_f64(10.0).ln(), l10) < 1e-31);
    }

    #[test]
    fn trig_reference() {
        let x = DD::from_f64(37.25);
        let (s, c) = x.sin_cos();
        let s_ref = DD::new(-0.4341656243337532, 2.17482609784034e-17);
        let c_ref = DD::new(0.9008330648055067, -6.795449470699078e-19);
        assert!(rel(s, s_ref) < 1e-30, "{}", rel(s, s_ref));
        assert!(rel(c, c_ref) < 1e-30, "{}", rel(c, c_ref));
        let a = DD::atan2(DD::from_f64(1.0), DD::from_f64(-2.0));
        let a_ref = DD::new(2.677945044588987, 1.5527705369303147e-16);
        assert!(rel(a, a_ref) < 1e-30, "{}", rel(a, a_ref));
    }

    #[test]
    fn identities() {
        for &v in &[0.3, 1.7, 12.5, -3.25, 100.125] {
            let x = DD::from_f64(v) / DD::from_f64(3.0);
            assert!(rel(x.exp().ln(), x) < 1e-30);
            let (s, c) = x.sin_cos();
            assert!((s.sqr() + c.sqr() - DD::ONE).to_f64().abs() < 1e-31);
            let r = x.abs().sqrt();
            assert!(rel(r.sqr(), x.abs()) < 1e-31);
            assert!(rel(DD::atan2(s, c).sin(), s) < 1e-29);
        }
        let third = DD::ONE / DD::from_f64(3.0);
        assert!((third.mul_f64(3.0) - DD::ONE).to_f64().abs() < 1e-32);
    }
}
