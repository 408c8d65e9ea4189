//! Gegenbauer and Laguerre polynomials and zonal harmonics.

use crate::real::Real;

/// Gegenbauer polynomial `C^ν_m(t)` by the three-term recurrence.
pub fn gegenbauer(m: usize, nu: f64, t: f64) -> f64 {
    gegenbauer_in(m, nu, t)
}

pub fn gegenbauer_in<R: Real>(m: usize, nu: R, t: R) -> R {
    let two = R::of(2.0);
    let mut c0 = R::one();
    if m == 0 {
        return c0;
    }
    let mut c1 = two * nu * t;
    for k in 2..=m {
        let kr = R::of(k as f64);
        let c2 = (two * t * (R::of(k as f64 - 1.0) + nu) * c1 - (R::of(k as f64 - 2.0) + two * nu) * c0) / kr;
        c0 = c1;
        c1 = c2;
    }
    c1
}

/// Normalized Gegenbauer polynomial `Č^ν_m = ((m+ν)/ν) C^ν_m`, with the
/// limit `Č^0_m(cos θ) = 2 cos mθ` for `m >= 1` and `Č^ν_0 = 1`.
pub fn gegenbauer_norm(m: usize, nu: f64, t: f64) -> f64 {
    gegenbauer_norm_in(m, nu, t)
}

pub fn gegenbauer_norm_in<R: Real>(m: usize, nu: R, t: R) -> R {
    if m == 0 {
        return R::one();
    }
    if nu == R::zero() {
        let two = R::of(2.0);
        let mut t0 = R::one();
        let mut t1 = t;
        for _ in 2..=m {
            let t2 = two * t * t1 - t0;
            t0 = t1;
            t1 = t2;
        }
        return two * t1;
    }
    (R::of(m as f64) + nu) / nu * gegenbauer_in(m, nu, t)
}

/// `d/dt Č^ν_m(t) = 2(ν+1) Č^{ν+1}_{m-1}(t)`.
pub fn gegenbauer_norm_deriv(m: usize, nu: f64, t: f64) -> f64 {
    if m == 0 {
        0.0
    } else {
        2.0 * (nu + 1.0) * gegenbauer_norm(m - 1, nu + 1.0, t)
    }
}

/// `Č^ν_m(1) = (m+ν)/ν · (2ν)_m / m!`, the dimension factor of the zonal kernel.
pub fn gegenbauer_norm_at_one(m: usize, nu: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if nu == 0.0 {
        return 2.0;
    }
    let mut c = 1.0;
    for k in 0..m {
        c *= (2.0 * nu + k as f64) / (k as f64 + 1.0);
    }
    (m as f64 + nu) / nu * c
}

/// `Σ_m a_m Č^ν_m(t)` by forward recurrence.
pub fn gegenbauer_norm_sum<R: Real>(coeffs: &[R], nu: R, t: R) -> R {
    let n = coeffs.len();
    if n == 0 {
        return R::zero();
    }
    let two = R::of(2.0);
    let mut s = coeffs[0];
    if n == 1 {
        return s;
    }
    if nu == R::zero() {
        let mut t0 = R::one();
        let mut t1 = t;
        s += coeffs[1] * two * t1;
        for a in &coeffs[2..] {
            let t2 = two * t * t1 - t0;
            t0 = t1;
            t1 = t2;
            s += *a * two * t1;
        }
        return s;
    }
    let mut c0 = R::one();
    let mut c1 = two * nu * t;
    s += coeffs[1] * (R::one() + nu) / nu * c1;
    for (k, a) in coeffs.iter().enumerate().skip(2) {
        let kr = R::of(k as f64);
        let c2 = (two * t * (R::of(k as f64 - 1.0) + nu) * c1 - (R::of(k as f64 - 2.0) + two * nu) * c0) / kr;
        c0 = c1;
        c1 = c2;
        s += *a * (kr + nu) / nu * c1;
    }
    s
}

/// Generalized Laguerre polynomial `L^{(α)}_l(x)`.
pub fn laguerre(l: usize, alpha: f64, x: f64) -> f64 {
    let mut l0 = 1.0;
    if l == 0 {
        return l0;
    }
    let mut l1 = 1.0 + alpha - x;
    for k in 1..l {
        let k = k as f64;
        let l2 = ((2.0 * k + 1.0 + alpha - x) * l1 - (k + alpha) * l0) / (k + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// Reproducing kernel of spherical harmonics of degree `m` on `S^{N-1}`
/// for the normalized surface measure: `Č^{(N-2)/2}_m(⟨ω, η⟩)`.
pub fn zonal(m: usize, n: usize, omega: &[f64], eta: &[f64]) -> f64 {
    let t: f64 = omega.iter().zip(eta).map(|(a, b)| a * b).sum();
    gegenbauer_norm(m, (n as f64 - 2.0) / 2.0, t.clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::sphere_rule;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        let cases = [
            (5, 0.5, 0.3, 0.34538625000000000187, 3.7992487500000000206),
            (12, 1.0 / 3.0, -0.7, -0.1227514812093136378, -4.5418048047446054709),
            (7, 2.5, 0.95, 149.13392483569323812, 566.70891437563427836),
            (30, 0.25, 0.1, 0.03578288332945041732, 4.3297288828635004957),
        ];
        for (m, nu, t, c, cn) in cases {
            assert!((gegenbauer(m, nu, t) - c).abs() < 1e-13 * c.abs().max(1.0));
            assert!((gegenbauer_norm(m, nu, t) - cn).abs() < 1e-13 * cn.abs().max(1.0));
        }
        let lcases = [(3, 0.5, 1.7, -1.0113333333333333391), (10, 2.0 / 3.0, 12.5, 12.759520219336231983), (25, 1.0, 40.0, 16431477.146281761017)];
        for (l, a, x, v) in lcases {
            assert!((laguerre(l, a, x) - v).abs() < 1e-12 * v.abs());
        }
    }

    #[test]
    fn chebyshev_limit() {
        for m in 1..8 {
            let th: f64 = 0.7;
            let v = gegenbauer_norm(m, 0.0, th.cos());
            assert!((v - 2.0 * (m as f64 * th).cos()).abs() < 1e-13);
            // continuity in ν
            let near = gegenbauer_norm(m, 1e-9, th.cos());
            assert!((near - v).abs() < 1e-7);
        }
    }

    #[test]
    fn zonal_reproducing() {
        let (pts, w) = sphere_rule(3, 8);
        let omega = [0.0, 0.6, 0.8];
        let eta = [1.0 / 3f64.sqrt(); 3];
        let lhs: f64 = pts.iter().zip(&w).map(|(mu, wt)| wt * zonal(2, 3, &omega, mu) * zonal(2, 3, mu, &eta)).sum();
        assert!((lhs - zonal(2, 3, &omega, &eta)).abs() < 1e-13);
    }

    proptest! {
        // Č^ν_m = C^{ν+1}_m - C^{ν+1}_{m-2}
        #[test]
        fn normalized_difference_identity(m in 2usize..40, nu in 0.05f64..4.0, t in -1.0f64..1.0) {
            let lhs = gegenbauer_norm(m, nu, t);
            let rhs = gegenbauer(m, nu + 1.0, t) - gegenbauer(m - 2, nu + 1.0, t);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        }

        #[test]
        fn derivative_identity(m in 1usize..25, nu in 0.0f64..3.0, t in -0.95f64..0.95) {
            // five-point stencil; the central difference is off by h² f'''/6,
            // which reaches 1e-6 near t = ±1 for m ~ 10
            let h = 1e-4;
            let g = |s: f64| gegenbauer_norm(m, nu, t + s);
            let fd = (8.0 * (g(h) - g(-h)) - (g(2.0 * h) - g(-2.0 * h))) / (12.0 * h);
            let d = gegenbauer_norm_deriv(m, nu, t);
            prop_assert!((fd - d).abs() <= 1e-6 * (1.0 + d.abs()));
        }

        #[test]
        fn sum_matches_termwise(nu in 0.0f64..3.0, t in -1.0f64..1.0, seed in 0u64..1000) {
            let coeffs: Vec<f64> = (0..20).map(|k| ((seed + k) as f64 * 0.37).sin()).collect();
            let direct: f64 = coeffs.iter().enumerate().map(|(m, a)| a * gegenbauer_norm(m, nu, t)).sum();
            let s = gegenbauer_norm_sum(&coeffs, nu, t);
            prop_assert!((s - direct).abs() <= 1e-11 * (1.0 + direct.abs()));
        }

        #[test]
        fn value_at_one(m in 0usize..30, nu in 0.0f64..3.0) {
            let v = gegenbauer_norm(m, nu, 1.0);
            prop_assert!((v - gegenbauer_norm_at_one(m, nu)).abs() <= 1e-10 * v.abs().max(1.0));
        }
    }
}
