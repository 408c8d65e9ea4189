//! Gamma function: real f64 and double-double evaluations, and the Hankel
//! contour for the reciprocal gamma function.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::dd::DD;
use crate::error::{Error, Result};
use crate::quadrature::gl_cached;

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199_8,
    0.339_946_499_848_118_886_9e-4,
    0.465_236_289_270_485_756_6e-4,
    -0.983_744_753_048_795_646_8e-4,
    0.158_088_703_224_912_488_8e-3,
    -0.210_264_441_724_104_883_2e-3,
    0.217_439_618_115_212_643_2e-3,
    -0.164_318_106_536_763_890_2e-3,
    0.844_182_239_838_527_432_9e-4,
    -0.261_908_384_015_814_086_7e-4,
    0.368_991_826_595_316_227e-5,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_sum(z: f64) -> f64 {
    let mut s = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        s += c / (z + k as f64);
    }
    s
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= 10.0 {
        let r = 1.0 / x;
        let r2 = r * r;
        let corr = r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))));
        return (x - 0.5) * x.ln() - x + HALF_LN_2PI + corr;
    }
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma_pos(1.0 - x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    (PI * r).sin()
}

/// Γ(x) for real x; non-positive integers are poles.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma argument {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Pole(x));
    }
    if x < 0.5 {
        return Ok(PI / (sin_pi(x) * gamma_fn(1.0 - x)?));
    }
    if x > 171.7 {
        return Ok(f64::INFINITY);
    }
    if x < 10.0 {
        let z = x - 1.0;
        let t = z + LANCZOS_G + 0.5;
        return Ok((2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z));
    }
    // Stirling with the power split in two so it cannot overflow early
    let r = 1.0 / x;
    let r2 = r * r;
    let corr = r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))));
    let half = x.powf(0.5 * (x - 0.5));
    Ok((2.0 * PI).sqrt() * half * (-x).exp() * half * corr.exp())
}

/// 1/Γ(x), zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    match gamma_fn(x) {
        Ok(g) => 1.0 / g,
        Err(_) => 0.0,
    }
}

// B_{2k} / (2k (2k - 1)) as exact integer ratios.
const STIRLING: [(f64, f64); 15] = [
    (1.0, 12.0),
    (-1.0, 360.0),
    (1.0, 1260.0),
    (-1.0, 1680.0),
    (1.0, 1188.0),
    (-691.0, 360360.0),
    (1.0, 156.0),
    (-3617.0, 122400.0),
    (43867.0, 244188.0),
    (-174611.0, 125400.0),
    (77683.0, 5796.0),
    (-236364091.0, 1506960.0),
    (657931.0, 300.0),
    (-3392780147.0, 93960.0),
    (1723168255201.0, 2492028.0),
];

fn half_ln_2pi_dd() -> DD {
    static V: OnceLock<DD> = OnceLock::new();
    *V.get_or_init(|| DD::new(0.9189385332046728, -3.8782941580672414e-17))
}

/// ln Γ(x) in double-double for x > 0.
pub fn ln_gamma_dd(x: DD) -> DD {
    debug_assert!(x.hi > 0.0);
    let mut shift = DD::ONE;
    let mut y = x;
    while y.hi < 25.0 {
        shift *= y;
        y += DD::ONE;
    }
    let r = DD::ONE / y;
    let r2 = r * r;
    let mut corr = DD::ZERO;
    let mut rp = r;
    for (num, den) in STIRLING {
        corr += DD::ratio(num, den) * rp;
        rp *= r2;
    }
    (y - DD::from_f64(0.5)) * y.ln() - y + half_ln_2pi_dd() + corr - shift.ln()
}

/// 1/Γ(z) from the Hankel loop around the positive real axis: in along the
/// ray `arg t = 0`, once counterclockwise round `|t| = radius`, and out along
/// `arg t = 2π`, with `(-t)^{-z}` taken on `arg(-t) = arg t - π`.
/// The two rays combine into `sin(πz)/π ∫_R^∞ e^{-ρ} ρ^{-z} dρ`.
///
/// `nodes` is split evenly between the circle and the rays. The result is
/// compared with a run at twice the nodes; a disagreement beyond `1e-9`
/// relative is reported as non-convergence.
pub fn reciprocal_gamma_contour(z: Complex64, radius: f64, nodes: usize) -> Result<Complex64> {
    if !(radius > 0.0) || nodes < 64 {
        return Err(Error::InvalidParameter(format!(
            "reciprocal gamma contour needs radius > 0 and nodes >= 64 (got {radius}, {nodes})"
        )));
    }
    let coarse = hankel_rgamma(z, radius, nodes);
    let fine = hankel_rgamma(z, radius, 2 * nodes);
    let scale = fine.norm().max(1e-300);
    if (fine - coarse).norm() > 1e-9 * scale.max(1.0) {
        return Err(Error::QuadratureNonConvergence(format!(
            "reciprocal gamma contour at z = {z}: node halving changes result by {:e}",
            (fine - coarse).norm()
        )));
    }
    Ok(fine)
}

fn hankel_rgamma(z: Complex64, radius: f64, nodes: usize) -> Complex64 {
    let half = nodes / 2;
    // rays: geometric panels from the circle out to where e^{-ρ} is negligible
    let mut edges = vec![radius];
    while *edges.last().unwrap() < radius + 50.0 {
        let e = *edges.last().unwrap();
        edges.push((2.0 * e).min(radius + 50.0).max(e + 0.5));
    }
    let q = (half / (edges.len() - 1)).clamp(16, 64);
    let gl = gl_cached(q);
    let mut ray = Complex64::new(0.0, 0.0);
    for pair in edges.windows(2) {
        let m = gl.mapped(pair[0], pair[1]);
        for (&r, &w) in m.nodes.iter().zip(&m.weights) {
            ray += w * (-r - z * r.ln()).exp();
        }
    }
    let s = Complex64::new(PI * z.re, PI * z.im).sin() / PI;
    let gl = gl_cached(half.min(64));
    let panels = half.div_ceil(64).max(1);
    let mut circ = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    for p in 0..panels {
        let a = 2.0 * PI * p as f64 / panels as f64;
        let b = 2.0 * PI * (p + 1) as f64 / panels as f64;
        let m = gl.mapped(a, b);
        for (&th, &w) in m.nodes.iter().zip(&m.weights) {
            let t = Complex64::from_polar(radius, th);
            let ln_minus_t = Complex64::new(radius.ln(), th - PI);
            circ += w * (-t).exp() * (-z * ln_minus_t).exp() * i * t;
        }
    }
    s * ray + i / (2.0 * PI) * circ
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_reference_values() {
        let cases = [
            (0.5, 1.7724538509055160273),
            (2.3, 1.1667119051981602207),
            (7.25, 1155.3810139199896872),
            (33.75, 3.612655598733190574e36),
            (150.5, 4.6610726270973779184e261),
            (-2.5, -0.94530872048294188123),
            (1e-3, 999.4237724845954453),
        ];
        for (x, g) in cases {
            let got = gamma_fn(x).unwrap();
            assert!(((got - g) / g).abs() < 1e-13, "x={x}: {got} vs {g}");
        }
        assert!((ln_gamma_pos(150.5) - 602.5139548705854119507379).abs() < 1e-12);
        assert!((ln_gamma_pos(2.3) - 0.1541894549596304745).abs() < 1e-15);
    }

    #[test]
    fn gamma_poles() {
        for x in [0.0, -1.0, -7.0] {
            assert_eq!(gamma_fn(x), Err(Error::Pole(x)));
        }
    }

    #[test]
    fn ln_gamma_dd_reference() {
        let cases = [
            (2.3, DD::new(0.15418945495963046, 1.2507143445414782e-17)),
            (47.25, DD::new(133.91311374698927, 5.546713534886845e-15)),
            (0.125, DD::new(2.0194183575537963, 6.151050222889322e-17)),
        ];
        for (x, v) in cases {
            let got = ln_gamma_dd(DD::from_f64(x));
            assert!((got - v).to_f64().abs() < 1e-29 * v.hi.abs().max(1.0), "x={x}: {got}");
        }
    }

    #[test]
    fn hankel_matches_gamma() {
        for x in [0.5, 2.3, 7.25, -2.5, 1e-3] {
            let r = reciprocal_gamma_contour(Complex64::new(x, 0.0), 1.0, 64).unwrap();
            let g = 1.0 / gamma_fn(x).unwrap();
            assert!((r.re - g).abs() < 1e-12 * g.abs().max(1.0) && r.im.abs() < 1e-12, "x={x}: {r}");
        }
        let r = reciprocal_gamma_contour(Complex64::new(0.0, 0.0), 1.0, 64).unwrap();
        assert!(r.norm() < 1e-13);
        let cases = [
            (Complex64::new(0.3, 1.0), Complex64::new(0.1453931234841979899, -0.5048942136641516025)),
            (Complex64::new(-1.7, 0.4), Complex64::new(1.1356438824316395205, -0.2689079907291694143)),
        ];
        for (z, g) in cases {
            let r = reciprocal_gamma_contour(z, 1.0, 128).unwrap();
            assert!((r * g - 1.0).norm() < 1e-12, "z={z}: {r}");
        }
    }
}
