//! Gaussian rules, composite rules and an adaptive integrator.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::dd::DD;
use crate::error::{Error, Result};
use crate::real::{cabs_f64, cscale, Cx, Real};
use crate::specfun::gamma::ln_gamma_pos;

/// Nodes and weights of a one-dimensional rule.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Affine image of a rule on [-1, 1] onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        Rule {
            nodes: self.nodes.iter().map(|&x| c + h * x).collect(),
            weights: self.weights.iter().map(|&w| h * w).collect(),
        }
    }

    pub fn append(&mut self, other: Rule) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
    }
}

fn legendre_and_derivative<R: Real>(n: usize, x: R) -> (R, R) {
    let mut p0 = R::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = R::of(k as f64);
        let p2 = ((R::of(2.0) * kf - R::one()) * x * p1 - (kf - R::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (R::one(), R::zero());
    }
    let nf = R::of(n as f64);
    let dp = nf * (x * p1 - p0) / (x * x - R::one());
    (p1, dp)
}

/// Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Rule {
    let (x, w) = gauss_legendre_in::<f64>(n);
    Rule { nodes: x, weights: w }
}

pub fn gauss_legendre_in<R: Real>(n: usize) -> (Vec<R>, Vec<R>) {
    let mut xs = vec![R::zero(); n];
    let mut ws = vec![R::zero(); n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let mut zr = R::of(z);
        // the f64 root is correct to an ulp; polish in the target format
        for _ in 0..2 {
            let (p, dp) = legendre_and_derivative(n, zr);
            zr -= p / dp;
        }
        let (_, dp) = legendre_and_derivative(n, zr);
        let w = R::of(2.0) / ((R::one() - zr * zr) * dp * dp);
        xs[i] = -zr;
        ws[i] = w;
        xs[n - 1 - i] = zr;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

/// Gauss rule from the monic three-term recurrence
/// `p_{k+1} = (x - a_k) p_k - b_k p_{k-1}` with total mass `mu0`.
/// `b` must hold `b_0..=b_n`.
///
/// Nodes come from the Jacobi matrix and are then polished by Newton's
/// method; weights are the Christoffel numbers `1 / sum p_k(x)^2` over the
/// orthonormal family, which keeps tiny weights relatively accurate.
pub fn gauss_from_recurrence(a: &[f64], b: &[f64], mu0: f64) -> Rule {
    let n = a.len();
    assert!(b.len() > n);
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jm[(i, i)] = a[i];
        if i + 1 < n {
            let s = b[i + 1].sqrt();
            jm[(i, i + 1)] = s;
            jm[(i + 1, i)] = s;
        }
    }
    let eig = SymmetricEigen::new(jm);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp, _) = orthonormal_eval(a, b, mu0, *x);
            if dp == 0.0 {
                break;
            }
            let dx = p / dp;
            *x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1e-300) {
                break;
            }
        }
        let (_, _, log_sum_sq) = orthonormal_eval(a, b, mu0, *x);
        weights.push((-log_sum_sq).exp());
    }
    Rule { nodes, weights }
}

// Returns (p_n, p_n', ln sum_{k<n} p_k^2) for the orthonormal family, with
// p_n and p_n' carried on a common running scale.
fn orthonormal_eval(a: &[f64], b: &[f64], mu0: f64, x: f64) -> (f64, f64, f64) {
    let n = a.len();
    let mut pm = 0.0;
    let mut p = 1.0 / mu0.sqrt();
    let mut dpm = 0.0;
    let mut dp = 0.0;
    let mut log_scale = 0.0f64;
    let mut sum_sq = 0.0;
    for k in 0..n {
        sum_sq += p * p;
        let sb_next = b[k + 1].sqrt();
        let sb = if k == 0 { 0.0 } else { b[k].sqrt() };
        let pn = ((x - a[k]) * p - sb * pm) / sb_next;
        let dpn = (p + (x - a[k]) * dp - sb * dpm) / sb_next;
        pm = p;
        p = pn;
        dpm = dp;
        dp = dpn;
        let m = p.abs().max(pm.abs());
        if m > 1e100 {
            pm /= m;
            p /= m;
            dpm /= m;
            dp /= m;
            sum_sq /= m * m;
            log_scale += 2.0 * m.ln();
        }
    }
    (p, dp, sum_sq.ln() + log_scale)
}

fn laguerre_coeffs(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let a = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let b = (0..=n).map(|k| if k == 0 { 0.0 } else { k as f64 * (k as f64 + alpha) }).collect();
    (a, b)
}

/// Generalized Gauss–Laguerre rule for the weight `x^alpha e^{-x}` on (0, ∞).
pub fn gauss_laguerre(n: usize, alpha: f64) -> Rule {
    let (a, b) = laguerre_coeffs(n, alpha);
    gauss_from_recurrence(&a, &b, ln_gamma_pos(alpha + 1.0).exp())
}

fn jacobi_coeffs(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = alpha + beta;
    let a = (0..n)
        .map(|k| {
            let k = k as f64;
            if k == 0.0 {
                (beta - alpha) / (ab + 2.0)
            } else {
                (beta * beta - alpha * alpha) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0))
            }
        })
        .collect();
    let b = (0..=n)
        .map(|k| {
            let k = k as f64;
            if k == 0.0 {
                0.0
            } else if k == 1.0 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                let s = 2.0 * k + ab;
                4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))
            }
        })
        .collect();
    (a, b)
}

/// Gauss–Jacobi rule for `(1-x)^alpha (1+x)^beta` on [-1, 1].
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Rule {
    if (alpha + 0.5).abs() < 1e-15 && (beta + 0.5).abs() < 1e-15 {
        return gauss_chebyshev(n);
    }
    let (a, b) = jacobi_coeffs(n, alpha, beta);
    let ab = alpha + beta;
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma_pos(alpha + 1.0) + ln_gamma_pos(beta + 1.0)
        - ln_gamma_pos(ab + 2.0))
    .exp();
    gauss_from_recurrence(&a, &b, mu0)
}

/// Gauss–Chebyshev rule for `(1-x^2)^{-1/2}`.
pub fn gauss_chebyshev(n: usize) -> Rule {
    let pi = std::f64::consts::PI;
    Rule {
        nodes: (0..n).map(|i| -((2 * i + 1) as f64 * pi / (2 * n) as f64).cos()).collect(),
        weights: vec![pi / n as f64; n],
    }
}

/// Gauss rule for the weight `(1-u^2)^{lambda-1/2}`, lambda > -1/2.
pub fn gegenbauer_rule(n: usize, lambda: f64) -> Rule {
    gauss_jacobi(n, lambda - 0.5, lambda - 0.5)
}

/// Rule for `∫_0^{edges.last} s^p g(s) ds` with `n` points on each panel.
/// The first panel uses Gauss–Jacobi so the power weight is integrated
/// exactly; the returned weights include `s^p`.
pub fn power_weight_composite(p: f64, edges: &[f64], n: usize) -> Rule {
    assert!(edges.len() >= 2 && edges[0] == 0.0);
    let h0 = edges[1];
    let first = gauss_jacobi(n, 0.0, p);
    let scale = (0.5 * h0).powf(p + 1.0);
    let mut rule = Rule {
        nodes: first.nodes.iter().map(|&x| 0.5 * h0 * (1.0 + x)).collect(),
        weights: first.weights.iter().map(|&w| w * scale).collect(),
    };
    let gl = gl_cached(n);
    for pair in edges[1..].windows(2) {
        let m = gl.mapped(pair[0], pair[1]);
        for (x, w) in m.nodes.iter().zip(&m.weights) {
            rule.nodes.push(*x);
            rule.weights.push(w * x.powf(p));
        }
    }
    rule
}

/// Cached Gauss–Legendre rules for small node counts.
pub fn gl_cached(n: usize) -> &'static Rule {
    static CACHE: OnceLock<Vec<Rule>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| (0..=64).map(gauss_legendre).collect());
    if n <= 64 {
        &cache[n]
    } else {
        Box::leak(Box::new(gauss_legendre(n)))
    }
}

/// Normalized product rule on the unit sphere `S^{d-1}` in `R^d`.
/// Exact for polynomials of degree below `2 n` in each polar angle.
pub fn sphere_rule(d: usize, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if d == 1 {
        return (vec![vec![1.0], vec![-1.0]], vec![0.5, 0.5]);
    }
    if d == 2 {
        let m = 2 * n;
        let pts = (0..m)
            .map(|k| {
                let th = std::f64::consts::TAU * (k as f64 + 0.5) / m as f64;
                vec![th.cos(), th.sin()]
            })
            .collect();
        return (pts, vec![1.0 / m as f64; m]);
    }
    let lam = (d as f64 - 2.0) / 2.0;
    let r = gegenbauer_rule(n, lam);
    let tot: f64 = r.weights.iter().sum();
    let (sub_pts, sub_w) = sphere_rule(d - 1, n);
    let mut pts = Vec::with_capacity(n * sub_pts.len());
    let mut ws = Vec::with_capacity(n * sub_pts.len());
    for (&u, &wu) in r.nodes.iter().zip(&r.weights) {
        let s = (1.0 - u * u).max(0.0).sqrt();
        for (q, &wq) in sub_pts.iter().zip(&sub_w) {
            let mut p = Vec::with_capacity(d);
            p.push(u);
            p.extend(q.iter().map(|c| s * c));
            pts.push(p);
            ws.push(wu / tot * wq);
        }
    }
    (pts, ws)
}

/// Twenty-point Gauss–Legendre panel in the working precision.
pub trait PanelRule: Real {
    fn panel() -> &'static (Vec<Self>, Vec<Self>);
}

impl PanelRule for f64 {
    fn panel() -> &'static (Vec<f64>, Vec<f64>) {
        static P: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
        P.get_or_init(|| gauss_legendre_in::<f64>(20))
    }
}

impl PanelRule for DD {
    fn panel() -> &'static (Vec<DD>, Vec<DD>) {
        static P: OnceLock<(Vec<DD>, Vec<DD>)> = OnceLock::new();
        P.get_or_init(|| gauss_legendre_in::<DD>(20))
    }
}

#[derive(Clone, Debug)]
pub struct Adaptive<R: Real> {
    pub value: Cx<R>,
    /// Integral of the modulus, for condition estimates.
    pub abs_integral: f64,
    pub err: f64,
    pub evals: usize,
}

fn panel_eval<R: PanelRule, F: FnMut(R) -> Cx<R>>(f: &mut F, a: R, b: R) -> (Cx<R>, f64) {
    let (xs, ws) = R::panel();
    let h = (b - a) / R::of(2.0);
    let c = (a + b) / R::of(2.0);
    let mut s = Complex::new(R::zero(), R::zero());
    let mut sa = 0.0;
    for (x, w) in xs.iter().zip(ws) {
        let v = f(c + h * *x);
        let wh = *w * h;
        sa += wh.f64().abs() * cabs_f64(v);
        s = s + cscale(v, wh);
    }
    (s, sa)
}

/// Adaptive bisection with a twenty-point Gauss–Legendre panel, accepting
/// a panel when its value agrees with the sum over its halves to within
/// the share of `abs_tol` proportional to its length. `noise` is the
/// relative rounding level of `f` itself; no panel is refined below it.
pub fn adaptive_integrate<R: PanelRule, F: FnMut(R) -> Cx<R>>(
    mut f: F,
    a: R,
    b: R,
    abs_tol: f64,
    noise: f64,
    max_evals: usize,
) -> Result<Adaptive<R>> {
    let noise = noise.max(64.0 * R::EPS);
    let total = (b - a).f64().abs();
    let mut out = Adaptive { value: Complex::new(R::zero(), R::zero()), abs_integral: 0.0, err: 0.0, evals: 0 };
    if total == 0.0 {
        return Ok(out);
    }
    let (v0, a0) = panel_eval(&mut f, a, b);
    out.evals += 20;
    let mut stack = vec![(a, b, v0, a0, 0u32)];
    while let Some((lo, hi, whole, whole_abs, depth)) = stack.pop() {
        let mid = (lo + hi) / R::of(2.0);
        let (vl, al) = panel_eval(&mut f, lo, mid);
        let (vr, ar) = panel_eval(&mut f, mid, hi);
        out.evals += 40;
        let halves = vl + vr;
        let diff = cabs_f64(halves - whole);
        // never ask for less than the rounding level of the panel
        let share = abs_tol * ((hi - lo).f64().abs() / total) + noise * (al + ar);
        if diff <= share || depth >= 50 {
            if depth >= 50 && diff > share {
                return Err(Error::QuadratureNonConvergence(format!(
                    "panel [{:e}, {:e}] unresolved after 50 bisections",
                    lo.f64(),
                    hi.f64()
                )));
            }
            out.value = out.value + halves;
            out.abs_integral += al + ar;
            // the halves are far more accurate than the panel they refine
            out.err += diff * 1e-3;
            let _ = whole_abs;
        } else {
            if out.evals > max_evals {
                return Err(Error::QuadratureNonConvergence(format!(
                    "evaluation budget {max_evals} exhausted"
                )));
            }
            stack.push((lo, mid, vl, al, depth + 1));
            stack.push((mid, hi, vr, ar, depth + 1));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_exactness() {
        let r = gauss_legendre(12);
        for k in 0..24 {
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            let got = r.integrate(|x| x.powi(k));
            assert!((got - exact).abs() < 1e-14, "k={k}");
        }
        let (x, w) = gauss_legendre_in::<DD>(20);
        let s = x.iter().zip(&w).fold(DD::ZERO, |acc, (x, w)| acc + *w * x.powi(10));
        assert!((s - DD::ratio(2.0, 11.0)).to_f64().abs() < 1e-30);
    }

    #[test]
    fn laguerre_moments() {
        for &alpha in &[0.0, 0.5, 1.0 / 3.0, 2.0] {
            let n = 20;
            let r = gauss_laguerre(n, alpha);
            for k in 0..(2 * n) {
                let exact = ln_gamma_pos(alpha + k as f64 + 1.0);
                let got = r.integrate(|x| x.powi(k as i32));
                assert!((got.ln() - exact).abs() < 1e-12, "alpha={alpha} k={k}");
            }
        }
        // large rules keep accurate tail weights
        let r = gauss_laguerre(192, 0.5);
        let got = r.integrate(|x| x.powi(30));
        let exact = ln_gamma_pos(31.5);
        assert!((got.ln() - exact).abs() < 1e-12);
    }

    #[test]
    fn jacobi_moments() {
        // weight (1-x)^a (1+x)^b, compare against Beta function moments
        for &(al, be) in &[(0.0, 0.0), (0.5, 0.5), (-0.5, -0.5), (0.0, 7.0 / 3.0), (1.5, 0.25)] {
            let r = gauss_jacobi(16, al, be);
            // ∫ (1+x)^k w = 2^{a+b+k+1} B(a+1, b+k+1)
            for k in 0..32 {
                let kf = k as f64;
                let lnexact = (al + be + kf + 1.0) * std::f64::consts::LN_2 + ln_gamma_pos(al + 1.0)
                    + ln_gamma_pos(be + kf + 1.0)
                    - ln_gamma_pos(al + be + kf + 2.0);
                let got = r.integrate(|x| (1.0 + x).powi(k));
                assert!((got.ln() - lnexact).abs() < 1e-12, "({al},{be}) k={k}");
            }
        }
    }

    #[test]
    fn power_composite() {
        let p = 7.0 / 3.0;
        let r = power_weight_composite(p, &[0.0, 0.5, 1.5, 3.0], 16);
        let got = r.integrate(|s| (-s).exp());
        // ∫_0^3 s^p e^{-s} ds = γ(p+1, 3)
        let exact = 1.3848287662480684; // lower incomplete gamma
        assert!((got - exact).abs() < 1e-13, "{got}");
    }

    #[test]
    fn sphere_polynomials() {
        let (pts, w) = sphere_rule(3, 6);
        let m: f64 = pts.iter().zip(&w).map(|(p, w)| w * p[2] * p[2]).sum();
        assert!((m - 1.0 / 3.0).abs() < 1e-14);
        let (pts, w) = sphere_rule(4, 6);
        let m: f64 = pts.iter().zip(&w).map(|(p, w)| w * p[1].powi(4)).sum();
        // E[x^4] on S^3 = 3/(d(d+2)) = 1/8
        assert!((m - 0.125).abs() < 1e-14);
    }

    #[test]
    fn adaptive_peaked() {
        let eps = 1e-3;
        let r = adaptive_integrate::<f64, _>(
            |x| Complex::new(eps / (x * x + eps * eps), 0.0),
            -1.0,
            1.0,
            1e-12,
            0.0,
            1_000_000,
        )
        .unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((r.value.re - exact).abs() < 1e-11);
    }
}
