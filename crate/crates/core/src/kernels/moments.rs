//! Moments of the heat flow: `c_a ∫ h_a(x,y;t)|y|^{ma}p(y) dy/|y|^{2-a}`.

use crate::error::{invalid, Result};

use super::{DeformParams, Harmonic};

/// Coefficients (lowest degree first) of `p_m` with `p_0 = 1` and
/// `p_{m+1}(x) = x p_m(x) + x p_m'(x) + (ν+m+1) p_m(x)`.
pub fn moment_poly_coeffs(m: usize, nu: f64) -> Vec<f64> {
    let mut c = vec![1.0];
    for k in 0..m {
        let mut next = vec![0.0; c.len() + 1];
        for (j, &cj) in c.iter().enumerate() {
            next[j + 1] += cj;
            next[j] += (j as f64 + nu + k as f64 + 1.0) * cj;
        }
        c = next;
    }
    c
}

pub fn moment_poly_p(m: usize, nu: f64, x: f64) -> f64 {
    moment_poly_coeffs(m, nu).iter().rev().fold(0.0, |acc, c| acc * x + c)
}

// Σ_i a^i C(m,i) Γ(λ+m+1)/Γ(λ+m-i+1) X^{m-i} t^i
fn flow_sum(a: f64, lam: f64, m: usize, t: f64, xa: f64) -> f64 {
    let mut sum = 0.0;
    let mut binom = 1.0;
    let mut ratio = 1.0;
    for i in 0..=m {
        if i > 0 {
            binom *= (m - i + 1) as f64 / i as f64;
            ratio *= lam + (m - i + 1) as f64;
        }
        let xpow = if m == i { 1.0 } else { xa.powi((m - i) as i32) };
        sum += a.powi(i as i32) * binom * ratio * xpow * t.powi(i as i32);
    }
    sum
}

/// `f_m(t, |x|^a)`: the flow of `|y|^{ma}`. `r_a` is `|x|^a`.
pub fn moment_flow_f(params: &DeformParams, m: usize, t: f64, r_a: f64) -> Result<f64> {
    if !(t >= 0.0) || !(r_a >= 0.0) {
        return invalid(format!("moment flow needs t >= 0 and |x|^a >= 0, got t = {t}, |x|^a = {r_a}"));
    }
    Ok(flow_sum(params.a, params.lambda_a, m, t, r_a))
}

/// Flow of `|y|^{ma} p(y)` for a harmonic `p` of degree `l`.
pub fn poly_flow(params: &DeformParams, m: usize, harmonic: &dyn Harmonic, t: f64, x: &[f64]) -> Result<f64> {
    if !(t >= 0.0) {
        return invalid(format!("flow time must be >= 0, got {t}"));
    }
    let l = harmonic.degree();
    let ra = x.iter().map(|v| v * v).sum::<f64>().sqrt().powf(params.a);
    Ok(flow_sum(params.a, params.lambda_am(l), m, t, ra) * harmonic.eval(x))
}
