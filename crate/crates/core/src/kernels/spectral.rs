//! The heat kernel from its spectral definition
//! `h_a(x,y;t) = c_a ∫ conj(B_a(x,ξ)) B_a(y,ξ) e^{-(t/a)|ξ|^a} dξ/|ξ|^{2-a}`,
//! an oracle independent of the closed form.
//!
//! With `ξ = uη` and `U = u^a/a` the measure becomes
//! `c_a a^{λ_a} vol(S^{N-1}) U^{λ_a} dU dη/vol = U^{λ_a} dU dη/(Γ(λ_a+1) vol)`.
//! The radial integral runs in `σ = √U`, where `B_a` oscillates at a fixed
//! rate; the sphere integral is done in two angles, `⟨ω,η⟩` and the
//! azimuth of `η` about `ω` measured from `μ`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::{gegenbauer_rule, power_weight_composite};
use crate::scripti::Expansion;
use crate::specfun::ln_gamma_pos;

use super::{cos_angle, DeformParams, PolarPoint};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralRule {
    /// Gauss points per radial panel.
    pub panel_nodes: usize,
    /// Lower bound on the angular node count in each direction.
    pub min_angular: usize,
    /// The radial integral stops where `tU` reaches this value.
    pub tail: f64,
}

impl Default for SpectralRule {
    fn default() -> Self {
        SpectralRule { panel_nodes: 24, min_angular: 8, tail: 46.0 }
    }
}

fn normalized(rule: crate::quadrature::Rule) -> (Vec<f64>, Vec<f64>) {
    let tot: f64 = rule.weights.iter().sum();
    (rule.nodes, rule.weights.into_iter().map(|w| w / tot).collect())
}

pub fn heat_kernel_spectral_oracle(
    params: &DeformParams,
    x: &PolarPoint,
    y: &PolarPoint,
    t: f64,
    rule: &SpectralRule,
) -> Result<f64> {
    super::check_dims(params, &[x, y])?;
    if !(t >= 0.05) {
        return invalid(format!("the spectral oracle needs t >= 0.05, got {t}"));
    }
    let b = params.b();
    let nu = params.nu;
    let lam = params.lambda_a;
    let (rx, ry) = (params.big_r(x.r).sqrt(), params.big_r(y.r).sqrt());
    let s_max = (rule.tail / t).sqrt();
    // B_a(x, uη) = 𝓘(b, ν, -2i√(RU), ⟨ω,η⟩)
    let mx = Expansion::imaginary(b, nu, 2.0 * rx * s_max)?.len();
    let my = Expansion::imaginary(b, nu, 2.0 * ry * s_max)?.len();

    let c = cos_angle(x, y);
    let s = (1.0 - c * c).max(0.0).sqrt();
    // (⟨ω,η⟩, ⟨μ,η⟩, weight) over the sphere, normalized to mass one
    let mut ang: Vec<(f64, f64, f64)> = Vec::new();
    if params.n == 2 {
        let k = (mx + my + 2).max(rule.min_angular);
        for j in 0..k {
            let psi = std::f64::consts::TAU * (j as f64 + 0.5) / k as f64;
            ang.push((psi.cos(), (psi - c.acos()).cos(), 1.0 / k as f64));
        }
    } else {
        let (us, wu) = normalized(gegenbauer_rule(((mx + my) / 2 + 4).max(rule.min_angular), nu));
        let (vs, wv) = normalized(gegenbauer_rule((my / 2 + 4).max(rule.min_angular), nu - 0.5));
        for (&u, &w1) in us.iter().zip(&wu) {
            let su = (1.0 - u * u).max(0.0).sqrt();
            for (&v, &w2) in vs.iter().zip(&wv) {
                ang.push((u, c * u + s * su * v, w1 * w2));
            }
        }
    }

    let phase = 2.0 * (rx + ry) * s_max;
    let panels = (phase / 2.0).ceil() as usize + 8;
    let edges: Vec<f64> = (0..=panels).map(|k| s_max * k as f64 / panels as f64).collect();
    let radial = power_weight_composite(2.0 * lam + 1.0, &edges, rule.panel_nodes);
    let parts: Vec<Result<f64>> = radial
        .nodes
        .par_iter()
        .zip(radial.weights.par_iter())
        .map(|(&sig, &w)| {
            let ex = Expansion::imaginary(b, nu, 2.0 * rx * sig)?;
            let ey = Expansion::imaginary(b, nu, 2.0 * ry * sig)?;
            let mut mean = Complex64::new(0.0, 0.0);
            for &(u, v, wt) in &ang {
                mean += ex.value(u).conj() * ey.value(v.clamp(-1.0, 1.0)) * wt;
            }
            Ok(w * (-t * sig * sig).exp() * mean.re)
        })
        .collect();
    let mut sum = 0.0;
    for p in parts {
        sum += p?;
    }
    Ok(2.0 * sum * (-ln_gamma_pos(lam + 1.0)).exp())
}
