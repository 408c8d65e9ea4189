//! Weber's second exponential integral
//! `∫_0^∞ e^{-δT} J_ν(2α√T) J_ν(2β√T) dT = δ^{-1} e^{-(α²+β²)/δ} I_ν(2αβ/δ)`,
//! used to check the quadrature machinery against a closed form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::power_weight_composite;
use crate::specfun::bessel::normalized_series;
use crate::specfun::{bessel_i_norm, bessel_i_scaled, bessel_j_real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeberCheck {
    pub numeric: f64,
    pub closed_form: f64,
    pub rel_gap: f64,
}

// J_ν(x) (x/2)^{-ν} for ν > -1, x >= 0
fn j_tilde(nu: f64, x: f64) -> Result<f64> {
    if x <= 8.0 {
        let h = 0.5 * x;
        return Ok(normalized_series(nu, Complex64::new(-h * h, 0.0))?.0.re);
    }
    let j = if nu >= 0.0 {
        bessel_j_real(nu, x)
    } else {
        // downward step from two non-negative orders
        let j1 = bessel_j_real(nu + 1.0, x);
        let j2 = bessel_j_real(nu + 2.0, x);
        2.0 * (nu + 1.0) / x * j1 - j2
    };
    Ok(j * (0.5 * x).powf(-nu))
}

/// Both sides of Weber's integral. The left side is integrated in
/// `σ = √T` with the weight `σ^{2ν+1}` built into the first panel;
/// `panel_nodes` Gauss points per panel.
pub fn weber_integral_check(alpha: f64, beta: f64, delta: f64, nu: f64, panel_nodes: usize) -> Result<WeberCheck> {
    if !(alpha >= 0.0 && beta >= 0.0 && delta > 0.0) || !(nu > -1.0) {
        return invalid(format!(
            "Weber integral needs alpha, beta >= 0, delta > 0, nu > -1; got {alpha}, {beta}, {delta}, {nu}"
        ));
    }
    if nu < 0.0 && alpha * beta == 0.0 {
        return invalid("Weber integral with nu < 0 needs alpha, beta > 0");
    }
    let s_max = (60.0 / delta).sqrt();
    let phase = 2.0 * (alpha + beta) * s_max;
    let panels = (phase / 2.0).ceil() as usize + 6;
    let edges: Vec<f64> = (0..=panels).map(|k| s_max * k as f64 / panels as f64).collect();
    let rule = power_weight_composite(2.0 * nu + 1.0, &edges, panel_nodes.max(8));
    let mut sum = 0.0;
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        sum += w * (-delta * s * s).exp() * j_tilde(nu, 2.0 * alpha * s)? * j_tilde(nu, 2.0 * beta * s)?;
    }
    let numeric = 2.0 * (alpha * beta).powf(nu) * sum;

    let x = 2.0 * alpha * beta / delta;
    let scaled_i = if nu >= 0.0 {
        bessel_i_scaled(nu, x)
    } else {
        (0.5 * x).powf(nu) * bessel_i_norm(nu, Complex64::new(x, 0.0))?.re * (-x).exp()
    };
    let closed_form = (-(alpha - beta).powi(2) / delta).exp() * scaled_i / delta;
    Ok(WeberCheck { numeric, closed_form, rel_gap: (numeric - closed_form).abs() / closed_form.abs().max(1e-300) })
}
