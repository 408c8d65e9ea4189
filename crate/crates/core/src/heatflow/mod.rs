//! Quadrature for the measure `dy/|y|^{2-a}` and the heat flow
//! `H_t u(x) = c_a ∫ h_a(x,y;t) u(y) dy/|y|^{2-a}`.
//!
//! Polar coordinates `y = sμ` with `S = s^a/a` give
//! `dy/|y|^{2-a} = a^{λ_a} S^{λ_a} dS dμ`. The sphere is split as
//! `μ = uω + √(1-u²)η` with `η` on the unit sphere of `ω^⊥`; the kernel sees
//! only `u`, the field sees all of `μ`.
//!
//! The flow itself is integrated in `σ = √S`, where the kernel carries the
//! Gaussian factor `e^{-(σ-√R)²/t}`; the radial panels follow that peak so
//! small times and points away from the origin are resolved.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::{fd_laplacian, heat_kernel, DeformParams, HeatRadial, PolarPoint};
use crate::quadrature::{gauss_laguerre, gegenbauer_rule, gl_cached, power_weight_composite, sphere_rule, Rule};
use crate::specfun::ln_gamma_pos;

#[cfg(test)]
mod tests;

/// Gauss points per radial or angular panel of the flow rule.
const PANEL: usize = 16;

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub n_rad: usize,
    pub n_ang: usize,
    /// Points per polar angle of the product rule on the sphere of `ω^⊥`.
    pub n_sub: usize,
    /// The radial rule carries `S^{λ_a + shift}`; a shift of `m` makes
    /// `|y|^{ma}` moments exact.
    pub shift: usize,
    /// Scale of the radial weight `e^{-S/τ}`.
    pub tau: f64,
    /// Generalized Gauss–Laguerre in `X = S/τ`, weight `X^{λ_a+shift} e^{-X}`.
    pub radial: Rule,
    /// Gegenbauer rule in `u` for `(1-u²)^{(N-3)/2}`, weights summing to one.
    pub angular: Rule,
    lambda: f64,
    nu: f64,
}

impl QuadratureRule {
    pub fn new(params: &DeformParams, n_rad: usize, n_ang: usize, n_sub: usize, shift: usize, tau: f64) -> Result<Self> {
        if n_rad < 2 || n_ang < 2 || n_sub < 1 {
            return invalid(format!("rule sizes too small: n_rad = {n_rad}, n_ang = {n_ang}, n_sub = {n_sub}"));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return invalid(format!("radial scale must be positive, got {tau}"));
        }
        let mut angular = gegenbauer_rule(n_ang, params.nu);
        let tot: f64 = angular.weights.iter().sum();
        angular.weights.iter_mut().for_each(|w| *w /= tot);
        Ok(QuadratureRule {
            n_rad,
            n_ang,
            n_sub,
            shift,
            tau,
            radial: gauss_laguerre(n_rad, params.lambda_a + shift as f64),
            angular,
            lambda: params.lambda_a,
            nu: params.nu,
        })
    }

    /// `n_rad = 96`, `n_ang = 64`, `n_sub = 12`, no shift, `τ = 1`.
    pub fn default_for(params: &DeformParams) -> Self {
        Self::new(params, 96, 64, 12, 0, 1.0).expect("default sizes are valid")
    }

    pub fn with_sizes(&self, n_rad: usize, n_ang: usize, n_sub: usize) -> Self {
        let mut r = self.clone();
        r.n_rad = n_rad;
        r.n_ang = n_ang;
        r.n_sub = n_sub;
        r.radial = gauss_laguerre(n_rad, self.lambda + self.shift as f64);
        let mut angular = gegenbauer_rule(n_ang, self.nu);
        let tot: f64 = angular.weights.iter().sum();
        angular.weights.iter_mut().for_each(|w| *w /= tot);
        r.angular = angular;
        r
    }

    fn check(&self, params: &DeformParams) -> Result<()> {
        if self.lambda != params.lambda_a || self.nu != params.nu {
            return invalid(format!(
                "quadrature rule was built for λ_a = {}, ν = {}, used with λ_a = {}, ν = {}",
                self.lambda, self.nu, params.lambda_a, params.nu
            ));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        self.with_sizes(2 * self.n_rad, 2 * self.n_ang, 2 * self.n_sub)
    }

    /// `∫_0^∞ g(S) S^{λ_a} e^{-S/τ} dS`.
    pub fn radial_integral(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        let k = self.shift as f64;
        let mut sum = 0.0;
        for (&x, &w) in self.radial.nodes.iter().zip(&self.radial.weights) {
            sum += w * x.powf(-k) * g(self.tau * x);
        }
        sum * self.tau.powf(self.lambda + 1.0)
    }

    /// `∫_0^∞ F(S) S^{λ_a} dS` for an integrand that carries its own decay;
    /// `e^{S/τ}` is folded into the weights in log form. `f` returns `F` and
    /// a bound on `|F|`; the second output integrates the bound.
    pub fn radial_integral_unweighted(&self, mut f: impl FnMut(f64) -> (f64, f64)) -> (f64, f64) {
        let k = self.shift as f64;
        let (mut sum, mut mag) = (0.0, 0.0);
        for (&x, &w) in self.radial.nodes.iter().zip(&self.radial.weights) {
            if w > 0.0 {
                let c = (w.ln() + x - k * x.ln()).exp();
                let (v, m) = f(self.tau * x);
                sum += c * v;
                mag += c * m;
            }
        }
        let scale = self.tau.powf(self.lambda + 1.0);
        (sum * scale, mag * scale)
    }
}

/// A scalar field with `|u(y)| <= C(1 + |y|^{m a})`; `m` is the declared
/// growth exponent.
#[derive(Clone)]
pub struct ScalarField {
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub growth: f64,
    /// The field depends on `|y|` only.
    pub radial: bool,
    /// Declared `(inf u, sup u)` for bounded fields.
    pub bounds: Option<(f64, f64)>,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("growth", &self.growth)
            .field("radial", &self.radial)
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl ScalarField {
    pub fn new(growth: f64, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField { f: Arc::new(f), growth, radial: false, bounds: None }
    }

    /// A field `g(|y|)`.
    pub fn radial(growth: f64, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let f = move |y: &[f64]| g(y.iter().map(|v| v * v).sum::<f64>().sqrt());
        ScalarField { f: Arc::new(f), growth, radial: true, bounds: None }
    }

    pub fn constant(c: f64) -> Self {
        let mut u = Self::radial(0.0, move |_| c);
        u.bounds = Some((c, c));
        u
    }

    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Self {
        self.bounds = Some((lo, hi));
        self
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        (self.f)(y)
    }
}

#[derive(Clone, Debug)]
pub struct FlowRequest {
    pub params: DeformParams,
    pub t: f64,
    pub u: ScalarField,
}

impl FlowRequest {
    pub fn new(params: DeformParams, t: f64, u: ScalarField) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return invalid(format!("flow time must be positive, got {t}"));
        }
        if !(u.growth >= 0.0) || !u.growth.is_finite() {
            return invalid(format!("growth exponent must be finite and >= 0, got {}", u.growth));
        }
        Ok(FlowRequest { params, t, u })
    }
}

fn check_dim(params: &DeformParams, n: usize) -> Result<()> {
    if n != params.n {
        return invalid(format!("point has dimension {n}, expected N = {}", params.n));
    }
    Ok(())
}

/// Orthonormal basis of the complement of the unit vector `omega`.
fn perp_basis(omega: &[f64]) -> Vec<Vec<f64>> {
    let n = omega.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    // skip the coordinate axis most aligned with omega
    let skip = (0..n).max_by(|&i, &j| omega[i].abs().total_cmp(&omega[j].abs())).unwrap_or(0);
    for k in (0..n).filter(|&k| k != skip) {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for b in std::iter::once(omega).chain(basis.iter().map(|b| b.as_slice())) {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    basis
}

/// `∫ f(y) dy/|y|^{2-a}`. Doubling `n_rad` must not move the value by
/// more than 1e-8 relative.
pub fn weighted_integral(params: &DeformParams, f: &ScalarField, rule: &QuadratureRule) -> Result<f64> {
    rule.check(params)?;
    let (v1, _) = weighted_integral_fixed(params, f, rule);
    let finer = rule.with_sizes(2 * rule.n_rad, rule.n_ang, rule.n_sub);
    let (v2, mag) = weighted_integral_fixed(params, f, &finer);
    if !v2.is_finite() || (v2 - v1).abs() > 1e-8 * mag.max(f64::MIN_POSITIVE) {
        return Err(Error::QuadratureNonConvergence(format!(
            "weighted integral moved from {v1} to {v2} when n_rad was doubled"
        )));
    }
    Ok(v2)
}

fn weighted_integral_fixed(params: &DeformParams, f: &ScalarField, rule: &QuadratureRule) -> (f64, f64) {
    let n = params.n;
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let basis = perp_basis(&e1);
    let (sub_pts, sub_w) = sphere_rule(n - 1, rule.n_sub);
    let mean = |s: f64| -> (f64, f64) {
        if f.radial {
            let v = f.eval(&e1.iter().map(|c| c * s).collect::<Vec<_>>());
            return (v, v.abs());
        }
        let (mut acc, mut mag) = (0.0, 0.0);
        let mut y = vec![0.0; n];
        for (&u, &wu) in rule.angular.nodes.iter().zip(&rule.angular.weights) {
            let c = (1.0 - u * u).max(0.0).sqrt();
            for (q, &wq) in sub_pts.iter().zip(&sub_w) {
                for (k, yk) in y.iter_mut().enumerate() {
                    let perp: f64 = q.iter().zip(&basis).map(|(qj, b)| qj * b[k]).sum();
                    *yk = s * (u * e1[k] + c * perp);
                }
                let v = wu * wq * f.eval(&y);
                acc += v;
                mag += v.abs();
            }
        }
        (acc, mag)
    };
    let (integral, mag) = rule.radial_integral_unweighted(|big_s| mean(params.radius_of(big_s)));
    let c = params.a.powf(params.lambda_a) * params.sphere_volume();
    (c * integral, c * mag)
}

/// Quadrature in `σ = √S` adapted to the heat kernel at `x` and time `t`.
struct FlowPlan {
    sigma: Vec<f64>,
    /// Weights including `σ^{2λ_a+1}` and `2/Γ(λ_a+1)`.
    weights: Vec<f64>,
    radius: Vec<f64>,
    kernels: Vec<HeatRadial>,
    /// Angular rule per radial node: `(u, weight)`, weights sum to one.
    angular: Vec<Arc<(Vec<f64>, Vec<f64>)>>,
}

fn angular_panels(n: usize, n_ang: usize, theta_max: f64) -> (Vec<f64>, Vec<f64>) {
    let panels = (n_ang / PANEL).max(2);
    let gl = gl_cached(PANEL);
    let mut us = Vec::with_capacity(panels * PANEL);
    let mut ws = Vec::with_capacity(panels * PANEL);
    // ∫_0^π sin^{N-2} θ dθ
    let z = (0.5 * std::f64::consts::PI.ln() + ln_gamma_pos((n as f64 - 1.0) / 2.0) - ln_gamma_pos(n as f64 / 2.0)).exp();
    for k in 0..panels {
        let m = gl.mapped(theta_max * k as f64 / panels as f64, theta_max * (k + 1) as f64 / panels as f64);
        for (&th, &w) in m.nodes.iter().zip(&m.weights) {
            us.push(th.cos());
            ws.push(w * th.sin().powi(n as i32 - 2) / z);
        }
    }
    (us, ws)
}

impl FlowPlan {
    fn new(params: &DeformParams, r: f64, t: f64, growth: f64, rule: &QuadratureRule) -> Result<Self> {
        rule.check(params)?;
        let lam = params.lambda_a;
        let rho = params.big_r(r).sqrt();
        let st = t.sqrt();
        let p = 2.0 * lam + 1.0 + 2.0 * growth;
        let hi = rho + st * ((0.5 * p).sqrt() + 7.5);
        let lo = (rho - 7.5 * st).max(0.0);
        let panels = (rule.n_rad / PANEL).max(2);
        let edges: Vec<f64> = (0..=panels).map(|k| lo + (hi - lo) * k as f64 / panels as f64).collect();
        let base = if lo == 0.0 {
            power_weight_composite(2.0 * lam + 1.0, &edges, PANEL)
        } else {
            let gl = gl_cached(PANEL);
            let mut r = Rule { nodes: Vec::new(), weights: Vec::new() };
            for pair in edges.windows(2) {
                let m = gl.mapped(pair[0], pair[1]);
                for (&x, &w) in m.nodes.iter().zip(&m.weights) {
                    r.nodes.push(x);
                    r.weights.push(w * x.powf(2.0 * lam + 1.0));
                }
            }
            r
        };
        let norm = 2.0 * (-ln_gamma_pos(lam + 1.0)).exp();
        let radius: Vec<f64> = base.nodes.iter().map(|&s| params.radius_of(s * s)).collect();
        let kernels = radius.iter().map(|&s| HeatRadial::new(params, r, s, t)).collect::<Result<Vec<_>>>()?;

        let gegen = Arc::new((rule.angular.nodes.clone(), rule.angular.weights.clone()));
        let b = params.b();
        // the kernel is a polynomial of effective degree ~8√(w)/b in u; past what
        // the Gegenbauer rule integrates, switch to θ-panels around u = 1
        let w_cut = ((2.0 * rule.n_ang as f64 - 31.0) / 8.0).max(1.0).powi(2);
        let angular = kernels
            .iter()
            .map(|k| {
                let w_eff = k.expansion.log_scale / (b * b);
                if w_eff <= w_cut {
                    gegen.clone()
                } else {
                    let th = (12.0 / w_eff.sqrt()).min(std::f64::consts::PI);
                    Arc::new(angular_panels(params.n, rule.n_ang, th))
                }
            })
            .collect();
        Ok(FlowPlan {
            sigma: base.nodes,
            weights: base.weights.into_iter().map(|w| w * norm).collect(),
            radius,
            kernels,
            angular,
        })
    }

    /// `(H_t u(rω), ∫ |h u|)` for the field `f(i, y)`, where `i` is the
    /// index of the radial node of `y`.
    fn apply(
        &self,
        omega: &[f64],
        radial: bool,
        sub: &(Vec<Vec<f64>>, Vec<f64>),
        f: &(dyn Fn(usize, &[f64]) -> f64 + Sync),
    ) -> (f64, f64) {
        let n = omega.len();
        let basis = perp_basis(omega);
        let perps: Vec<Vec<f64>> = sub
            .0
            .iter()
            .map(|q| (0..n).map(|k| q.iter().zip(&basis).map(|(qj, b)| qj * b[k]).sum()).collect())
            .collect();
        let parts: Vec<(f64, f64)> = (0..self.sigma.len())
            .into_par_iter()
            .map(|i| {
                let s = self.radius[i];
                let k = &self.kernels[i];
                if k.prefactor == 0.0 {
                    return (0.0, 0.0);
                }
                let (us, ws) = &*self.angular[i];
                let mut acc = 0.0;
                let mut mag = 0.0;
                if radial {
                    let y: Vec<f64> = omega.iter().map(|c| c * s).collect();
                    let kint: f64 = us.iter().zip(ws).map(|(&c, &w)| w * k.at(c)).sum();
                    acc = kint * f(i, &y);
                    mag = acc.abs();
                } else {
                    let mut y = vec![0.0; n];
                    for (&c, &w) in us.iter().zip(ws) {
                        let kv = k.at(c);
                        if kv == 0.0 {
                            continue;
                        }
                        let sn = (1.0 - c * c).max(0.0).sqrt();
                        for (p, &wq) in perps.iter().zip(&sub.1) {
                            for j in 0..n {
                                y[j] = s * (c * omega[j] + sn * p[j]);
                            }
                            let v = w * wq * kv * f(i, &y);
                            acc += v;
                            mag += v.abs();
                        }
                    }
                }
                (self.weights[i] * acc, self.weights[i] * mag)
            })
            .collect();
        parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
    }

    fn apply_field(&self, omega: &[f64], u: &ScalarField, sub: &(Vec<Vec<f64>>, Vec<f64>)) -> (f64, f64) {
        self.apply(omega, u.radial, sub, &|_, y| u.eval(y))
    }
}

fn sub_rule(params: &DeformParams, u: &ScalarField, n_sub: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if u.radial {
        (vec![vec![0.0; params.n - 1]], vec![1.0])
    } else {
        sphere_rule(params.n - 1, n_sub)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowValue {
    pub value: f64,
    /// `c_a ∫ h_a |u| dy/|y|^{2-a}`, the scale for relative gaps.
    pub magnitude: f64,
    pub n_rad: usize,
    pub n_ang: usize,
}

/// The flow with the rule as given, no refinement.
pub fn heat_flow_fixed(req: &FlowRequest, x: &PolarPoint, rule: &QuadratureRule) -> Result<FlowValue> {
    check_dim(&req.params, x.dim())?;
    let plan = FlowPlan::new(&req.params, x.r, req.t, req.u.growth, rule)?;
    let (value, magnitude) = plan.apply_field(&x.omega, &req.u, &sub_rule(&req.params, &req.u, rule.n_sub));
    Ok(FlowValue { value, magnitude, n_rad: rule.n_rad, n_ang: rule.n_ang })
}

/// `H_t u(x)`. The rule is doubled (three rounds at most) until two
/// successive values agree to 1e-8 of `c_a ∫ h_a |u|`.
pub fn heat_flow(req: &FlowRequest, x: &PolarPoint, rule: &QuadratureRule) -> Result<f64> {
    check_dim(&req.params, x.dim())?;
    refine(rule, &|r: &QuadratureRule| {
        let v = heat_flow_fixed(req, x, r)?;
        Ok((v.value, v.magnitude))
    })
    .map_err(|e| match e {
        Error::QuadratureNonConvergence(m) => {
            Error::QuadratureNonConvergence(format!("heat flow at r = {}, t = {}: {m}", x.r, req.t))
        }
        e => e,
    })
}

// doubles the rule until two successive values agree to 1e-8 of the magnitude
fn refine(rule: &QuadratureRule, f: &dyn Fn(&QuadratureRule) -> Result<(f64, f64)>) -> Result<f64> {
    let mut cur = rule.clone();
    let mut prev = f(&cur)?.0;
    for _ in 0..3 {
        let next = cur.doubled();
        let (v, mag) = f(&next)?;
        if (v - prev).abs() <= 1e-8 * mag.max(f64::MIN_POSITIVE) {
            return Ok(v);
        }
        prev = v;
        cur = next;
    }
    Err(Error::QuadratureNonConvergence(format!("still moving after three doublings (last value {prev})")))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub dt: f64,
    /// `(1/a)|x|^{2-a} Δ`.
    pub spatial: f64,
    pub residual: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        self.residual.abs() / (self.dt.abs() + self.spatial.abs()).max(f64::MIN_POSITIVE)
    }
}

fn residual_of(
    params: &DeformParams,
    f: &dyn Fn(&[f64], f64) -> Result<f64>,
    x: &[f64],
    t: f64,
    h_step: f64,
) -> Result<Residual> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return invalid("the residual needs x != 0");
    }
    if !(h_step > 0.0 && h_step < 0.25) {
        return invalid(format!("step must be in (0, 0.25), got {h_step}"));
    }
    let k = h_step * t;
    let dt = (-f(x, t + 2.0 * k)? + 8.0 * f(x, t + k)? - 8.0 * f(x, t - k)? + f(x, t - 2.0 * k)?) / (12.0 * k);
    // fd_laplacian takes an infallible closure; the first error is kept aside
    let failure = std::cell::RefCell::new(None);
    let lap = fd_laplacian(
        &|y: &[f64]| {
            f(y, t).unwrap_or_else(|e| {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            })
        },
        x,
        h_step * r,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let spatial = r.powf(2.0 - params.a) * lap / params.a;
    Ok(Residual { dt, spatial, residual: dt - spatial })
}

/// Finite-difference residual of `(∂_t - (1/a)|x|^{2-a}Δ) H_t u` at `(t, x)`;
/// the steps are `h_step t` and `h_step |x|`.
pub fn heat_equation_residual(req: &FlowRequest, x: &[f64], h_step: f64, rule: &QuadratureRule) -> Result<Residual> {
    check_dim(&req.params, x.len())?;
    rule.check(&req.params)?;
    let f = |y: &[f64], t: f64| -> Result<f64> {
        let r = FlowRequest { params: req.params, t, u: req.u.clone() };
        Ok(heat_flow_fixed(&r, &PolarPoint::from_cartesian(y)?, rule)?.value)
    };
    residual_of(&req.params, &f, x, req.t, h_step)
}

/// The same residual for `x ↦ h_a(x, y; t)`.
pub fn kernel_heat_residual(params: &DeformParams, x: &[f64], y: &PolarPoint, t: f64, h_step: f64) -> Result<Residual> {
    check_dim(params, x.len())?;
    let f = |z: &[f64], t: f64| heat_kernel(params, &PolarPoint::from_cartesian(z)?, y, t);
    residual_of(params, &f, x, t, h_step)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialConditionTable {
    /// `(t, |H_t u(x) - u(x)|)` in the order given.
    pub rows: Vec<(f64, f64)>,
    /// Gaps do not grow as `t` decreases.
    pub monotone: bool,
    pub final_gap: f64,
}

pub fn initial_condition_check(
    params: &DeformParams,
    u: &ScalarField,
    x: &PolarPoint,
    t_list: &[f64],
    rule: &QuadratureRule,
) -> Result<InitialConditionTable> {
    if t_list.is_empty() || t_list.windows(2).any(|p| !(p[1] < p[0])) {
        return invalid("t_list must be non-empty and strictly decreasing");
    }
    let u0 = u.eval(&x.cartesian());
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let req = FlowRequest::new(*params, t, u.clone())?;
        rows.push((t, (heat_flow(&req, x, rule)? - u0).abs()));
    }
    let monotone = rows.windows(2).all(|p| p[1].1 <= p[0].1 * (1.0 + 1e-9) + 1e-12);
    let final_gap = rows.last().map(|r| r.1).unwrap_or(0.0);
    Ok(InitialConditionTable { rows, monotone, final_gap })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

fn composition(lhs: f64, rhs: f64) -> Composition {
    Composition { lhs, rhs, gap: (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE) }
}

/// `H_{t1+t2} u(x)` against `H_{t1}(H_{t2} u)(x)`, the inner flow evaluated
/// at every outer node with the same rule.
pub fn composition_check(
    params: &DeformParams,
    t1: f64,
    t2: f64,
    u: &ScalarField,
    x: &PolarPoint,
    rule: &QuadratureRule,
) -> Result<Composition> {
    check_dim(params, x.dim())?;
    let lhs = heat_flow_fixed(&FlowRequest::new(*params, t1 + t2, u.clone())?, x, rule)?.value;

    let outer = FlowPlan::new(params, x.r, t1, u.growth, rule)?;
    let inner: Vec<FlowPlan> =
        outer.radius.iter().map(|&s| FlowPlan::new(params, s, t2, u.growth, rule)).collect::<Result<_>>()?;
    let sub = sub_rule(params, u, rule.n_sub);
    // v = H_{t2} u at an outer node of radial index i, from the inner plan at that radius
    let v = |i: usize, y: &[f64]| -> f64 {
        let s = outer.radius[i];
        let omega: Vec<f64> = y.iter().map(|c| c / s).collect();
        inner[i].apply_field(&omega, u, &sub).0
    };
    let rhs = outer.apply(&x.omega, u.radial, &sub, &v).0;
    Ok(composition(lhs, rhs))
}

/// Kernel form `c_a ∫ h_a(x,y;t1) h_a(y,z;t2) dy/|y|^{2-a} = h_a(x,z;t1+t2)`.
/// At `x = 0` the sphere coordinates are aligned with `z`.
pub fn composition_kernel_check(
    params: &DeformParams,
    x: &PolarPoint,
    z: &PolarPoint,
    t1: f64,
    t2: f64,
    rule: &QuadratureRule,
) -> Result<Composition> {
    check_dim(params, x.dim())?;
    check_dim(params, z.dim())?;
    let x_omega = if x.r == 0.0 { &z.omega } else { &x.omega };
    let dummy = ScalarField::new(0.0, |_: &[f64]| 0.0);
    let rhs = refine(rule, &|r: &QuadratureRule| {
        let outer = FlowPlan::new(params, x.r, t1, 0.0, r)?;
        // h_a(y, z; t2) at each outer radius, evaluated along the angle only
        let inner: Vec<HeatRadial> =
            outer.radius.iter().map(|&s| HeatRadial::new(params, s, z.r, t2)).collect::<Result<_>>()?;
        let v = |i: usize, y: &[f64]| -> f64 {
            let s = outer.radius[i];
            let c: f64 = if s == 0.0 { 1.0 } else { y.iter().zip(&z.omega).map(|(a, b)| a * b).sum::<f64>() / s };
            inner[i].at(c)
        };
        Ok(outer.apply(x_omega, false, &sub_rule(params, &dummy, r.n_sub), &v))
    })?;
    let lhs = heat_kernel(params, x, z, t1 + t2)?;
    Ok(composition(lhs, rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleScan {
    pub max_flow: f64,
    pub min_flow: f64,
    pub sup_u: f64,
    pub inf_u: f64,
    pub evaluations: usize,
    /// Largest excursion of the flow outside `[inf u, sup u]`.
    pub worst_violation: f64,
}

/// Flow values over a grid of times and points against the declared bounds
/// of `u`.
pub fn max_principle_scan(
    params: &DeformParams,
    u: &ScalarField,
    t_grid: &[f64],
    x_grid: &[PolarPoint],
    rule: &QuadratureRule,
) -> Result<MaxPrincipleScan> {
    let Some((inf_u, sup_u)) = u.bounds else {
        return invalid("the maximum principle scan needs a field with declared bounds");
    };
    let mut out = MaxPrincipleScan {
        max_flow: f64::NEG_INFINITY,
        min_flow: f64::INFINITY,
        sup_u,
        inf_u,
        evaluations: 0,
        worst_violation: 0.0,
    };
    for &t in t_grid {
        let req = FlowRequest::new(*params, t, u.clone())?;
        for x in x_grid {
            let v = heat_flow_fixed(&req, x, rule)?.value;
            out.max_flow = out.max_flow.max(v);
            out.min_flow = out.min_flow.min(v);
            out.worst_violation = out.worst_violation.max(v - sup_u).max(inf_u - v);
            out.evaluations += 1;
        }
    }
    Ok(out)
}
