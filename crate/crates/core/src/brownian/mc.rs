//! Monte-Carlo checks on sampled paths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Gamma as GammaLaw};
use statrs::function::gamma::gamma_lr;

use crate::error::{invalid, Result};
use crate::heatflow::ScalarField;
use crate::kernels::{heat_kernel, moment_flow_f, DeformParams, PolarPoint};
use crate::quadrature::gl_cached;

use super::{stream_rng, IncrementSampler};

/// Mean and standard error of a sample.
pub fn mean_stderr(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

// per-path values in stream order, so results do not depend on the thread count
fn per_path<T: Send>(n_paths: usize, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..n_paths as u64).into_par_iter().map(&f).collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Positions at `t` of `n_paths` paths from `x0`, each run on `n_steps`
/// equal steps.
pub fn endpoints(sampler: &IncrementSampler, x0: &[f64], t: f64, n_steps: usize, n_paths: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n_steps == 0 || !(t > 0.0) {
        return invalid("endpoints need t > 0 and at least one step");
    }
    let dt = t / n_steps as f64;
    per_path(n_paths, |i| {
        let mut rng = stream_rng(seed, i);
        let mut y = x0.to_vec();
        for _ in 0..n_steps {
            y = sampler.step(&y, dt, &mut rng)?;
        }
        Ok(y)
    })
}

/// Two-sided Kolmogorov–Smirnov test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Asymptotic Kolmogorov distribution tail with the usual small-sample
/// correction of the argument.
pub fn ks_test(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> KsTest {
    sample.sort_by(|a, b| a.total_cmp(b));
    let n = sample.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    let en = nf.sqrt();
    let lam = (en + 0.12 + 0.11 / en) * d;
    let mut p = 0.0;
    if lam < 0.2 {
        p = 1.0;
    } else {
        for k in 1..=100 {
            let term = 2.0 * (-1.0f64).powi(k - 1) * (-2.0 * (k * k) as f64 * lam * lam).exp();
            p += term;
            if term.abs() < 1e-16 {
                break;
            }
        }
    }
    KsTest { statistic: d, p_value: p.clamp(0.0, 1.0), n }
}

/// KS test of `S = |B_t|^a/a` from the origin against `Gamma(λ_a+1, t)`.
/// Paths run on `n_steps` steps, so every step after the first starts off
/// the origin.
pub fn origin_marginal_ks(sampler: &IncrementSampler, t: f64, n_steps: usize, n_paths: usize, seed: u64) -> Result<KsTest> {
    let p = sampler.params();
    let ends = endpoints(sampler, &vec![0.0; p.n], t, n_steps, n_paths, seed)?;
    let mut s: Vec<f64> = ends.iter().map(|y| p.big_r(norm(y))).collect();
    let law = GammaLaw::new(p.lambda_a + 1.0, 1.0 / t).map_err(|e| crate::Error::InvalidParameter(e.to_string()))?;
    Ok(ks_test(&mut s, |v| law.cdf(v)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub m: usize,
    pub estimate: f64,
    pub stderr: f64,
    /// `f_m(t, |x|^a)`.
    pub expected: f64,
}

impl MomentRow {
    pub fn z(&self) -> f64 {
        (self.estimate - self.expected) / self.stderr.max(f64::MIN_POSITIVE)
    }
}

/// `E_x |B_t|^{ma}` for each `m`, against the moment polynomials.
pub fn moment_mc(
    sampler: &IncrementSampler,
    x: &[f64],
    t: f64,
    ms: &[usize],
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<MomentRow>> {
    let p = sampler.params();
    let ends = endpoints(sampler, x, t, n_steps, n_paths, seed)?;
    let r_a = norm(x).powf(p.a);
    ms.iter()
        .map(|&m| {
            let vals: Vec<f64> = ends.iter().map(|y| norm(y).powf(m as f64 * p.a)).collect();
            let (estimate, stderr) = mean_stderr(&vals);
            Ok(MomentRow { m, estimate, stderr, expected: moment_flow_f(p, m, t, r_a)? })
        })
        .collect()
}

/// Test sets for the Chapman–Kolmogorov check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Whole,
    /// `r_lo <= |y| < r_hi`.
    Shell { r_lo: f64, r_hi: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Region {
    pub fn contains(&self, y: &[f64]) -> bool {
        match self {
            Region::Whole => true,
            Region::Shell { r_lo, r_hi } => {
                let r = norm(y);
                *r_lo <= r && r < *r_hi
            }
            Region::Box { lo, hi } => y.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| l <= v && v < h),
        }
    }
}

/// Panels of 8 Gauss points per coordinate for box masses.
pub const BOX_PANELS: usize = 5;

/// `c_a ∫_A h_a(x,y;t) dy/|y|^{2-a}`. Shells use the Poisson mixture of
/// Gamma laws in closed form; boxes use a tensor Gauss rule.
pub fn region_mass(params: &DeformParams, x: &[f64], t: f64, region: &Region) -> Result<f64> {
    match region {
        Region::Whole => Ok(1.0),
        Region::Shell { r_lo, r_hi } => {
            let mean = params.big_r(norm(x)) / t;
            let cdf = |r: f64| radial_step_cdf(params.lambda_a, mean, params.big_r(r) / t);
            Ok(cdf(*r_hi) - cdf(*r_lo))
        }
        Region::Box { lo, hi } => {
            if lo.len() != params.n || hi.len() != params.n {
                return invalid("box dimension mismatch");
            }
            let xp = PolarPoint::from_cartesian(x)?;
            let gl = gl_cached(8);
            let axes: Vec<Vec<(f64, f64)>> = lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| {
                    let mut v = Vec::new();
                    for k in 0..BOX_PANELS {
                        let m = gl.mapped(l + (h - l) * k as f64 / BOX_PANELS as f64, l + (h - l) * (k + 1) as f64 / BOX_PANELS as f64);
                        v.extend(m.nodes.iter().copied().zip(m.weights.iter().copied()));
                    }
                    v
                })
                .collect();
            let per_axis = axes[0].len();
            let total = per_axis.pow(params.n as u32);
            let parts: Vec<Result<f64>> = (0..total)
                .into_par_iter()
                .map(|mut idx| {
                    let mut y = vec![0.0; params.n];
                    let mut w = 1.0;
                    for (k, axis) in axes.iter().enumerate() {
                        let (node, wt) = axis[idx % per_axis];
                        idx /= per_axis;
                        y[k] = node;
                        w *= wt;
                    }
                    let r = norm(&y);
                    let h = heat_kernel(params, &xp, &PolarPoint::from_cartesian(&y)?, t)?;
                    Ok(w * h * r.powf(params.a - 2.0))
                })
                .collect();
            let mut acc = 0.0;
            for p in parts {
                acc += p?;
            }
            Ok(params.c_a * acc)
        }
    }
}

/// `P(S/t <= v)` for one step, with `K ~ Poisson(mean)` and
/// `S/t | K ~ Gamma(λ+1+K, 1)`.
fn radial_step_cdf(lam: f64, mean: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    if !v.is_finite() {
        return 1.0;
    }
    // sum outward from the Poisson mode
    let mode = mean.floor();
    let ln_pk = |k: f64| if mean > 0.0 { k * mean.ln() - mean - crate::specfun::ln_gamma_pos(k + 1.0) } else if k == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    let mut acc = 0.0;
    let mut k = mode;
    loop {
        let pk = ln_pk(k).exp();
        acc += pk * gamma_lr(lam + 1.0 + k, v);
        if pk < 1e-18 {
            break;
        }
        k += 1.0;
    }
    let mut k = mode - 1.0;
    while k >= 0.0 {
        let pk = ln_pk(k).exp();
        acc += pk * gamma_lr(lam + 1.0 + k, v);
        if pk < 1e-18 {
            break;
        }
        k -= 1.0;
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CkRow {
    pub region: Region,
    /// Fraction of two-step paths (`t1` then `t2`) ending in the region.
    pub two_step: f64,
    /// One-step mass at `t1 + t2`.
    pub one_step: f64,
    /// Binomial standard error at the one-step mass.
    pub stderr: f64,
}

impl CkRow {
    pub fn z(&self) -> f64 {
        (self.two_step - self.one_step) / self.stderr.max(f64::MIN_POSITIVE)
    }
}

pub fn chapman_kolmogorov_mc(
    sampler: &IncrementSampler,
    x: &[f64],
    t1: f64,
    t2: f64,
    regions: &[Region],
    n_paths: usize,
    seed: u64,
) -> Result<Vec<CkRow>> {
    let p = sampler.params();
    let ends = per_path(n_paths, |i| {
        let mut rng = stream_rng(seed, i);
        let y = sampler.step(x, t1, &mut rng)?;
        sampler.step(&y, t2, &mut rng)
    })?;
    regions
        .iter()
        .map(|region| {
            let hits = ends.iter().filter(|y| region.contains(y)).count();
            let one_step = region_mass(p, x, t1 + t2, region)?;
            let nf = n_paths as f64;
            Ok(CkRow {
                region: region.clone(),
                two_step: hits as f64 / nf,
                one_step,
                stderr: (one_step * (1.0 - one_step) / nf).max(0.0).sqrt().max(0.5 / nf),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityTable {
    /// `p` in `α(rω, sμ) = |r^p ω - s^p μ|`.
    pub power: f64,
    pub rows: Vec<ContinuityRow>,
    /// Least-squares slope of `log mean` against `log t`.
    pub slope: f64,
}

/// `p = m a` with the smallest integer `m` such that `m a >= 2`.
pub fn default_power(params: &DeformParams) -> f64 {
    (2.0 / params.a - 1e-12).ceil().max(1.0) * params.a
}

/// `α(rω, sμ) = |r^p ω - s^p μ|` on Cartesian points.
pub fn alpha_metric(x: &[f64], y: &[f64], power: f64) -> f64 {
    let (rx, ry) = (norm(x), norm(y));
    let sx = if rx > 0.0 { rx.powf(power - 1.0) } else { 0.0 };
    let sy = if ry > 0.0 { ry.powf(power - 1.0) } else { 0.0 };
    x.iter().zip(y).map(|(a, b)| (sx * a - sy * b).powi(2)).sum::<f64>().sqrt()
}

/// `E_x α(B_s, B_{s+t})^4` for each `t`. Every path draws `B_s` once and an
/// independent `B_{s+t}` from it per `t`; `power` defaults to
/// [`default_power`].
pub fn continuity_moment_mc(
    sampler: &IncrementSampler,
    x: &[f64],
    s: f64,
    t_list: &[f64],
    power: Option<f64>,
    n_paths: usize,
    seed: u64,
) -> Result<ContinuityTable> {
    let p = sampler.params();
    let power = power.unwrap_or_else(|| default_power(p));
    if !(power > 0.0) || t_list.iter().any(|&t| !(t > 0.0)) || !(s >= 0.0) {
        return invalid("continuity moments need power > 0, s >= 0 and t > 0");
    }
    let vals = per_path(n_paths, |i| {
        let mut rng = stream_rng(seed, i);
        let bs = if s > 0.0 { sampler.step(x, s, &mut rng)? } else { x.to_vec() };
        t_list
            .iter()
            .map(|&t| Ok(alpha_metric(&bs, &sampler.step(&bs, t, &mut rng)?, power).powi(4)))
            .collect::<Result<Vec<f64>>>()
    })?;
    let rows: Vec<ContinuityRow> = t_list
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let col: Vec<f64> = vals.iter().map(|v| v[k]).collect();
            let (mean, stderr) = mean_stderr(&col);
            ContinuityRow { t, mean, stderr }
        })
        .collect();
    let slope = loglog_slope(&rows.iter().map(|r| (r.t, r.mean)).collect::<Vec<_>>());
    Ok(ContinuityTable { power, rows, slope })
}

pub fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let lp: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = lp.len() as f64;
    let mx = lp.iter().map(|p| p.0).sum::<f64>() / n;
    let my = lp.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = lp.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = lp.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
}

/// `|x|^a/a`, cut off at `|x| = 10` so that it is bounded.
pub fn harmonic_potential(params: &DeformParams) -> ScalarField {
    let a = params.a;
    let cap = 10f64.powf(a) / a;
    ScalarField::radial(0.0, move |r| (r.powf(a) / a).min(cap)).with_bounds(0.0, cap)
}

// e^{-∫V} f(B_t) along one path; trapezoid in time
fn fk_path<R: rand::Rng + ?Sized>(
    sampler: &IncrementSampler,
    v: &ScalarField,
    x: &[f64],
    t: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<(f64, Vec<f64>)> {
    let dt = t / n_steps as f64;
    let mut y = x.to_vec();
    let mut prev = v.eval(&y);
    let mut integral = 0.0;
    for _ in 0..n_steps {
        y = sampler.step(&y, dt, rng)?;
        let cur = v.eval(&y);
        integral += 0.5 * dt * (prev + cur);
        prev = cur;
    }
    Ok(((-integral).exp(), y))
}

/// `E_x e^{-∫_0^t V(B_s) ds} f(B_t)` over `n_paths` paths of `n_steps`
/// equal steps.
pub fn feynman_kac_estimate(
    sampler: &IncrementSampler,
    v: &ScalarField,
    f: &ScalarField,
    x: &[f64],
    t: f64,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
) -> Result<FkEstimate> {
    if n_steps < 16 {
        return invalid(format!("need at least 16 steps, got {n_steps}"));
    }
    if !(t > 0.0) || n_paths < 2 {
        return invalid("need t > 0 and at least two paths");
    }
    let vals = per_path(n_paths, |i| {
        let mut rng = stream_rng(seed, i);
        let (weight, end) = fk_path(sampler, v, x, t, n_steps, &mut rng)?;
        Ok(weight * f.eval(&end))
    })?;
    let (estimate, stderr) = mean_stderr(&vals);
    Ok(FkEstimate { estimate, stderr, n_paths, n_steps, seed })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemigroupGap {
    /// `T_{t+s} f(x)` directly.
    pub lhs: FkEstimate,
    /// `T_t (T_s f)(x)` with an inner estimate at every outer endpoint.
    pub rhs: FkEstimate,
    pub gap: f64,
    /// Combined standard error of the two sides.
    pub sigma: f64,
}

/// Both sides of `T_{t+s} = T_t T_s`. The step length is about
/// `(t+s)/n_steps` on both sides; the nested side uses `n_inner` inner
/// paths per outer path.
#[allow(clippy::too_many_arguments)]
pub fn semigroup_property_mc(
    sampler: &IncrementSampler,
    v: &ScalarField,
    f: &ScalarField,
    x: &[f64],
    t: f64,
    s: f64,
    n_paths: usize,
    n_inner: usize,
    n_steps: usize,
    seed: u64,
) -> Result<SemigroupGap> {
    if !(t > 0.0) || !(s >= 0.0) || n_inner == 0 {
        return invalid("need t > 0, s >= 0 and at least one inner path");
    }
    let lhs = feynman_kac_estimate(sampler, v, f, x, t + s, n_paths, n_steps, seed)?;
    let outer_steps = ((n_steps as f64 * t / (t + s)).round() as usize).max(1);
    let inner_steps = n_steps.saturating_sub(outer_steps).max(1);
    let inner_seed = seed.wrapping_add(2);
    let vals = per_path(n_paths, |i| {
        let mut rng = stream_rng(seed.wrapping_add(1), i);
        let (weight, end) = fk_path(sampler, v, x, t, outer_steps, &mut rng)?;
        if s == 0.0 {
            return Ok(weight * f.eval(&end));
        }
        let mut inner = 0.0;
        for j in 0..n_inner as u64 {
            let mut rng = stream_rng(inner_seed, i * n_inner as u64 + j);
            let (w2, e2) = fk_path(sampler, v, &end, s, inner_steps, &mut rng)?;
            inner += w2 * f.eval(&e2);
        }
        Ok(weight * inner / n_inner as f64)
    })?;
    let (estimate, stderr) = mean_stderr(&vals);
    let rhs = FkEstimate { estimate, stderr, n_paths, n_steps, seed: seed.wrapping_add(1) };
    let sigma = (lhs.stderr.powi(2) + rhs.stderr.powi(2)).sqrt();
    Ok(SemigroupGap { lhs, rhs, gap: (lhs.estimate - rhs.estimate).abs(), sigma })
}
