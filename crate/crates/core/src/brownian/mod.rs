//! Sampling the a-deformed Brownian motion and Monte-Carlo checks of its
//! transition law.
//!
//! One step from `x` over time `dt` has law `c_a h_a(x,y;dt) dy/|y|^{2-a}`.
//! In `R = |x|^a/a`, `S = |y|^a/a` the radial marginal is a Poisson mixture
//! of Gamma laws,
//! `K ~ Poisson(R/dt)`, `S | K ~ Gamma(λ_a + 1 + K, dt)`,
//! which is sampled exactly. Given `S`, the angle `θ` between `y` and `x`
//! has density proportional to `𝓘(2/a, ν, w, cos θ) sin^{N-2} θ` with
//! `w = 2√(RS)/dt`, and depends on nothing else. It is drawn from
//! inverse-CDF tables kept on a geometric grid in `w`, mixed linearly
//! between neighbouring nodes.

mod grid;
mod mc;


pub use grid::KernelGrid;
pub use mc::*;

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::{DeformParams, PolarPoint};
use crate::scripti::RealExpansion;
use crate::specfun::ln_gamma_pos;

const W_MIN: f64 = 1e-6;
const W_RATIO: f64 = 1.02;
const W_MAX: f64 = 1e7;
/// Nodes per angular table.
pub const TABLE_NODES: usize = 257;

/// A path on a finite time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
    pub stream: u64,
}

/// The generator for path `stream` under `seed`; streams are independent.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Piecewise-linear density in `θ` on `[0, θ_max]` with its cumulative
/// masses.
#[derive(Clone, Debug)]
pub(crate) struct AngularTable {
    pub(crate) h: f64,
    pub(crate) dens: Vec<f64>,
    /// `cum[j]` is the mass of `[0, θ_j]`; `cum[last] = 1`.
    pub(crate) cum: Vec<f64>,
}

/// Angular window: the kernel in `θ` has width about `b/√w`.
pub(crate) fn theta_window(params: &DeformParams, w: f64) -> f64 {
    let b = params.b();
    let w_eff = w / (b * b);
    if w_eff <= 0.0 {
        std::f64::consts::PI
    } else {
        (12.0 / w_eff.sqrt()).min(std::f64::consts::PI)
    }
}

impl AngularTable {
    pub(crate) fn build(params: &DeformParams, w: f64, nodes: usize) -> Result<Self> {
        let th_max = theta_window(params, w);
        let e = RealExpansion::real(params.b(), params.nu, w)?;
        let h = th_max / (nodes - 1) as f64;
        let dens: Vec<f64> = (0..nodes)
            .map(|j| {
                let th = h * j as f64;
                e.eval(th.cos()).max(0.0) * th.sin().powi(params.n as i32 - 2)
            })
            .collect();
        let mut cum = Vec::with_capacity(nodes);
        cum.push(0.0);
        for j in 1..nodes {
            cum.push(cum[j - 1] + 0.5 * h * (dens[j - 1] + dens[j]));
        }
        let total = cum[nodes - 1];
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Sampler(format!("angular table at w = {w} has mass {total}")));
        }
        Ok(AngularTable {
            h,
            dens: dens.into_iter().map(|d| d / total).collect(),
            cum: cum.into_iter().map(|c| c / total).collect(),
        })
    }

    /// `θ` at cumulative mass `p`, exact for the piecewise-linear density.
    pub(crate) fn invert(&self, p: f64) -> f64 {
        let j = self.cum.partition_point(|&c| c <= p).clamp(1, self.cum.len() - 1) - 1;
        let rem = (p - self.cum[j]).max(0.0);
        let (p0, p1) = (self.dens[j], self.dens[j + 1]);
        // p0 s + (p1 - p0) s²/(2h) = rem
        let disc = (p0 * p0 + 2.0 * (p1 - p0) * rem / self.h).max(0.0);
        let denom = p0 + disc.sqrt();
        let s = if denom > 0.0 { 2.0 * rem / denom } else { 0.0 };
        self.h * (j as f64 + s.min(self.h) / self.h)
    }

    /// `∫ g(cos θ) dF(θ)` by the trapezoid rule on the table nodes.
    pub(crate) fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        let n = self.dens.len();
        let mut acc = 0.0;
        for j in 0..n {
            let wt = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            acc += wt * self.dens[j] * g((self.h * j as f64).cos());
        }
        acc * self.h
    }
}

/// One-step sampler for a fixed `(a, N)`. Angular tables are built on first
/// use and shared between threads.
pub struct IncrementSampler {
    params: DeformParams,
    tables: Vec<OnceLock<std::result::Result<AngularTable, Error>>>,
    ln_ratio: f64,
}

impl std::fmt::Debug for IncrementSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let built = self.tables.iter().filter(|t| t.get().is_some()).count();
        f.debug_struct("IncrementSampler").field("params", &self.params).field("tables_built", &built).finish()
    }
}

impl IncrementSampler {
    pub fn new(params: &DeformParams) -> Self {
        let ln_ratio = W_RATIO.ln();
        let count = ((W_MAX / W_MIN).ln() / ln_ratio).ceil() as usize + 1;
        IncrementSampler { params: *params, tables: (0..count).map(|_| OnceLock::new()).collect(), ln_ratio }
    }

    pub fn params(&self) -> &DeformParams {
        &self.params
    }

    fn node_w(&self, k: usize) -> f64 {
        W_MIN * (k as f64 * self.ln_ratio).exp()
    }

    fn table(&self, k: usize) -> Result<&AngularTable> {
        let p = self.params;
        let w = self.node_w(k);
        self.tables[k].get_or_init(|| AngularTable::build(&p, w, TABLE_NODES)).as_ref().map_err(|e| e.clone())
    }

    /// `θ` given `w`: node tables mixed linearly in `w`, uniform on the
    /// sphere below the first node, Gaussian past the last.
    fn sample_theta<R: Rng + ?Sized>(&self, w: f64, rng: &mut R) -> Result<Option<f64>> {
        if w >= W_MAX {
            // θ ≈ (b/√w) χ_{N-1}
            let chi2: f64 = (0..self.params.n - 1).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum();
            return Ok(Some(self.params.b() * (chi2 / w).sqrt()));
        }
        let pick = rng.random::<f64>();
        let k = if w < W_MIN {
            if pick >= w / W_MIN {
                return Ok(None);
            }
            0
        } else {
            let x = (w / W_MIN).ln() / self.ln_ratio;
            let k0 = (x.floor() as usize).min(self.tables.len() - 2);
            if pick < x - k0 as f64 {
                k0 + 1
            } else {
                k0
            }
        };
        Ok(Some(self.table(k)?.invert(rng.random::<f64>())))
    }

    /// `S` given `R` and `dt`, exact.
    pub fn sample_radial<R: Rng + ?Sized>(&self, big_r: f64, dt: f64, rng: &mut R) -> Result<f64> {
        let k = if big_r > 0.0 {
            Poisson::new(big_r / dt).map_err(|e| Error::Sampler(e.to_string()))?.sample(rng)
        } else {
            0.0
        };
        let g = Gamma::new(self.params.lambda_a + 1.0 + k, dt).map_err(|e| Error::Sampler(e.to_string()))?;
        Ok(g.sample(rng))
    }

    /// One transition from `x` over `dt`, Cartesian in and out.
    pub fn step<R: Rng + ?Sized>(&self, x: &[f64], dt: f64, rng: &mut R) -> Result<Vec<f64>> {
        let n = self.params.n;
        if x.len() != n {
            return invalid(format!("point has dimension {}, expected {n}", x.len()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return invalid(format!("time step must be positive, got {dt}"));
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let big_r = self.params.big_r(r);
        let big_s = self.sample_radial(big_r, dt, rng)?;
        let s = self.params.radius_of(big_s);
        let w = 2.0 * (big_r * big_s).sqrt() / dt;
        let theta = if r > 0.0 { self.sample_theta(w, rng)? } else { None };
        let mut g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let Some(theta) = theta else {
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            return Ok(g.into_iter().map(|v| s * v / norm).collect());
        };
        // η uniform on the unit sphere of ω^⊥
        let omega: Vec<f64> = x.iter().map(|v| v / r).collect();
        let dot: f64 = g.iter().zip(&omega).map(|(a, b)| a * b).sum();
        for (gi, oi) in g.iter_mut().zip(&omega) {
            *gi -= dot * oi;
        }
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (c, sn) = (theta.cos(), theta.sin());
        Ok(omega.iter().zip(&g).map(|(o, e)| s * (c * o + sn * e / norm)).collect())
    }
}

/// One transition from `x` over `dt`.
pub fn sample_increment<R: Rng + ?Sized>(
    sampler: &IncrementSampler,
    x: &PolarPoint,
    dt: f64,
    rng: &mut R,
) -> Result<PolarPoint> {
    PolarPoint::from_cartesian(&sampler.step(&x.cartesian(), dt, rng)?)
}

/// A path through `times` (ascending, starting at 0), reproducible from
/// `(seed, stream)`.
pub fn sample_path(sampler: &IncrementSampler, x0: &[f64], times: &[f64], seed: u64, stream: u64) -> Result<PathSample> {
    check_times(times)?;
    let mut rng = stream_rng(seed, stream);
    let mut points = Vec::with_capacity(times.len());
    points.push(x0.to_vec());
    for k in 1..times.len() {
        let next = sampler.step(&points[k - 1], times[k] - times[k - 1], &mut rng)?;
        points.push(next);
    }
    Ok(PathSample { times: times.to_vec(), points, seed, stream })
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return invalid("a time grid starts at 0");
    }
    if times.windows(2).any(|p| !(p[1] > p[0]) || !p[1].is_finite()) {
        return invalid("times must be strictly increasing and finite");
    }
    Ok(())
}

/// Density of `S = |y|^a/a` for one step from radius `r`, the Poisson
/// mixture written with a scaled Bessel function.
pub fn radial_step_density(params: &DeformParams, r: f64, dt: f64, big_s: f64) -> f64 {
    if big_s <= 0.0 {
        return 0.0;
    }
    let lam = params.lambda_a;
    let big_r = params.big_r(r);
    if big_r == 0.0 {
        return ((lam * big_s.ln() - big_s / dt) - (lam + 1.0) * dt.ln() - ln_gamma_pos(lam + 1.0)).exp();
    }
    // dt^{-1} (S/R)^{λ/2} e^{-(R+S)/dt} I_λ(2√(RS)/dt)
    let w = 2.0 * (big_r * big_s).sqrt() / dt;
    let sc = crate::specfun::bessel_i_scaled(lam, w);
    let d = big_r.sqrt() - big_s.sqrt();
    (0.5 * lam * (big_s / big_r).ln() - d * d / dt + sc.ln()).exp() / dt
}
