//! A tabulated one-step law for a fixed source radius and time step.

use rand::Rng;
use serde::Serialize;
use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::error::{invalid, Result};
use crate::kernels::DeformParams;
use crate::quadrature::gl_cached;

use super::{radial_step_density, AngularTable};

const S_CELLS: usize = 256;
const U_NODES: usize = 129;
const CELL_GAUSS: usize = 4;

/// `c_a h_a(x,·;τ) dy/|y|^{2-a}` for `|x| = r`, discretized in `(S, θ)`.
///
/// The `S` cells are cut at quantiles of the Gamma law with the same mean
/// and variance as the exact radial marginal; probabilities of the cuts
/// are `Φ(z)` for `z` evenly spaced on `[-7.5, 7.5]`. Inside a cell the
/// marginal is integrated by Gauss–Legendre. Each cell carries an angular
/// table at its midpoint.
#[derive(Clone, Debug, Serialize)]
pub struct KernelGrid {
    pub r: f64,
    pub tau: f64,
    pub edges: Vec<f64>,
    /// Gauss nodes in `S` and their weights times the radial density.
    pub s_nodes: Vec<f64>,
    pub s_weights: Vec<f64>,
    /// Cumulative mass at the cell edges, normalized to end at 1.
    pub cell_cdf: Vec<f64>,
    #[serde(skip)]
    angular: Vec<AngularTable>,
}

// quantile of Gamma(shape, scale) by bisection in log S
fn gamma_quantile(shape: f64, scale: f64, p: f64) -> f64 {
    let f = |x: f64| if p < 0.5 { gamma_lr(shape, x / scale) - p } else { (1.0 - p) - gamma_ur(shape, x / scale) };
    let (mut lo, mut hi) = (1e-300f64.ln(), (shape * scale).ln());
    while f(hi.exp()) < 0.0 {
        hi += 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid.exp()) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

impl KernelGrid {
    pub fn new(params: &DeformParams, r: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !(r >= 0.0) || !tau.is_finite() || !r.is_finite() {
            return invalid(format!("kernel grid needs r >= 0 and tau > 0, got {r}, {tau}"));
        }
        let lam = params.lambda_a;
        let big_r = params.big_r(r);
        let mean = big_r + (lam + 1.0) * tau;
        let var = tau * tau * (lam + 1.0) + 2.0 * tau * big_r;
        let (shape, scale) = (mean * mean / var, var / mean);
        let normal = statrs::distribution::Normal::standard();
        let mut edges = vec![0.0];
        for j in 1..S_CELLS {
            let z = -7.5 + 15.0 * j as f64 / S_CELLS as f64;
            let p = statrs::distribution::ContinuousCDF::cdf(&normal, z);
            edges.push(gamma_quantile(shape, scale, p));
        }
        edges.push(gamma_quantile(shape, scale, statrs::distribution::ContinuousCDF::cdf(&normal, 7.5)));

        let gl = gl_cached(CELL_GAUSS);
        let mut s_nodes = Vec::with_capacity(S_CELLS * CELL_GAUSS);
        let mut s_weights = Vec::with_capacity(S_CELLS * CELL_GAUSS);
        let mut cell_cdf = vec![0.0];
        let mut angular = Vec::with_capacity(S_CELLS);
        for pair in edges.windows(2) {
            let m = gl.mapped(pair[0], pair[1]);
            let mut mass = 0.0;
            for (&s, &w) in m.nodes.iter().zip(&m.weights) {
                let wt = w * radial_step_density(params, r, tau, s);
                s_nodes.push(s);
                s_weights.push(wt);
                mass += wt;
            }
            cell_cdf.push(cell_cdf.last().unwrap() + mass);
            let mid = 0.5 * (pair[0] + pair[1]);
            angular.push(AngularTable::build(params, 2.0 * (big_r * mid).sqrt() / tau, U_NODES)?);
        }
        let total = *cell_cdf.last().unwrap();
        for c in cell_cdf.iter_mut() {
            *c /= total;
        }
        Ok(KernelGrid { r, tau, edges, s_nodes, s_weights, cell_cdf, angular })
    }

    /// Mass of the radial marginal under the grid's weights.
    pub fn marginal_mass(&self) -> f64 {
        self.s_weights.iter().sum()
    }

    /// `∫∫ g(S, cos θ)` against the tabulated law.
    pub fn expectation(&self, g: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (k, (&s, &w)) in self.s_nodes.iter().zip(&self.s_weights).enumerate() {
            let table = &self.angular[k / CELL_GAUSS];
            acc += w * table.expect(|u| g(s, u));
        }
        acc
    }

    /// `(S, θ)` by inverse CDF on the tables; linear in `S` within a cell.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let p = rng.random::<f64>();
        let j = self.cell_cdf.partition_point(|&c| c <= p).clamp(1, S_CELLS) - 1;
        let frac = (p - self.cell_cdf[j]) / (self.cell_cdf[j + 1] - self.cell_cdf[j]).max(f64::MIN_POSITIVE);
        let s = self.edges[j] + frac.clamp(0.0, 1.0) * (self.edges[j + 1] - self.edges[j]);
        (s, self.angular[j].invert(rng.random::<f64>()))
    }
}
