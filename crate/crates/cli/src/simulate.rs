use adheat::brownian::{continuity_moment_mc, feynman_kac_estimate, harmonic_potential, moment_mc, sample_path, IncrementSampler};
use adheat::heatflow::ScalarField;
use clap::{Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{emit, table_to_string, Cell, Table};
use crate::parse::{point, real_lists, usizes};
use crate::CliError;

#[derive(Subcommand, Debug)]
pub enum Kind {
    /// Sample paths on a uniform grid; long format, one row per path and time.
    Paths {
        #[arg(long, default_value_t = 1)]
        paths: usize,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// `origin` or comma-separated coordinates.
        #[arg(long, default_value = "origin", allow_hyphen_values = true)]
        x0: String,
    },
    /// E|B_t|^{ma} against its closed form.
    Moments {
        #[arg(long, default_value = "origin", allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long, default_value = "1,2")]
        m: String,
    },
    /// E[f(B_t) exp(-∫V)] and the decay rate it implies.
    FeynmanKac {
        #[arg(long = "V", value_enum, default_value_t = Potential::Oscillator)]
        v: Potential,
        #[arg(long, value_enum, default_value_t = Initial::Ground)]
        f: Initial,
        #[arg(long, default_value = "origin", allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value = "0.25,0.5,1,2")]
        t: Vec<String>,
        #[arg(long, default_value_t = 20_000)]
        paths: usize,
        #[arg(long, default_value_t = 64)]
        steps: usize,
    },
    /// E α(B_s, B_{s+t})^4 for the continuity modulus, with its log-log slope.
    Continuity {
        #[arg(long, default_value = "origin", allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[arg(long, default_value = "0.001,0.003,0.01,0.03,0.1")]
        t: Vec<String>,
        /// Exponent p of the metric; defaults to m·a.
        #[arg(long)]
        power: Option<f64>,
        #[arg(long, default_value_t = 20_000)]
        paths: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Potential {
    /// |x|^a / a, capped at 10^a / a.
    Oscillator,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    /// exp(-|x|^a / a).
    Ground,
    One,
}

pub fn run(cfg: &mut RunConfig, kind: &Kind) -> Result<(), CliError> {
    let p = cfg.validate()?;
    let n = p.n;
    let sampler = IncrementSampler::new(&p);
    let seed = cfg.seed;
    let (stem, table) = match kind {
        Kind::Paths { paths, steps, t, x0 } => {
            cfg.command = "simulate paths".into();
            let x = point(x0, n)?;
            if *steps == 0 || !(*t > 0.0) {
                return Err(CliError::Usage("paths need --steps >= 1 and --t > 0".into()));
            }
            cfg.arg("paths", paths);
            cfg.arg("steps", steps);
            cfg.arg("t", t);
            cfg.arg("x0", &x);
            let times: Vec<f64> = (0..=*steps).map(|k| t * k as f64 / *steps as f64).collect();
            let mut cols: Vec<String> = vec!["path".into(), "step".into(), "time".into()];
            cols.extend((0..n).map(|i| format!("x{i}")));
            cols.extend(["radius".into(), "seed".into(), "stream".into()]);
            let mut tab = Table::new(&cols.iter().map(String::as_str).collect::<Vec<_>>());
            for i in 0..*paths {
                let path = sample_path(&sampler, &x, &times, seed, i as u64)?;
                for (k, (tk, y)) in path.times.iter().zip(&path.points).enumerate() {
                    let mut row: Vec<Cell> = vec![i.into(), k.into(), (*tk).into()];
                    row.extend(y.iter().map(|&v| Cell::from(v)));
                    row.extend([y.iter().map(|v| v * v).sum::<f64>().sqrt().into(), path.seed.into(), path.stream.into()]);
                    tab.push(row);
                }
            }
            ("simulate-paths", tab)
        }
        Kind::Moments { x0, t, paths, steps, m } => {
            cfg.command = "simulate moments".into();
            let x = point(x0, n)?;
            let ms = usizes(m)?;
            cfg.arg("x0", &x);
            cfg.arg("t", t);
            cfg.arg("paths", paths);
            cfg.arg("steps", steps);
            cfg.arg("m", &ms);
            let rows = moment_mc(&sampler, &x, *t, &ms, *steps, *paths, seed)?;
            let mut tab = Table::new(&["m", "t", "estimate", "stderr", "expected", "z", "n_paths", "n_steps", "seed"]);
            for r in rows {
                tab.push(vec![
                    r.m.into(),
                    (*t).into(),
                    r.estimate.into(),
                    r.stderr.into(),
                    r.expected.into(),
                    r.z().into(),
                    (*paths).into(),
                    (*steps).into(),
                    seed.into(),
                ]);
            }
            ("simulate-moments", tab)
        }
        Kind::FeynmanKac { v, f, x0, t, paths, steps } => {
            cfg.command = "simulate feynman-kac".into();
            let x = point(x0, n)?;
            let ts = real_lists(t)?;
            cfg.arg("V", v);
            cfg.arg("f", f);
            cfg.arg("x0", &x);
            cfg.arg("t", &ts);
            cfg.arg("paths", paths);
            cfg.arg("steps", steps);
            let a = p.a;
            let pot = match v {
                Potential::Oscillator => harmonic_potential(&p),
                Potential::Zero => ScalarField::constant(0.0),
            };
            let init = match f {
                Initial::Ground => ScalarField::radial(0.0, move |r| (-r.powf(a) / a).exp()).with_bounds(0.0, 1.0),
                Initial::One => ScalarField::constant(1.0),
            };
            // the rate is exact only where f is an eigenfunction of the generator
            let expected_rate = match (v, f) {
                (Potential::Oscillator, Initial::Ground) => p.lambda_a + 1.0,
                (Potential::Zero, Initial::One) => 0.0,
                _ => f64::NAN,
            };
            let f0 = init.eval(&x);
            let mut tab = Table::new(&["t", "estimate", "stderr", "rate", "expected_rate", "n_paths", "n_steps", "seed"]);
            for (k, &tv) in ts.iter().enumerate() {
                // each t gets its own seed so rows do not share paths
                let e = feynman_kac_estimate(&sampler, &pot, &init, &x, tv, *paths, *steps, seed.wrapping_add(k as u64))?;
                tab.push(vec![
                    tv.into(),
                    e.estimate.into(),
                    e.stderr.into(),
                    (-(e.estimate / f0).ln() / tv).into(),
                    expected_rate.into(),
                    e.n_paths.into(),
                    e.n_steps.into(),
                    e.seed.into(),
                ]);
            }
            ("simulate-feynman-kac", tab)
        }
        Kind::Continuity { x0, s, t, power, paths } => {
            cfg.command = "simulate continuity".into();
            let x = point(x0, n)?;
            let ts = real_lists(t)?;
            cfg.arg("x0", &x);
            cfg.arg("s", s);
            cfg.arg("t", &ts);
            cfg.arg("power", power);
            cfg.arg("paths", paths);
            let tab_mc = continuity_moment_mc(&sampler, &x, *s, &ts, *power, *paths, seed)?;
            let mut tab = Table::new(&["t", "mean", "stderr", "power", "slope", "n_paths", "seed"]);
            for r in &tab_mc.rows {
                tab.push(vec![
                    r.t.into(),
                    r.mean.into(),
                    r.stderr.into(),
                    tab_mc.power.into(),
                    tab_mc.slope.into(),
                    (*paths).into(),
                    seed.into(),
                ]);
            }
            ("simulate-continuity", tab)
        }
    };
    emit(cfg, stem, &table_to_string(cfg, "rows", &table)?)
}
