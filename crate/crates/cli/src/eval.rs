use adheat::contour::default_eps;
use adheat::kernels::{fourier_kernel, heat_kernel_eval, laguerre_semigroup_kernel, KernelEval, PolarPoint};
use adheat::scripti::{script_i, script_i_contour, script_i_series, ScriptIArgs};
use clap::{Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{emit, table_to_string, Cell, Table};
use crate::parse::{complexes, coords, label, point, real_lists};
use crate::CliError;

#[derive(Subcommand, Debug)]
pub enum Subject {
    /// 𝓘(b, ν; w, t) on the grid of w and t values.
    Scripti {
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 0.5)]
        nu: f64,
        /// Complex arguments such as 2, -3i or 1+2i; repeatable, comma lists allowed.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        w: Vec<String>,
        /// Values of t in [-1, 1].
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        t: Vec<String>,
        #[arg(long, value_enum, default_value_t = ScriptIMethod::Auto)]
        method: ScriptIMethod,
    },
    /// h_a(x, y; t) against the weighted measure; c_a·h is the density.
    HeatKernel {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, required = true, allow_hyphen_values = true)]
        y: Vec<String>,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        t: Vec<String>,
    },
    /// B_a(x, y).
    FourierKernel {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, required = true, allow_hyphen_values = true)]
        y: Vec<String>,
    },
    /// Λ_a(x, y; z) for Re z > 0.
    LaguerreKernel {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, required = true, allow_hyphen_values = true)]
        y: Vec<String>,
        #[arg(long, required = true, allow_hyphen_values = true)]
        z: Vec<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScriptIMethod {
    Auto,
    /// Truncated at --tol.
    Series,
    /// 256-node Hankel contour.
    Contour,
}

fn kernel_row(prefix: Vec<Cell>, k: &KernelEval) -> Vec<Cell> {
    let mut row = prefix;
    row.extend([k.value.re.into(), k.value.im.into(), label(&k.method).into(), k.terms.into(), k.err_estimate.into()]);
    row
}

pub fn run(cfg: &mut RunConfig, subject: &Subject) -> Result<(), CliError> {
    let p = cfg.validate()?;
    let n = p.n;
    let (stem, table) = match subject {
        Subject::Scripti { b, nu, w, t, method } => {
            cfg.command = "eval scripti".into();
            let ws = complexes(w)?;
            let ts = real_lists(t)?;
            cfg.arg("b", b);
            cfg.arg("nu", nu);
            cfg.arg("w", ws.iter().map(|z| z.to_string()).collect::<Vec<_>>());
            cfg.arg("t", &ts);
            cfg.arg("method", method);
            let mut tab = Table::new(&[
                "b", "nu", "w_re", "w_im", "t", "value_re", "value_im", "method", "terms_or_nodes", "err_estimate", "precision",
                "condition",
            ]);
            for &wv in &ws {
                for &tv in &ts {
                    let args = ScriptIArgs::new(*b, *nu, wv, tv)?;
                    let r = match method {
                        ScriptIMethod::Auto => script_i(&args)?,
                        ScriptIMethod::Series => script_i_series(&args, cfg.tol)?,
                        ScriptIMethod::Contour => script_i_contour(&args, default_eps(wv.norm()), 256)?,
                    };
                    tab.push(vec![
                        (*b).into(),
                        (*nu).into(),
                        wv.re.into(),
                        wv.im.into(),
                        tv.into(),
                        r.value.re.into(),
                        r.value.im.into(),
                        label(&r.method).into(),
                        r.terms_or_nodes.into(),
                        r.err_estimate.into(),
                        label(&r.precision).into(),
                        r.condition.into(),
                    ]);
                }
            }
            ("eval-scripti", tab)
        }
        Subject::HeatKernel { x, y, t } => {
            cfg.command = "eval heat-kernel".into();
            let xv = point(x, n)?;
            let ys = y.iter().map(|s| point(s, n)).collect::<Result<Vec<_>, _>>()?;
            let ts = real_lists(t)?;
            cfg.arg("x", &xv);
            cfg.arg("y", &ys);
            cfg.arg("t", &ts);
            let xp = PolarPoint::from_cartesian(&xv)?;
            let mut tab = Table::new(&["x", "y", "t", "value", "density", "method", "terms", "err_estimate"]);
            for yv in &ys {
                let yp = PolarPoint::from_cartesian(yv)?;
                for &tv in &ts {
                    let k = heat_kernel_eval(&p, &xp, &yp, tv)?;
                    tab.push(vec![
                        coords(&xv).into(),
                        coords(yv).into(),
                        tv.into(),
                        k.value.re.into(),
                        (p.c_a * k.value.re).into(),
                        label(&k.method).into(),
                        k.terms.into(),
                        k.err_estimate.into(),
                    ]);
                }
            }
            ("eval-heat-kernel", tab)
        }
        Subject::FourierKernel { x, y } => {
            cfg.command = "eval fourier-kernel".into();
            let xv = point(x, n)?;
            let ys = y.iter().map(|s| point(s, n)).collect::<Result<Vec<_>, _>>()?;
            cfg.arg("x", &xv);
            cfg.arg("y", &ys);
            let xp = PolarPoint::from_cartesian(&xv)?;
            let mut tab = Table::new(&["x", "y", "value_re", "value_im", "method", "terms", "err_estimate"]);
            for yv in &ys {
                let k = fourier_kernel(&p, &xp, &PolarPoint::from_cartesian(yv)?)?;
                tab.push(kernel_row(vec![coords(&xv).into(), coords(yv).into()], &k));
            }
            ("eval-fourier-kernel", tab)
        }
        Subject::LaguerreKernel { x, y, z } => {
            cfg.command = "eval laguerre-kernel".into();
            let xv = point(x, n)?;
            let ys = y.iter().map(|s| point(s, n)).collect::<Result<Vec<_>, _>>()?;
            let zs = complexes(z)?;
            cfg.arg("x", &xv);
            cfg.arg("y", &ys);
            cfg.arg("z", zs.iter().map(|v| v.to_string()).collect::<Vec<_>>());
            let xp = PolarPoint::from_cartesian(&xv)?;
            let mut tab = Table::new(&["x", "y", "z_re", "z_im", "value_re", "value_im", "method", "terms", "err_estimate"]);
            for yv in &ys {
                let yp = PolarPoint::from_cartesian(yv)?;
                for &zv in &zs {
                    let k = laguerre_semigroup_kernel(&p, &xp, &yp, zv)?;
                    tab.push(kernel_row(vec![coords(&xv).into(), coords(yv).into(), zv.re.into(), zv.im.into()], &k));
                }
            }
            ("eval-laguerre-kernel", tab)
        }
    };
    emit(cfg, stem, &table_to_string(cfg, "rows", &table)?)
}
