use std::collections::BTreeMap;
use std::path::PathBuf;

use adheat::heatflow::QuadratureRule;
use adheat::kernels::DeformParams;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Directory for artifacts when `--out` is not given.
pub const OUT_DIR_ENV: &str = "ADHEAT_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Everything needed to rerun a command, echoed into its artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Command path, e.g. `eval heat-kernel`.
    pub command: String,
    pub a: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub tol: f64,
    pub n_rad: usize,
    pub n_ang: usize,
    pub n_sub: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Arguments of the subcommand, as parsed.
    pub args: BTreeMap<String, serde_json::Value>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<DeformParams, CliError> {
        let p = DeformParams::new(self.a, self.n)?;
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(CliError::Usage(format!("--tol must lie in (0, 1), got {}", self.tol)));
        }
        if self.n_rad < 2 || self.n_ang < 2 || self.n_sub < 1 {
            return Err(CliError::Usage("quadrature sizes need n-rad, n-ang >= 2 and n-sub >= 1".into()));
        }
        Ok(p)
    }

    pub fn rule(&self, params: &DeformParams) -> Result<QuadratureRule, CliError> {
        Ok(QuadratureRule::new(params, self.n_rad, self.n_ang, self.n_sub, 0, 1.0)?)
    }

    pub fn arg(&mut self, key: &str, v: impl Serialize) {
        self.args.insert(key.to_string(), serde_json::to_value(v).unwrap_or(serde_json::Value::Null));
    }

    /// `--out`, else `$ADHEAT_OUT_DIR/<stem>.<ext>`, else standard output.
    pub fn destination(&self, stem: &str) -> Option<PathBuf> {
        if let Some(p) = &self.output {
            return Some(p.clone());
        }
        let dir = std::env::var_os(OUT_DIR_ENV)?;
        Some(PathBuf::from(dir).join(format!("{stem}.{}", self.format.extension())))
    }
}
