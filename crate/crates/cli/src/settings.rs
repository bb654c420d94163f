//! Run settings: command-line flags layered over an optional config file
//! layered over defaults.
//!
//! The config file is a flat TOML table whose keys are the long flag names,
//! e.g.
//!
//! ```toml
//! coupling = "quadratic"
//! term = "m"
//! alpha = 1.0
//! gamma-a = 0.0
//! etas = [1e-1, 1e-2, 1e-3, 1e-4]
//! ```

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use udw_core::{Coupling, Params, QuadratureSpec, Term, VerdictCriteria};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingArg {
    Linear,
    Quadratic,
}

impl From<CouplingArg> for Coupling {
    fn from(c: CouplingArg) -> Self {
        match c {
            CouplingArg::Linear => Coupling::Linear,
            CouplingArg::Quadratic => Coupling::Quadratic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermArg {
    Laa,
    Lab,
    M,
}

impl From<TermArg> for Term {
    fn from(t: TermArg) -> Self {
        match t {
            TermArg::Laa => Term::Laa,
            TermArg::Lab => Term::Lab,
            TermArg::M => Term::M,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Every setting is optional so that the layers can be merged field by
/// field.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// Flat key = value file supplying defaults for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub coupling: Option<CouplingArg>,
    #[arg(long, value_enum)]
    pub term: Option<TermArg>,

    /// Gap times switching time, ΩT.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Detector separation over switching time.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Smearing width over switching time.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Sets both switching centres (overridden by --gamma-a / --gamma-b).
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_b: Option<f64>,
    /// UV cutoff over switching time.
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_b: Option<f64>,

    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub max_evals: Option<usize>,

    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: number of processors).
    #[arg(long)]
    pub threads: Option<usize>,

    /// Cutoffs for sweeps, comma separated, strictly descending.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub etas: Option<Vec<f64>>,
    /// Relative step below which a sweep counts as converged.
    #[arg(long)]
    pub convergence_rel: Option<f64>,
    /// Minimum R² for a logarithmic-divergence verdict.
    #[arg(long)]
    pub min_r2: Option<f64>,
    /// Points per axis for figure grids.
    #[arg(long)]
    pub grid: Option<usize>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($field:ident),+) => {
        Settings { $($field: $top.$field.or($base.$field),)+ }
    };
}

impl Settings {
    /// Flags win over the config file named by `--config`, if any.
    pub fn resolve(self) -> Result<Settings, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = Settings::from_file(&path)?;
        Ok(overlay!(
            self,
            file,
            config,
            coupling,
            term,
            alpha,
            beta,
            delta,
            gamma,
            gamma_a,
            gamma_b,
            eta,
            lambda_a,
            lambda_b,
            rel_tol,
            abs_tol,
            max_evals,
            out,
            format,
            threads,
            etas,
            convergence_rel,
            min_r2,
            grid
        ))
    }

    fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {}", path.display(), e.message())))
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling.map(Into::into).unwrap_or(Coupling::Linear)
    }

    pub fn term(&self) -> Term {
        self.term.map(Into::into).unwrap_or(Term::Laa)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    /// Element parameters, starting from `base` for anything not given.
    pub fn params_over(&self, base: Params) -> Result<Params, CliError> {
        let p = Params {
            alpha: self.alpha.unwrap_or(base.alpha),
            beta: self.beta.unwrap_or(base.beta),
            gamma_a: self.gamma_a.or(self.gamma).unwrap_or(base.gamma_a),
            gamma_b: self.gamma_b.or(self.gamma).unwrap_or(base.gamma_b),
            delta: self.delta.unwrap_or(base.delta),
            eta: self.eta.unwrap_or(base.eta),
            lambda_a: self.lambda_a.unwrap_or(base.lambda_a),
            lambda_b: self.lambda_b.unwrap_or(base.lambda_b),
            coupling: self.coupling.map(Into::into).unwrap_or(base.coupling),
        };
        p.validate().map_err(CliError::from)?;
        Ok(p)
    }

    pub fn params(&self) -> Result<Params, CliError> {
        self.params_over(Params::default())
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let d = QuadratureSpec::default();
        let q = QuadratureSpec {
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            max_evals: self.max_evals.unwrap_or(d.max_evals),
            ..d
        };
        q.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(q)
    }

    pub fn criteria(&self) -> Result<VerdictCriteria, CliError> {
        let d = VerdictCriteria::default();
        let c = VerdictCriteria {
            convergence_rel: self.convergence_rel.unwrap_or(d.convergence_rel),
            min_r_squared: self.min_r2.unwrap_or(d.min_r_squared),
        };
        if !(c.convergence_rel > 0.0 && c.convergence_rel.is_finite()) {
            return Err(CliError::Usage("invalid `convergence-rel`: must be positive".into()));
        }
        if !(c.min_r_squared > 0.0 && c.min_r_squared <= 1.0) {
            return Err(CliError::Usage("invalid `min-r2`: must lie in (0, 1]".into()));
        }
        Ok(c)
    }

    /// Default sweep: one cutoff per decade from 1e-1 down to 1e-7.
    pub fn etas(&self) -> Vec<f64> {
        self.etas.clone().unwrap_or_else(decades)
    }

    pub fn grid(&self, default: usize) -> Result<usize, CliError> {
        match self.grid {
            Some(n) if n < 2 => Err(CliError::Usage("invalid `grid`: need at least 2 points".into())),
            Some(n) => Ok(n),
            None => Ok(default),
        }
    }

    pub fn threads(&self) -> Result<Option<usize>, CliError> {
        match self.threads {
            Some(0) => Err(CliError::Usage("invalid `threads`: must be at least 1".into())),
            t => Ok(t),
        }
    }
}

pub fn decades() -> Vec<f64> {
    (1..=7).map(|k| 10f64.powi(-k)).collect()
}
