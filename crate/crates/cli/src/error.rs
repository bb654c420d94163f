use thiserror::Error;
use udw_core::{DivergenceError, ElementError, MeasuresError, OracleError, QuadratureError, SpecfunError};

pub const EXIT_TOLERANCE: i32 = 2;
pub const EXIT_CONTRACT: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Divergence(#[from] DivergenceError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Measures(#[from] MeasuresError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Element(e) => element_exit_code(e),
            CliError::Divergence(DivergenceError::Element(e)) => element_exit_code(e),
            CliError::Divergence(DivergenceError::TooFewEtas(_) | DivergenceError::BadEtas) => EXIT_USAGE,
            CliError::Divergence(DivergenceError::FitUnavailable) => EXIT_CONTRACT,
            CliError::Oracle(OracleError::ToleranceNotMet { .. }) => EXIT_TOLERANCE,
            CliError::Oracle(OracleError::Element(e)) => element_exit_code(e),
            CliError::Oracle(OracleError::Quadrature(e)) => quadrature_exit_code(e),
            CliError::Oracle(_) => EXIT_CONTRACT,
            CliError::Measures(_) => EXIT_CONTRACT,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    /// Short variant name used as the tag of the error message.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Element(e) | CliError::Divergence(DivergenceError::Element(e)) => element_kind(e),
            CliError::Oracle(OracleError::Element(e)) => element_kind(e),
            CliError::Divergence(DivergenceError::TooFewEtas(_)) => "TooFewEtas",
            CliError::Divergence(DivergenceError::BadEtas) => "BadEtas",
            CliError::Divergence(DivergenceError::FitUnavailable) => "FitUnavailable",
            CliError::Oracle(OracleError::PoleProximity { .. }) => "PoleProximity",
            CliError::Oracle(OracleError::WindowTooNarrow(_)) => "WindowTooNarrow",
            CliError::Oracle(OracleError::InsufficientSamples { .. }) => "InsufficientSamples",
            CliError::Oracle(OracleError::ToleranceNotMet { .. }) => "ToleranceNotMet",
            CliError::Oracle(OracleError::Quadrature(e)) => quadrature_kind(e),
            CliError::Oracle(OracleError::Correlator(_)) => "Correlator",
            CliError::Measures(MeasuresError::PerturbativityViolated { .. }) => "PerturbativityViolated",
            CliError::Measures(MeasuresError::InvalidProbability { .. }) => "InvalidProbability",
            CliError::Io { .. } => "Io",
        }
    }
}

pub fn element_exit_code(e: &ElementError) -> i32 {
    match e {
        ElementError::InvalidParams { .. } => EXIT_USAGE,
        ElementError::Quadrature(q) => quadrature_exit_code(q),
        ElementError::CutoffRequired | ElementError::NonSimultaneous | ElementError::Specfun(_) => EXIT_CONTRACT,
    }
}

fn quadrature_exit_code(e: &QuadratureError) -> i32 {
    match e {
        QuadratureError::ToleranceNotMet { .. } => EXIT_TOLERANCE,
        QuadratureError::IntegrandNonFinite { .. } => EXIT_CONTRACT,
        QuadratureError::InvalidSpec { .. } => EXIT_USAGE,
    }
}

pub fn element_kind(e: &ElementError) -> &'static str {
    match e {
        ElementError::InvalidParams { .. } => "InvalidParams",
        ElementError::CutoffRequired => "CutoffRequired",
        ElementError::NonSimultaneous => "NonSimultaneous",
        ElementError::Quadrature(q) => quadrature_kind(q),
        ElementError::Specfun(SpecfunError::OverflowDomain { .. }) => "OverflowDomain",
        ElementError::Specfun(SpecfunError::SingularArgument { .. }) => "SingularArgument",
    }
}

fn quadrature_kind(e: &QuadratureError) -> &'static str {
    match e {
        QuadratureError::ToleranceNotMet { .. } => "ToleranceNotMet",
        QuadratureError::IntegrandNonFinite { .. } => "IntegrandNonFinite",
        QuadratureError::InvalidSpec { .. } => "InvalidSpec",
    }
}
