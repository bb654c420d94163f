//! Command-line front end: single elements, cutoff sweeps with a divergence
//! verdict, figure data and the oracle reference table.

pub mod error;
pub mod figures;
pub mod output;
pub mod settings;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use udw_core::divergence::{planck_extrapolation, sweep_eta};
use udw_core::oracle::oracle_element;
use udw_core::{element, Coupling, ElementResult, OracleSpec, Params, QuadratureSpec, Term, Verdict};

use error::element_exit_code;
pub use error::CliError;
use figures::{coupling_name, term_name, Figure};
use output::{Cell, Table};
use settings::Settings;

#[derive(Debug, Parser)]
#[command(name = "udw", version, about = "Correlation harvesting by Unruh–DeWitt detector pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one coupling-normalized density-matrix element.
    Element(#[command(flatten)] Settings),
    /// Evaluate an element over a descending list of cutoffs.
    Sweep(#[command(flatten)] Settings),
    /// Sweep the cutoff and classify the element as convergent or
    /// logarithmically divergent.
    FitDivergence(#[command(flatten)] Settings),
    /// Regenerate the data behind one figure.
    Figure {
        #[arg(value_enum)]
        name: Figure,
        #[command(flatten)]
        settings: Settings,
    },
    /// Elements against the two-dimensional oracle on the reference grid.
    #[command(hide = true)]
    RegenOracleTables(#[command(flatten)] Settings),
}

/// Run a parsed command line; the returned value is the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    let settings = match &cli.command {
        Command::Element(s) | Command::Sweep(s) | Command::FitDivergence(s) | Command::RegenOracleTables(s) => s,
        Command::Figure { settings, .. } => settings,
    }
    .clone()
    .resolve()?;

    let work = || match cli.command {
        Command::Element(_) => cmd_element(&settings),
        Command::Sweep(_) => cmd_sweep(&settings),
        Command::FitDivergence(_) => cmd_fit_divergence(&settings),
        Command::Figure { name, .. } => cmd_figure(name, &settings),
        Command::RegenOracleTables(_) => cmd_regen_oracle_tables(&settings),
    };
    match settings.threads()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?
            .install(work),
        None => work(),
    }
}

fn emit(table: &Table, settings: &Settings) -> Result<(), CliError> {
    table.emit(settings.format(), settings.out.as_deref())
}

fn params_cells(p: &Params) -> Vec<Cell> {
    [p.alpha, p.beta, p.delta, p.gamma_a, p.gamma_b, p.eta, p.lambda_a, p.lambda_b].map(Cell::from).to_vec()
}

const PARAM_COLUMNS: [&str; 8] = ["alpha", "beta", "delta", "gamma_a", "gamma_b", "eta", "lambda_a", "lambda_b"];

fn cmd_element(settings: &Settings) -> Result<i32, CliError> {
    let term = settings.term();
    let p = settings.params()?;
    let quad = settings.quadrature()?;
    let outcome = element(term, &p, &quad);
    // A missed tolerance still reports its best estimate before failing.
    let Some(r) = outcome.as_ref().ok().copied().or_else(|| outcome.as_ref().err().and_then(|e| e.partial())) else {
        return Err(outcome.unwrap_err().into());
    };

    let mut columns = vec!["term", "coupling"];
    columns.extend(PARAM_COLUMNS);
    columns.extend(["re", "im", "abs", "err_estimate", "evals", "status"]);
    let mut t = Table::new(&columns);
    let mut row: Vec<Cell> = vec![term_name(term).into(), coupling_name(p.coupling).into()];
    row.extend(params_cells(&p));
    row.extend(result_cells(&r));
    row.push(if outcome.is_ok() { "ok" } else { "ToleranceNotMet" }.into());
    t.push(row);
    emit(&t, settings)?;
    outcome.map(|_| 0).map_err(CliError::from)
}

fn result_cells(r: &ElementResult) -> [Cell; 5] {
    [r.value.re.into(), r.value.im.into(), r.value.norm().into(), r.err_estimate.into(), r.evals.into()]
}

fn cmd_sweep(settings: &Settings) -> Result<i32, CliError> {
    let p = settings.params()?;
    let sweep =
        sweep_eta(settings.term(), p.coupling, &p, &settings.etas(), &settings.quadrature()?, &settings.criteria()?)?;

    let mut t = Table::new(&["eta", "re", "im", "abs", "err_estimate", "evals", "status"]);
    let mut code = 0;
    for row in &sweep.rows {
        let mut cells = vec![row.eta.into()];
        match &row.outcome {
            Ok(r) => {
                cells.extend(result_cells(r));
                cells.push("ok".into());
            }
            Err(e) => {
                match e.partial() {
                    Some(r) => cells.extend(result_cells(&r)),
                    None => cells.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]),
                }
                cells.push(error::element_kind(e).into());
                if code == 0 {
                    code = element_exit_code(e);
                }
            }
        }
        t.push(cells);
    }
    emit(&t, settings)?;
    Ok(code)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Convergent => "Convergent",
        Verdict::LogDivergent => "LogDivergent",
        Verdict::Inconclusive => "Inconclusive",
    }
}

fn cmd_fit_divergence(settings: &Settings) -> Result<i32, CliError> {
    let p = settings.params()?;
    let term = settings.term();
    let sweep = sweep_eta(term, p.coupling, &p, &settings.etas(), &settings.quadrature()?, &settings.criteria()?)?;
    let fit = sweep.fit;

    let mut t = Table::new(&[
        "term",
        "coupling",
        "points",
        "verdict",
        "intercept",
        "slope",
        "r_squared",
        "planck_extrapolation",
    ]);
    t.push(vec![
        term_name(term).into(),
        coupling_name(p.coupling).into(),
        sweep.rows.len().into(),
        verdict_name(sweep.verdict).into(),
        fit.map(|f| f.intercept).into(),
        fit.map(|f| f.slope).into(),
        fit.map(|f| f.r_squared).into(),
        planck_extrapolation(&sweep).ok().into(),
    ]);
    emit(&t, settings)?;
    Ok(0)
}

fn cmd_figure(name: Figure, settings: &Settings) -> Result<i32, CliError> {
    let quad = settings.quadrature()?;
    let grid = settings.grid(figures::DEFAULT_GRID)?;
    // A single --eta stands in for the cutoff list of the negativity figures.
    let cutoffs = |default: fn() -> Vec<f64>| match (&settings.etas, settings.eta) {
        (Some(etas), _) => etas.clone(),
        (None, Some(eta)) => vec![eta],
        (None, None) => default(),
    };
    let table = match name {
        Figure::Fig2 => figures::fig2(&settings.params_over(figures::fig2_base())?, &settings.etas(), &quad),
        Figure::Fig3 => figures::fig3(
            &settings.params_over(figures::negativity_base())?,
            &cutoffs(figures::even_decades),
            grid,
            &quad,
        ),
        Figure::Fig4 => figures::fig4(
            &settings.params_over(figures::negativity_base())?,
            &cutoffs(figures::even_decades),
            grid,
            &quad,
        ),
        Figure::Fig5 => figures::fig5(&settings.params_over(figures::fig5_base())?, grid, &quad),
    };
    emit(&table, settings)?;
    Ok(0)
}

/// One point of the oracle reference grid.
#[derive(Debug, Clone, Copy)]
pub struct OracleCase {
    pub term: Term,
    pub coupling: Coupling,
    pub params: Params,
}

/// α ∈ {0, 1, 2} × β ∈ {1, 4} × η ∈ {1e-2, 1e-4} at δ = 1, for both
/// couplings: the local term, the cross term at γ_B − γ_A ∈ {0, 4} and the
/// non-local term at γ = 0.
pub fn oracle_grid() -> Vec<OracleCase> {
    let mut cases = Vec::new();
    for coupling in figures::COUPLINGS {
        for alpha in [0.0, 1.0, 2.0] {
            for beta in [1.0, 4.0] {
                for eta in [1e-2, 1e-4] {
                    let base = Params {
                        alpha,
                        beta,
                        eta,
                        delta: 1.0,
                        gamma_a: 0.0,
                        gamma_b: 0.0,
                        coupling,
                        ..Default::default()
                    };
                    let with = |term, gamma_b| OracleCase { term, coupling, params: Params { gamma_b, ..base } };
                    cases.extend([
                        with(Term::Laa, 0.0),
                        with(Term::Lab, 0.0),
                        with(Term::Lab, 4.0),
                        with(Term::M, 0.0),
                    ]);
                }
            }
        }
    }
    cases
}

/// Element and oracle values at one grid point.
#[derive(Debug)]
pub struct OracleComparison {
    pub case: OracleCase,
    pub element: Result<ElementResult, CliError>,
    pub oracle: Result<ElementResult, CliError>,
}

impl OracleComparison {
    /// `|element − oracle| / |oracle|`, when both succeeded.
    pub fn relative_difference(&self) -> Option<f64> {
        let (e, o) = (self.element.as_ref().ok()?, self.oracle.as_ref().ok()?);
        Some((e.value - o.value).norm() / o.value.norm())
    }

    /// Agreement within `rel_tol`, or within the combined error estimates.
    pub fn agrees(&self, rel_tol: f64) -> bool {
        let (Ok(e), Ok(o)) = (&self.element, &self.oracle) else { return false };
        let diff = (e.value - o.value).norm();
        diff <= rel_tol * o.value.norm() || diff <= e.err_estimate + o.err_estimate
    }
}

pub fn compare_with_oracle(quad: &QuadratureSpec, spec: &OracleSpec) -> Vec<OracleComparison> {
    oracle_grid()
        .into_par_iter()
        .map(|case| OracleComparison {
            case,
            element: element(case.term, &case.params, quad).map_err(CliError::from),
            oracle: oracle_element(case.term, case.coupling, &case.params, spec).map_err(CliError::from),
        })
        .collect()
}

fn cmd_regen_oracle_tables(settings: &Settings) -> Result<i32, CliError> {
    let quad = settings.quadrature()?;
    let comparisons = compare_with_oracle(&quad, &OracleSpec::default());
    let mut t = Table::new(&[
        "term",
        "coupling",
        "alpha",
        "beta",
        "delta_gamma",
        "eta",
        "oracle_re",
        "oracle_im",
        "oracle_err",
        "element_re",
        "element_im",
        "element_err",
        "relative_difference",
        "status",
    ]);
    let mut code = 0;
    for c in &comparisons {
        let p = &c.case.params;
        let o = c.oracle.as_ref().ok();
        let e = c.element.as_ref().ok();
        let failure = c.oracle.as_ref().err().or(c.element.as_ref().err());
        if let (Some(err), 0) = (failure, code) {
            code = err.exit_code();
        }
        t.push(vec![
            term_name(c.case.term).into(),
            coupling_name(c.case.coupling).into(),
            p.alpha.into(),
            p.beta.into(),
            (p.gamma_b - p.gamma_a).into(),
            p.eta.into(),
            o.map(|r| r.value.re).into(),
            o.map(|r| r.value.im).into(),
            o.map(|r| r.err_estimate).into(),
            e.map(|r| r.value.re).into(),
            e.map(|r| r.value.im).into(),
            e.map(|r| r.err_estimate).into(),
            c.relative_difference().into(),
            failure.map_or("ok", CliError::kind).into(),
        ]);
    }
    emit(&t, settings)?;
    Ok(code)
}
