//! Figure data. Every figure is a single long-format table whose rows come
//! out in a fixed grid order; cells are evaluated in parallel on the current
//! rayon pool and failed cells keep their row with empty values and the
//! error name in `status`.
//!
//! Negativity and mutual information are reported for λ_A = λ_B = 1, i.e.
//! as N⁽²⁾/(λ_Aλ_B) and I/(λ_Aλ_B), which are exact for equal couplings.

use clap::ValueEnum;
use rayon::prelude::*;
use udw_core::measures::{assemble, compute_elements, mutual_information, negativity};
use udw_core::{element, Coupling, ElementSet, Params, QuadratureSpec, Term};

use crate::error::CliError;
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Six elements against the cutoff.
    Fig2,
    /// Negativity over (α, β) per coupling and cutoff.
    Fig3,
    /// Negativity against β at α ∈ {0, 1} per coupling and cutoff.
    Fig4,
    /// Mutual information over (β, γ_B − γ_A) per coupling.
    Fig5,
}

pub const COUPLINGS: [Coupling; 2] = [Coupling::Linear, Coupling::Quadratic];

pub const DEFAULT_GRID: usize = 50;

pub fn coupling_name(c: Coupling) -> &'static str {
    match c {
        Coupling::Linear => "linear",
        Coupling::Quadratic => "quadratic",
    }
}

pub fn term_name(t: Term) -> &'static str {
    match t {
        Term::Laa => "laa",
        Term::Lab => "lab",
        Term::M => "m",
    }
}

/// Cutoffs for the negativity figures: 1e-2, 1e-4, …, 1e-12.
pub fn even_decades() -> Vec<f64> {
    (1..=6).map(|k| 10f64.powi(-2 * k)).collect()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
}

fn unit_couplings(p: Params) -> Params {
    Params { lambda_a: 1.0, lambda_b: 1.0, ..p }
}

fn status<T>(r: &Result<T, CliError>) -> Cell {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => e.kind().into(),
    }
}

/// Leading-order N⁽²⁾ at unit couplings.
pub fn negativity_2(p: &Params, quad: &QuadratureSpec) -> Result<f64, CliError> {
    let p = unit_couplings(*p);
    let elems = compute_elements(&p, quad)?;
    Ok(negativity(&assemble(&p, &elems)?).negativity_2)
}

/// Leading-order mutual information (nats) at unit couplings. Only the
/// local and cross terms enter, so switching need not be simultaneous.
pub fn mutual_information_at(p: &Params, quad: &QuadratureSpec) -> Result<f64, CliError> {
    let p = unit_couplings(*p);
    let l_aa = element(Term::Laa, &p, quad)?.value.re;
    let l_ab = element(Term::Lab, &p, quad)?.value;
    let elems = ElementSet { l_aa, l_bb: l_aa, l_ab, m: Default::default() };
    Ok(mutual_information(&assemble(&p, &elems)?).mutual_information)
}

/// Fig. 2 panels in order (a)–(f).
pub const FIG2_PANELS: [(char, Term, Coupling); 6] = [
    ('a', Term::Laa, Coupling::Linear),
    ('b', Term::Lab, Coupling::Linear),
    ('c', Term::M, Coupling::Linear),
    ('d', Term::Laa, Coupling::Quadratic),
    ('e', Term::Lab, Coupling::Quadratic),
    ('f', Term::M, Coupling::Quadratic),
];

/// Defaults: α = 1, β = 4, δ = 1; the cross term uses γ_B − γ_A = 4 and
/// the non-local term simultaneous switching at γ_A.
pub fn fig2_base() -> Params {
    Params { alpha: 1.0, beta: 4.0, delta: 1.0, gamma_a: 0.0, gamma_b: 4.0, ..Default::default() }
}

pub fn fig2(base: &Params, etas: &[f64], quad: &QuadratureSpec) -> Table {
    let cells: Vec<_> = FIG2_PANELS
        .iter()
        .flat_map(|&(panel, term, coupling)| etas.iter().map(move |&eta| (panel, term, coupling, eta)))
        .collect();
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(_, term, coupling, eta)| {
            let mut p = Params { eta, coupling, ..*base };
            if term == Term::M {
                p.gamma_b = p.gamma_a;
            }
            element(term, &p, quad).map_err(CliError::from)
        })
        .collect();

    let mut t = Table::new(&["panel", "term", "coupling", "eta", "re", "im", "abs", "err_estimate", "status"]);
    for (&(panel, term, coupling, eta), r) in cells.iter().zip(&results) {
        let v = r.as_ref().ok();
        t.push(vec![
            panel.to_string().into(),
            term_name(term).into(),
            coupling_name(coupling).into(),
            eta.into(),
            v.map(|v| v.value.re).into(),
            v.map(|v| v.value.im).into(),
            v.map(|v| v.value.norm()).into(),
            v.map(|v| v.err_estimate).into(),
            status(r),
        ]);
    }
    t
}

/// Defaults: δ = 1, simultaneous switching.
pub fn negativity_base() -> Params {
    Params { delta: 1.0, gamma_a: 0.0, gamma_b: 0.0, ..Default::default() }
}

pub fn fig3(base: &Params, etas: &[f64], grid: usize, quad: &QuadratureSpec) -> Table {
    let alphas = linspace(0.0, 10.0, grid);
    let betas = linspace(0.1, 5.0, grid);
    let mut cells = Vec::with_capacity(2 * etas.len() * grid * grid);
    for coupling in COUPLINGS {
        for &eta in etas {
            for &beta in &betas {
                for &alpha in &alphas {
                    cells.push(Params { alpha, beta, eta, coupling, ..*base });
                }
            }
        }
    }
    let results: Vec<_> = cells.par_iter().map(|p| negativity_2(p, quad)).collect();

    let mut t = Table::new(&["coupling", "eta", "alpha", "beta", "negativity_2", "status"]);
    for (p, r) in cells.iter().zip(&results) {
        t.push(vec![
            coupling_name(p.coupling).into(),
            p.eta.into(),
            p.alpha.into(),
            p.beta.into(),
            r.as_ref().ok().copied().into(),
            status(r),
        ]);
    }
    t
}

pub fn fig4(base: &Params, etas: &[f64], grid: usize, quad: &QuadratureSpec) -> Table {
    let betas = linspace(0.0, 6.0, grid);
    let mut cells = Vec::with_capacity(4 * etas.len() * grid);
    for coupling in COUPLINGS {
        for alpha in [0.0, 1.0] {
            for &eta in etas {
                for &beta in &betas {
                    cells.push(Params { alpha, beta, eta, coupling, ..*base });
                }
            }
        }
    }
    let results: Vec<_> = cells.par_iter().map(|p| negativity_2(p, quad)).collect();

    let mut t = Table::new(&["coupling", "alpha", "eta", "beta", "negativity_2", "status"]);
    for (p, r) in cells.iter().zip(&results) {
        t.push(vec![
            coupling_name(p.coupling).into(),
            p.alpha.into(),
            p.eta.into(),
            p.beta.into(),
            r.as_ref().ok().copied().into(),
            status(r),
        ]);
    }
    t
}

/// Defaults: α = 1, δ = 1, η = 1e-4.
pub fn fig5_base() -> Params {
    Params { alpha: 1.0, delta: 1.0, eta: 1e-4, gamma_a: 0.0, ..Default::default() }
}

/// Causal relation of the two switching centres, with the light cone
/// widened to half a grid step so that it shows up on a discrete grid.
pub fn causal_region(beta: f64, dgamma: f64, half_step: f64) -> &'static str {
    let gap = beta - dgamma.abs();
    if gap.abs() <= half_step {
        "lightcone"
    } else if gap > 0.0 {
        "spacelike"
    } else {
        "timelike"
    }
}

/// One Fig. 5 cell.
#[derive(Debug, Clone, Copy)]
pub struct InformationCell {
    pub coupling: Coupling,
    pub beta: f64,
    pub dgamma: f64,
}

pub fn fig5_cells(grid: usize) -> Vec<InformationCell> {
    let axis = linspace(0.0, 6.0, grid);
    let mut cells = Vec::with_capacity(2 * grid * grid);
    for coupling in COUPLINGS {
        for &dgamma in &axis {
            for &beta in &axis {
                cells.push(InformationCell { coupling, beta, dgamma });
            }
        }
    }
    cells
}

pub fn fig5_values(base: &Params, cells: &[InformationCell], quad: &QuadratureSpec) -> Vec<Result<f64, CliError>> {
    cells
        .par_iter()
        .map(|c| {
            let p = Params { beta: c.beta, gamma_b: base.gamma_a + c.dgamma, coupling: c.coupling, ..*base };
            mutual_information_at(&p, quad)
        })
        .collect()
}

pub fn fig5(base: &Params, grid: usize, quad: &QuadratureSpec) -> Table {
    let cells = fig5_cells(grid);
    let results = fig5_values(base, &cells, quad);
    let half_step = 0.5 * 6.0 / (grid - 1) as f64;

    let mut t = Table::new(&[
        "coupling",
        "beta",
        "delta_gamma",
        "mutual_information",
        "log10_mutual_information",
        "region",
        "status",
    ]);
    for (c, r) in cells.iter().zip(&results) {
        let mi = r.as_ref().ok().copied();
        t.push(vec![
            coupling_name(c.coupling).into(),
            c.beta.into(),
            c.dgamma.into(),
            mi.into(),
            mi.filter(|&x| x > 0.0).map(f64::log10).into(),
            causal_region(c.beta, c.dgamma, half_step).into(),
            status(r),
        ]);
    }
    t
}
