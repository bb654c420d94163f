//! Cutoff sweeps: does an element settle down as η → 0, or grow like ln(1/η)?

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elements::{element, g_integrand_limit, Coupling, ElementError, ElementResult, Params, Term};
use crate::quadrature::QuadratureSpec;

/// Dimensionless cutoff corresponding to a Planck-time ε for a switching
/// time of order one second.
pub const PLANCK_ETA: f64 = 1e-29;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Convergent,
    LogDivergent,
    Inconclusive,
}

/// Least-squares line `|value| ≈ a + b·ln(1/η)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

impl LogFit {
    /// Value of the fitted line at cutoff `eta`.
    pub fn at(&self, eta: f64) -> f64 {
        self.intercept + self.slope * (1.0 / eta).ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eta: f64,
    pub outcome: Result<ElementResult, ElementError>,
}

impl SweepRow {
    /// The computed value, falling back to the partial estimate of a
    /// missed tolerance.
    pub fn value(&self) -> Option<Complex64> {
        match &self.outcome {
            Ok(r) => Some(r.value),
            Err(e) => e.partial().map(|r| r.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Sorted by descending η.
    pub rows: Vec<SweepRow>,
    pub fit: Option<LogFit>,
    pub verdict: Verdict,
}

/// Thresholds that turn a sweep into a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictCriteria {
    /// Convergent requires the last step to be below this fraction of the
    /// last value.
    pub convergence_rel: f64,
    /// LogDivergent requires at least this R².
    pub min_r_squared: f64,
}

impl Default for VerdictCriteria {
    fn default() -> Self {
        VerdictCriteria { convergence_rel: 1e-3, min_r_squared: 0.999 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DivergenceError {
    #[error("≥ 4 etas required (got {0})")]
    TooFewEtas(usize),
    #[error("etas must be positive, finite and strictly descending")]
    BadEtas,
    #[error("no logarithmic fit available (the sweep is not LogDivergent)")]
    FitUnavailable,
    #[error(transparent)]
    Element(#[from] ElementError),
}

/// Evaluate `term` with the given coupling at each cutoff. Rows are computed
/// in parallel and returned in input order.
pub fn sweep_eta(
    term: Term,
    coupling: Coupling,
    p: &Params,
    etas: &[f64],
    quad: &QuadratureSpec,
    criteria: &VerdictCriteria,
) -> Result<SweepResult, DivergenceError> {
    if etas.len() < 4 {
        return Err(DivergenceError::TooFewEtas(etas.len()));
    }
    let ordered = etas.windows(2).all(|w| w[1] < w[0]);
    if !ordered || etas.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(DivergenceError::BadEtas);
    }
    p.validate()?;
    let rows: Vec<SweepRow> = etas
        .par_iter()
        .map(|&eta| SweepRow { eta, outcome: element(term, &Params { eta, coupling, ..*p }, quad) })
        .collect();
    let values: Option<Vec<Complex64>> = rows.iter().map(SweepRow::value).collect();
    let (fit, verdict) = match values {
        Some(values) => {
            let fit = log_fit(etas, &values);
            (Some(fit), classify(&values, &fit, criteria))
        }
        None => (None, Verdict::Inconclusive),
    };
    Ok(SweepResult { rows, fit, verdict })
}

fn classify(values: &[Complex64], fit: &LogFit, criteria: &VerdictCriteria) -> Verdict {
    let steps: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let shrinking = steps.windows(2).all(|s| s[1] < s[0]);
    let last = values[values.len() - 1].norm();
    if shrinking && steps[steps.len() - 1] < criteria.convergence_rel * last {
        Verdict::Convergent
    } else if fit.slope > 0.0 && fit.r_squared > criteria.min_r_squared {
        Verdict::LogDivergent
    } else {
        Verdict::Inconclusive
    }
}

/// Ordinary least squares of `|value|` on `ln(1/η)`.
pub fn log_fit(etas: &[f64], values: &[Complex64]) -> LogFit {
    let n = etas.len() as f64;
    let xs: Vec<f64> = etas.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LogFit { intercept, slope, r_squared }
}

/// Extrapolated `|M^{φ²}|` at the Planck-scale cutoff, from a sweep whose
/// verdict is LogDivergent.
pub fn planck_extrapolation(sweep: &SweepResult) -> Result<f64, DivergenceError> {
    match (sweep.verdict, sweep.fit) {
        (Verdict::LogDivergent, Some(fit)) => Ok(fit.at(PLANCK_ETA)),
        _ => Err(DivergenceError::FitUnavailable),
    }
}

/// Outcome of extrapolating `ξ·G₀(ξ)` to ξ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaurentReport {
    /// Extrapolated `lim_{ξ→0} ξ G₀(ξ)`.
    pub limit: Complex64,
    /// Leading Laurent coefficient as stated: `4iπβ/δ²`.
    pub expected: Complex64,
    /// `|limit - expected|/|expected|` (absolute when `expected` is 0).
    pub deviation: f64,
    /// Same comparison on moduli only.
    pub modulus_deviation: f64,
}

/// Default abscissae for [`laurent_check`]: 0.05·2^{-k}, k = 0..8.
pub fn default_laurent_points() -> Vec<f64> {
    (0..9).map(|k| 0.05 * 0.5f64.powi(k)).collect()
}

/// Polynomial (Richardson/Neville) extrapolation of `ξ·G₀(ξ)` to ξ = 0,
/// using the η = 0 form of the quadratic M integrand.
pub fn laurent_check(p: &Params, xi_values: &[f64]) -> Result<LaurentReport, DivergenceError> {
    let mut pts = Vec::with_capacity(xi_values.len());
    for &xi in xi_values {
        pts.push((xi, xi * g_integrand_limit(xi, p)?));
    }
    let limit = neville_at_zero(&pts);
    let expected = Complex64::new(0.0, 4.0 * std::f64::consts::PI * p.beta / (p.delta * p.delta));
    let scale = if expected.norm() > 0.0 { expected.norm() } else { 1.0 };
    Ok(LaurentReport {
        limit,
        expected,
        deviation: (limit - expected).norm() / scale,
        modulus_deviation: (limit.norm() - expected.norm()).abs() / scale,
    })
}

fn neville_at_zero(pts: &[(f64, Complex64)]) -> Complex64 {
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let mut t: Vec<Complex64> = pts.iter().map(|p| p.1).collect();
    let n = t.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            t[i] = (t[i + 1] * xi - t[i] * xj) / (xi - xj);
        }
    }
    t[0]
}
