//! Independent reference evaluations of the density-matrix elements.
//!
//! [`oracle_element`] integrates the elements *before* the switching-time
//! integral is done in closed form: a nested quadrature over the switching
//! variable v (outer) and the radial momentum q (inner), with the pole
//! prescription `(q² - (v - iη)²)^m` kept explicitly on the real axis.
//!
//! [`oracle_mode_sum`] goes back one step further and averages the Wightman
//! function over the detectors' Gaussian switching and smearing profiles by
//! randomized quasi-Monte Carlo.
//!
//! Neither shares integrand code with [`crate::elements`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlators::{wightman_linear, wightman_quadratic, CorrelatorError, SpacetimePair};
use crate::elements::{Coupling, ElementError, ElementResult, Params, Term};
use crate::quadrature::{integrate_2d, QuadResult, QuadratureError, QuadratureSpec};

/// Smallest cutoff the nested quadrature resolves.
pub const ORACLE_MIN_ETA: f64 = 1e-6;
/// Smallest cutoff for which the Monte Carlo variance is acceptable.
pub const MODE_SUM_MIN_ETA: f64 = 1e-2;
/// Minimum number of Monte Carlo samples.
pub const MODE_SUM_MIN_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    /// Half-width V of the v-window around the Gaussian's centre.
    pub v_halfwidth: f64,
    pub quad: QuadratureSpec,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            v_halfwidth: 9.0,
            quad: QuadratureSpec { rel_tol: 1e-8, abs_tol: 1e-15, max_evals: 20_000, ..Default::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("eta = {eta} is below the oracle's resolution limit {min}")]
    PoleProximity { eta: f64, min: f64 },
    #[error("v_halfwidth must be at least 8 (got {0})")]
    WindowTooNarrow(f64),
    #[error("Monte Carlo error {sigma:.3e} exceeds 10% of |value| = {magnitude:.3e} (or too few samples: {samples})")]
    InsufficientSamples { samples: usize, sigma: f64, magnitude: f64 },
    #[error("oracle tolerance not met (estimated error {:.3e} on |value| {:.3e})", partial.err_estimate, partial.value.norm())]
    ToleranceNotMet { partial: ElementResult },
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Correlator(#[from] CorrelatorError),
}

impl OracleError {
    /// Best available estimate when the tolerance was missed.
    pub fn partial(&self) -> Option<ElementResult> {
        match self {
            OracleError::ToleranceNotMet { partial } => Some(*partial),
            _ => None,
        }
    }
}

fn contract(term: Term, p: &Params, min_eta: f64) -> Result<(), OracleError> {
    p.validate()?;
    if term == Term::M && p.gamma_a != p.gamma_b {
        return Err(ElementError::NonSimultaneous.into());
    }
    if term == Term::M && p.coupling == Coupling::Quadratic && p.eta == 0.0 {
        return Err(ElementError::CutoffRequired.into());
    }
    if p.eta < min_eta {
        return Err(OracleError::PoleProximity { eta: p.eta, min: min_eta });
    }
    Ok(())
}

/// Smearing overlap in momentum space times the radial measure, per unit q:
/// `e^{-(q-β)²/2δ²} (1 - e^{-2qβ/δ²}) / (2β)`, with its β → 0 limit.
fn smearing_weight(q: f64, beta: f64, delta: f64) -> f64 {
    let s2 = delta * delta;
    if beta == 0.0 {
        return q / s2 * (-q * q / (2.0 * s2)).exp();
    }
    let gauss = (-(q - beta) * (q - beta) / (2.0 * s2)).exp();
    gauss * -(-2.0 * q * beta / s2).exp_m1() / (2.0 * beta)
}

/// q-derivative of [`smearing_weight`].
fn smearing_weight_slope(q: f64, beta: f64, delta: f64) -> f64 {
    let s2 = delta * delta;
    if beta == 0.0 {
        return (1.0 - q * q / s2) / s2 * (-q * q / (2.0 * s2)).exp();
    }
    let gauss = (-(q - beta) * (q - beta) / (2.0 * s2)).exp();
    let rise = -(-2.0 * q * beta / s2).exp_m1() / (2.0 * beta);
    gauss * (-(q - beta) / s2 * rise + (-2.0 * q * beta / s2).exp() / s2)
}

/// Inner integrand `q w(q) / (q² - s²)^m` for the shifted pole position `s`.
///
/// The double pole is integrated by parts once: since
/// `q/(q² - s²)² = -½ d/dq (q² - s²)^{-1}` and `w(0) = w(∞) = 0`, the m = 2
/// integrand may be replaced by `½ w'(q)/(q² - s²)`. The single pole has no
/// catastrophic cancellation between its two sides, which the double pole
/// has at the 1/η level.
fn radial(q: f64, s: Complex64, beta: f64, delta: f64, m: i32) -> Complex64 {
    let denom = Complex64::new(q * q, 0.0) - s * s;
    match m {
        1 => q * smearing_weight(q, beta, delta) / denom,
        _ => 0.5 * smearing_weight_slope(q, beta, delta) / denom,
    }
}

/// Points where the inner integrand has structure: the near-pole at
/// q = |v| and a few cutoff-widths around it.
fn pole_breaks(v: f64, eta: f64) -> Vec<f64> {
    let c = v.abs();
    let mut b = vec![c];
    for k in [1.0, 8.0, 64.0] {
        b.push(c - k * eta);
        b.push(c + k * eta);
    }
    b
}

/// Breakpoints in v: the origin, where the pole reaches the q = 0 endpoint,
/// and a geometric ladder of cutoff-widths around it.
fn origin_breaks(eta: f64, centre: f64) -> Vec<f64> {
    let mut b = vec![0.0, centre];
    let mut x = eta;
    while x < 1.0 {
        b.push(x);
        b.push(-x);
        x *= 8.0;
    }
    b
}

/// Element by nested quadrature over (v, q).
pub fn oracle_element(
    term: Term,
    coupling: Coupling,
    p: &Params,
    spec: &OracleSpec,
) -> Result<ElementResult, OracleError> {
    let p = Params { coupling, ..*p };
    contract(term, &p, ORACLE_MIN_ETA)?;
    if !(spec.v_halfwidth >= 8.0) {
        return Err(OracleError::WindowTooNarrow(spec.v_halfwidth));
    }
    let m = match coupling {
        Coupling::Linear => 1,
        Coupling::Quadratic => 2,
    };
    let (alpha, delta, eta) = (p.alpha, p.delta, p.eta);
    let beta = if term == Term::Laa { 0.0 } else { p.beta };
    let q_max = beta + delta * (2.0 * (1.0 / spec.quad.abs_tol).ln()).sqrt();
    let quad = spec.quad.with_envelope(1.0 / (2.0 * delta * delta), beta);
    let q_breaks = move |v: f64| {
        let mut b = pole_breaks(v, eta);
        b.push(beta);
        b
    };

    let (integral, prefactor) = match term {
        Term::Laa | Term::Lab => {
            // ∫dv e^{-(v-a)²/2 - iαv} ∫dq q w(q)/(q² - (v - iη)²)^m,
            // with a = γ_A - γ_B.
            let a = if term == Term::Laa { 0.0 } else { p.gamma_a - p.gamma_b };
            let f = move |v: f64, q: f64| {
                let switching = Complex64::new(-0.5 * (v - a) * (v - a), -alpha * v).exp();
                switching * radial(q, Complex64::new(v, -eta), beta, delta, m)
            };
            let v_range = (a - spec.v_halfwidth, a + spec.v_halfwidth);
            let r = integrate_2d(f, v_range, &origin_breaks(eta, a), q_max, q_breaks, &quad);
            let k = match coupling {
                Coupling::Linear => 1.0 / (4.0 * PI * PI),
                Coupling::Quadratic => 1.0 / (8.0 * PI.powi(4)),
            };
            (r, Complex64::new(k / delta, 0.0))
        }
        Term::M => {
            // Time-ordered: ∫dv e^{-v²/2} ∫dq q w(q)/(q² - (|v| - iη)²)^m.
            let f =
                move |v: f64, q: f64| (-0.5 * v * v).exp() * radial(q, Complex64::new(v.abs(), -eta), beta, delta, m);
            let v_range = (-spec.v_halfwidth, spec.v_halfwidth);
            let r = integrate_2d(f, v_range, &origin_breaks(eta, 0.0), q_max, q_breaks, &quad);
            let k = match coupling {
                Coupling::Linear => 1.0 / (4.0 * PI * PI),
                Coupling::Quadratic => 1.0 / (8.0 * PI.powi(4)),
            };
            let phase = Complex64::new(-0.5 * alpha * alpha, 2.0 * alpha * p.gamma_a).exp();
            (r, -phase * (k / delta))
        }
    };
    let scale = |r: QuadResult| ElementResult {
        value: r.value * prefactor,
        err_estimate: r.err_estimate * prefactor.norm(),
        evals: r.evals,
    };
    match integral {
        Ok(r) => Ok(scale(r)),
        Err(QuadratureError::ToleranceNotMet { partial }) => {
            Err(OracleError::ToleranceNotMet { partial: scale(partial) })
        }
        Err(e) => Err(e.into()),
    }
}

/// Number of independently shifted replicates used for the error estimate.
const REPLICATES: usize = 16;
const SEED: u64 = 0x5eed_0f_0dd_ba11;

/// Additive recurrence (Kronecker) generators for dimension `d`: powers of
/// the inverse of the unique positive root of `x^{d+1} = x + 1`.
fn kronecker_generators<const D: usize>() -> [f64; D] {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (D as f64 + 1.0));
    }
    let mut g = [0.0; D];
    let mut x = 1.0;
    for gj in g.iter_mut() {
        x /= phi;
        *gj = x;
    }
    g
}

/// Two standard normals from two uniforms.
fn box_muller(u1: f64, u2: f64) -> (f64, f64) {
    let r = (-2.0 * (1.0 - u1).ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (r * c, r * s)
}

/// Monte Carlo estimate of an element with its 1σ statistical error.
///
/// Each detector's switching profile is `e^{-(t - γ)²}` and its smearing
/// profile a unit-normalized Gaussian of width δ, so the detector's
/// spacetime points are sampled from `t ~ N(γ, ½)` and `x ~ N(x_ν, δ²/2)`
/// per component; the switching normalization contributes the factor π.
///
/// * `L = π · E[e^{-iα(t_A - t_B)} W(t_A - t_B, |x_A - x_B|)]` with
///   `t_A`, `x_A` drawn for detector A and `t_B`, `x_B` for detector B (the
///   same detector twice for `L_AA`).
/// * `M = -π · E[e^{iα(t_A + t_B)} W(t_> - t_<, |x_A - x_B|)]`, time-ordered.
pub fn oracle_mode_sum(
    term: Term,
    coupling: Coupling,
    p: &Params,
    samples: usize,
) -> Result<ElementResult, OracleError> {
    let p = Params { coupling, ..*p };
    contract(term, &p, MODE_SUM_MIN_ETA)?;
    if samples < MODE_SUM_MIN_SAMPLES {
        return Err(OracleError::InsufficientSamples { samples, sigma: f64::INFINITY, magnitude: 0.0 });
    }
    let (ta, tb, sep) = match term {
        Term::Laa => (p.gamma_a, p.gamma_a, 0.0),
        Term::Lab | Term::M => (p.gamma_a, p.gamma_b, p.beta),
    };
    // The integrand depends on the two detectors' points only through
    // D = t_A - t_B, S = t_A + t_B and Δx = x_A - x_B, which are independent
    // Gaussians: D ~ N(γ_A - γ_B, 1), S ~ N(γ_A + γ_B, 1) and
    // Δx ~ N(x_A - x_B, δ²) per component. The centre-of-mass position
    // drops out and is not sampled.
    //
    // The Wightman function is sharply peaked on the light cone |Δx| = |D|,
    // with width η; for the quadratic coupling its variance grows like η⁻⁴.
    // Δx is therefore drawn from an equal mixture of its Gaussian and a
    // light-cone density (isotropic direction, |Δx| - |D| Cauchy with scale
    // η) and reweighted.
    let centre = [sep, 0.0, 0.0];
    let gauss_norm = (2.0 * PI * p.delta * p.delta).powf(-1.5);
    let gauss_density = |dx: &[f64; 3]| {
        let d2: f64 = dx.iter().zip(centre).map(|(x, c)| (x - c) * (x - c)).sum();
        gauss_norm * (-d2 / (2.0 * p.delta * p.delta)).exp()
    };
    // Cauchy offsets u = (r - |D|)/η truncated to r > 0.
    let cauchy_mass_above = |u_min: f64| 0.5 - u_min.atan() / PI;
    let cone_density = |r: f64, d: f64| {
        let u = (r - d.abs()) / p.eta;
        let mass = cauchy_mass_above(-d.abs() / p.eta);
        1.0 / (PI * p.eta * (1.0 + u * u) * mass * 4.0 * PI * r * r)
    };

    let gens = kronecker_generators::<8>();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let shifts: Vec<[f64; 8]> = (0..REPLICATES).map(|_| std::array::from_fn(|_| rng.gen::<f64>())).collect();
    let per = samples.div_ceil(REPLICATES);

    let sample = |u: &[f64; 8]| -> Result<Complex64, CorrelatorError> {
        let (z0, z1) = box_muller(u[0], u[1]);
        let d = ta - tb + z0;
        let s = ta + tb + z1;
        let dx = if u[7] < 0.5 {
            let (z2, z3) = box_muller(u[2], u[3]);
            let (z4, _) = box_muller(u[4], u[5]);
            [sep + p.delta * z2, p.delta * z3, p.delta * z4]
        } else {
            let mass = cauchy_mass_above(-d.abs() / p.eta);
            let offset = (PI * (1.0 - mass * u[4]) - 0.5 * PI).tan();
            let r = (d.abs() + p.eta * offset).max(f64::MIN_POSITIVE);
            let cos_t = 2.0 * u[2] - 1.0;
            let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
            let (sin_p, cos_p) = (2.0 * PI * u[3]).sin_cos();
            [r * cos_t, r * sin_t * cos_p, r * sin_t * sin_p]
        };
        let r = (dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]).sqrt();
        let gauss = gauss_density(&dx);
        let weight = gauss / (0.5 * gauss + 0.5 * cone_density(r, d));
        if weight == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let w = |dt: f64| {
            let pair = SpacetimePair::new(dt, r, p.eta);
            match coupling {
                Coupling::Linear => wightman_linear(&pair),
                Coupling::Quadratic => wightman_quadratic(&pair),
            }
        };
        Ok(weight
            * match term {
                Term::Laa | Term::Lab => Complex64::new(0.0, -p.alpha * d).exp() * w(d)?,
                Term::M => -Complex64::new(0.0, p.alpha * s).exp() * w(d.abs())?,
            })
    };

    let means: Vec<Complex64> = shifts
        .par_iter()
        .map(|shift| -> Result<Complex64, CorrelatorError> {
            let mut sum = Complex64::new(0.0, 0.0);
            for n in 0..per {
                let u: [f64; 8] = std::array::from_fn(|j| (shift[j] + (n as f64 + 1.0) * gens[j]).fract());
                sum += sample(&u)?;
            }
            Ok(sum * (PI / per as f64))
        })
        .collect::<Result<_, _>>()?;

    let n = means.len() as f64;
    let mean: Complex64 = means.iter().sum::<Complex64>() / n;
    let var = means.iter().map(|m| (m - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    let sigma = (var / n).sqrt();
    if sigma > 0.1 * mean.norm() {
        return Err(OracleError::InsufficientSamples { samples, sigma, magnitude: mean.norm() });
    }
    Ok(ElementResult { value: mean, err_estimate: sigma, evals: per * REPLICATES })
}
