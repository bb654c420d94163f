//! Vacuum two-point functions of a massless scalar in 3+1 dimensions with a
//! soft UV cutoff, and mode-sum evaluations used to check them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{integrate_2d, integrate_interval, QuadratureError, QuadratureSpec};

/// Separation between two spacetime points, in units of the switching time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePair {
    /// Time difference t − t′.
    pub dt: f64,
    /// Spatial distance |x − x′| (non-negative).
    pub dx: f64,
    /// UV cutoff ε (non-negative).
    pub eps: f64,
}

impl SpacetimePair {
    pub fn new(dt: f64, dx: f64, eps: f64) -> Self {
        SpacetimePair { dt, dx, eps }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrelatorError {
    #[error("point pair lies on the light cone with no cutoff (dt = {dt}, dx = {dx})")]
    PoleOnLightcone { dt: f64, dx: f64 },
    #[error("the mode integral needs a positive cutoff")]
    CutoffRequired,
    #[error("invalid separation: {0}")]
    InvalidPair(&'static str),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

fn check(p: &SpacetimePair) -> Result<(), CorrelatorError> {
    if !(p.dt.is_finite() && p.dx.is_finite() && p.eps.is_finite()) {
        return Err(CorrelatorError::InvalidPair("non-finite component"));
    }
    if p.dx < 0.0 {
        return Err(CorrelatorError::InvalidPair("dx must be non-negative"));
    }
    if p.eps < 0.0 {
        return Err(CorrelatorError::InvalidPair("eps must be non-negative"));
    }
    Ok(())
}

/// `dx² − (dt − iε)²`, the invariant interval with the iε shift.
fn interval(p: &SpacetimePair) -> Complex64 {
    let shifted = Complex64::new(p.dt, -p.eps);
    Complex64::new(p.dx * p.dx, 0.0) - shifted * shifted
}

/// Wightman function `1 / (4π² [dx² − (dt − iε)²])`.
pub fn wightman_linear(p: &SpacetimePair) -> Result<Complex64, CorrelatorError> {
    check(p)?;
    let denom = interval(p);
    if denom.norm() < 1e-300 {
        return Err(CorrelatorError::PoleOnLightcone { dt: p.dt, dx: p.dx });
    }
    Ok((4.0 * PI * PI * denom).inv())
}

/// Two-point function of the normal-ordered square, `2 W²` by Wick's theorem.
pub fn wightman_quadratic(p: &SpacetimePair) -> Result<Complex64, CorrelatorError> {
    let w = wightman_linear(p)?;
    Ok(2.0 * w * w)
}

/// Length of `[0, K]` on which the cutoff factor `e^{-kε}` exceeds 1e-16.
fn mode_cutoff(eps: f64) -> f64 {
    16.0 * std::f64::consts::LN_10 / eps
}

/// `sin(k·dx)/dx`, continued to `k` at `dx = 0`.
fn sin_over_dx(k: f64, dx: f64) -> f64 {
    let x = k * dx;
    if x.abs() < 1e-6 {
        k * (1.0 - x * x / 6.0)
    } else {
        x.sin() / dx
    }
}

/// Oscillation-resolving breakpoints: one per half period of the fastest
/// phase in `k`.
fn mode_breaks(upper: f64, dt: f64, dx: f64) -> Vec<f64> {
    let rate = dt.abs() + dx;
    if rate == 0.0 {
        return Vec::new();
    }
    let step = PI / rate;
    let n = ((upper / step).ceil() as usize).min(20_000);
    (1..n).map(|i| i as f64 * step).collect()
}

/// Radial mode integrand: after the angular integration the plane-wave sum
/// reduces to `(1/4π²) ∫₀^∞ dk e^{-ik·dt - kε} · 2 sin(k·dx)/(2 dx)`.
fn mode_integrand(p: SpacetimePair) -> impl Fn(f64) -> Complex64 {
    move |k: f64| {
        let phase = Complex64::new(-k * p.eps, -k * p.dt).exp();
        phase * sin_over_dx(k, p.dx) / (4.0 * PI * PI)
    }
}

/// Wightman function evaluated from its radial mode integral.
pub fn mode_sum_wightman(p: &SpacetimePair, spec: &QuadratureSpec) -> Result<Complex64, CorrelatorError> {
    check(p)?;
    if p.eps <= 0.0 {
        return Err(CorrelatorError::CutoffRequired);
    }
    let upper = mode_cutoff(p.eps);
    let breaks = mode_breaks(upper, p.dt, p.dx);
    let r = integrate_interval(mode_integrand(*p), 0.0, upper, &breaks, spec)?;
    Ok(r.value)
}

/// Quadratic two-point function from the double-frequency mode sum.
///
/// The two momentum integrals are evaluated as a genuine nested quadrature
/// over `(k₁, k₂)`. The normalization is the one that reproduces the Wick
/// identity `W^{φ²} = 2 W²`.
pub fn mode_sum_wightman_quadratic(p: &SpacetimePair, spec: &QuadratureSpec) -> Result<Complex64, CorrelatorError> {
    check(p)?;
    if p.eps <= 0.0 {
        return Err(CorrelatorError::CutoffRequired);
    }
    let upper = mode_cutoff(p.eps);
    let breaks = mode_breaks(upper, p.dt, p.dx);
    let g = mode_integrand(*p);
    let inner_breaks = breaks.clone();
    let r =
        integrate_2d(|k1, k2| 2.0 * g(k1) * g(k2), (0.0, upper), &breaks, upper, move |_| inner_breaks.clone(), spec)?;
    Ok(r.value)
}
