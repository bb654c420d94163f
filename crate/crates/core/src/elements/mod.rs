//! Leading-order density-matrix elements of two Gaussian-smeared,
//! Gaussian-switched detectors, in dimensionless variables.
//!
//! All times and lengths are measured in units of the switching width T:
//! `α = ΩT`, `β = |x_A - x_B|/T`, `γ_ν = t_ν/T`, `δ = σ/T`, `η = ε/T`.
//! Every element is returned divided by its coupling prefactor
//! (λ² or λ_Aλ_B).
//!
//! Each element has the form
//!
//! ```text
//! prefactor · ∫₀^∞ envelope(ξ) · kernel(ξ) dξ,
//! envelope(ξ) = e^{-(ξ² + β²)/2δ²} sinh(ξβ/δ²)/β     (→ ξ e^{-ξ²/2δ²}/δ² at β = 0)
//! ```
//!
//! The envelope is a Gaussian of width δ centred at β, which fixes the
//! truncation point of the ξ integral.

mod kernels;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{integrate_semi_infinite_with_breaks, QuadratureError, QuadratureSpec};
use crate::specfun::{faddeeva, SpecfunError};

use kernels::{CauchyKernel, FaddeevaKernel, Power};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// Detector monopole couples to φ.
    Linear,
    /// Detector monopole couples to :φ²:.
    Quadratic,
}

impl Coupling {
    fn power(self) -> Power {
        match self {
            Coupling::Linear => Power::One,
            Coupling::Quadratic => Power::Two,
        }
    }
}

/// Which density-matrix element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    /// Local excitation probability `L_AA` (= `L_BB` for identical detectors).
    Laa,
    /// Cross term `L_AB`.
    Lab,
    /// Non-local term `M` (simultaneous switching).
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub alpha: f64,
    pub beta: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub delta: f64,
    pub eta: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub coupling: Coupling,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            alpha: 1.0,
            beta: 4.0,
            gamma_a: 0.0,
            gamma_b: 0.0,
            delta: 1.0,
            eta: 1e-2,
            lambda_a: 1.0,
            lambda_b: 1.0,
            coupling: Coupling::Linear,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), ElementError> {
        let fields = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma_a", self.gamma_a),
            ("gamma_b", self.gamma_b),
            ("delta", self.delta),
            ("eta", self.eta),
            ("lambda_a", self.lambda_a),
            ("lambda_b", self.lambda_b),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ElementError::InvalidParams { field: name, reason: "must be finite" });
            }
        }
        if self.delta <= 0.0 {
            return Err(ElementError::InvalidParams { field: "delta", reason: "must be positive" });
        }
        if self.beta < 0.0 {
            return Err(ElementError::InvalidParams { field: "beta", reason: "must be non-negative" });
        }
        if self.eta < 0.0 {
            return Err(ElementError::InvalidParams { field: "eta", reason: "must be non-negative" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementResult {
    pub value: Complex64,
    pub err_estimate: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElementError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: &'static str },
    #[error("the quadratic M element diverges without a UV cutoff (eta must be > 0)")]
    CutoffRequired,
    #[error("M is only available for simultaneous switching (gamma_a = gamma_b)")]
    NonSimultaneous,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

impl ElementError {
    /// Best available value when the failure was a missed tolerance.
    pub fn partial(&self) -> Option<ElementResult> {
        match self {
            ElementError::Quadrature(e) => {
                e.partial().map(|r| ElementResult { value: r.value, err_estimate: r.err_estimate, evals: r.evals })
            }
            _ => None,
        }
    }
}

/// `e^{-(ξ²+β²)/2δ²} sinh(ξβ/δ²)/β`, evaluated as a difference of two
/// Gaussians so it never overflows.
pub(crate) fn smeared_envelope(xi: f64, beta: f64, delta: f64) -> f64 {
    let d2 = delta * delta;
    let x = xi * beta / d2;
    if x < 1e-3 {
        // sinh(x)/β = (ξ/δ²)(1 + x²/6 + x⁴/120)
        let s = xi / d2 * (1.0 + x * x / 6.0 * (1.0 + x * x / 20.0));
        s * (-(xi * xi + beta * beta) / (2.0 * d2)).exp()
    } else {
        let plus = (-(xi - beta).powi(2) / (2.0 * d2)).exp();
        let minus = (-(xi + beta).powi(2) / (2.0 * d2)).exp();
        // (plus - minus)/2 loses digits only when x is small, handled above.
        0.5 * (plus - minus) / beta
    }
}

/// Quadrature setup for an envelope of width δ centred at β, with
/// breakpoints at the envelope peak and at the kernel scales.
fn envelope_spec(p: &Params, quad: &QuadratureSpec) -> QuadratureSpec {
    quad.with_envelope(1.0 / (2.0 * p.delta * p.delta), p.beta)
}

fn breakpoints(p: &Params, scales: &[f64]) -> Vec<f64> {
    let mut b: Vec<f64> = scales.iter().copied().filter(|s| *s > 0.0 && s.is_finite()).collect();
    if p.beta > 0.0 {
        b.push(p.beta);
    }
    b.push(p.delta);
    b
}

/// Geometric ladder η, 4η, 16η, … below 1, where the M kernels change
/// character.
fn cutoff_ladder(eta: f64) -> Vec<f64> {
    let mut v = Vec::new();
    if eta <= 0.0 {
        return v;
    }
    let mut x = eta;
    while x < 1.0 {
        v.push(x);
        x *= 4.0;
    }
    v
}

fn integrate<K>(p: &Params, quad: &QuadratureSpec, kernel: K, scales: &[f64]) -> Result<ElementResult, ElementError>
where
    K: Fn(f64) -> Complex64,
{
    let spec = envelope_spec(p, quad);
    let breaks = breakpoints(p, scales);
    let (beta, delta) = (p.beta, p.delta);
    let r = integrate_semi_infinite_with_breaks(|xi| smeared_envelope(xi, beta, delta) * kernel(xi), &breaks, &spec)?;
    Ok(ElementResult { value: r.value, err_estimate: r.err_estimate, evals: r.evals })
}

fn scaled(r: ElementResult, factor: Complex64) -> ElementResult {
    ElementResult { value: r.value * factor, err_estimate: r.err_estimate * factor.norm(), evals: r.evals }
}

fn local_prefactor(coupling: Coupling) -> f64 {
    match coupling {
        Coupling::Linear => 1.0 / (4.0 * PI * PI),
        Coupling::Quadratic => 1.0 / (8.0 * PI.powi(4)),
    }
}

fn nonlocal_prefactor(coupling: Coupling) -> f64 {
    match coupling {
        Coupling::Linear => 1.0 / (2.0 * PI * PI),
        Coupling::Quadratic => 1.0 / (4.0 * PI.powi(4)),
    }
}

/// `L` element for detectors switched at `γ_A`, `γ_B` and separated by β.
fn l_element(
    coupling: Coupling,
    p: &Params,
    beta: f64,
    d: f64,
    quad: &QuadratureSpec,
) -> Result<ElementResult, ElementError> {
    p.validate()?;
    let q = Params { beta, ..*p };
    let kernel = FaddeevaKernel::new(coupling.power(), d, p.alpha, p.eta)?;
    // The w arguments cross the real-part origin at ξ = |d|.
    let r = if p.eta == 0.0 {
        integrate(&q, quad, |xi| kernel.eval(xi), &[d.abs()])?
    } else {
        integrate(&q, quad, |xi| kernel.eval(xi), &[d.abs()])?
    };
    let phase = Complex64::new(-0.5 * p.alpha * p.alpha, -p.alpha * d).exp();
    Ok(scaled(r, phase * (local_prefactor(coupling) / p.delta)))
}

/// Simultaneous-switching `M` element.
fn m_element(coupling: Coupling, p: &Params, quad: &QuadratureSpec) -> Result<ElementResult, ElementError> {
    p.validate()?;
    if p.gamma_a != p.gamma_b {
        return Err(ElementError::NonSimultaneous);
    }
    let r = if p.eta == 0.0 {
        match coupling {
            Coupling::Quadratic => return Err(ElementError::CutoffRequired),
            Coupling::Linear => {
                let kernel = CauchyKernel::new(Power::One, 0.0);
                integrate(p, quad, |xi| kernel.eval(xi), &[])?
            }
        }
    } else {
        let kernel = CauchyKernel::new(coupling.power(), p.eta);
        integrate(p, quad, |xi| kernel.eval(xi), &cutoff_ladder(p.eta))?
    };
    let gamma = p.gamma_a;
    let phase = Complex64::new(-0.5 * p.alpha * p.alpha, 2.0 * p.alpha * gamma).exp();
    Ok(scaled(r, -phase * (nonlocal_prefactor(coupling) / p.delta)))
}

/// Evaluate any element with an explicit quadrature specification. The
/// coupling is taken from `p.coupling`.
pub fn element(term: Term, p: &Params, quad: &QuadratureSpec) -> Result<ElementResult, ElementError> {
    match term {
        Term::Laa => l_element(p.coupling, p, 0.0, 0.0, quad),
        Term::Lab => l_element(p.coupling, p, p.beta, p.gamma_a - p.gamma_b, quad),
        Term::M => m_element(p.coupling, p, quad),
    }
}

fn with_coupling(p: &Params, coupling: Coupling) -> Params {
    Params { coupling, ..*p }
}

/// `L^φ_AA/λ²` (equal to `L^φ_BB/λ²`); β and γ do not enter.
pub fn l_aa_linear(p: &Params) -> Result<ElementResult, ElementError> {
    element(Term::Laa, &with_coupling(p, Coupling::Linear), &QuadratureSpec::default())
}

/// `L^{φ²}_AA/λ²`.
pub fn l_aa_quadratic(p: &Params) -> Result<ElementResult, ElementError> {
    element(Term::Laa, &with_coupling(p, Coupling::Quadratic), &QuadratureSpec::default())
}

/// `L^φ_AB/(λ_Aλ_B)`.
pub fn l_ab_linear(p: &Params) -> Result<ElementResult, ElementError> {
    element(Term::Lab, &with_coupling(p, Coupling::Linear), &QuadratureSpec::default())
}

/// `L^{φ²}_AB/(λ_Aλ_B)`.
pub fn l_ab_quadratic(p: &Params) -> Result<ElementResult, ElementError> {
    element(Term::Lab, &with_coupling(p, Coupling::Quadratic), &QuadratureSpec::default())
}

/// `M^φ/(λ_Aλ_B)` for γ_A = γ_B = γ.
pub fn m_linear_simultaneous(p: &Params) -> Result<ElementResult, ElementError> {
    element(Term::M, &with_coupling(p, Coupling::Linear), &QuadratureSpec::default())
}

/// `M^{φ²}/(λ_Aλ_B)` for γ_A = γ_B = γ; requires η > 0.
pub fn m_quadratic_simultaneous(p: &Params) -> Result<ElementResult, ElementError> {
    element(Term::M, &with_coupling(p, Coupling::Quadratic), &QuadratureSpec::default())
}

/// Integrand `G(ξ) = 16 ξ sinh(ξβ/δ²) e^{-ξ²/2δ²} H₂(ξ)` of the quadratic
/// M element at finite η, so that
/// `M^{φ²} = -e^{2iαγ - α²/2 - β²/2δ²}/(64π⁴δβ) ∫₀^∞ G(ξ) dξ`.
pub fn g_integrand(xi: f64, p: &Params) -> Result<Complex64, ElementError> {
    p.validate()?;
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(ElementError::InvalidParams { field: "xi", reason: "must be positive" });
    }
    if p.eta == 0.0 {
        return Err(ElementError::CutoffRequired);
    }
    let kernel = CauchyKernel::new(Power::Two, p.eta);
    let growth = sinh_times_gaussian(xi, p.beta, p.delta)?;
    Ok(16.0 * growth * kernel.eval(xi))
}

/// η → 0 limit of [`g_integrand`]:
/// `G₀(ξ) = (4/ξ²) e^{-ξ²/2δ²} sinh(ξβ/δ²) [-√(2π) ξ - iπ(ξ² + 1) w(ξ/√2)]`.
pub fn g_integrand_limit(xi: f64, p: &Params) -> Result<Complex64, ElementError> {
    p.validate()?;
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(ElementError::InvalidParams { field: "xi", reason: "must be positive" });
    }
    let growth = sinh_times_gaussian(xi, p.beta, p.delta)?;
    let w = faddeeva(Complex64::new(xi * FRAC_1_SQRT_2, 0.0))?;
    let bracket = -(2.0 * PI).sqrt() * xi - I * PI * (xi * xi + 1.0) * w;
    Ok(4.0 / (xi * xi) * growth * bracket)
}

/// `sinh(ξβ/δ²) e^{-ξ²/2δ²}`, which has no β-Gaussian in front and can
/// overflow for large separations.
fn sinh_times_gaussian(xi: f64, beta: f64, delta: f64) -> Result<f64, SpecfunError> {
    let d2 = delta * delta;
    let x = xi * beta / d2;
    let v = if x < 1e-3 {
        x * (1.0 + x * x / 6.0 * (1.0 + x * x / 20.0)) * (-xi * xi / (2.0 * d2)).exp()
    } else {
        let e = -xi * xi / (2.0 * d2);
        0.5 * ((x + e).exp() - (e - x).exp())
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SpecfunError::OverflowDomain { func: "g_integrand", re: xi, im: 0.0 })
    }
}

/// Arguments of the switching-time convolution integral
/// `∫ dv e^{v(t_A - t_B)/T² - v²/2T² - ivΩ} / (q² - (v - iε)²)^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionArgs {
    pub omega: f64,
    pub eps: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub switching_time: f64,
}

fn check_convolution(q: f64, a: &ConvolutionArgs) -> Result<(), ElementError> {
    let bad = |field, reason| Err(ElementError::InvalidParams { field, reason });
    if !(q > 0.0 && q.is_finite()) {
        return bad("q", "must be positive");
    }
    if !(a.eps > 0.0 && a.eps.is_finite()) {
        return bad("eps", "must be positive");
    }
    if !(a.switching_time > 0.0 && a.switching_time.is_finite()) {
        return bad("switching_time", "must be positive");
    }
    if !(a.omega.is_finite() && a.t_a.is_finite() && a.t_b.is_finite()) {
        return bad("omega", "must be finite");
    }
    Ok(())
}

fn convolution(q: f64, a: &ConvolutionArgs, power: Power) -> Result<Complex64, ElementError> {
    check_convolution(q, a)?;
    let t = a.switching_time;
    let d = (a.t_a - a.t_b) / t;
    let alpha = a.omega * t;
    let kernel = FaddeevaKernel::new(power, d, alpha, a.eps / t)?;
    let xi = q / t;
    // f_m = e^{b²/2} h_m/ξ with b = d - iα, then restore the dimensions
    // (T^{1-2m}).
    let b = Complex64::new(d, -alpha);
    let value = (0.5 * b * b).exp() * kernel.eval(xi) / xi;
    let dims = match power {
        Power::One => t,
        Power::Two => t.powi(3),
    };
    let value = value / dims;
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(SpecfunError::OverflowDomain { func: "convolution", re: q, im: 0.0 }.into())
    }
}

/// Closed form of the switching convolution with a simple pole pair
/// (m = 1), for real `q > 0` and `ε > 0`.
pub fn f1(q: f64, args: &ConvolutionArgs) -> Result<Complex64, ElementError> {
    convolution(q, args, Power::One)
}

/// Closed form of the switching convolution with a double pole pair (m = 2).
pub fn f2(q: f64, args: &ConvolutionArgs) -> Result<Complex64, ElementError> {
    convolution(q, args, Power::Two)
}
