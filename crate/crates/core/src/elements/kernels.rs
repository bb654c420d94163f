//! ξ-kernels of the element integrands and their small-ξ expansions.
//!
//! After the switching-time (v) integral is done in closed form, every
//! element becomes `∫₀^∞ envelope(ξ) · kernel(ξ) dξ`. The kernels here are
//! written in forms that stay finite for large arguments:
//!
//! * L elements use the Faddeeva function, `h_m(ξ) = ξ·f_m(ξ)·e^{-b²/2}`.
//! * M elements use `F(c) = ∫₀^∞ e^{-ν²/2}/(ν - c) dν`, giving `ξ·H_m(ξ)`.
//!
//! Both kernels are differences of nearly equal quantities as ξ → 0, so each
//! switches to a Taylor series about ξ = 0 whose coefficients are generated
//! once per parameter point by a three-term recurrence.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::specfun::{e1_scaled, faddeeva, SpecfunError};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
/// √(π/2)
const SQRT_HALF_PI: f64 = 1.253_314_137_315_500_3;

/// Number of Taylor coefficients kept. Inside the switch radius the terms
/// fall at least as fast as 0.3^k, so 40 terms are far beyond double
/// precision.
const SERIES_TERMS: usize = 40;

/// Which of the two field couplings (kernel power m = 1 or 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Power {
    One,
    Two,
}

/// Derivatives `w^{(k)}(z)`, k = 0..n, from
/// `w' = -2z w + 2i/√π`, `w^{(k+1)} = -2z w^{(k)} - 2k w^{(k-1)}`.
pub(crate) fn faddeeva_derivatives(z: Complex64, n: usize) -> Result<Vec<Complex64>, SpecfunError> {
    let mut d = Vec::with_capacity(n + 1);
    d.push(faddeeva(z)?);
    if n >= 1 {
        d.push(-2.0 * z * d[0] + I * FRAC_2_SQRT_PI);
    }
    for k in 1..n {
        let next = -2.0 * z * d[k] - 2.0 * k as f64 * d[k - 1];
        d.push(next);
    }
    Ok(d)
}

/// Kernel of the L elements: `h_m(ξ)` such that the element is
/// `K e^{-α²/2 - iαd}/δ ∫ envelope(ξ) h_m(ξ) dξ`.
pub(crate) struct FaddeevaKernel {
    power: Power,
    /// `(-d + i(α + η))/√2`, the expansion point of w.
    z0: Complex64,
    derivs: Vec<Complex64>,
    switch: f64,
}

impl FaddeevaKernel {
    pub(crate) fn new(power: Power, d: f64, alpha: f64, eta: f64) -> Result<Self, SpecfunError> {
        let z0 = Complex64::new(-d, alpha + eta) * FRAC_1_SQRT_2;
        let derivs = faddeeva_derivatives(z0, SERIES_TERMS + 2)?;
        // The recurrence amplifies rounding roughly like (2|z0|h)^k/k!, so the
        // series is confined to h·max(1, |z0|) ≲ 0.3.
        let switch = 0.3 * std::f64::consts::SQRT_2 / z0.norm().max(1.0);
        Ok(FaddeevaKernel { power, z0, derivs, switch })
    }

    pub(crate) fn eval(&self, xi: f64) -> Complex64 {
        if xi < self.switch {
            self.series(xi)
        } else {
            self.direct(xi)
        }
    }

    pub(crate) fn direct(&self, xi: f64) -> Complex64 {
        let h = xi * FRAC_1_SQRT_2;
        let zm = self.z0 - h;
        let zp = self.z0 + h;
        let wm = faddeeva_or_nan(zm);
        let wp = faddeeva_or_nan(zp);
        let diff = wm - wp;
        match self.power {
            Power::One => 0.5 * PI * I * diff,
            Power::Two => {
                let bracket = diff + h * (-2.0 * zm * wm - 2.0 * zp * wp + 2.0 * FRAC_2_SQRT_PI * I);
                PI * I * bracket / (4.0 * xi * xi)
            }
        }
    }

    /// `h₁ = -iπ Σ_{k odd} w^{(k)} hᵏ/k!`,
    /// `h₂ = (iπ/4) Σ_{k odd ≥ 3} (k-1) w^{(k)} h^{k-2}/k!`, with h = ξ/√2.
    pub(crate) fn series(&self, xi: f64) -> Complex64 {
        let h = xi * FRAC_1_SQRT_2;
        let h2 = h * h;
        let mut sum = Complex64::new(0.0, 0.0);
        match self.power {
            Power::One => {
                let mut term = h; // hᵏ/k! at k = 1
                let mut k = 1;
                while k <= SERIES_TERMS {
                    sum += self.derivs[k] * term;
                    term *= h2 / ((k + 1) * (k + 2)) as f64;
                    k += 2;
                }
                -PI * I * sum
            }
            Power::Two => {
                let mut term = h / 6.0; // h^{k-2}/k! at k = 3
                let mut k = 3;
                while k <= SERIES_TERMS + 1 {
                    sum += self.derivs[k] * ((k - 1) as f64 * term);
                    term *= h2 / ((k + 1) * (k + 2)) as f64;
                    k += 2;
                }
                0.25 * PI * I * sum
            }
        }
    }

    #[cfg(test)]
    pub(crate) fn switch(&self) -> f64 {
        self.switch
    }

    #[cfg(test)]
    pub(crate) fn expansion_point(&self) -> Complex64 {
        self.z0
    }
}

fn faddeeva_or_nan(z: Complex64) -> Complex64 {
    faddeeva(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

/// `F(c) = ∫₀^∞ e^{-ν²/2}/(ν - c) dν` for Im c > 0:
/// `½ e^{-c²/2} E₁(-c²/2) + (iπ/2) w(c/√2)`.
pub(crate) fn half_line_cauchy(c: Complex64) -> Complex64 {
    let z = -0.5 * c * c;
    0.5 * e1_scaled(z) + 0.5 * PI * I * faddeeva_or_nan(c * FRAC_1_SQRT_2)
}

/// `F'(c) = -c F(c) - √(π/2) - 1/c`.
fn half_line_cauchy_prime(c: Complex64, f: Complex64) -> Complex64 {
    -c * f - SQRT_HALF_PI - c.inv()
}

/// Kernel of the simultaneous M elements: `ξ H_m(ξ)` with
/// `H_m(ξ) = ∫₀^∞ e^{-ν²/2}/(ξ² - (ν - iη)²)^m dν`.
pub(crate) enum CauchyKernel {
    /// Finite cutoff.
    Regular {
        power: Power,
        eta: f64,
        /// `F^{(k)}(iη) ηᵏ/k!`.
        coeffs: Vec<Complex64>,
        switch: f64,
    },
    /// η = 0 for m = 1: `ξ H₁ = -(iπ/2) w(ξ/√2)`.
    Limit,
}

impl CauchyKernel {
    pub(crate) fn new(power: Power, eta: f64) -> Self {
        if eta == 0.0 {
            debug_assert_eq!(power, Power::One);
            return CauchyKernel::Limit;
        }
        // Normalized Taylor coefficients a_k = F^{(k)}(iη) ηᵏ/k!, which stay
        // O(1) because the radius of convergence is η. From
        // F^{(k+1)} = -c F^{(k)} - k F^{(k-1)} - (-1)^k k!/c^{k+1}:
        // a_{k+1} = [-cη a_k - η² a_{k-1} - (-1)^k (η/c)^{k+1}]/(k+1).
        let c0 = Complex64::new(0.0, eta);
        let n = SERIES_TERMS + 2;
        let mut coeffs = Vec::with_capacity(n + 1);
        let f0 = half_line_cauchy(c0);
        coeffs.push(f0);
        coeffs.push(half_line_cauchy_prime(c0, f0) * eta);
        let ratio = eta * c0.inv();
        let mut pole = ratio; // (-1)^k (η/c)^{k+1} at k = 0
        for k in 1..n {
            pole *= -ratio;
            let next = (-c0 * eta * coeffs[k] - eta * eta * coeffs[k - 1] - pole) / (k + 1) as f64;
            coeffs.push(next);
        }
        CauchyKernel::Regular { power, eta, coeffs, switch: 0.3 * eta }
    }

    pub(crate) fn eval(&self, xi: f64) -> Complex64 {
        match self {
            CauchyKernel::Limit => -0.5 * PI * I * faddeeva_or_nan(Complex64::new(xi * FRAC_1_SQRT_2, 0.0)),
            CauchyKernel::Regular { switch, .. } => {
                if xi < *switch {
                    self.series(xi)
                } else {
                    self.direct(xi)
                }
            }
        }
    }

    pub(crate) fn direct(&self, xi: f64) -> Complex64 {
        let (power, eta) = match self {
            CauchyKernel::Regular { power, eta, .. } => (*power, *eta),
            CauchyKernel::Limit => return self.eval(xi),
        };
        let cm = Complex64::new(-xi, eta);
        let cp = Complex64::new(xi, eta);
        let fm = half_line_cauchy(cm);
        let fp = half_line_cauchy(cp);
        let diff = fm - fp;
        match power {
            Power::One => 0.5 * diff,
            Power::Two => {
                let fpm = half_line_cauchy_prime(cm, fm);
                let fpp = half_line_cauchy_prime(cp, fp);
                diff / (4.0 * xi * xi) + (fpm + fpp) / (4.0 * xi)
            }
        }
    }

    /// With r = ξ/η and a_k the normalized coefficients:
    /// `ξH₁ = -Σ_{k odd} a_k rᵏ`, `ξH₂ = Σ_{k odd ≥ 3} (k-1) a_k r^{k-2}/(2η²)`.
    pub(crate) fn series(&self, xi: f64) -> Complex64 {
        let (power, eta, coeffs) = match self {
            CauchyKernel::Regular { power, eta, coeffs, .. } => (*power, *eta, coeffs),
            CauchyKernel::Limit => return self.eval(xi),
        };
        let r = xi / eta;
        let r2 = r * r;
        let mut sum = Complex64::new(0.0, 0.0);
        match power {
            Power::One => {
                let mut rk = r;
                let mut k = 1;
                while k <= SERIES_TERMS {
                    sum += coeffs[k] * rk;
                    rk *= r2;
                    k += 2;
                }
                -sum
            }
            Power::Two => {
                let mut rk = r;
                let mut k = 3;
                while k <= SERIES_TERMS + 1 {
                    sum += coeffs[k] * ((k - 1) as f64 * rk);
                    rk *= r2;
                    k += 2;
                }
                sum / (2.0 * eta * eta)
            }
        }
    }
}
