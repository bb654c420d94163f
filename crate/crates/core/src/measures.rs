//! Two-detector density matrix at leading order in the couplings, and the
//! correlation measures read off it.
//!
//! Basis ordering is `|g_A g_B⟩, |e_A g_B⟩, |g_A e_B⟩, |e_A e_B⟩`, i.e. the
//! index of `|a b⟩` is `a + 2b` with `g = 0`, `e = 1`.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elements::{element, ElementError, Params, Term};
use crate::quadrature::QuadratureSpec;

/// Largest `λ² L` accepted before the leading-order state is considered
/// meaningless.
pub const PERTURBATIVE_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasuresError {
    #[error("λ²L for detector {detector} is {value:.3e}, above the perturbative limit {PERTURBATIVE_LIMIT}")]
    PerturbativityViolated { detector: char, value: f64 },
    #[error("excitation probability for detector {detector} must be finite and non-negative (got {value})")]
    InvalidProbability { detector: char, value: f64 },
}

/// Coupling-normalized elements, as returned by [`crate::elements`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementSet {
    pub l_aa: f64,
    pub l_bb: f64,
    pub l_ab: Complex64,
    pub m: Complex64,
}

/// Leading-order state. Elements are stored coupling-normalized; the
/// couplings are applied when the matrix is built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix4 {
    pub l_aa: f64,
    pub l_bb: f64,
    pub l_ab: Complex64,
    pub m: Complex64,
    pub lambda_a: f64,
    pub lambda_b: f64,
}

/// Build the state from normalized elements and the couplings in `p`.
pub fn assemble(p: &Params, elems: &ElementSet) -> Result<DensityMatrix4, MeasuresError> {
    for (detector, l, lambda) in [('A', elems.l_aa, p.lambda_a), ('B', elems.l_bb, p.lambda_b)] {
        if !(l.is_finite() && l >= 0.0) {
            return Err(MeasuresError::InvalidProbability { detector, value: l });
        }
        let value = lambda * lambda * l;
        if value > PERTURBATIVE_LIMIT {
            return Err(MeasuresError::PerturbativityViolated { detector, value });
        }
    }
    Ok(DensityMatrix4 {
        l_aa: elems.l_aa,
        l_bb: elems.l_bb,
        l_ab: elems.l_ab,
        m: elems.m,
        lambda_a: p.lambda_a,
        lambda_b: p.lambda_b,
    })
}

impl DensityMatrix4 {
    /// `λ_A² L_AA`
    pub fn p_a(&self) -> f64 {
        self.lambda_a * self.lambda_a * self.l_aa
    }

    /// `λ_B² L_BB`
    pub fn p_b(&self) -> f64 {
        self.lambda_b * self.lambda_b * self.l_bb
    }

    /// `λ_A λ_B L_AB`
    pub fn coherence(&self) -> Complex64 {
        self.lambda_a * self.lambda_b * self.l_ab
    }

    /// `λ_A λ_B M`
    pub fn nonlocal(&self) -> Complex64 {
        self.lambda_a * self.lambda_b * self.m
    }

    pub fn matrix(&self) -> Matrix4<Complex64> {
        let re = |x: f64| Complex64::new(x, 0.0);
        let (pa, pb, c, m) = (self.p_a(), self.p_b(), self.coherence(), self.nonlocal());
        let mut rho = Matrix4::zeros();
        rho[(0, 0)] = re(1.0 - pa - pb);
        rho[(1, 1)] = re(pa);
        rho[(2, 2)] = re(pb);
        rho[(1, 2)] = c;
        rho[(2, 1)] = c.conj();
        rho[(0, 3)] = m.conj();
        rho[(3, 0)] = m;
        rho
    }

    /// Partial transpose with respect to detector A:
    /// `⟨a b|ρ^{T_A}|a' b'⟩ = ⟨a' b|ρ|a b'⟩`.
    pub fn partial_transpose(&self) -> Matrix4<Complex64> {
        let rho = self.matrix();
        Matrix4::from_fn(|i, j| {
            let (a, b) = (i % 2, i / 2);
            let (a2, b2) = (j % 2, j / 2);
            rho[(a2 + 2 * b, a + 2 * b2)]
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityReport {
    /// Leading-order closed form; negative when no entanglement is detected.
    pub negativity_2: f64,
    /// `max(negativity_2, 0)`.
    pub negativity: f64,
    /// Sum of |negative eigenvalues| of the explicit partial transpose.
    pub partial_transpose: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutualInformation {
    /// In nats.
    pub mutual_information: f64,
    pub l_plus: f64,
    pub l_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMeasures {
    pub negativity_2: f64,
    pub negativity: f64,
    pub partial_transpose_negativity: f64,
    pub mutual_information: f64,
    pub l_plus: f64,
    pub l_minus: f64,
}

/// Leading-order negativity together with the exact partial-transpose value.
pub fn negativity(dm: &DensityMatrix4) -> NegativityReport {
    let (pa, pb) = (dm.p_a(), dm.p_b());
    let m2 = dm.nonlocal().norm_sqr();
    let root = ((pa - pb) * (pa - pb) + 4.0 * m2).sqrt();
    // -(pa + pb - root)/2, rationalized so that small differences survive.
    let denom = pa + pb + root;
    let negativity_2 = if denom > 0.0 { 2.0 * (m2 - pa * pb) / denom } else { 0.0 };

    let eig = SymmetricEigen::new(dm.partial_transpose());
    let partial_transpose = eig.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();

    NegativityReport { negativity_2, negativity: negativity_2.max(0.0), partial_transpose }
}

fn x_ln_x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Leading-order mutual information; independent of `M`.
pub fn mutual_information(dm: &DensityMatrix4) -> MutualInformation {
    let (pa, pb) = (dm.p_a(), dm.p_b());
    let c2 = dm.coherence().norm_sqr();
    let l_plus = 0.5 * (pa + pb + ((pa - pb) * (pa - pb) + 4.0 * c2).sqrt());
    // L₊L₋ = pa·pb − |c|²; dividing avoids cancellation in L₋.
    let l_minus = if l_plus > 0.0 { (pa * pb - c2) / l_plus } else { 0.0 };
    let mutual_information = x_ln_x(l_plus) + x_ln_x(l_minus) - x_ln_x(pa) - x_ln_x(pb);
    MutualInformation { mutual_information, l_plus, l_minus }
}

pub fn correlation_measures(dm: &DensityMatrix4) -> CorrelationMeasures {
    let n = negativity(dm);
    let mi = mutual_information(dm);
    CorrelationMeasures {
        negativity_2: n.negativity_2,
        negativity: n.negativity,
        partial_transpose_negativity: n.partial_transpose,
        mutual_information: mi.mutual_information,
        l_plus: mi.l_plus,
        l_minus: mi.l_minus,
    }
}

/// All four normalized elements at `p`. The two detectors are identical up
/// to position and switching centre, so `L_BB = L_AA`.
pub fn compute_elements(p: &Params, quad: &QuadratureSpec) -> Result<ElementSet, ElementError> {
    let l_aa = element(Term::Laa, p, quad)?.value.re;
    let l_ab = element(Term::Lab, p, quad)?.value;
    let m = element(Term::M, p, quad)?.value;
    Ok(ElementSet { l_aa, l_bb: l_aa, l_ab, m })
}
