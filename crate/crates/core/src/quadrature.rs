//! Globally adaptive Gauss–Kronrod integration for complex integrands.
//!
//! Every matrix element reduces to a one-dimensional integral over
//! `ξ ∈ [0, ∞)` of a Gaussian-damped, algebraically decaying kernel, and the
//! oracle nests two such integrals. Both use the same deterministic 21-point
//! Kronrod driver: the interval with the largest error estimate is bisected
//! until the summed estimate drops below `max(abs_tol, rel_tol·|I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    /// Coefficient `c` of the Gaussian envelope `e^{-c(ξ-ξ₀)²}` that bounds the
    /// integrand tail.
    pub envelope_decay: f64,
    /// Centre `ξ₀` of that envelope.
    pub envelope_center: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { rel_tol: 1e-9, abs_tol: 1e-14, max_evals: 200_000, envelope_decay: 0.5, envelope_center: 0.0 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        let bad = |field: &'static str| Err(QuadratureError::InvalidSpec { field });
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return bad("rel_tol");
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return bad("abs_tol");
        }
        if self.max_evals < 100 {
            return bad("max_evals");
        }
        if !(self.envelope_decay > 0.0 && self.envelope_decay.is_finite()) {
            return bad("envelope_decay");
        }
        if !(self.envelope_center >= 0.0 && self.envelope_center.is_finite()) {
            return bad("envelope_center");
        }
        Ok(())
    }

    /// Upper limit beyond which the envelope is below `abs_tol`.
    pub fn truncation_point(&self) -> f64 {
        self.envelope_center + ((1.0 / self.abs_tol).ln() / self.envelope_decay).sqrt()
    }

    pub fn with_envelope(mut self, decay: f64, center: f64) -> Self {
        self.envelope_decay = decay;
        self.envelope_center = center;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: Complex64,
    pub err_estimate: f64,
    pub evals: usize,
    pub truncation_point: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("tolerance not met after {} evaluations (estimated error {:.3e})", partial.evals, partial.err_estimate)]
    ToleranceNotMet { partial: QuadResult },
    #[error("integrand is not finite at {at}")]
    IntegrandNonFinite { at: f64 },
    #[error("invalid quadrature specification: {field}")]
    InvalidSpec { field: &'static str },
}

impl QuadratureError {
    /// Best available estimate, if the failure still produced one.
    pub fn partial(&self) -> Option<&QuadResult> {
        match self {
            QuadratureError::ToleranceNotMet { partial } => Some(partial),
            _ => None,
        }
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Error level, relative to `∫|f|`, below which rounding dominates; twice
/// the per-panel floor applied in [`kronrod`].
const ROUNDING_FLOOR: f64 = 100.0 * f64::EPSILON;

/// An integrand sample together with an error bound it carries along
/// (non-zero only for nested integrals).
type Sample = (Complex64, f64);

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    /// Discretization error of this panel's rule.
    err: f64,
    /// Error inherited from the integrand samples themselves (inner
    /// integrals); bisection cannot reduce it.
    carried: f64,
    /// `∫|f|` over the panel, which sets the rounding floor of `err`.
    magnitude: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest error first; ties broken by position for determinism.
        self.err.total_cmp(&other.err).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Panel, QuadratureError>
where
    F: FnMut(f64) -> Result<Sample, QuadratureError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut samples = [Complex64::new(0.0, 0.0); 21];
    let mut carried = 0.0;
    let mut eval = |x: f64, w: f64| -> Result<Complex64, QuadratureError> {
        let (v, e) = f(x)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(QuadratureError::IntegrandNonFinite { at: x });
        }
        carried += w * e;
        Ok(v)
    };
    samples[10] = eval(center, WGK[10])?;
    for j in 0..10 {
        let dx = half * XGK[j];
        samples[j] = eval(center - dx, WGK[j])?;
        samples[20 - j] = eval(center + dx, WGK[j])?;
    }
    let mut kron = samples[10] * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut abs_sum = samples[10].norm() * WGK[10];
    for j in 0..10 {
        let pair = samples[j] + samples[20 - j];
        kron += pair * WGK[j];
        abs_sum += (samples[j].norm() + samples[20 - j].norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut asc = (samples[10] - mean).norm() * WGK[10];
    for j in 0..10 {
        asc += ((samples[j] - mean).norm() + (samples[20 - j] - mean).norm()) * WGK[j];
    }
    let scale = half.abs();
    let value = kron * half;
    let res_abs = abs_sum * scale;
    let res_asc = asc * scale;
    let mut err = ((kron - gauss) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, err, carried: carried * scale, magnitude: res_abs })
}

/// Whether the driver may stop once the error estimate is dominated by
/// rounding in `∫|f|` (strongly cancelling integrands).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rounding {
    Strict,
    AcceptFloor,
}

/// Core driver over `[a, b]` split at the given interior breakpoints.
fn adaptive<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
    rounding: Rounding,
) -> Result<QuadResult, QuadratureError>
where
    F: FnMut(f64) -> Result<Sample, QuadratureError>,
{
    spec.validate()?;
    let mut nodes: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    nodes.push(a);
    let mut interior: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    nodes.extend(interior);
    nodes.push(b);

    let mut heap = BinaryHeap::new();
    let mut evals = 0usize;
    for pair in nodes.windows(2) {
        heap.push(kronrod(&mut f, pair[0], pair[1])?);
        evals += 21;
    }
    let mut frozen: Vec<Panel> = Vec::new();

    let totals = |heap: &BinaryHeap<Panel>, frozen: &[Panel]| -> (Complex64, f64, f64) {
        let mut all: Vec<&Panel> = heap.iter().chain(frozen.iter()).collect();
        all.sort_by(|p, q| p.a.total_cmp(&q.a));
        let mut value = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        let mut magnitude = 0.0;
        for p in all {
            value += p.value;
            err += p.err + p.carried;
            magnitude += p.magnitude;
        }
        (value, err, magnitude)
    };
    let target = |value: Complex64, magnitude: f64| {
        let t = spec.abs_tol.max(spec.rel_tol * value.norm());
        match rounding {
            Rounding::Strict => t,
            Rounding::AcceptFloor => t.max(ROUNDING_FLOOR * magnitude),
        }
    };

    let mut running_rule: f64 = heap.iter().map(|p| p.err).sum();
    let mut running_carried: f64 = heap.iter().map(|p| p.carried).sum();
    let mut running_val: Complex64 = heap.iter().map(|p| p.value).sum();
    let mut running_mag: f64 = heap.iter().map(|p| p.magnitude).sum();
    loop {
        if running_rule + running_carried <= target(running_val, running_mag) {
            // Recompute in a fixed order so the result is independent of the
            // refinement history.
            let (value, err, magnitude) = totals(&heap, &frozen);
            if err <= target(value, magnitude) {
                return Ok(QuadResult { value, err_estimate: err, evals, truncation_point: b });
            }
            // Drift in the running sums: resynchronize.
            running_rule = heap.iter().chain(frozen.iter()).map(|p| p.err).sum();
            running_carried = err - running_rule;
            running_val = value;
            running_mag = magnitude;
        }
        // Refinement has done what it can once the inherited error is a
        // sizeable part of the budget and the rule error is no larger than
        // it: rule estimates on noisy samples stop shrinking at the noise
        // level.
        let t = target(running_val, running_mag);
        if running_carried > 0.25 * t && running_rule <= 2.0 * running_carried {
            let (value, err, _) = totals(&heap, &frozen);
            return Err(QuadratureError::ToleranceNotMet {
                partial: QuadResult { value, err_estimate: err, evals, truncation_point: b },
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => {
                let (value, err, _) = totals(&heap, &frozen);
                return Err(QuadratureError::ToleranceNotMet {
                    partial: QuadResult { value, err_estimate: err, evals, truncation_point: b },
                });
            }
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-14 * mid.abs().max(1e-300) {
            frozen.push(worst);
            continue;
        }
        if evals + 42 > spec.max_evals {
            heap.push(worst);
            let (value, err, _) = totals(&heap, &frozen);
            return Err(QuadratureError::ToleranceNotMet {
                partial: QuadResult { value, err_estimate: err, evals, truncation_point: b },
            });
        }
        let left = kronrod(&mut f, worst.a, mid)?;
        let right = kronrod(&mut f, mid, worst.b)?;
        evals += 42;
        running_rule += left.err + right.err - worst.err;
        running_carried += left.carried + right.carried - worst.carried;
        running_val += left.value + right.value - worst.value;
        running_mag += left.magnitude + right.magnitude - worst.magnitude;
        heap.push(left);
        heap.push(right);
    }
}

fn plain<F>(mut f: F) -> impl FnMut(f64) -> Result<Sample, QuadratureError>
where
    F: FnMut(f64) -> Complex64,
{
    move |x| Ok((f(x), 0.0))
}

/// Integral of `f` over `[a, b]`, with the initial partition split at `breaks`.
pub fn integrate_interval<F>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult, QuadratureError>
where
    F: FnMut(f64) -> Complex64,
{
    adaptive(plain(f), a, b, breaks, spec, Rounding::Strict)
}

/// Integral of `f` over `[0, ∞)`, truncated where the Gaussian envelope of
/// `spec` falls below `abs_tol`. The tail beyond the truncation point is
/// bounded from the integrand value there and added to the error estimate.
pub fn integrate_semi_infinite<F>(f: F, spec: &QuadratureSpec) -> Result<QuadResult, QuadratureError>
where
    F: FnMut(f64) -> Complex64,
{
    integrate_semi_infinite_with_breaks(f, &[], spec)
}

/// [`integrate_semi_infinite`] with caller-supplied interior breakpoints
/// (scales at which the integrand changes character).
pub fn integrate_semi_infinite_with_breaks<F>(
    mut f: F,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult, QuadratureError>
where
    F: FnMut(f64) -> Complex64,
{
    spec.validate()?;
    let upper = spec.truncation_point();
    let mut result = adaptive(plain(&mut f), 0.0, upper, breaks, spec, Rounding::Strict);
    let tail_value = f(upper);
    let tail = if tail_value.re.is_finite() && tail_value.im.is_finite() {
        tail_value.norm() * gaussian_tail_length(spec.envelope_decay, upper - spec.envelope_center)
    } else {
        return Err(QuadratureError::IntegrandNonFinite { at: upper });
    };
    match &mut result {
        Ok(r) => {
            r.err_estimate += tail;
            r.evals += 1;
            r.truncation_point = upper;
        }
        Err(QuadratureError::ToleranceNotMet { partial }) => {
            partial.err_estimate += tail;
            partial.evals += 1;
            partial.truncation_point = upper;
        }
        Err(_) => {}
    }
    result
}

/// Bound on `∫_X^∞ e^{-c(x²-X²)} dx / 1` for `X ≥ 0` (Mills-ratio style).
fn gaussian_tail_length(c: f64, x: f64) -> f64 {
    let x = x.max(0.0);
    (std::f64::consts::PI / (4.0 * c)).sqrt().min(1.0 / (2.0 * c * x.max(1e-300)))
}

/// Nested integral `∫_{v₀}^{v₁} dv ∫₀^{q_max} dq f(v, q)`.
///
/// The inner integral is adaptive in `q` with breakpoints from `q_breaks(v)`;
/// its error estimates are integrated along `v` and added to the outer
/// estimate. Because the outer integral may cancel far below the size of the
/// inner values, a coarse first pass estimates the result and the inner
/// tolerance is then set in absolute terms from it. An inner integral that
/// cancels strongly may stop at its rounding floor; whether that is good
/// enough is decided by the combined estimate. The `v` truncation is checked
/// from the inner integral at the `v` endpoints, assuming at least Gaussian
/// decay `e^{-v²/2}` beyond them.
pub fn integrate_2d<F, Q>(
    f: F,
    v_range: (f64, f64),
    v_breaks: &[f64],
    q_max: f64,
    q_breaks: Q,
    spec: &QuadratureSpec,
) -> Result<QuadResult, QuadratureError>
where
    F: Fn(f64, f64) -> Complex64,
    Q: Fn(f64) -> Vec<f64>,
{
    spec.validate()?;
    let width = v_range.1 - v_range.0;
    let coarse_outer = QuadratureSpec { rel_tol: spec.rel_tol.max(1e-4), ..*spec };
    let coarse_inner = QuadratureSpec { rel_tol: spec.rel_tol.max(1e-6), abs_tol: spec.abs_tol * 0.1, ..*spec };
    let coarse = Nested::new(&f, &q_breaks, q_max, coarse_inner).run(v_range, v_breaks, &coarse_outer);
    let estimate = match &coarse {
        Ok(r) => r.value.norm(),
        Err(QuadratureError::ToleranceNotMet { partial }) => partial.value.norm(),
        Err(e) => return Err(e.clone()),
    };
    let budget = spec.abs_tol.max(spec.rel_tol * estimate);
    let inner_spec = QuadratureSpec {
        rel_tol: f64::EPSILON,
        abs_tol: (0.25 * budget / width.max(1.0)).max(f64::MIN_POSITIVE),
        ..*spec
    };
    let mut nested = Nested::new(&f, &q_breaks, q_max, inner_spec);
    let outer = nested.run(v_range, v_breaks, spec);
    let edge_lo = nested.eval(v_range.0)?.0.norm();
    let edge_hi = nested.eval(v_range.1)?.0.norm();
    let tail = edge_lo / v_range.0.abs().max(1.0) + edge_hi / v_range.1.abs().max(1.0);
    let evals = nested.evals + coarse.as_ref().map_or(0, |r| r.evals);
    let finish = |mut r: QuadResult| {
        r.err_estimate += tail;
        r.evals = evals;
        r.truncation_point = v_range.1;
        r
    };
    match outer {
        Ok(r) => {
            let r = finish(r);
            if nested.failed || r.err_estimate > spec.abs_tol.max(spec.rel_tol * r.value.norm()) {
                Err(QuadratureError::ToleranceNotMet { partial: r })
            } else {
                Ok(r)
            }
        }
        Err(QuadratureError::ToleranceNotMet { partial }) => {
            Err(QuadratureError::ToleranceNotMet { partial: finish(partial) })
        }
        Err(e) => Err(e),
    }
}

/// Inner q-integral as a function of v, with bookkeeping.
struct Nested<'a, F, Q> {
    f: &'a F,
    q_breaks: &'a Q,
    q_max: f64,
    spec: QuadratureSpec,
    evals: usize,
    failed: bool,
}

impl<'a, F, Q> Nested<'a, F, Q>
where
    F: Fn(f64, f64) -> Complex64,
    Q: Fn(f64) -> Vec<f64>,
{
    fn new(f: &'a F, q_breaks: &'a Q, q_max: f64, spec: QuadratureSpec) -> Self {
        Nested { f, q_breaks, q_max, spec, evals: 0, failed: false }
    }

    fn eval(&mut self, v: f64) -> Result<Sample, QuadratureError> {
        let breaks = (self.q_breaks)(v);
        let f = self.f;
        match adaptive(plain(|q| f(v, q)), 0.0, self.q_max, &breaks, &self.spec, Rounding::AcceptFloor) {
            Ok(r) => {
                self.evals += r.evals;
                Ok((r.value, r.err_estimate))
            }
            Err(QuadratureError::ToleranceNotMet { partial }) => {
                self.evals += partial.evals;
                self.failed = true;
                Ok((partial.value, partial.err_estimate))
            }
            Err(e) => Err(e),
        }
    }

    fn run(
        &mut self,
        v_range: (f64, f64),
        v_breaks: &[f64],
        spec: &QuadratureSpec,
    ) -> Result<QuadResult, QuadratureError> {
        let r = adaptive(|v| self.eval(v), v_range.0, v_range.1, v_breaks, spec, Rounding::Strict);
        r.map(|mut r| {
            r.evals = self.evals;
            r
        })
        .map_err(|e| match e {
            QuadratureError::ToleranceNotMet { mut partial } => {
                partial.evals = self.evals;
                QuadratureError::ToleranceNotMet { partial }
            }
            other => other,
        })
    }
}
