//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Two criteria are known to fail as stated (see README, "Known
//! deviations"): the M^{φ²} fit over the full cutoff range (5) and the sign
//! of the Laurent coefficient (6). The run succeeds when exactly those two
//! fail, so any regression elsewhere — or an unexpected pass — is reported.

#[path = "../../core/tests/support/mod.rs"]
#[allow(unused)]
mod support;

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use udw_cli::figures::{self, COUPLINGS};
use udw_cli::{compare_with_oracle, CliError};
use udw_core::correlators::{wightman_linear, wightman_quadratic};
use udw_core::divergence::{default_laurent_points, laurent_check, sweep_eta};
use udw_core::elements::{f1, f2, ConvolutionArgs};
use udw_core::measures::{assemble, mutual_information};
use udw_core::quadrature::integrate_interval;
use udw_core::specfun::{chi, erf, erfc, erfi, expint_ei, shi};
use udw_core::{
    element, Coupling, ElementSet, OracleSpec, Params, QuadratureSpec, SpacetimePair, Term, Verdict, VerdictCriteria,
};

const EXPECTED_FAILURES: [u32; 2] = [5, 6];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm()
}

fn wick_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = SpacetimePair::new(rng.gen_range(-5.0..5.0), rng.gen_range(0.0..5.0), rng.gen_range(1e-3..1.0));
        let w = wightman_linear(&p).unwrap();
        // Composite-operator correlator from its own closed form,
        // 1/(8π⁴ σ²) with σ = Δx² − (Δt − iε)².
        let s = Complex64::new(p.dt, -p.eps);
        let sigma = p.dx * p.dx - s * s;
        let direct = (8.0 * PI.powi(4) * sigma * sigma).inv();
        worst = worst.max(rel(2.0 * w * w, direct));
        worst = worst.max(rel(wightman_quadratic(&p).unwrap(), direct));
    }
    outcome(worst < 1e-14, format!("worst relative deviation {worst:.2e} on 100 pairs"))
}

fn special_functions() -> Outcome {
    type Pair = (&'static str, fn(Complex64) -> Complex64, fn(Complex64) -> Complex64);
    let suite: [Pair; 5] = [
        ("erf", |z| erf(z).unwrap(), support::erf),
        ("erfc", |z| erfc(z).unwrap(), support::erfc),
        ("erfi", |z| erfi(z).unwrap(), support::erfi),
        ("shi", |z| shi(z).unwrap(), support::shi),
        ("chi", |z| chi(z).unwrap(), support::chi),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let points: Vec<Complex64> = (0..1000)
        .map(|_| Complex64::from_polar(5.0 * rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>()))
        .collect();
    let mut details = Vec::new();
    let mut pass = true;
    for (name, f, reference) in suite {
        let worst = points.iter().map(|&z| rel(f(z), reference(z))).fold(0.0, f64::max);
        pass &= worst < 1e-12;
        details.push(format!("{name} {worst:.1e}"));
    }
    let mut worst_identity = 0.0f64;
    for k in 1..=1000 {
        let x = 0.1 * k as f64;
        for x in [x, x * 1e-4] {
            let sum = shi(Complex64::new(x, 0.0)).unwrap() + chi(Complex64::new(x, 0.0)).unwrap();
            let ei = expint_ei(x).unwrap();
            worst_identity = worst_identity.max(((sum.re - ei) / ei).abs());
        }
    }
    pass &= worst_identity < 1e-11;
    details.push(format!("Shi+Chi−Ei {worst_identity:.1e}"));
    outcome(pass, details.join(", "))
}

/// Direct quadrature of the convolution integral with equal switching
/// centres, along the line Im v = −Ω. The integrand is entire below the
/// real axis (its poles sit at ±q + iε), so the shift is exact; on that line
/// the oscillation e^{−iΩv} becomes the real decay e^{−Ω²/2} and no
/// cancellation is left for the quadrature to resolve.
fn convolution_by_quadrature(q: f64, a: &ConvolutionArgs, m: i32) -> Complex64 {
    assert!(a.t_a == a.t_b && a.switching_time == 1.0);
    let shift = Complex64::new(0.0, -a.omega);
    let f = |x: f64| {
        let v = x + shift;
        let s = v - Complex64::new(0.0, a.eps);
        (-0.5 * v * v - Complex64::i() * a.omega * v).exp() / (q * q - s * s).powi(m)
    };
    let half = 12.0;
    let width = a.eps + a.omega;
    let mut breaks = vec![0.0];
    for pole in [-q, q] {
        breaks.push(pole);
        for k in [1.0, 4.0, 16.0, 64.0] {
            breaks.extend([pole - k * width, pole + k * width]);
        }
    }
    breaks.retain(|b| (-half..half).contains(b));
    let spec = QuadratureSpec { rel_tol: 1e-10, abs_tol: 1e-300, max_evals: 2_000_000, ..Default::default() };
    let r = integrate_interval(f, -half, half, &breaks, &spec).expect("reference quadrature");
    r.value
}

fn convolution_closed_forms() -> Outcome {
    let mut worst = 0.0f64;
    for q in [0.5, 1.0, 2.0] {
        for omega in [0.0, 1.0, 5.0] {
            for eps in [0.01, 0.1, 1.0] {
                let a = ConvolutionArgs { omega, eps, t_a: 0.0, t_b: 0.0, switching_time: 1.0 };
                worst = worst.max(rel(f1(q, &a).unwrap(), convolution_by_quadrature(q, &a, 1)));
                worst = worst.max(rel(f2(q, &a).unwrap(), convolution_by_quadrature(q, &a, 2)));
            }
        }
    }
    outcome(worst < 1e-8, format!("worst relative error {worst:.2e} over 27 points × 2 forms"))
}

fn oracle_equivalence() -> Outcome {
    let comparisons = compare_with_oracle(&QuadratureSpec::default(), &OracleSpec::default());
    let failures: Vec<_> = comparisons.iter().filter(|c| !c.agrees(1e-5)).collect();
    let worst = comparisons.iter().filter_map(|c| c.relative_difference()).fold(0.0, f64::max);
    let mut detail = format!("{} cases, worst relative difference {worst:.2e}", comparisons.len());
    for c in &failures {
        detail.push_str(&format!("; disagreement at {:?}", c.case));
    }
    outcome(failures.is_empty(), detail)
}

fn fig2_params(term: Term, coupling: Coupling) -> Params {
    let gamma_b = if term == Term::M { 0.0 } else { 4.0 };
    Params { alpha: 1.0, beta: 4.0, delta: 1.0, gamma_a: 0.0, gamma_b, coupling, ..Default::default() }
}

fn divergence_dichotomy() -> Outcome {
    let etas: Vec<f64> = (1..=7).map(|k| 10f64.powi(-k)).collect();
    let (quad, criteria) = (QuadratureSpec::default(), VerdictCriteria::default());
    let mut pass = true;
    let mut details = Vec::new();
    for (panel, term, coupling) in figures::FIG2_PANELS {
        let sweep = sweep_eta(term, coupling, &fig2_params(term, coupling), &etas, &quad, &criteria).unwrap();
        let want = if panel == 'f' { Verdict::LogDivergent } else { Verdict::Convergent };
        let fit = sweep.fit.unwrap();
        let ok = if panel == 'f' {
            sweep.verdict == want && fit.r_squared > 0.999 && fit.slope > 0.0
        } else {
            sweep.verdict == want
        };
        pass &= ok;
        let mut d = format!("({panel}) {:?}", sweep.verdict);
        if panel == 'f' {
            d.push_str(&format!(" [R² = {:.5}, b = {:.3e}]", fit.r_squared, fit.slope));
        }
        details.push(d);
    }
    outcome(pass, details.join(", "))
}

fn laurent_limit() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for (beta, delta) in [(4.0, 1.0), (2.0, 2.0), (1.0, 1.0)] {
        let p = Params { beta, delta, eta: 0.0, coupling: Coupling::Quadratic, ..Default::default() };
        let r = laurent_check(&p, &default_laurent_points()).unwrap();
        pass &= r.deviation < 1e-6;
        details.push(format!(
            "(β={beta}, δ={delta}) limit {:.6}{:+.6}i vs {:.6}i, deviation {:.1e} (modulus {:.1e})",
            r.limit.re, r.limit.im, r.expected.im, r.deviation, r.modulus_deviation
        ));
    }
    outcome(pass, details.join("; "))
}

fn harvesting_existence() -> Outcome {
    let quad = QuadratureSpec::default();
    let alphas = figures::linspace(0.0, 10.0, 101);
    let mut pass = true;
    let mut details = Vec::new();
    for beta in [1.0, 2.0, 3.0] {
        let threshold = alphas.iter().copied().find(|&alpha| {
            let p = Params { alpha, beta, delta: 1.0, eta: 1e-8, coupling: Coupling::Linear, ..Default::default() };
            figures::negativity_2(&p, &quad).unwrap() > 0.0
        });
        pass &= threshold.is_some();
        details.push(match threshold {
            Some(a) => format!("β={beta}: N⁽²⁾ > 0 from α = {a:.1}"),
            None => format!("β={beta}: no α ≤ 10 harvests"),
        });
    }
    outcome(pass, details.join(", "))
}

fn cutoff_sensitivity() -> Outcome {
    let quad = QuadratureSpec::default();
    let etas = figures::even_decades();
    let n2 = |coupling, eta| {
        let p = Params { alpha: 1.0, beta: 2.0, delta: 1.0, eta, coupling, ..Default::default() };
        figures::negativity_2(&p, &quad).unwrap()
    };
    let (coarse, fine) = (n2(Coupling::Linear, 1e-2), n2(Coupling::Linear, 1e-12));
    let change = ((coarse - fine) / fine).abs();
    let quadratic: Vec<f64> = etas.iter().map(|&eta| n2(Coupling::Quadratic, eta)).collect();
    let increasing = quadratic.windows(2).all(|w| w[1] > w[0]);
    outcome(
        change < 0.01 && increasing,
        format!(
            "linear N⁽²⁾ {coarse:.6e} → {fine:.6e} (change {:.3}%); quadratic {} over η = 1e-2…1e-12: {:?}",
            100.0 * change,
            if increasing { "increasing" } else { "NOT increasing" },
            quadratic.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>()
        ),
    )
}

fn information_properties() -> Outcome {
    let quad = QuadratureSpec::default();
    let base = figures::fig5_base();
    let cells = figures::fig5_cells(figures::DEFAULT_GRID);
    let values: Vec<f64> = figures::fig5_values(&base, &cells, &quad)
        .into_iter()
        .collect::<Result<_, CliError>>()
        .expect("every Fig. 5 cell evaluates");
    let negative = values.iter().filter(|&&mi| mi < 0.0).count();

    let half = cells.len() / 2;
    assert!(cells[..half].iter().all(|c| c.coupling == COUPLINGS[0]));
    let inverted = (0..half).filter(|&i| values[i] < values[half + i]).count();

    // M enters the state but not the information.
    let mut m_sensitive = 0;
    for c in cells.iter().step_by(37) {
        let p = Params { beta: c.beta, gamma_b: c.dgamma, coupling: c.coupling, ..base };
        let l_aa = element(Term::Laa, &p, &quad).unwrap().value.re;
        let l_ab = element(Term::Lab, &p, &quad).unwrap().value;
        let mi = |m| {
            let e = ElementSet { l_aa, l_bb: l_aa, l_ab, m };
            mutual_information(&assemble(&p, &e).unwrap()).mutual_information
        };
        if mi(Complex64::new(0.0, 0.0)).to_bits() != mi(Complex64::new(3e-3, -7e-4)).to_bits() {
            m_sensitive += 1;
        }
    }
    outcome(
        negative == 0 && inverted == 0 && m_sensitive == 0,
        format!(
            "{} cells: {negative} negative, {inverted} with quadratic > linear, {m_sensitive} sensitive to M",
            cells.len()
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    for (figure, extra) in
        [("fig2", vec![]), ("fig3", vec!["--grid", "8"]), ("fig4", vec!["--grid", "8"]), ("fig5", vec![])]
    {
        let run = |name: &str| {
            let out = dir.path().join(name);
            let mut args = vec!["figure", figure, "--out", out.to_str().unwrap()];
            args.extend(&extra);
            let status = Command::new(env!("CARGO_BIN_EXE_udw")).args(&args).status().unwrap();
            assert!(status.success(), "udw figure {figure} failed");
            std::fs::read(out).unwrap()
        };
        let same = run(&format!("{figure}-a.csv")) == run(&format!("{figure}-b.csv"));
        pass &= same;
        details.push(format!("{figure} {}", if same { "identical" } else { "DIFFERS" }));
    }
    outcome(pass, details.join(", "))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "Wick identity", wick_identity),
        (2, "special-function suite", special_functions),
        (3, "convolution closed forms", convolution_closed_forms),
        (4, "oracle equivalence", oracle_equivalence),
        (5, "divergence dichotomy", divergence_dichotomy),
        (6, "Laurent limit", laurent_limit),
        (7, "harvesting existence", harvesting_existence),
        (8, "cutoff sensitivity asymmetry", cutoff_sensitivity),
        (9, "mutual-information properties", information_properties),
        (10, "determinism", determinism),
    ];
    let mut failed = BTreeSet::new();
    for (n, name, check) in criteria {
        let start = Instant::now();
        let o = check();
        let elapsed: Duration = start.elapsed();
        let mark = if o.pass { "PASS" } else { "FAIL" };
        let expected = if !o.pass && EXPECTED_FAILURES.contains(&n) { " (expected)" } else { "" };
        println!("criterion {n:>2} {mark}{expected} — {name} [{:.1} s]: {}", elapsed.as_secs_f64(), o.detail);
        if !o.pass {
            failed.insert(n);
        }
    }
    let expected: BTreeSet<u32> = EXPECTED_FAILURES.into_iter().collect();
    if failed != expected {
        eprintln!("acceptance: failing criteria {failed:?}, expected exactly {expected:?}");
        std::process::exit(1);
    }
}
