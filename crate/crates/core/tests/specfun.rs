mod support;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use udw_core::specfun::{chi, erf, erfc, erfi, expint_ei, shi, SpecfunError, EULER_GAMMA};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm()
}

/// Points drawn uniformly from the disc `|z| ≤ radius`.
fn disc_points(n: usize, radius: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let t = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            Complex64::from_polar(r, t)
        })
        .collect()
}

#[test]
fn erf_values() {
    assert_eq!(erf(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    assert!(rel(erf(c(1.0, 0.0)).unwrap(), c(support::erf(c(1.0, 0.0)).re, 0.0)) < 1e-15);
    assert!((erf(c(1.0, 0.0)).unwrap().re - 0.842_700_792_949_715).abs() < 1e-15);
    let v = erf(c(0.0, 1.0)).unwrap();
    assert!(v.re.abs() < 1e-300 && (v.im - 1.650_425_758_797_543).abs() < 1e-14, "{v}");
}

#[test]
fn erfc_values() {
    assert_eq!(erfc(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    assert!((erfc(c(2.0, 0.0)).unwrap().re - 0.004_677_734_981_047_265_8).abs() < 1e-17);
    assert!((support::erfc(c(2.0, 0.0)).re - 0.004_677_734_981_047_265_8).abs() < 1e-18);
    let z = c(3.0, 4.0);
    let sum = erf(z).unwrap() + erfc(z).unwrap() - 1.0;
    assert!(sum.norm() < 1e-13 * erf(z).unwrap().norm(), "{sum}");
}

#[test]
fn erfi_values() {
    assert_eq!(erfi(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    let v = erfi(c(1.0, 0.0)).unwrap();
    assert!((v.re - 1.650_425_758_797_543).abs() < 1e-14 && v.im == 0.0, "{v}");
    let v = erfi(c(0.0, 1.0)).unwrap();
    assert!(v.re.abs() < 1e-300 && (v.im - 0.842_700_792_949_715).abs() < 1e-15, "{v}");
}

#[test]
fn error_functions_reject_large_arguments() {
    for f in [erf, erfc, erfi] {
        assert!(matches!(f(c(25.0, 25.0)), Err(SpecfunError::OverflowDomain { .. })));
    }
}

#[test]
fn exponential_integral_values() {
    assert!((expint_ei(1.0).unwrap() - 1.895_117_816_355_936_8).abs() < 1e-15);
    let v = expint_ei(-1.0).unwrap();
    assert!((v + 0.219_383_934_395_520_27).abs() < 1e-15, "{v:e}");
    let want = EULER_GAMMA + 1e-8f64.ln() + 1e-8;
    assert!((expint_ei(1e-8).unwrap() - want).abs() < 1e-14);
    assert!((support::ei(1e-8) - want).abs() < 1e-14);
    assert!(matches!(expint_ei(0.0), Err(SpecfunError::SingularArgument { .. })));
    assert!(matches!(expint_ei(701.0), Err(SpecfunError::OverflowDomain { .. })));
}

#[test]
fn exponential_integral_against_series() {
    let mut x = 1e-8;
    while x < 40.0 {
        for s in [x, -x] {
            if s < -30.0 {
                continue;
            }
            let got = expint_ei(s).unwrap();
            let want = support::ei(s);
            assert!(((got - want) / want).abs() < 1e-12, "Ei({s}) = {got}, want {want}");
        }
        x *= 1.37;
    }
}

#[test]
fn hyperbolic_integral_values() {
    assert_eq!(shi(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    assert!((shi(c(1.0, 0.0)).unwrap().re - 1.057_250_875_375_728_5).abs() < 1e-15);
    assert!((chi(c(1.0, 0.0)).unwrap().re - 0.837_866_940_980_208_2).abs() < 1e-15);
    assert!(matches!(chi(c(0.0, 0.0)), Err(SpecfunError::SingularArgument { .. })));
    assert!(matches!(shi(c(351.0, 0.0)), Err(SpecfunError::OverflowDomain { .. })));
}

#[test]
fn shi_plus_chi_is_ei() {
    for k in 1..=400 {
        let x = k as f64 * 0.25;
        let sum = shi(c(x, 0.0)).unwrap() + chi(c(x, 0.0)).unwrap();
        let ei = expint_ei(x).unwrap();
        assert!(((sum.re - ei) / ei).abs() < 1e-11, "x = {x}");
    }
}

type Pair = (&'static str, fn(Complex64) -> Complex64, fn(Complex64) -> Complex64);

fn suite() -> [Pair; 5] {
    [
        ("erf", |z| erf(z).unwrap(), support::erf),
        ("erfc", |z| erfc(z).unwrap(), support::erfc),
        ("erfi", |z| erfi(z).unwrap(), support::erfi),
        ("shi", |z| shi(z).unwrap(), support::shi),
        ("chi", |z| chi(z).unwrap(), support::chi),
    ]
}

#[test]
fn random_disc_against_series() {
    for (name, f, reference) in suite() {
        let worst = disc_points(200, 5.0, 11).into_iter().map(|z| rel(f(z), reference(z))).fold(0.0, f64::max);
        assert!(worst < 1e-12, "{name}: worst relative error {worst:.3e}");
    }
}

proptest! {
    #[test]
    fn complementarity(re in -7.0f64..7.0, im in -7.0f64..7.0) {
        let z = c(re, im);
        let d = erf(z).unwrap() + erfc(z).unwrap() - 1.0;
        prop_assert!(d.norm() < 1e-12 * (1.0 + erf(z).unwrap().norm()));
    }

    #[test]
    fn erfi_is_rotated_erf(re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let z = c(re, im);
        let want = -Complex64::i() * erf(Complex64::i() * z).unwrap();
        prop_assert_eq!(erfi(z).unwrap(), want);
    }

    #[test]
    fn erf_is_odd(re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let z = c(re, im);
        prop_assert!((erf(-z).unwrap() + erf(z).unwrap()).norm() <= 1e-15 * erf(z).unwrap().norm());
    }

    #[test]
    fn schwarz_reflection(re in -6.0f64..6.0, im in 0.01f64..6.0) {
        let z = c(re, im);
        for (_, f, _) in suite() {
            let a = f(z.conj());
            let b = f(z).conj();
            prop_assert!((a - b).norm() <= 1e-14 * b.norm());
        }
    }

    #[test]
    fn shi_plus_chi_matches_ei(x in 1e-3f64..100.0) {
        let sum = shi(c(x, 0.0)).unwrap() + chi(c(x, 0.0)).unwrap();
        let ei = expint_ei(x).unwrap();
        prop_assert!(((sum.re - ei) / ei).abs() < 1e-11);
    }
}
