//! Fixed-point big-integer arithmetic for reference values of the special
//! functions. Numbers are integers scaled by 2^-BITS; with 320 fractional
//! bits the power series below keep ~90 correct digits even where their
//! terms cancel by 15 orders of magnitude.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

const BITS: u64 = 320;
const EULER_GAMMA_DIGITS: &str = "57721566490153286060651209008240243104215933593992359880576723";

#[derive(Clone, Debug)]
pub struct Fx(BigInt);

#[derive(Clone, Debug)]
pub struct Cx {
    re: Fx,
    im: Fx,
}

impl Fx {
    fn zero() -> Self {
        Fx(BigInt::zero())
    }

    fn int(n: i64) -> Self {
        Fx(BigInt::from(n) << BITS)
    }

    /// Exact conversion of a double.
    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Fx::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let m = BigInt::from(sign) * BigInt::from(mant);
        let shift = e + BITS as i64;
        Fx(if shift >= 0 { m << shift as u64 } else { m >> (-shift) as u64 })
    }

    pub fn to_f64(&self) -> f64 {
        let n = &self.0;
        let len = n.bits();
        if len <= 900 {
            return n.to_f64().unwrap() * 2f64.powi(-(BITS as i32));
        }
        let drop = len - 900;
        (n >> drop).to_f64().unwrap() * 2f64.powi(drop as i32 - BITS as i32)
    }

    fn add(&self, o: &Fx) -> Fx {
        Fx(&self.0 + &o.0)
    }

    fn sub(&self, o: &Fx) -> Fx {
        Fx(&self.0 - &o.0)
    }

    fn mul(&self, o: &Fx) -> Fx {
        Fx((&self.0 * &o.0) >> BITS)
    }

    fn div(&self, o: &Fx) -> Fx {
        Fx((&self.0 << BITS) / &o.0)
    }

    fn div_int(&self, n: u64) -> Fx {
        Fx(&self.0 / BigInt::from(n))
    }

    fn neg(&self) -> Fx {
        Fx(-&self.0)
    }

    fn is_negligible(&self) -> bool {
        self.0.abs().bits() < 8
    }

    fn sqrt(&self) -> Fx {
        Fx((&self.0 << BITS).sqrt())
    }

    /// `atan(1/k)` by its alternating series.
    fn atan_inv(k: u64) -> Fx {
        let k2 = k * k;
        let mut power = Fx::int(1).div_int(k);
        let mut sum = power.clone();
        let mut n = 1u64;
        loop {
            power = power.div_int(k2).neg();
            let term = power.div_int(2 * n + 1);
            if term.is_negligible() {
                return sum;
            }
            sum = sum.add(&term);
            n += 1;
        }
    }

    /// `atanh(y) = Σ y^{2n+1}/(2n+1)` for `|y| < 1`.
    fn atanh(y: &Fx) -> Fx {
        let y2 = y.mul(y);
        let mut power = y.clone();
        let mut sum = y.clone();
        let mut n = 1u64;
        loop {
            power = power.mul(&y2);
            let term = power.div_int(2 * n + 1);
            if term.is_negligible() {
                return sum;
            }
            sum = sum.add(&term);
            n += 1;
        }
    }

    /// Natural log of a positive number: `x = 2^k m` with `m ∈ [1, 2)`, then
    /// `ln m = 2 atanh((m - 1)/(m + 1))`.
    pub fn ln(&self) -> Fx {
        assert!(self.0.is_positive());
        let k = self.0.bits() as i64 - 1 - BITS as i64;
        let m = if k >= 0 { Fx(&self.0 >> k as u64) } else { Fx(&self.0 << (-k) as u64) };
        let one = Fx::int(1);
        let ln_m = Fx::atanh(&m.sub(&one).div(&m.add(&one))).mul(&Fx::int(2));
        let ln2 = Fx::atanh(&one.div_int(3)).mul(&Fx::int(2));
        ln_m.add(&ln2.mul(&Fx::int(k)))
    }

    /// `atan(y)`; halves the argument until the Taylor series converges fast.
    fn atan(y: &Fx) -> Fx {
        let one = Fx::int(1);
        let mut t = y.clone();
        let mut doublings = 0;
        while t.0.abs() > (BigInt::from(1) << (BITS - 3)) {
            t = t.div(&one.add(&one.add(&t.mul(&t)).sqrt()));
            doublings += 1;
        }
        let t2 = t.mul(&t).neg();
        let mut power = t.clone();
        let mut sum = t.clone();
        let mut n = 1u64;
        loop {
            power = power.mul(&t2);
            let term = power.div_int(2 * n + 1);
            if term.is_negligible() {
                break;
            }
            sum = sum.add(&term);
            n += 1;
        }
        Fx(sum.0 << doublings)
    }

    /// `atan2(y, x)` in `(-π, π]`.
    fn atan2(y: &Fx, x: &Fx) -> Fx {
        let pi = Fx::pi();
        if x.0.is_zero() {
            let half = Fx(pi.0 >> 1);
            return if y.0.is_negative() { half.neg() } else { half };
        }
        let base = Fx::atan(&y.div(x));
        if x.0.is_positive() {
            base
        } else if y.0.is_negative() {
            base.sub(&pi)
        } else {
            base.add(&pi)
        }
    }

    pub fn pi() -> Fx {
        Fx::atan_inv(5).mul(&Fx::int(16)).sub(&Fx::atan_inv(239).mul(&Fx::int(4)))
    }

    pub fn euler_gamma() -> Fx {
        let digits: BigInt = EULER_GAMMA_DIGITS.parse().unwrap();
        let scale = num_traits::pow(BigInt::from(10), EULER_GAMMA_DIGITS.len());
        Fx((digits << BITS) / scale)
    }
}

impl Cx {
    pub fn new(re: Fx, im: Fx) -> Self {
        Cx { re, im }
    }

    pub fn from_c64(z: Complex64) -> Self {
        Cx { re: Fx::from_f64(z.re), im: Fx::from_f64(z.im) }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    fn real(x: Fx) -> Self {
        Cx { re: x, im: Fx::zero() }
    }

    fn add(&self, o: &Cx) -> Cx {
        Cx { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    fn mul(&self, o: &Cx) -> Cx {
        Cx { re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)), im: self.re.mul(&o.im).add(&self.im.mul(&o.re)) }
    }

    fn scale(&self, x: &Fx) -> Cx {
        Cx { re: self.re.mul(x), im: self.im.mul(x) }
    }

    fn div_int(&self, n: u64) -> Cx {
        Cx { re: self.re.div_int(n), im: self.im.div_int(n) }
    }

    fn neg(&self) -> Cx {
        Cx { re: self.re.neg(), im: self.im.neg() }
    }

    fn is_negligible(&self) -> bool {
        self.re.is_negligible() && self.im.is_negligible()
    }

    /// Principal logarithm.
    fn ln(&self) -> Cx {
        let modulus2 = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        Cx { re: modulus2.ln().div_int(2), im: Fx::atan2(&self.im, &self.re) }
    }
}

/// `Σ_k p_k / weight(k)` over `k = start, start + 2, …`, where
/// `p_start = z^start / factorial_step(2)^{[start = 2]}` and
/// `p_{k+2} = ±z² p_k / factorial_step(k + 2)`.
fn stepped_series(
    z: &Cx,
    start: u64,
    alternate: bool,
    weight: impl Fn(u64) -> u64,
    factorial_step: impl Fn(u64) -> u64,
) -> Cx {
    let z2 = z.mul(z);
    let z2 = if alternate { z2.neg() } else { z2 };
    let mut power = if start == 1 { z.clone() } else { z.mul(z).div_int(factorial_step(2)) };
    let mut sum = power.div_int(weight(start));
    let mut k = start;
    loop {
        power = power.mul(&z2).div_int(factorial_step(k + 2));
        k += 2;
        let term = power.div_int(weight(k));
        if term.is_negligible() {
            return sum;
        }
        sum = sum.add(&term);
    }
}

/// `erf(z) = 2/√π Σ (-1)ⁿ z^{2n+1} / (n!(2n+1))`.
pub fn erf(z: Complex64) -> Complex64 {
    erf_fx(&Cx::from_c64(z)).to_c64()
}

fn erf_fx(z: &Cx) -> Cx {
    // z^{2n+1}/n! steps by -z²/n; index k = 2n+1 gives n = (k-1)/2.
    let s = stepped_series(z, 1, true, |k| k, |k| (k - 1) / 2);
    let two_over_sqrt_pi = Fx::int(2).div(&Fx::pi().sqrt());
    s.scale(&two_over_sqrt_pi)
}

/// `erfc(z) = 1 - erf(z)`, exact subtraction in fixed point.
pub fn erfc(z: Complex64) -> Complex64 {
    let e = erf_fx(&Cx::from_c64(z));
    Cx::real(Fx::int(1)).add(&e.neg()).to_c64()
}

/// `erfi(z) = -i erf(iz)`.
pub fn erfi(z: Complex64) -> Complex64 {
    let iz = Cx::from_c64(Complex64::new(-z.im, z.re));
    let e = erf_fx(&iz);
    Cx::new(e.im, e.re.neg()).to_c64()
}

/// `Shi(z) = Σ_{k odd} z^k / (k·k!)`.
pub fn shi(z: Complex64) -> Complex64 {
    stepped_series(&Cx::from_c64(z), 1, false, |k| k, |k| k * (k - 1)).to_c64()
}

/// `Chi(z) - γ - ln z = Σ_{k even ≥ 2} z^k / (k·k!)`.
fn chi_series(z: Complex64) -> Cx {
    stepped_series(&Cx::from_c64(z), 2, false, |k| k, |k| k * (k - 1))
}

/// `Chi(z) = γ + ln z + Σ_{k even ≥ 2} z^k / (k·k!)`, principal log.
pub fn chi(z: Complex64) -> Complex64 {
    let ln = Cx::from_c64(z).ln();
    chi_series(z).add(&Cx::real(Fx::euler_gamma())).add(&ln).to_c64()
}

/// `Ei(x) = γ + ln|x| + Σ xⁿ/(n·n!)` for real `x ≠ 0`.
pub fn ei(x: f64) -> f64 {
    let xf = Fx::from_f64(x);
    let mut power = Fx::int(1);
    let mut sum = Fx::euler_gamma();
    let mut n = 1u64;
    loop {
        power = power.mul(&xf).div_int(n);
        let term = power.div_int(n);
        if term.is_negligible() {
            break;
        }
        sum = sum.add(&term);
        n += 1;
    }
    sum.add(&Fx::from_f64(x.abs()).ln()).to_f64()
}

#[cfg(test)]
mod checks {
    use super::*;

    #[test]
    fn pi_digits() {
        assert_eq!(Fx::pi().to_f64(), std::f64::consts::PI);
    }

    #[test]
    fn logarithms() {
        assert_eq!(Fx::from_f64(10.0).ln().to_f64(), std::f64::consts::LN_10);
        let z = Cx::from_c64(Complex64::new(-1.0, 1e-3)).ln().to_c64();
        assert!((z - Complex64::new(-1.0, 1e-3).ln()).norm() < 1e-15);
    }

    #[test]
    fn round_trip() {
        for x in [1.0, -0.3, 1e-30, 12345.678] {
            assert_eq!(Fx::from_f64(x).to_f64(), x);
        }
    }
}
