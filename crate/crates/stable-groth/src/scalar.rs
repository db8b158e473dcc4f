//! Scalar abstractions shared by the exact and floating-point code paths.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg};

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Commutative semiring operations; enough for the branching recursions,
/// whose weights never need subtraction.
pub trait Semiring: Clone + Zero + One + Add<Output = Self> + Mul<Output = Self> {}

impl<T> Semiring for T where T: Clone + Zero + One + Add<Output = T> + Mul<Output = T> {}

/// A field usable by determinants and the generic evaluators.
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync {
    fn from_rational(q: &BigRational) -> Self;
    fn from_i64(n: i64) -> Self;
    /// Size used for pivot selection; exact types only need `> 0` for nonzero.
    fn magnitude(&self) -> f64;

    fn from_bigint(n: &BigInt) -> Self {
        Self::from_rational(&BigRational::from_integer(n.clone()))
    }

    fn powi(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Scalar for BigRational {
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            ln_rational(&self.abs()).exp().max(f64::MIN_POSITIVE)
        }
    }
}

impl Scalar for f64 {
    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q)
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn powi(&self, e: u32) -> Self {
        f64::powi(*self, e as i32)
    }
}

impl Scalar for Complex64 {
    fn from_rational(q: &BigRational) -> Self {
        Complex64::new(rational_to_f64(q), 0.0)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn powi(&self, e: u32) -> Self {
        Complex64::powi(self, e as i32)
    }
}

pub type Rational = BigRational;

/// Shorthand for the rational `n/d`.
pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"a/b"`, `"a"` or a plain decimal such as `"0.3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("cannot parse rational `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let mut n: BigInt = digits.parse().map_err(|_| bad())?;
        if neg {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), fp.len());
        return Ok(BigRational::new(n, d));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Natural log of a positive big integer, stable for any size.
pub fn ln_bigint(n: &BigInt) -> f64 {
    assert!(n.sign() == Sign::Plus, "ln of non-positive integer");
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_rational(x: &BigRational) -> f64 {
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    match x.to_f64() {
        Some(v) if v.is_finite() && v != 0.0 => v,
        _ => {
            let s = if x.is_negative() { -1.0 } else { 1.0 };
            s * ln_rational(&x.abs()).exp()
        }
    }
}

/// Best rational approximation with bounded denominator is overkill here;
/// decimal floats are converted exactly through their binary expansion.
pub fn f64_to_rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::InvalidParameter(format!("non-finite value {x}")))
}

/// Generalized binomial coefficient C(n, k) for integer n and k ≥ 0.
pub fn binom(n: i64, k: i64) -> BigInt {
    if k < 0 {
        return BigInt::zero();
    }
    if n >= 0 && k > n {
        return BigInt::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

pub fn binom_f64(n: i64, k: i64) -> f64 {
    if k < 0 || (n >= 0 && k > n) {
        return 0.0;
    }
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// ln C(n, k) for 0 ≤ k ≤ n.
pub fn ln_binom(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

pub fn ln_factorial(n: u64) -> f64 {
    statrs::function::factorial::ln_factorial(n)
}

/// Determinant by Gaussian elimination with largest-magnitude pivoting.
pub fn det<T: Scalar>(mut m: Vec<Vec<T>>) -> T {
    let n = m.len();
    let mut acc = T::one();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col][col].magnitude();
        for (r, row) in m.iter().enumerate().skip(col + 1) {
            let mg = row[col].magnitude();
            if mg > best {
                best = mg;
                piv = r;
            }
        }
        if m[piv][col].is_zero() {
            return T::zero();
        }
        if piv != col {
            m.swap(piv, col);
            acc = -acc;
        }
        let p = m[col][col].clone();
        acc = acc * p.clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone() / p.clone();
            for c in col..n {
                let v = m[col][c].clone() * f.clone();
                m[r][c] = m[r][c].clone() - v;
            }
        }
    }
    acc
}

/// Positive reals stored by their logarithm, so that products of many
/// large or tiny weights neither overflow nor underflow.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogPos(pub f64);

impl LogPos {
    pub fn from_value(v: f64) -> Self {
        assert!(v >= 0.0, "LogPos needs a nonnegative value");
        LogPos(v.ln())
    }
    pub fn from_rational(q: &BigRational) -> Self {
        if q.is_zero() {
            LogPos(f64::NEG_INFINITY)
        } else {
            assert!(q.is_positive(), "LogPos needs a nonnegative value");
            LogPos(ln_rational(q))
        }
    }
    pub fn ln(&self) -> f64 {
        self.0
    }
    pub fn value(&self) -> f64 {
        self.0.exp()
    }
}

impl Add for LogPos {
    type Output = LogPos;
    fn add(self, o: LogPos) -> LogPos {
        let (a, b) = if self.0 >= o.0 { (self.0, o.0) } else { (o.0, self.0) };
        if b == f64::NEG_INFINITY {
            return LogPos(a);
        }
        LogPos(a + (b - a).exp().ln_1p())
    }
}

impl Mul for LogPos {
    type Output = LogPos;
    fn mul(self, o: LogPos) -> LogPos {
        LogPos(self.0 + o.0)
    }
}

impl std::ops::Div for LogPos {
    type Output = LogPos;
    fn div(self, o: LogPos) -> LogPos {
        LogPos(self.0 - o.0)
    }
}

impl Zero for LogPos {
    fn zero() -> Self {
        LogPos(f64::NEG_INFINITY)
    }
    fn is_zero(&self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl One for LogPos {
    fn one() -> Self {
        LogPos(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), q(1, 2));
        assert_eq!(parse_rational("0.3").unwrap(), q(3, 10));
        assert_eq!(parse_rational("-2").unwrap(), qi(-2));
        assert_eq!(parse_rational("-0.25").unwrap(), q(-1, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), BigInt::from(10));
        assert_eq!(binom(-1, 3), BigInt::from(-1));
        assert_eq!(binom(3, 5), BigInt::zero());
        assert!((binom_f64(10, 3) - 120.0).abs() < 1e-12);
        assert!((ln_binom(10, 3) - 120f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn det_exact_and_float() {
        let m = vec![vec![qi(2), qi(1)], vec![qi(1), qi(3)]];
        assert_eq!(det(m), qi(5));
        let m = vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 2.0]];
        assert!((det(m) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn logpos_arith() {
        let a = LogPos::from_value(2.0);
        let b = LogPos::from_value(3.0);
        assert!(((a + b).value() - 5.0).abs() < 1e-12);
        assert!(((a * b).value() - 6.0).abs() < 1e-12);
        assert!((a + LogPos::zero()).value() == a.value());
    }

    #[test]
    fn huge_rational_to_float() {
        let big = BigRational::new(num_traits::pow(BigInt::from(3), 900), num_traits::pow(BigInt::from(2), 900));
        let l = ln_rational(&big);
        assert!((l - 900.0 * (1.5f64).ln()).abs() < 1e-9);
    }
}
