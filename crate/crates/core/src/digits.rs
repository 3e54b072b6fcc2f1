//! Base-`p` digits, the digit-product coefficients `D_{p,r}(n)`, binomials,
//! and `p`-adic valuations of integers and of residues.
//!
//! `D_{p,r}(n)` is the coefficient of `x^n` in `prod_t (1 - x^{p^t})^r`.
//! Because every `n` has exactly one base-`p` expansion, the coefficient
//! factors over the digits of `n`: a digit `i` contributes `(-1)^i C(r, i)`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{mul_mod, pow_mod, RingSpec};
use crate::series::TruncatedSeries;

/// Base-`p` expansion of a natural number, least-significant digit first.
///
/// Zero is the empty digit list; otherwise the last digit is nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitVector {
    base: u64,
    digits: Vec<u64>,
}

impl DigitVector {
    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// Digit at position `i`, zero past the end.
    pub fn digit(&self, i: usize) -> u64 {
        self.digits.get(i).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn value(&self) -> BigUint {
        self.digits
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &d| acc * self.base + d)
    }
}

pub fn to_digits(mut n: u64, p: u64) -> Result<DigitVector> {
    if p < 2 {
        return Err(Error::InvalidBase(p));
    }
    let mut digits = Vec::new();
    while n > 0 {
        digits.push(n % p);
        n /= p;
    }
    Ok(DigitVector { base: p, digits })
}

/// `N_p(i, n)`: how many base-`p` digits of `n` equal `i`.
pub fn digit_count(i: u64, n: u64, p: u64) -> Result<u64> {
    if p < 2 {
        return Err(Error::InvalidBase(p));
    }
    if i >= p {
        return Err(Error::DigitOutOfRange { digit: i, base: p });
    }
    let digits = to_digits(n, p)?;
    Ok(digits.digits().iter().filter(|&&d| d == i).count() as u64)
}

fn check_r(p: u64, r: u64) -> Result<()> {
    if p < 2 {
        return Err(Error::InvalidBase(p));
    }
    if r == 0 || r >= p {
        return Err(Error::ParameterOutOfRange(format!("r = {r} must lie in 1..={}", p - 1)));
    }
    Ok(())
}

/// `(-1)^j C(r, j)` for a single digit `j`, zero when `j > r`.
fn digit_factor(r: u64, j: u64) -> BigInt {
    let c = BigInt::from(binomial_exact(r, j as i64));
    if j % 2 == 1 {
        -c
    } else {
        c
    }
}

/// `D_{p,r}(n) = prod_i ((-1)^i C(r, i))^{N_p(i, n)}`, with `C(r, i) = 0` for `i > r`.
pub fn d_closed(p: u64, r: u64, n: u64) -> Result<BigInt> {
    check_r(p, r)?;
    let mut result = BigInt::one();
    for i in 0..p {
        let count = digit_count(i, n, p)?;
        if count == 0 {
            continue;
        }
        if i > r {
            return Ok(BigInt::zero());
        }
        let count = u32::try_from(count).expect("digit count fits in u32");
        result *= num_traits::pow::pow(digit_factor(r, i), count as usize);
    }
    Ok(result)
}

/// `D_{p,r}` via `D(pn + j) = (-1)^j C(r, j) D(n)` and `D(0) = 1`.
pub fn d_recursive(p: u64, r: u64, n: u64) -> Result<BigInt> {
    check_r(p, r)?;
    let mut factors = Vec::new();
    let mut rest = n;
    while rest > 0 {
        factors.push(digit_factor(r, rest % p));
        rest /= p;
    }
    // Unwind from D(0) = 1 outward.
    Ok(factors.into_iter().rev().fold(BigInt::one(), |acc, f| f * acc))
}

/// `D_{p,r}(0..=n_max)` from the closed form, as an exact series.
pub fn d_series(p: u64, r: u64, n_max: usize) -> Result<TruncatedSeries> {
    let coeffs = (0..=n_max as u64).map(|n| d_closed(p, r, n)).collect::<Result<_>>()?;
    Ok(TruncatedSeries::from_coeffs(RingSpec::Exact, coeffs))
}

/// `D_p(n) = D_{p,p-1}(n)`, extended by zero to negative arguments.
pub fn d_p(p: u64, n: i64) -> Result<BigInt> {
    if n < 0 {
        check_r(p, p - 1)?;
        return Ok(BigInt::zero());
    }
    d_closed(p, p - 1, n as u64)
}

/// A `p`-adic valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(u32),
    /// The valuation of exact zero.
    Infinite,
    /// A residue that vanished modulo `p^B`: the true valuation is at least `B`.
    AtLeast(u32),
}

impl Valuation {
    pub fn exact(&self) -> Option<u32> {
        match *self {
            Valuation::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Largest `v` such that the underlying value is certainly divisible by `p^v`
    /// (`u32::MAX` for zero).
    pub fn lower_bound(&self) -> u32 {
        match *self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v,
            Valuation::Infinite => u32::MAX,
        }
    }

    /// Whether the value is certainly divisible by `p^b`.
    pub fn is_at_least(&self, b: u32) -> bool {
        self.lower_bound() >= b
    }

    pub fn is_saturated(&self) -> bool {
        matches!(self, Valuation::AtLeast(_))
    }

    /// Compare with a definite threshold; `None` when a saturated value
    /// cannot be ordered against it.
    pub fn cmp_value(&self, v: u32) -> Option<Ordering> {
        match *self {
            Valuation::Finite(x) => Some(x.cmp(&v)),
            Valuation::Infinite => Some(Ordering::Greater),
            Valuation::AtLeast(b) if b > v => Some(Ordering::Greater),
            Valuation::AtLeast(_) => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
            Valuation::AtLeast(b) => write!(f, ">={b}"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => serializer.serialize_u32(*v),
            other => serializer.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Num(u32),
            Text(String),
        }
        match Wire::deserialize(deserializer)? {
            Wire::Num(v) => Ok(Valuation::Finite(v)),
            Wire::Text(t) if t == "inf" => Ok(Valuation::Infinite),
            Wire::Text(t) => t
                .strip_prefix(">=")
                .and_then(|b| b.parse().ok())
                .map(Valuation::AtLeast)
                .ok_or_else(|| D::Error::custom(format!("bad valuation {t:?}"))),
        }
    }
}

/// `nu_p(x)`; `Infinite` for zero.
pub fn nu_int(p: u64, x: &BigInt) -> Valuation {
    debug_assert!(p >= 2);
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let mut v = 0;
    let mut rest = x.abs();
    let pb = BigInt::from(p);
    loop {
        let (q, r) = rest.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        rest = q;
        v += 1;
    }
    Valuation::Finite(v)
}

/// Valuation of a residue in `[0, p^B)`. Nonzero residues have an exact
/// valuation below `B` shared by every lift; zero only certifies `>= B`.
pub fn nu_residue(p: u64, exponent: u32, residue: &BigUint) -> Result<Valuation> {
    let modulus = BigUint::from(p).pow(exponent);
    if residue >= &modulus {
        return Err(Error::ResidueOutOfRange {
            residue: residue.to_string(),
            p,
            exponent,
        });
    }
    if residue.is_zero() {
        return Ok(Valuation::AtLeast(exponent));
    }
    Ok(nu_int(p, &BigInt::from(residue.clone())))
}

/// `C(a, b)`, zero for `b < 0` or `b > a`.
pub fn binomial_exact(a: u64, b: i64) -> BigUint {
    if b < 0 || b as u64 > a {
        return BigUint::zero();
    }
    let b = (b as u64).min(a - b as u64);
    let mut acc = BigUint::one();
    for i in 0..b {
        acc *= a - i;
        acc /= i + 1;
    }
    acc
}

/// `C(a, b) mod p` as the product of digitwise binomials (Lucas).
pub fn lucas_binomial_mod_p(a: u64, b: u64, p: u64) -> Result<u64> {
    if !crate::ring::is_prime(p) {
        return Err(Error::ParameterOutOfRange(format!("{p} is not prime")));
    }
    let (mut a, mut b) = (a, b);
    let mut acc = 1 % p;
    while b > 0 || a > 0 {
        let (ad, bd) = (a % p, b % p);
        if bd > ad {
            return Ok(0);
        }
        acc = mul_mod(acc, small_binomial_mod_p(ad, bd, p), p);
        a /= p;
        b /= p;
    }
    Ok(acc)
}

/// `C(a, b) mod p` for `b <= a < p`.
fn small_binomial_mod_p(a: u64, b: u64, p: u64) -> u64 {
    let b = b.min(a - b);
    let (mut num, mut den) = (1 % p, 1 % p);
    for i in 0..b {
        num = mul_mod(num, a - i, p);
        den = mul_mod(den, i + 1, p);
    }
    mul_mod(num, pow_mod(den, p - 2, p), p)
}
