//! Coefficient rings: the integers, or residues modulo an odd prime power.
//!
//! [`RingSpec`] is the user-facing description. Internally every series
//! routine is written once against the [`Arith`] trait and dispatched onto
//! one of three backends: exact big integers, residues in machine words
//! (whenever `p^B < 2^63`), and residues as big unsigned integers.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the exponent `B` of a `p^B` modulus.
pub const DEFAULT_EXPONENT_CAP: u32 = 64 * 4;

/// Deterministic primality test for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % small == 0 {
            return n == small;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    // These witnesses are sufficient for every n < 2^64.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub(crate) fn ensure_odd_prime(p: u64) -> Result<()> {
    if p % 2 == 1 && is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotOddPrime(p))
    }
}

/// The coefficient ring of a truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RingSpec {
    /// Arbitrary-precision integers.
    Exact,
    /// Residues modulo `p^exponent`, stored canonically in `[0, p^exponent)`.
    ModPrimePower { p: u64, exponent: u32 },
}

impl RingSpec {
    /// `Z / p^exponent` with the default exponent cap.
    pub fn mod_prime_power(p: u64, exponent: u32) -> Result<Self> {
        Self::mod_prime_power_capped(p, exponent, DEFAULT_EXPONENT_CAP)
    }

    pub fn mod_prime_power_capped(p: u64, exponent: u32, cap: u32) -> Result<Self> {
        ensure_odd_prime(p)?;
        if exponent == 0 || exponent > cap {
            return Err(Error::ExponentOutOfRange { exponent, cap });
        }
        Ok(RingSpec::ModPrimePower { p, exponent })
    }

    /// The modulus `p^B`, or `None` for the exact ring.
    pub fn modulus(&self) -> Option<BigUint> {
        match *self {
            RingSpec::Exact => None,
            RingSpec::ModPrimePower { p, exponent } => Some(BigUint::from(p).pow(exponent)),
        }
    }

    /// Reduce an integer into this ring's canonical representative.
    pub fn reduce(&self, x: &BigInt) -> BigInt {
        match self.modulus() {
            None => x.clone(),
            Some(m) => BigInt::from_biguint(Sign::Plus, reduce_big(x, &m)),
        }
    }

    pub(crate) fn backend(&self) -> Backend {
        match self.modulus() {
            None => Backend::Exact,
            Some(m) => match m.to_u64() {
                Some(small) if small < (1u64 << 63) => Backend::Small(small),
                _ => Backend::Big(m),
            },
        }
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Exact => f.write_str("Z"),
            RingSpec::ModPrimePower { p, exponent } => write!(f, "Z/{p}^{exponent}"),
        }
    }
}

/// JSON shape of a ring: `{"kind": "exact"}` or `{"kind": "mod", "p": .., "B": ..}`.
#[derive(Serialize, Deserialize)]
struct RingWire {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    p: Option<u64>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none", default)]
    exponent: Option<u32>,
}

impl Serialize for RingSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire = match *self {
            RingSpec::Exact => RingWire {
                kind: "exact".into(),
                p: None,
                exponent: None,
            },
            RingSpec::ModPrimePower { p, exponent } => RingWire {
                kind: "mod".into(),
                p: Some(p),
                exponent: Some(exponent),
            },
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RingSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = RingWire::deserialize(deserializer)?;
        match (wire.kind.as_str(), wire.p, wire.exponent) {
            ("exact", _, _) => Ok(RingSpec::Exact),
            ("mod", Some(p), Some(b)) => {
                RingSpec::mod_prime_power(p, b).map_err(D::Error::custom)
            }
            ("mod", _, _) => Err(D::Error::custom("mod ring requires both p and B")),
            (other, _, _) => Err(D::Error::custom(format!("unknown ring kind {other:?}"))),
        }
    }
}

pub(crate) fn reduce_big(x: &BigInt, m: &BigUint) -> BigUint {
    let r = x.magnitude() % m;
    if x.sign() == Sign::Minus && !r.is_zero() {
        m - r
    } else {
        r
    }
}

pub(crate) enum Backend {
    Exact,
    Small(u64),
    Big(BigUint),
}

/// Ring operations used by the series kernels.
pub(crate) trait Arith {
    type Elem: Clone;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn embed(&self, x: &BigInt) -> Self::Elem;
    fn to_big(&self, x: &Self::Elem) -> BigInt;

    /// `sum_{t=0}^{n/stride} c[n - stride*t] * a[t]`.
    fn strided_dot(&self, c: &[Self::Elem], a: &[Self::Elem], n: usize, stride: usize) -> Self::Elem {
        let mut acc = self.zero();
        for (t, at) in a.iter().enumerate().take(n / stride + 1) {
            acc = self.add(&acc, &self.mul(&c[n - stride * t], at));
        }
        acc
    }

    /// `sum_{i=0}^{n} a[i] * b[n - i]`.
    fn cauchy_term(&self, a: &[Self::Elem], b: &[Self::Elem], n: usize) -> Self::Elem {
        let mut acc = self.zero();
        for i in 0..=n {
            acc = self.add(&acc, &self.mul(&a[i], &b[n - i]));
        }
        acc
    }
}

pub(crate) struct ExactArith;

impl Arith for ExactArith {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn embed(&self, x: &BigInt) -> BigInt {
        x.clone()
    }
    fn to_big(&self, x: &BigInt) -> BigInt {
        x.clone()
    }

    fn strided_dot(&self, c: &[BigInt], a: &[BigInt], n: usize, stride: usize) -> BigInt {
        let mut acc = BigInt::zero();
        for (t, at) in a.iter().enumerate().take(n / stride + 1) {
            acc += &c[n - stride * t] * at;
        }
        acc
    }
}

/// Residues modulo `m < 2^63` held in a `u64`.
pub(crate) struct SmallMod {
    m: u64,
}

impl SmallMod {
    pub(crate) fn new(m: u64) -> Self {
        debug_assert!((1..(1u64 << 63)).contains(&m));
        SmallMod { m }
    }

    #[inline]
    fn sum_products<'a>(&self, pairs: impl Iterator<Item = (&'a u64, &'a u64)>) -> u64 {
        let m = self.m as u128;
        if self.m <= u32::MAX as u64 {
            // Each product is below 2^64, so 2^64 of them fit before overflow.
            let acc: u128 = pairs.map(|(&x, &y)| x as u128 * y as u128).sum();
            (acc % m) as u64
        } else {
            let acc: u128 = pairs.map(|(&x, &y)| (x as u128 * y as u128) % m).sum();
            (acc % m) as u64
        }
    }
}

impl Arith for SmallMod {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.m
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.m)
    }
    fn embed(&self, x: &BigInt) -> u64 {
        reduce_big(x, &BigUint::from(self.m))
            .to_u64()
            .expect("residue below a u64 modulus")
    }
    fn to_big(&self, x: &u64) -> BigInt {
        BigInt::from(*x)
    }

    fn strided_dot(&self, c: &[u64], a: &[u64], n: usize, stride: usize) -> u64 {
        let terms = n / stride + 1;
        self.sum_products(
            a.iter()
                .take(terms)
                .enumerate()
                .map(|(t, at)| (&c[n - stride * t], at)),
        )
    }

    fn cauchy_term(&self, a: &[u64], b: &[u64], n: usize) -> u64 {
        self.sum_products(a[..=n].iter().zip(b[..=n].iter().rev()))
    }
}

/// Residues modulo an arbitrary `m`, held as `BigUint`.
pub(crate) struct BigMod {
    m: BigUint,
}

impl BigMod {
    pub(crate) fn new(m: BigUint) -> Self {
        BigMod { m }
    }
}

impl Arith for BigMod {
    type Elem = BigUint;

    fn zero(&self) -> BigUint {
        BigUint::zero()
    }
    fn one(&self) -> BigUint {
        BigUint::one() % &self.m
    }
    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if s >= self.m {
            s - &self.m
        } else {
            s
        }
    }
    fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            a + &self.m - b
        }
    }
    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.m
    }
    fn embed(&self, x: &BigInt) -> BigUint {
        reduce_big(x, &self.m)
    }
    fn to_big(&self, x: &BigUint) -> BigInt {
        BigInt::from_biguint(Sign::Plus, x.clone())
    }

    fn strided_dot(&self, c: &[BigUint], a: &[BigUint], n: usize, stride: usize) -> BigUint {
        let mut acc = BigUint::zero();
        for (t, at) in a.iter().enumerate().take(n / stride + 1) {
            acc += &c[n - stride * t] * at;
        }
        acc % &self.m
    }

    fn cauchy_term(&self, a: &[BigUint], b: &[BigUint], n: usize) -> BigUint {
        let mut acc = BigUint::zero();
        for i in 0..=n {
            acc += &a[i] * &b[n - i];
        }
        acc % &self.m
    }
}

/// Run `$body` with `$ar` bound to the arithmetic backend for `$ring`.
macro_rules! with_arith {
    ($ring:expr, $ar:ident => $body:expr) => {
        match $ring.backend() {
            $crate::ring::Backend::Exact => {
                let $ar = $crate::ring::ExactArith;
                $body
            }
            $crate::ring::Backend::Small(m) => {
                let $ar = $crate::ring::SmallMod::new(m);
                $body
            }
            $crate::ring::Backend::Big(m) => {
                let $ar = $crate::ring::BigMod::new(m);
                $body
            }
        }
    };
}
pub(crate) use with_arith;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn mod_ring_validation() {
        assert!(RingSpec::mod_prime_power(3, 1).is_ok());
        assert!(RingSpec::mod_prime_power(3, 256).is_ok());
        assert!(matches!(
            RingSpec::mod_prime_power(3, 257),
            Err(Error::ExponentOutOfRange { .. })
        ));
        assert!(matches!(RingSpec::mod_prime_power(3, 0), Err(Error::ExponentOutOfRange { .. })));
        assert!(matches!(RingSpec::mod_prime_power(2, 4), Err(Error::NotOddPrime(2))));
        assert!(matches!(RingSpec::mod_prime_power(9, 4), Err(Error::NotOddPrime(9))));
        assert!(RingSpec::mod_prime_power_capped(5, 10, 8).is_err());
    }

    #[test]
    fn reduction_is_canonical() {
        let ring = RingSpec::mod_prime_power(3, 2).unwrap();
        assert_eq!(ring.reduce(&BigInt::from(-1)), BigInt::from(8));
        assert_eq!(ring.reduce(&BigInt::from(-9)), BigInt::from(0));
        assert_eq!(ring.reduce(&BigInt::from(20)), BigInt::from(2));
        assert_eq!(RingSpec::Exact.reduce(&BigInt::from(-7)), BigInt::from(-7));
    }

    #[test]
    fn backends_agree() {
        let xs: Vec<BigInt> = [-17i64, 0, 5, 123_456, -99].iter().map(|&x| BigInt::from(x)).collect();
        let m = 3u64.pow(5);
        let small = SmallMod::new(m);
        let big = BigMod::new(BigUint::from(m));
        for x in &xs {
            for y in &xs {
                let (sx, sy) = (small.embed(x), small.embed(y));
                let (bx, by) = (big.embed(x), big.embed(y));
                assert_eq!(small.to_big(&small.mul(&sx, &sy)), big.to_big(&big.mul(&bx, &by)));
                assert_eq!(small.to_big(&small.sub(&sx, &sy)), big.to_big(&big.sub(&bx, &by)));
                assert_eq!(small.to_big(&small.add(&sx, &sy)), big.to_big(&big.add(&bx, &by)));
            }
        }
    }

    #[test]
    fn ring_json_shape() {
        let ring = RingSpec::mod_prime_power(5, 3).unwrap();
        assert_eq!(serde_json::to_string(&ring).unwrap(), r#"{"kind":"mod","p":5,"B":3}"#);
        assert_eq!(serde_json::to_string(&RingSpec::Exact).unwrap(), r#"{"kind":"exact"}"#);
        let back: RingSpec = serde_json::from_str(r#"{"kind":"mod","p":5,"B":3}"#).unwrap();
        assert_eq!(back, ring);
        assert!(serde_json::from_str::<RingSpec>(r#"{"kind":"mod","p":4,"B":3}"#).is_err());
        assert!(serde_json::from_str::<RingSpec>(r#"{"kind":"mod","p":5}"#).is_err());
    }
}
