//! Truncated power series for powers of `F_m(x) = prod_{t>=0} 1/(1 - x^{m^t})`.
//!
//! `F_m(x)^k` is expanded through the functional equation
//! `F_m(x)^k = F_m(x^m)^k (1 - x)^{-k}`, which gives
//!
//! ```text
//! A(n) = sum_{t=0}^{n/m} C(n - m t + k - 1, k - 1) A(t)
//! ```
//!
//! at `O(N^2 / m)` ring operations. [`expand_f_power_direct`] multiplies out
//! the individual factors instead and is kept as an independent oracle.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{with_arith, Arith, RingSpec};

/// Parameters of `F_m(x)^k`: base `m >= 2` and `k` colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PartitionParams {
    m: u64,
    k: u64,
}

impl PartitionParams {
    pub fn new(m: u64, k: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidBase(m));
        }
        Ok(PartitionParams { m, k })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn k(&self) -> u64 {
        self.k
    }
}

/// Coefficients `c_0..=c_N` of a power series over a [`RingSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    ring: RingSpec,
    coeffs: Vec<BigInt>,
}

impl TruncatedSeries {
    /// Build a series from raw coefficients, reducing them into the ring.
    ///
    /// Panics if `coeffs` is empty.
    pub fn from_coeffs(ring: RingSpec, coeffs: Vec<BigInt>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series has at least one coefficient");
        let coeffs = match ring {
            RingSpec::Exact => coeffs,
            _ => coeffs.iter().map(|c| ring.reduce(c)).collect(),
        };
        TruncatedSeries { ring, coeffs }
    }

    /// The constant series `1` truncated at `degree`.
    pub fn one(ring: RingSpec, degree: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); degree + 1];
        coeffs[0] = BigInt::one();
        TruncatedSeries::from_coeffs(ring, coeffs)
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &BigInt {
        &self.coeffs[n]
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    /// Reinterpret the coefficients in another ring (reducing them).
    pub fn reduce_to(&self, ring: RingSpec) -> Result<Self> {
        match (self.ring, ring) {
            (a, b) if a == b => Ok(self.clone()),
            (RingSpec::Exact, _) => Ok(TruncatedSeries::from_coeffs(ring, self.coeffs.clone())),
            (RingSpec::ModPrimePower { p: p1, exponent: b1 }, RingSpec::ModPrimePower { p: p2, exponent: b2 })
                if p1 == p2 && b2 <= b1 =>
            {
                Ok(TruncatedSeries::from_coeffs(ring, self.coeffs.clone()))
            }
            (from, to) => Err(Error::RingMismatch {
                left: from.to_string(),
                right: to.to_string(),
            }),
        }
    }

    /// Keep only coefficients up to `degree`.
    pub fn truncate(&self, degree: usize) -> Self {
        let keep = degree.min(self.degree());
        TruncatedSeries {
            ring: self.ring,
            coeffs: self.coeffs[..=keep].to_vec(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesWire {
    ring: RingSpec,
    degree: usize,
    coeffs: Vec<String>,
}

impl Serialize for TruncatedSeries {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SeriesWire {
            ring: self.ring,
            degree: self.degree(),
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TruncatedSeries {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = SeriesWire::deserialize(deserializer)?;
        if wire.coeffs.len() != wire.degree + 1 {
            return Err(D::Error::custom(Error::MalformedSeries(format!(
                "degree {} but {} coefficients",
                wire.degree,
                wire.coeffs.len()
            ))));
        }
        let coeffs = wire
            .coeffs
            .iter()
            .map(|c| c.parse::<BigInt>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| D::Error::custom(Error::MalformedSeries(e.to_string())))?;
        if let Some(m) = wire.ring.modulus() {
            let m = BigInt::from_biguint(Sign::Plus, m);
            if let Some(bad) = coeffs.iter().find(|c| c.sign() == Sign::Minus || **c >= m) {
                return Err(D::Error::custom(Error::MalformedSeries(format!(
                    "coefficient {bad} is not a canonical residue in {}",
                    wire.ring
                ))));
            }
        }
        Ok(TruncatedSeries { ring: wire.ring, coeffs })
    }
}

/// `C(j + k - 1, k - 1)` for `j = 0..=degree`, built row-incrementally in exact
/// arithmetic: the coefficients of `(1 - x)^{-k}`.
fn negative_binomial_row(k: u64, degree: usize) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(degree + 1);
    let mut c = BigUint::one();
    row.push(BigInt::one());
    for j in 1..=degree as u64 {
        c *= j + k - 1;
        c /= j;
        row.push(BigInt::from(c.clone()));
    }
    row
}

/// `(-1)^i C(e, i)` for `i = 0..=degree` (zero past `e`).
fn alternating_binomial_row(e: u64, degree: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::zero(); degree + 1];
    let mut c = BigInt::one();
    for i in 0..=(degree as u64).min(e) {
        if i > 0 {
            c *= e - i + 1;
            c /= i;
        }
        row[i as usize] = if i % 2 == 1 { -c.clone() } else { c.clone() };
    }
    row
}

fn into_ring<A: Arith>(ar: &A, xs: &[BigInt]) -> Vec<A::Elem> {
    xs.iter().map(|x| ar.embed(x)).collect()
}

fn out_of_ring<A: Arith>(ar: &A, xs: &[A::Elem]) -> Vec<BigInt> {
    xs.iter().map(|x| ar.to_big(x)).collect()
}

fn colored_recurrence<A: Arith>(ar: &A, m: usize, row: &[BigInt]) -> Vec<BigInt> {
    let row = into_ring(ar, row);
    let degree = row.len() - 1;
    let mut a = Vec::with_capacity(degree + 1);
    a.push(ar.one());
    for n in 1..=degree {
        let next = ar.strided_dot(&row, &a, n, m);
        a.push(next);
    }
    out_of_ring(ar, &a)
}

/// `A_{m,k}(n)` for `n = 0..=degree`, reduced into `ring`.
pub fn expand_colored_partitions(params: PartitionParams, degree: usize, ring: &RingSpec) -> TruncatedSeries {
    if params.k == 0 {
        return TruncatedSeries::one(*ring, degree);
    }
    let row = negative_binomial_row(params.k, degree);
    let m = usize::try_from(params.m).unwrap_or(usize::MAX);
    let coeffs = with_arith!(ring, ar => colored_recurrence(&ar, m, &row));
    TruncatedSeries { ring: *ring, coeffs }
}

fn factor_product<A: Arith>(ar: &A, m: u64, e: i64, degree: usize) -> Vec<BigInt> {
    let mut c = vec![ar.zero(); degree + 1];
    c[0] = ar.one();
    let mut step: u64 = 1;
    while step as u128 <= degree as u128 {
        let s = step as usize;
        for _ in 0..e.unsigned_abs() {
            if e > 0 {
                // Divide by (1 - x^s).
                for n in s..=degree {
                    c[n] = ar.add(&c[n], &c[n - s]);
                }
            } else {
                // Multiply by (1 - x^s).
                for n in (s..=degree).rev() {
                    c[n] = ar.sub(&c[n], &c[n - s]);
                }
            }
        }
        match step.checked_mul(m) {
            Some(next) => step = next,
            None => break,
        }
    }
    out_of_ring(ar, &c)
}

/// `F_m(x)^e` truncated at `degree`, computed factor by factor.
///
/// Positive `e` gives the colored partition numbers `A_{m,e}`, negative `e`
/// the digit-product coefficients `D_{m,-e}`; `e = 0` is the constant `1`.
pub fn expand_f_power_direct(m: u64, e: i64, degree: usize, ring: &RingSpec) -> Result<TruncatedSeries> {
    if m < 2 {
        return Err(Error::InvalidBase(m));
    }
    let coeffs = with_arith!(ring, ar => factor_product(&ar, m, e, degree));
    Ok(TruncatedSeries { ring: *ring, coeffs })
}

/// `(1 - x)^e` truncated at `degree`.
pub fn binomial_series_one_minus_x(e: i64, degree: usize, ring: &RingSpec) -> TruncatedSeries {
    let coeffs = if e >= 0 {
        alternating_binomial_row(e as u64, degree)
    } else {
        negative_binomial_row(e.unsigned_abs(), degree)
    };
    TruncatedSeries::from_coeffs(*ring, coeffs)
}

fn check_compatible(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<()> {
    if a.ring != b.ring {
        return Err(Error::RingMismatch {
            left: a.ring.to_string(),
            right: b.ring.to_string(),
        });
    }
    if a.degree() != b.degree() {
        return Err(Error::DegreeMismatch {
            left: a.degree(),
            right: b.degree(),
        });
    }
    Ok(())
}

fn cauchy<A: Arith>(ar: &A, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let (a, b) = (into_ring(ar, a), into_ring(ar, b));
    let prod: Vec<A::Elem> = (0..a.len()).map(|n| ar.cauchy_term(&a, &b, n)).collect();
    out_of_ring(ar, &prod)
}

/// Truncated Cauchy product of two series over the same ring and degree.
pub fn series_mul(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
    check_compatible(a, b)?;
    let coeffs = with_arith!(a.ring, ar => cauchy(&ar, &a.coeffs, &b.coeffs));
    Ok(TruncatedSeries { ring: a.ring, coeffs })
}

/// Every index `n` with `a_n != b_n (mod p^exponent)`, ascending.
pub fn mismatches_mod(a: &TruncatedSeries, b: &TruncatedSeries, p: u64, exponent: u32) -> Result<Vec<usize>> {
    if a.degree() != b.degree() {
        return Err(Error::DegreeMismatch {
            left: a.degree(),
            right: b.degree(),
        });
    }
    let m = BigInt::from(p).pow(exponent);
    for s in [a, b] {
        if let Some(sm) = s.ring.modulus() {
            let sm = BigInt::from_biguint(Sign::Plus, sm);
            if !(&sm % &m).is_zero() {
                return Err(Error::RingMismatch {
                    left: s.ring.to_string(),
                    right: format!("Z/{p}^{exponent}"),
                });
            }
        }
    }
    Ok(a.coeffs
        .iter()
        .zip(&b.coeffs)
        .enumerate()
        .filter(|(_, (x, y))| !((*x - *y) % &m).is_zero())
        .map(|(n, _)| n)
        .collect())
}

/// Smallest `n` with `a_n != b_n (mod p^exponent)`, if any.
pub fn first_mismatch_mod(a: &TruncatedSeries, b: &TruncatedSeries, p: u64, exponent: u32) -> Result<Option<usize>> {
    Ok(mismatches_mod(a, b, p, exponent)?.into_iter().next())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn colored(m: u64, k: u64, n: usize) -> TruncatedSeries {
        expand_colored_partitions(PartitionParams::new(m, k).unwrap(), n, &RingSpec::Exact)
    }

    #[test]
    fn colored_partition_examples() {
        assert_eq!(colored(3, 4, 0).coeffs(), ints(&[1]).as_slice());
        assert_eq!(colored(3, 4, 1).coeff(1), &BigInt::from(4));
        // Frozen from exhaustive enumeration (see tests/oracles.rs).
        assert_eq!(colored(3, 4, 4).coeffs(), ints(&[1, 4, 10, 24, 51]).as_slice());
        assert_eq!(colored(3, 0, 5).coeffs(), ints(&[1, 0, 0, 0, 0, 0]).as_slice());
        assert!(matches!(PartitionParams::new(1, 3), Err(Error::InvalidBase(1))));
    }

    #[test]
    fn special_exponent_has_valuation_one() {
        let s = colored(3, 4, 200);
        for n in 4..=200 {
            assert_eq!(crate::digits::nu_int(3, s.coeff(n)), crate::digits::Valuation::Finite(1), "n = {n}");
        }
    }

    #[test]
    fn direct_product_examples() {
        let direct = expand_f_power_direct(3, 1, 9, &RingSpec::Exact).unwrap();
        assert_eq!(direct, colored(3, 1, 9));
        assert_eq!(direct.coeffs(), ints(&[1, 1, 1, 2, 2, 2, 3, 3, 3, 5]).as_slice());
        // A_{3,2}(2) = 3: the part 1 twice, colors {a,a},{a,b},{b,b}.
        assert_eq!(expand_f_power_direct(3, 2, 2, &RingSpec::Exact).unwrap().coeffs(), ints(&[1, 2, 3]).as_slice());
        let d = expand_f_power_direct(3, -2, 40, &RingSpec::Exact).unwrap();
        for n in 0..=40u64 {
            assert_eq!(d.coeff(n as usize), &crate::digits::d_closed(3, 2, n).unwrap());
        }
        assert_eq!(expand_f_power_direct(3, 0, 3, &RingSpec::Exact).unwrap(), TruncatedSeries::one(RingSpec::Exact, 3));
        assert!(expand_f_power_direct(1, 2, 3, &RingSpec::Exact).is_err());
    }

    #[test]
    fn binomial_series_examples() {
        let z = RingSpec::Exact;
        assert_eq!(binomial_series_one_minus_x(2, 3, &z).coeffs(), ints(&[1, -2, 1, 0]).as_slice());
        assert_eq!(binomial_series_one_minus_x(-1, 3, &z).coeffs(), ints(&[1, 1, 1, 1]).as_slice());
        assert_eq!(binomial_series_one_minus_x(-4, 2, &z).coeffs(), ints(&[1, 4, 10]).as_slice());
        let r = RingSpec::mod_prime_power(3, 1).unwrap();
        assert_eq!(binomial_series_one_minus_x(2, 3, &r).coeffs(), ints(&[1, 1, 1, 0]).as_slice());
    }

    #[test]
    fn multiplication_examples() {
        let z = RingSpec::Exact;
        let s = colored(2, 3, 12);
        assert_eq!(series_mul(&TruncatedSeries::one(z, 12), &s).unwrap(), s);
        let inv = series_mul(&binomial_series_one_minus_x(1, 8, &z), &binomial_series_one_minus_x(-1, 8, &z)).unwrap();
        assert_eq!(inv, TruncatedSeries::one(z, 8));
        let one_minus_x = series_mul(&binomial_series_one_minus_x(2, 8, &z), &binomial_series_one_minus_x(-1, 8, &z)).unwrap();
        assert_eq!(one_minus_x, binomial_series_one_minus_x(1, 8, &z));
    }

    #[test]
    fn multiplication_errors() {
        let z = RingSpec::Exact;
        let r = RingSpec::mod_prime_power(3, 2).unwrap();
        assert!(matches!(
            series_mul(&TruncatedSeries::one(z, 3), &TruncatedSeries::one(z, 4)),
            Err(Error::DegreeMismatch { .. })
        ));
        assert!(matches!(
            series_mul(&TruncatedSeries::one(z, 3), &TruncatedSeries::one(r, 3)),
            Err(Error::RingMismatch { .. })
        ));
    }

    #[test]
    fn mismatch_examples() {
        let z = RingSpec::Exact;
        let s = colored(3, 5, 30);
        assert_eq!(first_mismatch_mod(&s, &s, 3, 4).unwrap(), None);
        let f2 = colored(3, 2, 500);
        assert_eq!(first_mismatch_mod(&f2, &binomial_series_one_minus_x(1, 500, &z), 3, 1).unwrap(), None);
        let a = TruncatedSeries::from_coeffs(z, ints(&[1, 1]));
        let b = TruncatedSeries::from_coeffs(z, ints(&[1, 4]));
        assert_eq!(first_mismatch_mod(&a, &b, 3, 1).unwrap(), None);
        assert_eq!(first_mismatch_mod(&a, &b, 3, 2).unwrap(), Some(1));
        let c = TruncatedSeries::from_coeffs(z, ints(&[1, 5]));
        assert_eq!(first_mismatch_mod(&a, &c, 3, 1).unwrap(), Some(1));
        assert!(first_mismatch_mod(&a, &TruncatedSeries::one(z, 3), 3, 1).is_err());
        // A mod-9 series cannot be compared modulo 27.
        let r = RingSpec::mod_prime_power(3, 2).unwrap();
        assert!(first_mismatch_mod(&a.reduce_to(r).unwrap(), &b, 3, 3).is_err());
    }

    #[test]
    fn oracle_equivalence_small_bases() {
        for m in [2u64, 3, 5] {
            for k in 1..=6u64 {
                let direct = expand_f_power_direct(m, k as i64, 200, &RingSpec::Exact).unwrap();
                assert_eq!(colored(m, k, 200), direct, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn wide_moduli_use_big_backend() {
        // 3^60 exceeds 2^63, forcing the BigUint backend.
        let ring = RingSpec::mod_prime_power(3, 60).unwrap();
        let exact = colored(3, 7, 300);
        let modular = expand_colored_partitions(PartitionParams::new(3, 7).unwrap(), 300, &ring);
        assert_eq!(exact.reduce_to(ring).unwrap(), modular);
        // 5^27 sits between 2^32 and 2^63.
        let ring = RingSpec::mod_prime_power(5, 27).unwrap();
        let modular = expand_colored_partitions(PartitionParams::new(3, 7).unwrap(), 300, &ring);
        assert_eq!(exact.reduce_to(ring).unwrap(), modular);
    }

    #[test]
    fn json_shape() {
        let ring = RingSpec::mod_prime_power(3, 2).unwrap();
        let s = expand_colored_partitions(PartitionParams::new(3, 4).unwrap(), 3, &ring);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"ring":{"kind":"mod","p":3,"B":2},"degree":3,"coeffs":["1","4","1","6"]}"#);
        assert_eq!(serde_json::from_str::<TruncatedSeries>(&text).unwrap(), s);
        let exact = colored(2, 40, 60);
        let back: TruncatedSeries = serde_json::from_str(&serde_json::to_string(&exact).unwrap()).unwrap();
        assert_eq!(back, exact);
        assert!(serde_json::from_str::<TruncatedSeries>(r#"{"ring":{"kind":"exact"},"degree":2,"coeffs":["1"]}"#).is_err());
        assert!(serde_json::from_str::<TruncatedSeries>(r#"{"ring":{"kind":"mod","p":3,"B":1},"degree":0,"coeffs":["3"]}"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn modular_consistency(m in 2u64..6, k in 1u64..12, n in 0usize..150, p in prop::sample::select(vec![3u64, 5, 7]), b in 1u32..25) {
            let params = PartitionParams::new(m, k).unwrap();
            let ring = RingSpec::mod_prime_power(p, b).unwrap();
            let exact = expand_colored_partitions(params, n, &RingSpec::Exact);
            prop_assert_eq!(exact.reduce_to(ring).unwrap(), expand_colored_partitions(params, n, &ring));
        }

        #[test]
        fn colors_add_under_multiplication(m in 2u64..5, k1 in 0u64..6, k2 in 0u64..6, n in 0usize..80) {
            let z = RingSpec::Exact;
            let both = expand_colored_partitions(PartitionParams::new(m, k1 + k2).unwrap(), n, &z);
            let a = expand_colored_partitions(PartitionParams::new(m, k1).unwrap(), n, &z);
            let b = expand_colored_partitions(PartitionParams::new(m, k2).unwrap(), n, &z);
            prop_assert_eq!(series_mul(&a, &b).unwrap(), both);
        }
    }
}
