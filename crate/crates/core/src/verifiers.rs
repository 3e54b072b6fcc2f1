//! Finite-range checkers for the valuation and congruence identities.
//!
//! Every checker evaluates both sides of an identity independently over a
//! range of `n` and returns a [`CheckReport`]; violations are collected as
//! counterexamples rather than raised as errors. Errors are reserved for
//! parameters outside an identity's hypotheses.
//!
//! Throughout, `p` is an odd prime and `D_p = D_{p,p-1}` (see [`crate::digits`]).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::digits::{binomial_exact, d_closed, d_p, d_recursive, nu_int, to_digits, Valuation};
use crate::error::{Error, Result};
use crate::explorer::{valuation_sequence_with, Precision, ValuationSequence};
use crate::report::{csv_text, stable_json, CheckReport, Exportable, ReportBuilder, DEFAULT_COUNTEREXAMPLE_LIMIT};
use crate::ring::{ensure_odd_prime, is_prime, RingSpec};
use crate::series::{
    binomial_series_one_minus_x, expand_colored_partitions, expand_f_power_direct, mismatches_mod, series_mul,
    PartitionParams, TruncatedSeries,
};

fn check_u(p: u64, u: u64) -> Result<()> {
    ensure_odd_prime(p)?;
    if u == 0 || u >= p {
        return Err(Error::ParameterOutOfRange(format!("u = {u} must lie in 1..={}", p - 1)));
    }
    Ok(())
}

fn to_degree(n: u64) -> Result<usize> {
    usize::try_from(n).map_err(|_| Error::ParameterOutOfRange(format!("n_max = {n} too large")))
}

/// `k = (p - 1)(u p^s - 1)`.
pub fn exponent_for(p: u64, u: u64, s: u32) -> Result<u64> {
    check_u(p, u)?;
    let overflow = || Error::ParameterOutOfRange(format!("(p-1)(u p^s - 1) overflows for p={p} u={u} s={s}"));
    p.checked_pow(s)
        .and_then(|ps| ps.checked_mul(u))
        .and_then(|ups| (ups - 1).checked_mul(p - 1))
        .ok_or_else(overflow)
}

/// `(u, s)` with `u in 1..p`, `s >= 0` and `k = (p - 1)(u p^s - 1)`, if any.
pub fn special_exponent(p: u64, k: u64) -> Option<(u64, u32)> {
    if p < 2 || k % (p - 1) != 0 {
        return None;
    }
    let mut rest = k / (p - 1) + 1;
    let mut s = 0;
    while rest % p == 0 {
        rest /= p;
        s += 1;
    }
    (rest < p).then_some((rest, s))
}

/// Classification of an exponent `k` against the special family
/// `(p - 1)(u p^s - 1)`, together with the necessary conditions for
/// `nu_p(A_{p,k}(n))` to be eventually constant equal to `1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentClass {
    pub p: u64,
    pub k: u64,
    pub special_form: Option<(u64, u32)>,
    /// `k = 0`, which only fits the family with `u = 1, s = 0`.
    pub degenerate: bool,
    /// When `p - 1 | k`: whether `p` does not divide `k`.
    pub divisible_case_ok: Option<bool>,
    /// When `p - 1` does not divide `k = (p-1)k' + q`: whether
    /// `p | k' + 1` implies `p^2` does not divide `k' + 1`.
    pub remainder_case_ok: Option<bool>,
}

impl ExponentClass {
    pub fn describe(&self) -> String {
        match self.special_form {
            Some((u, s)) if !self.degenerate => format!("k = {} = (p-1)(u p^s - 1) with p={} u={u} s={s}", self.k, self.p),
            Some(_) => format!("k = 0 is degenerate (u=1, s=0) for p={}", self.p),
            None => "not of form (p-1)(u p^s - 1)".to_string(),
        }
    }
}

impl Exportable for ExponentClass {
    fn to_json(&self) -> Result<String> {
        stable_json(self)
    }

    fn to_csv(&self) -> Result<String> {
        let opt = |b: Option<bool>| b.map(|b| b.to_string()).unwrap_or_default();
        let (u, s) = self.special_form.map(|(u, s)| (u.to_string(), s.to_string())).unwrap_or_default();
        let row = [
            self.p.to_string(),
            self.k.to_string(),
            u,
            s,
            self.degenerate.to_string(),
            opt(self.divisible_case_ok),
            opt(self.remainder_case_ok),
        ];
        csv_text(&["p", "k", "u", "s", "degenerate", "divisible_case_ok", "remainder_case_ok"], [row])
    }
}

pub fn classify_exponent(p: u64, k: u64) -> Result<ExponentClass> {
    if !is_prime(p) {
        return Err(Error::ParameterOutOfRange(format!("{p} is not prime")));
    }
    let (divisible_case_ok, remainder_case_ok) = if k % (p - 1) == 0 {
        (Some(k % p != 0), None)
    } else {
        let next = k / (p - 1) + 1;
        (None, Some(next % p != 0 || next % (p * p) != 0))
    };
    Ok(ExponentClass {
        p,
        k,
        special_form: special_exponent(p, k),
        degenerate: k == 0,
        divisible_case_ok,
        remainder_case_ok,
    })
}

/// The writing `n = n_pp p^{s+1} + k_hat p^s + j` with `s >= 1`, `k_hat != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma3Decomposition {
    pub n: u64,
    pub s: u32,
    pub k_hat: u64,
    pub j: u64,
    pub n_pp: u64,
}

impl Lemma3Decomposition {
    pub fn reconstruct(&self, p: u64) -> u128 {
        let ps = (p as u128).pow(self.s);
        self.n_pp as u128 * ps * p as u128 + self.k_hat as u128 * ps + self.j as u128
    }
}

/// `j` is the last digit, `s` the lowest position `>= 1` with a nonzero digit.
pub fn decompose_lemma3(n: u64, p: u64) -> Result<Lemma3Decomposition> {
    ensure_odd_prime(p)?;
    if n < p {
        return Err(Error::Precondition(format!("n = {n} must be at least p = {p}")));
    }
    let digits = to_digits(n, p)?;
    let s = (1..digits.len())
        .find(|&i| digits.digit(i) != 0)
        .expect("n >= p has a nonzero digit above position 0");
    let ps = p.pow(s as u32);
    Ok(Lemma3Decomposition {
        n,
        s: s as u32,
        k_hat: digits.digit(s),
        j: digits.digit(0),
        n_pp: n / (ps * p),
    })
}

/// `sum_{i=0}^{u} (-1)^i C(u, i) D_p(n - i)`, with `D_p` zero at negative arguments.
pub fn lemma3_sum(p: u64, u: u64, n: u64) -> Result<BigInt> {
    check_u(p, u)?;
    let mut acc = BigInt::zero();
    for i in 0..=u {
        let term = BigInt::from(binomial_exact(u, i as i64)) * d_p(p, n as i64 - i as i64)?;
        if i % 2 == 1 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    Ok(acc)
}

pub fn lemma3_lhs_valuation(p: u64, u: u64, n: u64) -> Result<Valuation> {
    Ok(nu_int(p, &lemma3_sum(p, u, n)?))
}

/// `(p - k) C(p + u - 1, j) + k C(p + u - 1, p + j)`.
pub fn lemma3_rhs_value(p: u64, u: u64, j: u64, k_hat: u64) -> BigInt {
    let top = p + u - 1;
    BigInt::from(p - k_hat) * BigInt::from(binomial_exact(top, j as i64))
        + BigInt::from(k_hat) * BigInt::from(binomial_exact(top, (p + j) as i64))
}

pub fn lemma3_rhs_valuation(p: u64, u: u64, dec: &Lemma3Decomposition) -> Result<Valuation> {
    check_u(p, u)?;
    Ok(nu_int(p, &lemma3_rhs_value(p, u, dec.j, dec.k_hat)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma3Witness {
    pub j: u64,
    pub k_hat: u64,
    pub nu: u32,
}

/// Lexicographically least `(j, k_hat)`, `j <= u - 1`, whose right-hand
/// side has valuation at least 2.
pub fn find_lemma3c_witness(p: u64, u: u64) -> Result<Lemma3Witness> {
    check_u(p, u)?;
    if u < 2 {
        return Err(Error::Precondition("a valuation-two witness needs u >= 2".into()));
    }
    for j in 0..u {
        for k_hat in 1..p {
            if let Some(nu) = nu_int(p, &lemma3_rhs_value(p, u, j, k_hat)).exact().filter(|&v| v >= 2) {
                return Ok(Lemma3Witness { j, k_hat, nu });
            }
        }
    }
    Err(Error::WitnessSearchFailed { p, u })
}

/// Options shared by all checkers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verifier {
    pub counterexample_limit: usize,
    /// Cap on the modulus exponent before falling back to exact expansion.
    pub precision_cap: u32,
}

impl Default for Verifier {
    fn default() -> Self {
        Verifier {
            counterexample_limit: DEFAULT_COUNTEREXAMPLE_LIMIT,
            precision_cap: Precision::DEFAULT_CAP,
        }
    }
}

impl Verifier {
    fn builder(&self, name: &str, range: (u64, u64)) -> ReportBuilder {
        ReportBuilder::new(name, range, self.counterexample_limit)
    }

    fn valuations(&self, p: u64, k: u64, n_max: u64, b_init: u32) -> Result<ValuationSequence> {
        let cap = self.precision_cap.max(b_init);
        valuation_sequence_with(p, k, n_max, Precision::new(b_init).with_cap(cap).with_exact_fallback(true))
    }

    /// Direct product expansion of `F_p^{-r}` against the digit-product
    /// closed form and its digit recursion, for `n <= n_max`.
    pub fn lemma1(&self, p: u64, r: u64, n_max: u64) -> Result<CheckReport> {
        let r_i64 = i64::try_from(r).map_err(|_| Error::ParameterOutOfRange("r too large".into()))?;
        d_closed(p, r, 0)?;
        let degree = to_degree(n_max)?;
        let direct = expand_f_power_direct(p, -r_i64, degree, &RingSpec::Exact)?;
        let mut report = self.builder("lemma1", (0, n_max)).param("p", p).param("r", r);
        let closed: Vec<BigInt> = (0..=n_max).map(|n| d_closed(p, r, n)).collect::<Result<_>>()?;
        for n in 0..=n_max {
            let c = &closed[n as usize];
            let d = direct.coeff(n as usize);
            report.check(c == d, n, || format!("direct product {d} != closed form {c}"));
            let rec = d_recursive(p, r, n)?;
            report.check(&rec == c, n, || format!("recursion {rec} != closed form {c}"));
            if c.is_zero() {
                report.bump("zero_coefficients");
            }
        }
        // D(pn + j) = (-1)^j C(r, j) D(n) on every index that fits.
        for n in 0..=n_max / p {
            for j in 0..p {
                let idx = p * n + j;
                if idx > n_max {
                    break;
                }
                let factor = BigInt::from(binomial_exact(r, j as i64)) * if j % 2 == 1 { -1 } else { 1 };
                let expected = factor * &closed[n as usize];
                report.check(closed[idx as usize] == expected, idx, || {
                    format!("D({idx}) = {} but digit recursion gives {expected}", closed[idx as usize])
                });
            }
        }
        report.set_stat("checked", n_max + 1);
        Ok(report.finish())
    }

    /// `F_p^k = (1 - x)^{k/(p-1)} (mod p^{nu_p(k)+1})` coefficientwise.
    pub fn lemma2(&self, p: u64, k: u64, n_max: u64) -> Result<CheckReport> {
        ensure_odd_prime(p)?;
        if k == 0 || k % (p - 1) != 0 {
            return Err(Error::Precondition(format!("p - 1 = {} must divide k = {k} > 0", p - 1)));
        }
        let exponent = nu_int(p, &BigInt::from(k)).lower_bound() + 1;
        let ring = RingSpec::mod_prime_power(p, exponent)?;
        let degree = to_degree(n_max)?;
        let lhs = expand_colored_partitions(PartitionParams::new(p, k)?, degree, &ring);
        let rhs = binomial_series_one_minus_x((k / (p - 1)) as i64, degree, &ring);
        let mut report = self
            .builder("lemma2", (0, n_max))
            .param("p", p)
            .param("k", k)
            .param("modulus_exponent", exponent);
        for n in mismatches_mod(&lhs, &rhs, p, exponent)? {
            report.fail(n as u64, format!("A = {} but (1-x) side = {} mod {p}^{exponent}", lhs.coeff(n), rhs.coeff(n)));
        }
        report.set_stat("checked", n_max + 1);
        Ok(report.finish())
    }

    /// The valuation identity for every `n in [p, n_max]`, plus its special
    /// cases: value 1 when `u = 1` (for all `n >= 1`) or when `j >= u`.
    pub fn lemma3(&self, p: u64, u: u64, n_max: u64) -> Result<CheckReport> {
        check_u(p, u)?;
        let start = if u == 1 { 1 } else { p };
        let mut report = self.builder("lemma3", (start.min(n_max.max(start)), n_max)).param("p", p).param("u", u);
        for n in start..=n_max {
            let lhs = lemma3_lhs_valuation(p, u, n)?;
            if n >= p {
                let dec = decompose_lemma3(n, p)?;
                let rhs = lemma3_rhs_valuation(p, u, &dec)?;
                report.check(lhs == rhs, n, || format!("lhs nu {lhs} != rhs nu {rhs} ({dec:?})"));
                if dec.j >= u {
                    report.check(lhs == Valuation::Finite(1), n, || format!("j = {} >= u but nu = {lhs}", dec.j));
                    report.bump("j_at_least_u");
                }
            }
            if u == 1 {
                report.check(lhs == Valuation::Finite(1), n, || format!("u = 1 but nu = {lhs}"));
            }
            report.bump(format!("nu={lhs}"));
        }
        Ok(report.finish())
    }

    /// `A_{p,(p-1)(up^s-1)}(n) = sum_i (-1)^i C(up^s, i) D_p(n - i) (mod p^{s+1})`,
    /// with the right side built from the closed-form `D_p`.
    pub fn thm1_congruence(&self, p: u64, u: u64, s: u32, n_max: u64) -> Result<CheckReport> {
        if s == 0 {
            return Err(Error::ParameterOutOfRange("s must be at least 1".into()));
        }
        let k = exponent_for(p, u, s)?;
        let degree = to_degree(n_max)?;
        let ring = RingSpec::mod_prime_power(p, s + 1)?;
        let lhs = expand_colored_partitions(PartitionParams::new(p, k)?, degree, &ring);
        let d: Vec<BigInt> = (0..=n_max).map(|n| d_closed(p, p - 1, n)).collect::<Result<_>>()?;
        let d = TruncatedSeries::from_coeffs(ring, d);
        let binom = binomial_series_one_minus_x((u * p.pow(s)) as i64, degree, &ring);
        let rhs = series_mul(&binom, &d)?;
        let mut report = self
            .builder("thm1_congruence", (0, n_max))
            .param("p", p)
            .param("u", u)
            .param("s", s)
            .param("k", k);
        for n in mismatches_mod(&lhs, &rhs, p, s + 1)? {
            report.fail(n as u64, format!("A = {} but sum = {} mod {p}^{}", lhs.coeff(n), rhs.coeff(n), s + 1));
        }
        report.set_stat("checked", n_max + 1);
        Ok(report.finish())
    }

    /// The valuation statements for `k = (p-1)(up^s - 1)` over `n <= n_max`:
    ///
    /// * `nu >= 1` for `n > up^s`;
    /// * `u = 1`: `nu = 1` for `n > p^s` (the value at `n = p^s` is noted only);
    /// * `u >= 2`: both `nu = 1` and `nu >= 2` occur in every complete window
    ///   of `p^{s+1}` consecutive `n` starting at `up^s + 1`;
    /// * `s >= 2`, `n >= p^{s+1}`, `nu in {1, 2}`: `nu` is determined by the
    ///   digit `eps_s` together with the first nonzero digit above position `s`;
    /// * `s >= 2`: a block `{pn, .., pn + p - 1}` above `up^s` whose
    ///   valuations are all at most `s` is constant.
    pub fn thm1(&self, p: u64, u: u64, s: u32, n_max: u64) -> Result<CheckReport> {
        if s == 0 {
            return Err(Error::ParameterOutOfRange("s must be at least 1".into()));
        }
        let k = exponent_for(p, u, s)?;
        let seq = self.valuations(p, k, n_max, s + 2)?;
        let ps = p.pow(s);
        let threshold = u * ps;
        let mut report = self
            .builder("thm1", (threshold.saturating_add(1), n_max))
            .param("p", p)
            .param("u", u)
            .param("s", s)
            .param("k", k);
        report.set_stat("final_modulus_exponent", seq.final_exponent as u64);
        if seq.used_exact {
            report.note("precision", "exact fallback used");
        }
        if ps <= n_max {
            report.note("nu_at_p_pow_s", seq.nu(ps as usize));
        }

        for n in threshold + 1..=n_max {
            let nu = seq.nu(n as usize);
            report.check(nu.is_at_least(1), n, || format!("(a) expected nu >= 1, got {nu}"));
            if u == 1 {
                report.check(nu == Valuation::Finite(1), n, || format!("(b) expected nu = 1, got {nu}"));
            }
            if nu == Valuation::Finite(1) {
                report.bump("nu=1");
            } else if nu.is_at_least(2) {
                report.bump("nu>=2");
            }
        }

        if u >= 2 {
            let width = ps * p;
            let mut start = threshold + 1;
            let mut windows = 0;
            while start + width - 1 <= n_max {
                let window = &seq.records[start as usize..(start + width) as usize];
                let has_one = window.iter().any(|r| r.nu == Valuation::Finite(1));
                let has_two = window.iter().any(|r| r.nu.is_at_least(2));
                report.check(has_one && has_two, start, || {
                    format!("(c)/(d) window [{start}, {}] has nu=1: {has_one}, nu>=2: {has_two}", start + width - 1)
                });
                windows += 1;
                start += width;
            }
            report.set_stat("windows_checked", windows);
        }

        if s >= 2 {
            self.digit_class_constancy(&mut report, &seq, p, s)?;
            self.small_block_constancy(&mut report, &seq, p, s, threshold);
        } else {
            report.note("parts_e_f", "not applicable for s = 1");
        }
        Ok(report.finish())
    }

    fn digit_class_constancy(&self, report: &mut ReportBuilder, seq: &ValuationSequence, p: u64, s: u32) -> Result<()> {
        let from = p.pow(s + 1);
        let mut classes: BTreeMap<(u64, u64), (Valuation, u64)> = BTreeMap::new();
        for n in from..=seq.n_max() {
            let nu = seq.nu(n as usize);
            if !matches!(nu, Valuation::Finite(1 | 2)) {
                continue;
            }
            let digits = to_digits(n, p)?;
            let eps_s = digits.digit(s as usize);
            let first_above = (s as usize + 1..digits.len())
                .map(|t| digits.digit(t))
                .find(|&d| d != 0)
                .expect("n >= p^{s+1} has a nonzero digit above position s");
            match classes.get(&(eps_s, first_above)) {
                Some(&(seen, witness)) if seen != nu => report.fail(
                    n,
                    format!("(e) class (eps_s={eps_s}, eps_t={first_above}) has nu {seen} at n={witness} but {nu} here"),
                ),
                Some(_) => {}
                None => {
                    classes.insert((eps_s, first_above), (nu, n));
                }
            }
        }
        report.set_stat("digit_classes", classes.len() as u64);
        Ok(())
    }

    fn small_block_constancy(&self, report: &mut ReportBuilder, seq: &ValuationSequence, p: u64, s: u32, threshold: u64) {
        let (mut checked, mut skipped) = (0, 0);
        let mut block = threshold / p + 1;
        while block * p + p - 1 <= seq.n_max() {
            let members = &seq.records[(block * p) as usize..(block * p + p) as usize];
            if members.iter().all(|r| matches!(r.nu, Valuation::Finite(v) if v <= s)) {
                let first = members[0].nu;
                report.check(members.iter().all(|r| r.nu == first), block * p, || {
                    let shown: Vec<String> = members.iter().map(|r| r.nu.to_string()).collect();
                    format!("(f) block values [{}]", shown.join(", "))
                });
                checked += 1;
            } else {
                skipped += 1;
            }
            block += 1;
        }
        report.set_stat("blocks_checked", checked);
        report.set_stat("blocks_skipped", skipped);
    }

    /// For `p^2 (p-1) | k` and `1 <= r <= p - 2`: `nu_p(A_{p,k-r}(n)) >= nu_p(k)`
    /// for every `n in (k/(p-1), n_max]` with `n mod p in {r+1, .., p-1}`.
    pub fn thm2(&self, p: u64, k: u64, r: u64, n_max: u64) -> Result<CheckReport> {
        ensure_odd_prime(p)?;
        if k == 0 || k % (p * p * (p - 1)) != 0 {
            return Err(Error::Precondition(format!("p^2 (p-1) = {} must divide k = {k}", p * p * (p - 1))));
        }
        if r == 0 || r > p - 2 {
            return Err(Error::Precondition(format!("r = {r} must lie in 1..={}", p - 2)));
        }
        let target = nu_int(p, &BigInt::from(k)).lower_bound();
        let threshold = k / (p - 1);
        let seq = self.valuations(p, k - r, n_max, target + 1)?;
        let mut report = self
            .builder("thm2", (threshold + 1, n_max))
            .param("p", p)
            .param("k", k)
            .param("r", r)
            .param("target_nu", target);
        for n in threshold + 1..=n_max {
            if n % p <= r {
                continue;
            }
            let nu = seq.nu(n as usize);
            report.check(nu.is_at_least(target), n, || format!("n = {n} = {} mod {p}: nu = {nu} < {target}", n % p));
            report.bump("witness_candidates");
        }
        // Every window of p^2 consecutive n above the threshold has a witness.
        let width = p * p;
        let mut start = threshold + 1;
        let mut windows = 0;
        while start + width - 1 <= n_max {
            let hit = (start..start + width).any(|n| n % p > r && seq.nu(n as usize).is_at_least(target));
            report.check(hit, start, || format!("no witness in window [{start}, {}]", start + width - 1));
            windows += 1;
            start += width;
        }
        report.set_stat("windows_checked", windows);
        Ok(report.finish())
    }
}

pub fn verify_lemma1(p: u64, r: u64, n_max: u64) -> Result<CheckReport> {
    Verifier::default().lemma1(p, r, n_max)
}

pub fn verify_lemma2(p: u64, k: u64, n_max: u64) -> Result<CheckReport> {
    Verifier::default().lemma2(p, k, n_max)
}

pub fn verify_lemma3(p: u64, u: u64, n_max: u64) -> Result<CheckReport> {
    Verifier::default().lemma3(p, u, n_max)
}

pub fn verify_thm1_congruence(p: u64, u: u64, s: u32, n_max: u64) -> Result<CheckReport> {
    Verifier::default().thm1_congruence(p, u, s, n_max)
}

pub fn verify_thm1(p: u64, u: u64, s: u32, n_max: u64) -> Result<CheckReport> {
    Verifier::default().thm1(p, u, s, n_max)
}

pub fn verify_thm2(p: u64, k: u64, r: u64, n_max: u64) -> Result<CheckReport> {
    Verifier::default().thm2(p, k, r, n_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposition_examples() {
        let d = decompose_lemma3(3, 3).unwrap();
        assert_eq!((d.s, d.k_hat, d.j, d.n_pp), (1, 1, 0, 0));
        let d = decompose_lemma3(23, 3).unwrap();
        assert_eq!((d.s, d.k_hat, d.j, d.n_pp), (1, 1, 2, 2));
        let d = decompose_lemma3(27, 3).unwrap();
        assert_eq!((d.s, d.k_hat, d.j, d.n_pp), (3, 1, 0, 0));
        assert!(matches!(decompose_lemma3(2, 3), Err(Error::Precondition(_))));
        for n in 5..5000u64 {
            let d = decompose_lemma3(n, 5).unwrap();
            assert_eq!(d.reconstruct(5), n as u128);
            assert!(d.k_hat != 0 && d.s >= 1 && d.j < 5);
        }
    }

    #[test]
    fn lhs_examples() {
        assert_eq!(lemma3_sum(3, 1, 1).unwrap(), BigInt::from(-3));
        assert_eq!(lemma3_lhs_valuation(3, 1, 1).unwrap(), Valuation::Finite(1));
        // n = 8 = 2*3 + 2 has j = 2 >= u = 2.
        assert_eq!(lemma3_lhs_valuation(3, 2, 8).unwrap(), Valuation::Finite(1));
        let dec = decompose_lemma3(6, 3).unwrap();
        assert_eq!(lemma3_lhs_valuation(3, 2, 6).unwrap(), lemma3_rhs_valuation(3, 2, &dec).unwrap());
        assert!(lemma3_lhs_valuation(3, 3, 6).is_err());
        assert!(lemma3_lhs_valuation(4, 1, 6).is_err());
    }

    #[test]
    fn rhs_examples() {
        for k_hat in 1..3 {
            assert_eq!(lemma3_rhs_value(3, 1, 0, k_hat), BigInt::from(3));
        }
        assert_eq!(lemma3_rhs_value(3, 2, 0, 2), BigInt::from(9));
        assert_eq!(lemma3_rhs_value(3, 2, 2, 1), BigInt::from(12));
        let dec = Lemma3Decomposition { n: 0, s: 1, k_hat: 1, j: 2, n_pp: 0 };
        assert_eq!(lemma3_rhs_valuation(3, 2, &dec).unwrap(), Valuation::Finite(1));
    }

    #[test]
    fn witness_examples() {
        assert_eq!(find_lemma3c_witness(3, 2).unwrap(), Lemma3Witness { j: 0, k_hat: 2, nu: 2 });
        let w = find_lemma3c_witness(5, 2).unwrap();
        assert!(w.j <= 1 && w.nu >= 2);
        assert!(find_lemma3c_witness(7, 3).is_ok());
        assert!(matches!(find_lemma3c_witness(5, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn scaled_binomial_identity() {
        // k C(p^s, k) = p^s C(p^s - 1, k - 1) exactly, for k <= p^s <= 3^5.
        for p in [3u64, 5, 7, 11, 13] {
            let mut ps = p;
            while ps <= 243 {
                for k in 1..=ps {
                    let lhs = binomial_exact(ps, k as i64) * k;
                    let rhs = binomial_exact(ps - 1, k as i64 - 1) * ps;
                    assert_eq!(lhs, rhs, "p^s = {ps}, k = {k}");
                }
                ps *= p;
            }
        }
    }

    #[test]
    fn lemma_reports() {
        let r = verify_lemma1(3, 2, 0).unwrap();
        assert!(r.passed);
        assert!(verify_lemma1(3, 3, 10).is_err());
        let r = verify_lemma2(3, 18, 1000).unwrap();
        assert!(r.passed, "{:?}", r.counterexamples);
        assert_eq!(r.params["modulus_exponent"], 3);
        assert!(matches!(verify_lemma2(5, 6, 10), Err(Error::Precondition(_))));
        let r = verify_lemma3(3, 2, 3000).unwrap();
        assert!(r.passed);
        let observed: Vec<&String> = r.stats.keys().filter(|k| k.starts_with("nu=")).collect();
        assert_eq!(observed, ["nu=1", "nu=2"]);
    }

    #[test]
    fn lemma2_catches_a_wrong_modulus() {
        // With k = 4 the congruence holds mod 3 only; force a check mod 9.
        let ring = RingSpec::mod_prime_power(3, 2).unwrap();
        let lhs = expand_colored_partitions(PartitionParams::new(3, 4).unwrap(), 50, &ring);
        let rhs = binomial_series_one_minus_x(2, 50, &ring);
        assert!(!mismatches_mod(&lhs, &rhs, 3, 2).unwrap().is_empty());
        assert!(mismatches_mod(&lhs, &rhs, 3, 1).unwrap().is_empty());
    }

    #[test]
    fn special_exponent_reports() {
        let r = verify_thm1(3, 1, 1, 2000).unwrap();
        assert!(r.passed, "{:?}", r.counterexamples);
        assert_eq!(r.stat("nu>=2"), 0);
        assert_eq!(r.notes["nu_at_p_pow_s"], "1");
        let r = verify_thm1(3, 2, 1, 2000).unwrap();
        assert!(r.passed, "{:?}", r.counterexamples);
        assert!(r.stat("nu=1") > 0 && r.stat("nu>=2") > 0);
        let r = verify_thm1(3, 2, 2, 3000).unwrap();
        assert!(r.passed, "{:?}", r.counterexamples);
        assert!(r.stat("digit_classes") > 0 && r.stat("blocks_checked") > 0);
        assert!(verify_thm1(3, 3, 1, 10).is_err());
        assert!(verify_thm1(3, 1, 0, 10).is_err());
    }

    #[test]
    fn residue_class_bound_reports() {
        let r = verify_thm2(3, 54, 1, 2000).unwrap();
        assert!(r.passed, "{:?}", r.counterexamples);
        assert_eq!(r.params["target_nu"], 3);
        assert!(matches!(verify_thm2(3, 12, 1, 100), Err(Error::Precondition(_))));
        assert!(matches!(verify_thm2(5, 100, 4, 100), Err(Error::Precondition(_))));
    }

    #[test]
    fn classification_examples() {
        let c = classify_exponent(3, 4).unwrap();
        assert_eq!(c.special_form, Some((1, 1)));
        assert_eq!(c.divisible_case_ok, Some(true));
        assert_eq!(classify_exponent(3, 10).unwrap().special_form, Some((2, 1)));
        let c = classify_exponent(3, 7).unwrap();
        assert_eq!(c.special_form, None);
        assert_eq!(c.describe(), "not of form (p-1)(u p^s - 1)");
        let zero = classify_exponent(5, 0).unwrap();
        assert!(zero.degenerate);
        assert_eq!(zero.special_form, Some((1, 0)));
        assert_eq!(classify_exponent(3, 18).unwrap().divisible_case_ok, Some(false));
        // k = 3 = 4*0 + 3 with p = 5: k' + 1 = 1 is not divisible by 5.
        assert_eq!(classify_exponent(5, 3).unwrap().remainder_case_ok, Some(true));
        // k = 4*24 + 1 = 97: k' + 1 = 25.
        assert_eq!(classify_exponent(5, 97).unwrap().remainder_case_ok, Some(false));
        assert!(classify_exponent(4, 3).is_err());
        assert_eq!(
            classify_exponent(3, 10).unwrap().to_csv().unwrap(),
            "p,k,u,s,degenerate,divisible_case_ok,remainder_case_ok\n3,10,2,1,false,true,\n"
        );
        assert_eq!(special_exponent(2, 7), Some((1, 3)));
        for p in [3u64, 5, 7] {
            for u in 1..p {
                for s in 0..4 {
                    assert_eq!(special_exponent(p, exponent_for(p, u, s).unwrap()), Some((u, s)));
                }
            }
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let a = verify_thm1(5, 2, 1, 800).unwrap();
        let b = verify_thm1(5, 2, 1, 800).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    }
}
