//! Empirical probes of the sequences `n -> nu_p(A_{p,k}(n))`.
//!
//! Valuations are read off residues modulo `p^B`. A residue of zero only
//! certifies `nu >= B`, so those indices are recomputed at doubled precision
//! until the cap is reached; past the cap the record either stays saturated
//! or, when [`Precision::exact_fallback`] is set, is settled by an exact
//! expansion.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::hash::Hash;
use std::path::Path;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::{nu_int, nu_residue, Valuation};
use crate::error::{Error, Result};
use crate::report::{csv_text, stable_json, CheckReport, Exportable, ReportBuilder, DEFAULT_COUNTEREXAMPLE_LIMIT};
use crate::ring::{ensure_odd_prime, RingSpec};
use crate::series::{expand_colored_partitions, PartitionParams};
use crate::verifiers::special_exponent;

/// Precision schedule for modular valuation computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    pub b_init: u32,
    pub b_cap: u32,
    pub exact_fallback: bool,
}

impl Precision {
    pub const DEFAULT_CAP: u32 = 32;

    pub fn new(b_init: u32) -> Self {
        Precision {
            b_init,
            b_cap: Self::DEFAULT_CAP,
            exact_fallback: false,
        }
    }

    pub fn with_cap(mut self, b_cap: u32) -> Self {
        self.b_cap = b_cap;
        self
    }

    pub fn with_exact_fallback(mut self, on: bool) -> Self {
        self.exact_fallback = on;
        self
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::new(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValuationRecord {
    pub n: u64,
    pub nu: Valuation,
}

/// `nu_p(A_{p,k}(n))` for `n = 0..=n_max`, gap-free and in increasing `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuationSequence {
    pub p: u64,
    pub k: u64,
    pub records: Vec<ValuationRecord>,
    /// Largest modulus exponent that was used.
    pub final_exponent: u32,
    pub used_exact: bool,
    /// Number of records left as `AtLeast(cap)`.
    pub saturated: usize,
}

impl ValuationSequence {
    pub fn values(&self) -> Vec<Valuation> {
        self.records.iter().map(|r| r.nu).collect()
    }

    pub fn nu(&self, n: usize) -> Valuation {
        self.records[n].nu
    }

    pub fn n_max(&self) -> u64 {
        self.records.len() as u64 - 1
    }

    /// The prefix `n <= n_max`.
    pub fn prefix(&self, n_max: u64) -> ValuationSequence {
        let records: Vec<ValuationRecord> = self.records.iter().take(n_max as usize + 1).copied().collect();
        ValuationSequence {
            saturated: records.iter().filter(|r| r.nu.is_saturated()).count(),
            records,
            ..self.clone()
        }
    }
}

impl Exportable for ValuationSequence {
    fn to_json(&self) -> Result<String> {
        stable_json(self)
    }

    /// Columns `n,nu,saturated`; a saturated `nu` is the certified lower bound.
    fn to_csv(&self) -> Result<String> {
        let rows = self.records.iter().map(|r| {
            let (nu, sat) = match r.nu {
                Valuation::Finite(v) => (v.to_string(), false),
                Valuation::AtLeast(b) => (b.to_string(), true),
                Valuation::Infinite => ("inf".to_string(), false),
            };
            vec![r.n.to_string(), nu, sat.to_string()]
        });
        csv_text(&["n", "nu", "saturated"], rows)
    }
}

/// Valuations of `A_{p,k}(n)`, `n <= n_max`, under the given precision schedule.
pub fn valuation_sequence_with(p: u64, k: u64, n_max: u64, precision: Precision) -> Result<ValuationSequence> {
    ensure_odd_prime(p)?;
    if k == 0 {
        return Err(Error::ParameterOutOfRange("k must be at least 1".into()));
    }
    let params = PartitionParams::new(p, k)?;
    let degree = usize::try_from(n_max).map_err(|_| Error::ParameterOutOfRange("n_max too large".into()))?;
    let cap = precision.b_cap.max(1);
    let mut b = precision.b_init.clamp(1, cap);
    let mut nus = vec![Valuation::AtLeast(0); degree + 1];
    let mut pending: Vec<usize> = (0..=degree).collect();
    let mut used_exact = false;
    loop {
        let ring = RingSpec::mod_prime_power(p, b)?;
        let series = expand_colored_partitions(params, degree, &ring);
        for &n in &pending {
            let residue = series.coeff(n).magnitude();
            nus[n] = nu_residue(p, b, residue)?;
        }
        pending.retain(|&n| nus[n].is_saturated());
        if pending.is_empty() || b >= cap {
            break;
        }
        b = b.saturating_mul(2).min(cap);
    }
    if !pending.is_empty() && precision.exact_fallback {
        let series = expand_colored_partitions(params, degree, &RingSpec::Exact);
        for &n in &pending {
            nus[n] = nu_int(p, series.coeff(n));
        }
        pending.clear();
        used_exact = true;
    }
    Ok(ValuationSequence {
        p,
        k,
        records: nus
            .into_iter()
            .enumerate()
            .map(|(n, nu)| ValuationRecord { n: n as u64, nu })
            .collect(),
        final_exponent: b,
        used_exact,
        saturated: pending.len(),
    })
}

/// [`valuation_sequence_with`] starting at `p^{b_init}` with the default cap.
pub fn valuation_sequence(p: u64, k: u64, n_max: u64, b_init: u32) -> Result<ValuationSequence> {
    valuation_sequence_with(p, k, n_max, Precision::new(b_init))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub n_max: u64,
    pub max_nu: u32,
}

/// Distribution and maximum of one valuation sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub p: u64,
    pub k: u64,
    pub n_max: u64,
    /// `(u, s)` when `k = (p-1)(u p^s - 1)`.
    pub special_form: Option<(u64, u32)>,
    /// Largest observed valuation; a lower bound when `max_is_lower_bound`.
    pub max_nu: u32,
    pub argmax: u64,
    pub max_is_lower_bound: bool,
    pub histogram: BTreeMap<u32, u64>,
    pub saturated: u64,
    /// Maximum over the nested prefixes `n <= N/10, N/3, N`, a finite proxy
    /// for unboundedness.
    pub growth_indicator: Vec<GrowthPoint>,
}

pub fn summarize(seq: &ValuationSequence) -> ScanSummary {
    let mut histogram = BTreeMap::new();
    let mut saturated = 0;
    let (mut max_nu, mut argmax, mut max_sat) = (0u32, 0u64, false);
    for r in &seq.records {
        match r.nu {
            Valuation::Finite(v) => *histogram.entry(v).or_insert(0) += 1,
            _ => saturated += 1,
        }
        let v = r.nu.lower_bound();
        if v > max_nu || (r.n == 0 && v == 0) {
            max_nu = v;
            argmax = r.n;
            max_sat = r.nu.is_saturated();
        }
    }
    let n_max = seq.n_max();
    let mut cuts = vec![n_max / 10, n_max / 3, n_max];
    cuts.dedup();
    let growth_indicator = cuts
        .into_iter()
        .map(|cut| GrowthPoint {
            n_max: cut,
            max_nu: seq.records[..=cut as usize]
                .iter()
                .map(|r| r.nu.lower_bound())
                .max()
                .unwrap_or(0),
        })
        .collect();
    ScanSummary {
        p: seq.p,
        k: seq.k,
        n_max,
        special_form: special_exponent(seq.p, seq.k),
        max_nu,
        argmax,
        max_is_lower_bound: max_sat,
        histogram,
        saturated,
        growth_indicator,
    }
}

/// Per-`k` summaries of `nu_p(A_{p,k}(n))`, `n <= n_max`, scanned in parallel.
pub fn scan_max_valuation(p: u64, ks: &[u64], n_max: u64, precision: Precision) -> Result<Vec<ScanSummary>> {
    ks.par_iter()
        .map(|&k| valuation_sequence_with(p, k, n_max, precision).map(|s| summarize(&s)))
        .collect()
}

/// Check that `nu` is constant on every block `{pn, ..., pn + p - 1}`, `n >= 1`.
pub fn block_constancy_of(seq: &ValuationSequence, limit: usize) -> CheckReport {
    let p = seq.p;
    let n_max = seq.n_max();
    let mut report = ReportBuilder::new("block_constancy", (p, n_max), limit)
        .param("p", p)
        .param("k", seq.k);
    let mut block = 1u64;
    while block * p + p - 1 <= n_max {
        let start = (block * p) as usize;
        let members = &seq.records[start..start + p as usize];
        let first = members[0].nu;
        if members.iter().all(|r| r.nu.is_saturated()) {
            report.bump("blocks_undetermined");
        } else if members.iter().all(|r| r.nu == first) {
            report.bump("blocks_constant");
        } else {
            let shown: Vec<String> = members.iter().map(|r| r.nu.to_string()).collect();
            report.fail(block * p, format!("block values [{}]", shown.join(", ")));
        }
        block += 1;
    }
    report.finish()
}

/// Blockwise constancy of `nu_p(A_{p,k}(n))` over `n <= n_max`.
pub fn block_constancy(p: u64, k: u64, n_max: u64) -> Result<CheckReport> {
    let seq = valuation_sequence_with(p, k, n_max, Precision::default())?;
    Ok(block_constancy_of(&seq, DEFAULT_COUNTEREXAMPLE_LIMIT))
}

/// For `k = (p-1)(u p^s - 1)`: observe `nu in {1, 2}` for `up^s <= n <= n_max`,
/// and blockwise constancy. Failures are findings about the scanned data.
pub fn bounded_valuation_scan(p: u64, u: u64, s: u32, n_max: u64) -> Result<CheckReport> {
    let k = crate::verifiers::exponent_for(p, u, s)?;
    let threshold = u * p.pow(s);
    let seq = valuation_sequence_with(p, k, n_max, Precision::new(3))?;
    let blocks = block_constancy_of(&seq, DEFAULT_COUNTEREXAMPLE_LIMIT);
    let mut report = ReportBuilder::new("bounded_valuation_scan", (threshold, n_max), DEFAULT_COUNTEREXAMPLE_LIMIT)
        .param("p", p)
        .param("u", u)
        .param("s", s)
        .param("k", k);
    for r in seq.records.iter().skip(threshold as usize) {
        match r.nu {
            Valuation::Finite(v @ 1..=2) => report.bump(format!("nu={v}")),
            other => report.fail(r.n, format!("valuation {other} outside {{1, 2}}")),
        }
    }
    for c in &blocks.counterexamples {
        report.fail(c.n, format!("non-constant block: {}", c.details));
    }
    report.set_stat("block_failures", blocks.failure_count as u64);
    report.set_stat("blocks_constant", blocks.stat("blocks_constant"));
    report.set_stat("blocks_undetermined", blocks.stat("blocks_undetermined"));
    Ok(report.finish())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelProbeReport {
    pub base: u64,
    pub depth: u32,
    pub prefix_len: usize,
    pub distinct_count: usize,
    /// Distinct prefixes using only levels `0..=i`, for each `i <= depth`.
    pub distinct_by_depth: Vec<usize>,
    /// Some prefix ran past the computed range and was compared truncated.
    pub saturated: bool,
}

impl Exportable for KernelProbeReport {
    fn to_json(&self) -> Result<String> {
        stable_json(self)
    }

    fn to_csv(&self) -> Result<String> {
        let rows = self.distinct_by_depth.iter().enumerate().map(|(i, c)| {
            vec![
                i.to_string(),
                c.to_string(),
                self.base.to_string(),
                self.prefix_len.to_string(),
                self.saturated.to_string(),
            ]
        });
        csv_text(&["depth", "distinct_count", "base", "prefix_len", "saturated"], rows)
    }
}

/// Count distinct length-`prefix_len` prefixes of the subsequences
/// `(seq[b^i n + j])_n` for `i <= depth`, `0 <= j < b^i`.
pub fn kernel_prefix_count<T: Clone + Eq + Hash>(seq: &[T], base: u64, depth: u32, prefix_len: usize) -> Result<KernelProbeReport> {
    if base < 2 {
        return Err(Error::InvalidBase(base));
    }
    let len = seq.len() as u128;
    let mut seen: HashSet<Vec<T>> = HashSet::new();
    let mut by_depth = Vec::with_capacity(depth as usize + 1);
    let mut saturated = false;
    for i in 0..=depth {
        let stride = (base as u128)
            .checked_pow(i)
            .ok_or_else(|| Error::ParameterOutOfRange("kernel depth overflows".into()))?;
        if stride > len {
            // Every offset j >= len yields an empty prefix.
            saturated = true;
            seen.insert(Vec::new());
        }
        for j in 0..stride.min(len) {
            let prefix: Vec<T> = (0..prefix_len as u128)
                .map(|n| stride * n + j)
                .take_while(|&idx| idx < len)
                .map(|idx| seq[idx as usize].clone())
                .collect();
            saturated |= prefix.len() < prefix_len;
            seen.insert(prefix);
        }
        by_depth.push(seen.len());
    }
    Ok(KernelProbeReport {
        base,
        depth,
        prefix_len,
        distinct_count: seen.len(),
        distinct_by_depth: by_depth,
        saturated,
    })
}

/// Kernel-prefix probe of `nu_p(A_{p,k}(n))`, `n <= n_max`.
pub fn kernel_probe(p: u64, k: u64, base: u64, depth: u32, prefix_len: usize, n_max: u64) -> Result<KernelProbeReport> {
    let seq = valuation_sequence_with(p, k, n_max, Precision::default())?;
    kernel_prefix_count(&seq.values(), base, depth, prefix_len)
}

/// Scan campaign configuration, read from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub p: Vec<u64>,
    pub k_max: u64,
    pub n_max: u64,
    #[serde(rename = "B_init")]
    pub b_init: u32,
    #[serde(rename = "B_cap")]
    pub b_cap: u32,
}

impl Default for CampaignConfig {
    /// Primes 3, 5, 7, 11 with `k <= 100` and `n <= 10^4`.
    fn default() -> Self {
        CampaignConfig {
            p: vec![3, 5, 7, 11],
            k_max: 100,
            n_max: 10_000,
            b_init: 2,
            b_cap: Precision::DEFAULT_CAP,
        }
    }
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: CampaignConfig = serde_json::from_str(text)?;
        for &p in &config.p {
            ensure_odd_prime(p)?;
        }
        if config.b_init == 0 || config.b_cap == 0 || config.b_init > config.b_cap {
            return Err(Error::ParameterOutOfRange("need 1 <= B_init <= B_cap".into()));
        }
        RingSpec::mod_prime_power(3, config.b_cap)?;
        Ok(config)
    }

    /// Read and validate a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    fn precision(&self) -> Precision {
        Precision::new(self.b_init).with_cap(self.b_cap)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignEntry {
    pub csv: String,
    pub summary: ScanSummary,
    pub block_constant: bool,
    pub block_failures: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub config: CampaignConfig,
    pub entries: Vec<CampaignEntry>,
}

impl Exportable for CampaignSummary {
    fn to_json(&self) -> Result<String> {
        stable_json(self)
    }

    fn to_csv(&self) -> Result<String> {
        let rows = self.entries.iter().map(|e| {
            let form = e
                .summary
                .special_form
                .map(|(u, s)| format!("u={u};s={s}"))
                .unwrap_or_default();
            vec![
                e.summary.p.to_string(),
                e.summary.k.to_string(),
                form,
                e.summary.max_nu.to_string(),
                e.summary.max_is_lower_bound.to_string(),
                e.block_constant.to_string(),
            ]
        });
        csv_text(&["p", "k", "special_form", "max_nu", "max_is_lower_bound", "block_constant"], rows)
    }
}

/// Run every `(p, k)` scan of `config`, writing `p{p}_k{k}.csv` files and
/// `summary.json` into `out_dir`.
pub fn run_campaign(config: &CampaignConfig, out_dir: &Path) -> Result<CampaignSummary> {
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let tasks: Vec<(u64, u64)> = config
        .p
        .iter()
        .flat_map(|&p| (1..=config.k_max).map(move |k| (p, k)))
        .collect();
    let precision = config.precision();
    let mut entries = tasks
        .par_iter()
        .map(|&(p, k)| -> Result<CampaignEntry> {
            let seq = valuation_sequence_with(p, k, config.n_max, precision)?;
            let name = format!("p{p}_k{k}.csv");
            crate::report::export(&seq, crate::report::Format::Csv, &out_dir.join(&name))?;
            let blocks = block_constancy_of(&seq, DEFAULT_COUNTEREXAMPLE_LIMIT);
            Ok(CampaignEntry {
                csv: name,
                summary: summarize(&seq),
                block_constant: blocks.passed,
                block_failures: blocks.failure_count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by_key(|e| (e.summary.p, e.summary.k));
    let summary = CampaignSummary {
        config: config.clone(),
        entries,
    };
    crate::report::export(&summary, crate::report::Format::Json, &out_dir.join("summary.json"))?;
    Ok(summary)
}

/// Recompute the given indices exactly and return those whose recorded
/// exact valuation disagrees.
pub fn exact_disagreements(seq: &ValuationSequence, indices: &[usize]) -> Result<Vec<usize>> {
    let Some(&max) = indices.iter().max() else {
        return Ok(Vec::new());
    };
    let exact = expand_colored_partitions(PartitionParams::new(seq.p, seq.k)?, max, &RingSpec::Exact);
    Ok(indices
        .iter()
        .copied()
        .filter(|&n| match seq.nu(n) {
            Valuation::Finite(v) => nu_int(seq.p, exact.coeff(n)) != Valuation::Finite(v),
            Valuation::AtLeast(b) => !nu_int(seq.p, exact.coeff(n)).is_at_least(b),
            Valuation::Infinite => !exact.coeff(n).is_zero(),
        })
        .collect())
}
