mod common;

use num_bigint::BigInt;
use padic_partitions::explorer::{
    exact_disagreements, kernel_prefix_count, valuation_sequence, valuation_sequence_with, Precision,
};
use padic_partitions::report::{export, Exportable, Format};
use padic_partitions::ring::RingSpec;
use padic_partitions::series::{expand_colored_partitions, PartitionParams};
use padic_partitions::verifiers::{verify_lemma3, verify_thm1};
use padic_partitions::digits::Valuation;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::index::sample;
use rand::SeedableRng;

#[test]
fn recurrence_matches_enumeration() {
    for m in [2, 3] {
        for k in 1..=4 {
            let brute = common::brute_force_counts(m, k, 30);
            let series = expand_colored_partitions(PartitionParams::new(m, k).unwrap(), 30, &RingSpec::Exact);
            for (n, &count) in brute.iter().enumerate() {
                assert_eq!(series.coeff(n), &BigInt::from(count), "m={m} k={k} n={n}");
            }
        }
    }
}

#[test]
fn enumeration_small_values() {
    assert_eq!(common::brute_force_counts(3, 1, 9), vec![1, 1, 1, 2, 2, 2, 3, 3, 3, 5]);
    assert_eq!(common::brute_force_counts(3, 4, 4), vec![1, 4, 10, 24, 51]);
    assert_eq!(common::brute_force_counts(2, 1, 6), vec![1, 1, 2, 2, 4, 4, 6]);
}

#[test]
fn modular_valuations_agree_with_u64_counts() {
    // Small enough that the counts fit in u64, so nu can be read off directly.
    for (m, k) in [(3, 4), (3, 2), (5, 4)] {
        let brute = common::brute_force_counts(m, k, 30);
        let seq = valuation_sequence(m, k, 30, 2).unwrap();
        for (n, &count) in brute.iter().enumerate() {
            let expected = Valuation::Finite(common::nu_u64(m, count).unwrap());
            assert_eq!(seq.nu(n), expected, "m={m} k={k} n={n}");
        }
    }
}

#[test]
fn escalated_valuations_match_exact_at_random_indices() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for (p, k) in [(3, 10), (3, 18), (5, 36), (3, 5)] {
        let seq = valuation_sequence_with(p, k, 3000, Precision::new(2)).unwrap();
        let indices = sample(&mut rng, 3001, 100).into_vec();
        assert!(exact_disagreements(&seq, &indices).unwrap().is_empty(), "p={p} k={k}");
    }
}

#[test]
fn shorter_scans_are_prefixes() {
    for (p, k) in [(3, 10), (5, 36), (7, 6)] {
        let long = valuation_sequence(p, k, 2000, 2).unwrap();
        for n_max in [0, 1, 10, 999] {
            let short = valuation_sequence(p, k, n_max, 2).unwrap();
            assert_eq!(short.records, long.prefix(n_max).records);
        }
    }
}

#[test]
fn digit_sum_and_valuation_checks_agree_for_u_equal_one() {
    // Both imply value 1 everywhere on their ranges; they must agree.
    for p in [3, 5] {
        assert!(verify_lemma3(p, 1, 2000).unwrap().passed);
        assert!(verify_thm1(p, 1, 1, 2000).unwrap().passed);
    }
}

#[test]
fn exported_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let report = verify_thm1(3, 2, 1, 1000).unwrap();
    for format in [Format::Json, Format::Csv] {
        let a = dir.path().join(format!("a.{format:?}"));
        let b = dir.path().join(format!("b.{format:?}"));
        export(&report, format, &a).unwrap();
        export(&verify_thm1(3, 2, 1, 1000).unwrap(), format, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
    assert_eq!(
        std::fs::read_to_string(dir.path().join("a.Json")).unwrap(),
        report.to_json().unwrap()
    );
}

proptest! {
    #[test]
    fn kernel_counts_grow_with_depth(seq in prop::collection::vec(0u8..3, 1..400), base in 2u64..5, depth in 0u32..4) {
        let r = kernel_prefix_count(&seq, base, depth, 5).unwrap();
        prop_assert!(r.distinct_by_depth.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*r.distinct_by_depth.last().unwrap(), r.distinct_count);
        prop_assert_eq!(r.distinct_by_depth.len(), depth as usize + 1);
    }

    #[test]
    fn longer_prefixes_refine(seq in prop::collection::vec(0u8..2, 1..300), base in 2u64..4, len in 1usize..8) {
        let short = kernel_prefix_count(&seq, base, 3, len).unwrap();
        let long = kernel_prefix_count(&seq, base, 3, len + 3).unwrap();
        prop_assert!(short.distinct_count <= long.distinct_count);
    }

    #[test]
    fn enumeration_of_k_one_is_the_recurrence(m in 2u64..5, n_max in 0u64..40) {
        let brute = common::brute_force_counts(m, 1, n_max);
        let series = expand_colored_partitions(PartitionParams::new(m, 1).unwrap(), n_max as usize, &RingSpec::Exact);
        for (n, &c) in brute.iter().enumerate() {
            prop_assert_eq!(series.coeff(n), &BigInt::from(c));
        }
    }
}
