//! Independent oracles shared by integration targets.

/// Counts colored multisets of powers of `m` by exhaustive enumeration:
/// each part type `(m^t, color)` gets a multiplicity, and every
/// multiplicity vector with total at most `n_max` is visited once.
pub fn brute_force_counts(m: u64, k: u64, n_max: u64) -> Vec<u64> {
    let mut parts = Vec::new();
    let mut power = 1;
    while power <= n_max.max(1) {
        for _ in 0..k {
            parts.push(power);
        }
        power *= m;
    }
    let mut counts = vec![0; n_max as usize + 1];
    fn walk(parts: &[u64], total: u64, n_max: u64, counts: &mut [u64]) {
        let Some((&part, rest)) = parts.split_first() else {
            counts[total as usize] += 1;
            return;
        };
        let mut t = total;
        while t <= n_max {
            walk(rest, t, n_max, counts);
            t += part;
        }
    }
    walk(&parts, 0, n_max, &mut counts);
    counts
}

#[allow(dead_code)]
pub fn nu_u64(p: u64, mut x: u64) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    Some(v)
}
