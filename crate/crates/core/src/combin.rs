//! Seed-set enumeration shared by the exact master and the oracles.

use itertools::Itertools;

/// Default cap on the number of enumerated seed sets.
pub const DEFAULT_SUBSET_CAP: u64 = 1_000_000;

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Size of the seed sets that are enumerated: adding a seed never lowers the
/// spread, so only sets of exactly `min(K, n)` nodes are visited.
pub fn seed_set_size(n: usize, k: usize) -> usize {
    k.min(n)
}

/// Lexicographically first maximiser of `value` over all `size`-subsets of
/// `0..n`. Values within `tie_tolerance` of the best count as ties.
pub fn argmax_subset<F: FnMut(&[u32]) -> f64>(
    n: usize,
    size: usize,
    tie_tolerance: f64,
    mut value: F,
) -> (Vec<u32>, f64) {
    let mut best: Option<(Vec<u32>, f64)> = None;
    for subset in (0..n as u32).combinations(size) {
        let v = value(&subset);
        match &best {
            Some((_, b)) if v <= b + tie_tolerance => {}
            _ => best = Some((subset, v)),
        }
    }
    best.unwrap_or_else(|| (Vec::new(), value(&[])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(10, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(40, 20), 137_846_528_820);
        assert_eq!(binomial(10_000, 5_000), u64::MAX);
    }

    #[test]
    fn first_maximum_wins() {
        let (s, v) = argmax_subset(4, 2, 1e-9, |s| if s.contains(&3) { 1.0 } else { 0.0 });
        assert_eq!(s, vec![0, 3]);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn empty_size_evaluates_empty_set() {
        let (s, v) = argmax_subset(3, 0, 1e-9, |s| s.len() as f64 + 2.0);
        assert!(s.is_empty());
        assert_eq!(v, 2.0);
    }
}
