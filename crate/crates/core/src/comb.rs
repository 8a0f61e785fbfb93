//! Small exact combinatorics helpers.

/// Exact binomial coefficient. The multiplicative loop keeps every prefix
/// product equal to a smaller binomial, so the division is always exact and
/// nothing overflows for the widths used in this crate (n <= 25 and the
/// identity-suite range).
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut res: u64 = 1;
    for i in 0..k {
        res = res * (n - i) as u64 / (i + 1) as u64;
    }
    res
}

/// Binomial with the out-of-range convention used by the closed-form sums:
/// 0 when `k < 0` or `k > n`.
pub fn binomial_or_zero(n: usize, k: isize) -> f64 {
    if k < 0 || k as usize > n {
        0.0
    } else {
        binomial(n, k as usize) as f64
    }
}
