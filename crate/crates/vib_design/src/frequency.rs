//! Frequency pool: `√p` for `p = 1` and every prime. Square roots of distinct
//! squarefree integers are linearly independent over the rationals.

/// Largest admissible pool value; frequencies stay at or below 256.
pub const MAX_POOL_VALUE: u64 = 65_536;

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn is_pool_value(p: u64) -> bool {
    p == 1 || is_prime(p)
}

/// Smallest pool value `≥ threshold` not rejected by `taken`.
pub fn pool_value_at_least(threshold: f64, taken: impl Fn(u64) -> bool) -> Option<u64> {
    let start = threshold.max(1.0).ceil();
    if start > MAX_POOL_VALUE as f64 {
        return None;
    }
    (start as u64..=MAX_POOL_VALUE).find(|&p| is_pool_value(p) && !taken(p))
}
