//! Small numeric helpers shared by the cost routines.

/// Pairwise (cascade) summation. Error grows with `log n` instead of `n`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        let mut s = 0.0;
        for v in values {
            s += *v;
        }
        return s;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Relative comparison used for all cost equality checks.
pub fn approx_eq(a: f64, b: f64, rel: f64) -> bool {
    if a == b {
        return true;
    }
    let scale = a.abs().max(b.abs()).max(1.0);
    (a - b).abs() <= rel * scale
}

/// Smallest `i` with `2^i >= x`, for `x >= 1`. Returns 0 for `x <= 1`.
pub fn ceil_log2(x: f64) -> u32 {
    let mut i = 0u32;
    let mut p = 1.0f64;
    while p < x && i < 1100 {
        p *= 2.0;
        i += 1;
    }
    i
}

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

pub fn powi2(e: i32) -> f64 {
    libm::ldexp(1.0, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }

    #[test]
    fn pairwise_beats_naive_on_ill_conditioned_input() {
        let mut v = alloc::vec![1.0e16];
        v.extend(core::iter::repeat_n(1.0, 10_000));
        let exact = 1.0e16 + 10_000.0;
        assert!((pairwise_sum(&v) - exact).abs() <= (v.iter().sum::<f64>() - exact).abs());
    }

    #[test]
    fn ceil_log2_powers() {
        assert_eq!(ceil_log2(1.0), 0);
        assert_eq!(ceil_log2(2.0), 1);
        assert_eq!(ceil_log2(16.0), 4);
        assert_eq!(ceil_log2(17.0), 5);
        assert_eq!(ceil_log2(0.5), 0);
    }
}
