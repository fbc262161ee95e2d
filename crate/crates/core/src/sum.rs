//! Order-fixed summation helpers.
//!
//! Every integral in the crate is reduced through [`pairwise_sum`] over a
//! vector whose order depends only on the node layout, so parallel
//! evaluation never changes the result bits.

const BLOCK: usize = 32;

/// Pairwise (cascade) summation with a fixed split pattern.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_sum_on_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
    }

    #[test]
    fn beats_naive_accumulation() {
        let v = vec![0.1; 1 << 20];
        let naive: f64 = v.iter().sum();
        let exact = 0.1 * (1u64 << 20) as f64;
        assert!((pairwise_sum(&v) - exact).abs() < (naive - exact).abs());
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
