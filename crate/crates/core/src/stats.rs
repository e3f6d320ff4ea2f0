//! Sample statistics for trial outputs.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance; 0 for a single sample.
    pub variance: f64,
    /// Fourth central moment (biased, divides by n).
    pub fourth_moment: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Summary {
        let n = xs.len();
        if n == 0 {
            return Summary {
                n,
                mean: f64::NAN,
                variance: f64::NAN,
                fourth_moment: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let (mut m2, mut m4) = (0.0, 0.0);
        for &x in xs {
            let d2 = (x - mean) * (x - mean);
            m2 += d2;
            m4 += d2 * d2;
        }
        let variance = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        Summary {
            n,
            mean,
            variance,
            fourth_moment: m4 / n as f64,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Standard error of the mean.
    pub fn mean_std_error(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }

    /// Standard error of the sample variance,
    /// `sqrt((μ4 − σ⁴·(n−3)/(n−1)) / n)`.
    pub fn variance_std_error(&self) -> f64 {
        let n = self.n as f64;
        if self.n < 2 {
            return 0.0;
        }
        let s4 = self.variance * self.variance;
        ((self.fourth_moment - s4 * (n - 3.0) / (n - 1.0)).max(0.0) / n).sqrt()
    }
}

/// Median of an odd-length slice; the lower middle element for even lengths.
pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "median of an empty sample");
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[(sorted.len() - 1) / 2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_small_sample() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((s.fourth_moment - (2.0 * 5.0625 + 2.0 * 0.0625) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn single_sample_has_zero_variance() {
        let s = Summary::of(&[7.5]);
        assert_eq!((s.mean, s.variance, s.variance_std_error()), (7.5, 0.0, 0.0));
    }

    #[test]
    fn median_is_order_free() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[2.0, 3.0, 1.0]), 2.0);
        assert_eq!(median(&[5.0]), 5.0);
    }

    #[test]
    fn variance_std_error_for_gaussian_like_sample() {
        // for normal data se(s²) ≈ σ²·sqrt(2/n)
        let xs: Vec<f64> = (0..20_000)
            .map(|i| {
                let u = (i as f64 + 0.5) / 20_000.0;
                // inverse-logistic is close enough to exercise the formula
                (u / (1.0 - u)).ln()
            })
            .collect();
        let s = Summary::of(&xs);
        let se = s.variance_std_error();
        assert!(se > 0.0 && se < s.variance * 0.05, "{se} {}", s.variance);
    }
}
