//! Small sample-statistics helpers for the Monte Carlo experiments: means,
//! normal-approximation confidence intervals, medians, and a percentile
//! bootstrap for differences of medians.

use rand::Rng;

/// Arithmetic mean; 0 for an empty sample.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample standard deviation; 0 for fewer than two points.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Half-width of the normal-approximation 95% confidence interval for the
/// mean: 1.96·s/√n. NaN below 30 points, where the approximation is not
/// credible.
pub fn ci95_half_width(xs: &[f64]) -> f64 {
    if xs.len() < 30 {
        return f64::NAN;
    }
    1.96 * sample_std(xs) / (xs.len() as f64).sqrt()
}

/// Median (average of the two central order statistics for even sizes);
/// NaN for an empty sample.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must not contain NaN"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Percentile-bootstrap 95% confidence interval for
/// median(a) − median(b), resampling both samples independently.
pub fn bootstrap_median_diff_ci(
    a: &[f64],
    b: &[f64],
    resamples: usize,
    rng: &mut impl Rng,
) -> (f64, f64) {
    assert!(
        !a.is_empty() && !b.is_empty() && resamples > 0,
        "bootstrap requires nonempty samples and at least one resample"
    );
    let mut diffs = Vec::with_capacity(resamples);
    let mut buf_a = vec![0.0; a.len()];
    let mut buf_b = vec![0.0; b.len()];
    for _ in 0..resamples {
        for slot in buf_a.iter_mut() {
            *slot = a[rng.gen_range(0..a.len())];
        }
        for slot in buf_b.iter_mut() {
            *slot = b[rng.gen_range(0..b.len())];
        }
        diffs.push(median(&buf_a) - median(&buf_b));
    }
    diffs.sort_by(|x, y| x.partial_cmp(y).expect("medians of real samples"));
    let lo_idx = ((resamples as f64) * 0.025).floor() as usize;
    let hi_idx = (((resamples as f64) * 0.975).ceil() as usize).min(resamples) - 1;
    (diffs[lo_idx], diffs[hi_idx])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn mean_and_std_match_hand_values() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_eq!(mean(&xs), 5.0);
        // Σ(x−5)² = 32, s = √(32/7).
        assert!((sample_std(&xs) - (32.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean(&[]), 0.0);
        assert_eq!(sample_std(&[1.0]), 0.0);
    }

    #[test]
    fn median_handles_both_parities() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn ci_requires_thirty_points_and_shrinks_like_root_n() {
        assert!(ci95_half_width(&[1.0; 29]).is_nan());
        let mut rng = seed::stream(31, 0, "stats-ci", &[]);
        use rand::Rng as _;
        let small: Vec<f64> = (0..200).map(|_| rng.gen::<f64>()).collect();
        let large: Vec<f64> = (0..800).map(|_| rng.gen::<f64>()).collect();
        let ratio = ci95_half_width(&small) / ci95_half_width(&large);
        // Quadrupling the sample should halve the width, within 20%.
        assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn bootstrap_separates_clearly_shifted_samples() {
        let mut rng = seed::stream(32, 0, "stats-boot", &[]);
        use rand::Rng as _;
        let a: Vec<f64> = (0..300).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = (0..300).map(|_| rng.gen::<f64>() + 1.0).collect();
        let (lo, hi) = bootstrap_median_diff_ci(&a, &b, 500, &mut rng);
        assert!(hi < 0.0, "median(a) − median(b) CI should sit below zero");
        assert!(lo < hi);
        // And a sample against itself straddles zero.
        let (lo, hi) = bootstrap_median_diff_ci(&a, &a, 500, &mut rng);
        assert!(lo <= 0.0 && hi >= 0.0);
    }
}
