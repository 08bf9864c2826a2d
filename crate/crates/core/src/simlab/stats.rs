//! Summary statistics for replicate sets.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::quadrature::pairwise_sum;

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance; `NaN` for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (xs.len() - 1) as f64
}

/// Unbiased sample covariance.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return f64::NAN;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let prod: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    pairwise_sum(&prod) / (xs.len() - 1) as f64
}

fn central_moment(xs: &[f64], k: i32) -> f64 {
    let m = mean(xs);
    let p: Vec<f64> = xs.iter().map(|x| (x - m).powi(k)).collect();
    mean(&p)
}

/// Moment skewness `m₃/m₂^{3/2}`.
pub fn skewness(xs: &[f64]) -> f64 {
    central_moment(xs, 3) / central_moment(xs, 2).powf(1.5)
}

/// Excess kurtosis `m₄/m₂² − 3`.
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    central_moment(xs, 4) / central_moment(xs, 2).powi(2) - 3.0
}

/// Kolmogorov–Smirnov distance between the empirical law of `xs` and N(0, 1).
pub fn ks_standard_normal(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let std = Normal::standard();
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = std.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Least-squares line `y ≈ a + b x`; returns `(b, a)`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(xs), mean(ys));
    let sxy: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let sxx: Vec<f64> = xs.iter().map(|x| (x - mx) * (x - mx)).collect();
    let b = pairwise_sum(&sxy) / pairwise_sum(&sxx);
    (b, my - b * mx)
}

/// Fraction of `true` flags.
pub fn fraction(flags: impl Iterator<Item = bool>) -> f64 {
    let (mut hit, mut total) = (0usize, 0usize);
    for f in flags {
        total += 1;
        hit += f as usize;
    }
    hit as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert!(skewness(&xs).abs() < 1e-15);
        assert!((excess_kurtosis(&xs) - (-1.36)).abs() < 1e-12);
        assert!((covariance(&xs, &xs) - variance(&xs)).abs() < 1e-15);
    }

    #[test]
    fn slope_of_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 4.0 * x - 1.0).collect();
        let (b, a) = ls_slope(&xs, &ys);
        assert!((b - 4.0).abs() < 1e-14 && (a + 1.0).abs() < 1e-14);
    }

    #[test]
    fn ks_of_normal_quantiles_is_small() {
        let std = Normal::standard();
        let xs: Vec<f64> = (0..1000).map(|i| std.inverse_cdf((i as f64 + 0.5) / 1000.0)).collect();
        assert!(ks_standard_normal(&xs) <= 0.0005 + 1e-6);
        let shifted: Vec<f64> = xs.iter().map(|x| x + 1.0).collect();
        assert!(ks_standard_normal(&shifted) > 0.3);
    }
}
