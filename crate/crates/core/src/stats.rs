//! Small Monte Carlo summaries.

/// Sample mean and standard error of the mean (0 for fewer than 2 values).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Empirical frequency `k/n` with its binomial standard error.
pub fn proportion(k: usize, n: usize) -> (f64, f64) {
    let p = k as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Pearson correlation of two equally long samples.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Upper-tail p-value of Pearson's chi-square statistic for observed
/// counts against expected counts. Bins with expectation 0 must be empty.
pub fn chi_square_pvalue(observed: &[f64], expected: &[f64]) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (o, e) in observed.iter().zip(expected) {
        if *e > 0.0 {
            stat += (o - e).powi(2) / e;
            bins += 1;
        } else if *o > 0.0 {
            return 0.0;
        }
    }
    if bins < 2 {
        return 1.0;
    }
    1.0 - ChiSquared::new((bins - 1) as f64).expect("positive degrees of freedom").cdf(stat)
}

/// Two-sample chi-square homogeneity test on binned counts.
pub fn two_sample_chi_square_pvalue(a: &[f64], b: &[f64]) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let (na, nb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    let total = na + nb;
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (x, y) in a.iter().zip(b) {
        let col = x + y;
        if col == 0.0 {
            continue;
        }
        bins += 1;
        let (ea, eb) = (col * na / total, col * nb / total);
        stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
    }
    if bins < 2 {
        return 1.0;
    }
    1.0 - ChiSquared::new((bins - 1) as f64).expect("positive degrees of freedom").cdf(stat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summaries() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // Sample variance 5/3 over n = 4.
        assert!((s - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
        assert_eq!(proportion(1, 4).0, 0.25);
        assert!((correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-12);
        assert!(chi_square_pvalue(&[10.0, 10.0], &[10.0, 10.0]) > 0.99);
        assert!(two_sample_chi_square_pvalue(&[100.0, 0.0], &[0.0, 100.0]) < 1e-6);
    }
}
