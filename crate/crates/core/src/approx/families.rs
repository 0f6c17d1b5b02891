//! Partitions of `{1..N}` into consecutive intervals, and the merging of
//! several weighted model families into one.

use statrs::function::factorial::ln_binomial;

use crate::error::{invalid, Error, Result};

/// Default enumeration cap for [`interval_partition_family`].
pub const DEFAULT_PARTITION_CAP: u64 = 1_000_000;

/// A partition of `{1..N}` into consecutive intervals, stored as the
/// 1-based first index of every interval after the first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntervalPartition {
    n: usize,
    cuts: Vec<usize>,
}

impl IntervalPartition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cuts(&self) -> &[usize] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Inclusive 1-based `(first, last)` pairs.
    pub fn intervals(&self) -> Vec<(usize, usize)> {
        let mut starts = vec![1];
        starts.extend(&self.cuts);
        let mut ends: Vec<usize> = self.cuts.iter().map(|c| c - 1).collect();
        ends.push(self.n);
        starts.into_iter().zip(ends).collect()
    }
}

fn check(n: usize, d: usize) -> Result<()> {
    if d == 0 || d > n {
        return Err(invalid(format!("need 1 ≤ D ≤ N, got N = {n}, D = {d}")));
    }
    Ok(())
}

/// Number of partitions of `{1..N}` into `D` intervals, `C(N−1, D−1)`.
pub fn interval_partition_count(n: usize, d: usize) -> Result<f64> {
    check(n, d)?;
    Ok(ln_binomial(n as u64 - 1, d as u64 - 1).exp().round())
}

/// `Δ_m = log C(N, D) + 2 log D`.
pub fn interval_partition_weight(n: usize, d: usize) -> Result<f64> {
    check(n, d)?;
    Ok(ln_binomial(n as u64, d as u64) + 2.0 * (d as f64).ln())
}

/// All partitions of `{1..N}` into `D` intervals, in lexicographic order
/// of their cuts, with their common weight.
pub fn interval_partition_family(n: usize, d: usize, cap: u64) -> Result<(Vec<IntervalPartition>, f64)> {
    let count = interval_partition_count(n, d)?;
    if count > cap as f64 {
        return Err(Error::Capacity { what: "interval partitions".into(), count: count.min(u64::MAX as f64) as u64, cap });
    }
    let weight = interval_partition_weight(n, d)?;
    let k = d - 1;
    let mut out = Vec::with_capacity(count as usize);
    // Cuts are a k-subset of {2..N}.
    let mut cuts: Vec<usize> = (2..2 + k).collect();
    loop {
        out.push(IntervalPartition { n, cuts: cuts.clone() });
        let mut i = k;
        loop {
            if i == 0 {
                return Ok((out, weight));
            }
            i -= 1;
            if cuts[i] < n - (k - 1 - i) {
                break;
            }
        }
        cuts[i] += 1;
        for t in i + 1..k {
            cuts[t] = cuts[t - 1] + 1;
        }
    }
}

/// Merges `J` families, each given by its weights, adding `log J` to every
/// weight. The result keeps the family index of each model.
pub fn mix_families(families: &[Vec<f64>]) -> Vec<(usize, f64)> {
    let shift = (families.len().max(1) as f64).ln();
    families.iter().enumerate().flat_map(|(f, w)| w.iter().map(move |d| (f, d + shift))).collect()
}

/// `Σ exp(−Δ)`.
pub fn weight_sum(weights: impl IntoIterator<Item = f64>) -> f64 {
    weights.into_iter().map(|d| (-d).exp()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_families() {
        let (f, _) = interval_partition_family(5, 3, 100).unwrap();
        assert_eq!(f.len(), 6);
        assert_eq!(f[0].intervals(), vec![(1, 1), (2, 2), (3, 5)]);
        assert_eq!(f[5].intervals(), vec![(1, 3), (4, 4), (5, 5)]);
        assert_eq!(interval_partition_family(7, 1, 10).unwrap().0.len(), 1);
        let (all, w) = interval_partition_family(4, 4, 10).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].intervals(), vec![(1, 1), (2, 2), (3, 3), (4, 4)]);
        assert!((w - 2.0 * 4f64.ln()).abs() < 1e-12);
        assert!(matches!(interval_partition_family(40, 20, 1000), Err(Error::Capacity { .. })));
        assert!(interval_partition_family(3, 4, 10).is_err());
    }

    #[test]
    fn weights_sum_below_one() {
        for n in [1, 5, 30, 200] {
            let s: f64 = (1..=n).map(|d| interval_partition_count(n, d).unwrap() * (-interval_partition_weight(n, d).unwrap()).exp()).sum();
            assert!(s < std::f64::consts::PI.powi(2) / 6.0);
        }
    }

    #[test]
    fn mixing() {
        let one = mix_families(&[vec![1.0, 2.0]]);
        assert_eq!(one, vec![(0, 1.0), (0, 2.0)]);
        let a = vec![1.5f64, 2.0, 3.0];
        let b = vec![1.2f64, 2.5];
        assert!(weight_sum(a.iter().copied()) <= 0.5 && weight_sum(b.iter().copied()) <= 0.5);
        let m = mix_families(&[a.clone(), b.clone()]);
        let merged = weight_sum(m.iter().map(|x| x.1));
        assert!((merged - 0.5 * (weight_sum(a) + weight_sum(b))).abs() < 1e-12);
    }
}
