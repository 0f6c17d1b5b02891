//! Poisson regression on `{1..N}`, `N = 2^n`: piecewise-constant models on
//! the square-root scale, dyadic-tree and general interval partitions with
//! their weights, and T-estimator selection among them.
//!
//! The estimator thins the counts into a pilot half and a selection half.
//! Each model contributes one candidate, the pilot histogram on its
//! partition rounded to the model's `θ`-lattice on the square-root scale;
//! the selection half then picks among the candidates. Each candidate is a
//! point of its model's lattice net, and the pilot keeps the selection
//! sample independent of the candidates.

use std::collections::HashSet;
use std::ops::Range;

use rand::Rng;
use rayon::prelude::*;
use statrs::function::factorial::ln_binomial;

use crate::approx::{catalan_tree_family, interval_partition_family, DyadicPartition};
use crate::approx::families::DEFAULT_PARTITION_CAP;
use crate::error::{invalid, Error, Result};
use crate::measure::{Domain, Grid, GridIntensity};
use crate::net::{grid_net_cardinality_bound, lattice_eta, Net};
use crate::select::{select_fast_with, SelectOptions};
use crate::sim::{regression_counts_with, thin_counts, PointSample, Seed};
use crate::stats::mean_stderr;

/// Largest `n` handled (`N = 64`).
pub const MAX_REGRESSION_N: u32 = 6;
/// Default largest number of pieces.
pub const DEFAULT_MAX_PIECES: usize = 6;
/// Default lattice spacing on the square-root scale.
pub const DEFAULT_REGRESSION_THETA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    /// 0-based half-open ranges of points.
    pub cells: Vec<Range<usize>>,
    /// Member of the dyadic-tree family (weight `2|m|`).
    pub dyadic: bool,
    pub delta: f64,
}

impl RegressionModel {
    pub fn pieces(&self) -> usize {
        self.cells.len()
    }

    /// Whether every cut of `other` is also a cut of `self`.
    pub fn refines(&self, other: &RegressionModel) -> bool {
        let mine: HashSet<usize> = self.cells.iter().map(|r| r.start).collect();
        other.cells.iter().all(|r| mine.contains(&r.start))
    }

    /// `inf_{t ∈ S̄_m} ‖√s − t‖₂²`.
    pub fn approximation_error(&self, truth: &GridIntensity) -> f64 {
        let r: Vec<f64> = truth.values().iter().map(|v| v.sqrt()).collect();
        self.cells
            .iter()
            .map(|c| {
                let mean = r[c.clone()].iter().sum::<f64>() / c.len() as f64;
                r[c.clone()].iter().map(|v| (v - mean).powi(2)).sum::<f64>()
            })
            .sum()
    }

    /// The penalty of the risk bound: `|m|` for dyadic models,
    /// `log|m| + log C(N, |m|)` otherwise.
    pub fn bound_penalty(&self, n_points: usize) -> f64 {
        let d = self.pieces();
        if self.dyadic {
            d as f64
        } else {
            (d as f64).ln() + ln_binomial(n_points as u64, d as u64)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFamily {
    n: u32,
    models: Vec<RegressionModel>,
}

impl RegressionFamily {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn points(&self) -> usize {
        1 << self.n
    }

    pub fn models(&self) -> &[RegressionModel] {
        &self.models
    }

    pub fn domain(&self) -> Domain {
        Domain::discrete(1, self.points()).expect("N ≥ 1")
    }

    pub fn grid(&self) -> Grid {
        Grid::discrete(self.domain()).expect("discrete domain")
    }

    /// `Σ_m exp(−Δ_m)`.
    pub fn weight_sum(&self) -> f64 {
        self.models.iter().map(|m| (-m.delta).exp()).sum()
    }

    /// Number of dyadic models with each piece count (index 0 unused).
    pub fn dyadic_counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.models.iter().map(RegressionModel::pieces).max().unwrap_or(0) + 1];
        for m in self.models.iter().filter(|m| m.dyadic) {
            out[m.pieces()] += 1;
        }
        out
    }

    /// The smaller of the two branches of the risk bound,
    /// `min_m {inf‖√s − t‖² + pen(m)}`, and the model attaining it.
    pub fn oracle_bound(&self, truth: &GridIntensity) -> (f64, usize) {
        self.models
            .iter()
            .enumerate()
            .map(|(i, m)| (m.approximation_error(truth) + m.bound_penalty(self.points()), i))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
    }
}

/// Dyadic-tree partitions of depth at most `n` with at most `max_pieces`
/// leaves, all regular partitions, and every other interval partition with
/// at most `max_pieces` pieces.
pub fn build_regression_family(n: u32, max_pieces: usize) -> Result<RegressionFamily> {
    if n > MAX_REGRESSION_N {
        return Err(Error::Capacity { what: "regression points (log₂)".into(), count: n as u64, cap: MAX_REGRESSION_N as u64 });
    }
    if max_pieces == 0 {
        return Err(invalid("need at least one piece"));
    }
    let big_n = 1usize << n;
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut models = Vec::new();
    let starts = |cells: &[Range<usize>]| cells.iter().map(|r| r.start).collect::<Vec<_>>();
    let mut dyadic: Vec<DyadicPartition> = catalan_tree_family(max_pieces.min(big_n))?.into_iter().map(|(p, _)| p).filter(|p| p.max_depth() <= n).collect();
    for k in 0..=n {
        if (1usize << k) > max_pieces {
            dyadic.push(DyadicPartition::regular(0.0, 1.0, k));
        }
    }
    for p in dyadic {
        let cells = p.cell_ranges(n)?;
        if seen.insert(starts(&cells)) {
            let delta = 2.0 * cells.len() as f64;
            models.push(RegressionModel { cells, dyadic: true, delta });
        }
    }
    for d in 1..=max_pieces.min(big_n) {
        let (family, delta) = interval_partition_family(big_n, d, DEFAULT_PARTITION_CAP)?;
        for m in family {
            let cells: Vec<Range<usize>> = m.intervals().into_iter().map(|(a, b)| a - 1..b).collect();
            if seen.insert(starts(&cells)) {
                models.push(RegressionModel { cells, dyadic: false, delta });
            }
        }
    }
    Ok(RegressionFamily { n, models })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionOptions {
    /// Lattice spacing on the square-root scale.
    pub theta: f64,
    /// Pilot thinning probability.
    pub pilot: f64,
    pub select: SelectOptions,
}

impl Default for RegressionOptions {
    fn default() -> Self {
        RegressionOptions { theta: DEFAULT_REGRESSION_THETA, pilot: 0.5, select: SelectOptions { max_elements: 10_000 } }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionEstimate {
    pub estimate: GridIntensity,
    /// Index of the selected model (the first one whose candidate it is).
    pub model: usize,
    pub candidates: usize,
}

/// Points `i+1` repeated `counts[i]` times.
pub fn counts_to_sample(domain: Domain, counts: &[u64]) -> Result<PointSample> {
    let pts = counts.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat_n(vec![(i + 1) as f64], c as usize)).collect();
    PointSample::new(domain, pts)
}

/// The pilot candidate of one model: `(Σ_j θ⌊a_j/θ⌉ φ_j ∨ 0)²` with
/// `a_j = √(N_j/|I_j|)·√|I_j|` the coordinates of the pilot's square-root
/// histogram in the normalized indicator basis.
fn candidate(cells: &[Range<usize>], pilot: &[u64], theta: f64, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; pilot.len()];
    for c in cells {
        let len = c.len() as f64;
        let n: u64 = pilot[c.clone()].iter().sum();
        let a = (n as f64 * scale).sqrt();
        let rounded = theta * (a / theta).round();
        let h = rounded * rounded / len;
        v[c.clone()].iter_mut().for_each(|x| *x = h);
    }
    v
}

pub fn regression_estimate(family: &RegressionFamily, counts: &[u64], opts: &RegressionOptions, seed: Seed) -> Result<RegressionEstimate> {
    regression_estimate_with(family, counts, opts, &mut seed.rng())
}

pub fn regression_estimate_with<R: Rng + ?Sized>(family: &RegressionFamily, counts: &[u64], opts: &RegressionOptions, rng: &mut R) -> Result<RegressionEstimate> {
    if counts.len() != family.points() {
        return Err(invalid(format!("expected {} counts, got {}", family.points(), counts.len())));
    }
    let p = opts.pilot;
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("pilot fraction must lie in (0, 1), got {p}")));
    }
    if !(opts.theta > 0.0) {
        return Err(invalid(format!("θ must be positive, got {}", opts.theta)));
    }
    let (pilot, rest) = thin_counts(counts, p, rng)?;
    let grid = family.grid();
    let observed: u64 = rest.iter().sum();
    // Candidates estimate the intensity (1−p)s of the selection half.
    let scale = (1.0 - p) / p;
    let mut models = Vec::with_capacity(family.models.len());
    for (i, m) in family.models.iter().enumerate() {
        let k = m.pieces();
        let eta_lat = lattice_eta(opts.theta, k);
        let d = (grid_net_cardinality_bound(observed, k, eta_lat).ln() / 4.0).max(0.5);
        let eta = eta_lat.max((84.0 * m.delta).sqrt()).max((84.0 * d / 5.0).sqrt());
        let t = GridIntensity::new(grid, candidate(&m.cells, &pilot, opts.theta, scale))?;
        models.push((crate::net::ModelSpec::new(format!("m{i}"), eta, d, m.delta), vec![t]));
    }
    let net = Net::from_models(models)?;
    let x2 = counts_to_sample(family.domain(), &rest)?;
    let k = select_fast_with(&net, &x2, &opts.select)?;
    let model = net.models().iter().position(|m| m.members.contains(&k)).expect("every element has a model");
    let estimate = net.element(k).scaled(1.0 / (1.0 - p))?;
    Ok(RegressionEstimate { estimate, model, candidates: net.len() })
}

/// Per-replication outcome of [`regression_mc`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionRep {
    /// `‖√s − √ŝ‖₂²`.
    pub loss: f64,
    pub model: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionRisk {
    pub mean: f64,
    pub stderr: f64,
    pub reps: Vec<RegressionRep>,
}

/// Monte Carlo risk `E‖√s − √ŝ‖₂²`; replication `i` draws its counts
/// and thinning from `seed.replication(i)`.
pub fn regression_mc(family: &RegressionFamily, truth: &GridIntensity, opts: &RegressionOptions, reps: usize, seed: Seed) -> Result<RegressionRisk> {
    if truth.grid() != &family.grid() {
        return Err(invalid("truth must live on the family's points"));
    }
    let out: Vec<RegressionRep> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.replication(i as u64).rng();
            let counts = regression_counts_with(truth, &mut rng);
            let est = regression_estimate_with(family, &counts, opts, &mut rng)?;
            let loss = truth.values().iter().zip(est.estimate.values()).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
            Ok(RegressionRep { loss, model: est.model })
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, stderr) = mean_stderr(&out.iter().map(|r| r.loss).collect::<Vec<_>>());
    Ok(RegressionRisk { mean, stderr, reps: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::catalan_number;

    #[test]
    fn small_family() {
        let f = build_regression_family(2, 4).unwrap();
        // Depth ≤ 2 trees: one with 1, 2 and 4 leaves, two with 3.
        assert_eq!(f.dyadic_counts(), vec![0, 1, 1, 2, 1]);
        // Together with the other interval partitions every one of the
        // 2^{N−1} partitions of {1..4} appears once.
        assert_eq!(f.models().len(), 8);
        assert!(f.weight_sum() < 3.0);
    }

    #[test]
    fn shallow_counts_match_catalan() {
        let f = build_regression_family(6, 4).unwrap();
        let c = f.dyadic_counts();
        for leaves in 1..=4 {
            assert_eq!(c[leaves] as u64, catalan_number(leaves as u32 - 1));
        }
        for k in 0..=6 {
            assert!(f.models().iter().any(|m| m.dyadic && m.pieces() == 1 << k && m.cells.iter().all(|r| r.len() == 64 >> k)));
        }
        assert!(f.weight_sum() < 3.0);
    }

    #[test]
    fn discrete_hellinger_is_half_squared_distance() {
        let f = build_regression_family(3, 1).unwrap();
        let s = GridIntensity::new(f.grid(), vec![1.0, 4.0, 0.0, 9.0, 2.0, 2.0, 0.5, 3.0]).unwrap();
        let t = GridIntensity::new(f.grid(), vec![2.0, 1.0, 1.0, 9.0, 0.0, 3.0, 0.5, 1.0]).unwrap();
        let e: f64 = s.values().iter().zip(t.values()).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
        assert!((crate::measure::hellinger_sq(&s, &t).unwrap() - e / 2.0).abs() < 1e-12);
    }

    #[test]
    fn estimate_is_deterministic() {
        let f = build_regression_family(3, 2).unwrap();
        let counts = vec![3, 5, 4, 4, 40, 38, 41, 39];
        let a = regression_estimate(&f, &counts, &RegressionOptions::default(), Seed::new(5)).unwrap();
        let b = regression_estimate(&f, &counts, &RegressionOptions::default(), Seed::new(5)).unwrap();
        assert_eq!(a, b);
        assert!(regression_estimate(&f, &counts[..4], &RegressionOptions::default(), Seed::new(5)).is_err());
    }
}
