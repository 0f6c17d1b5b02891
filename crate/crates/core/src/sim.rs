//! Exact simulation of Poisson processes with piecewise-constant intensity.
//!
//! A draw is `N ~ Poisson(μ(X))` followed by `N` i.i.d. points with density
//! `s/μ(X)`: a cell is picked with probability proportional to its mass and
//! the point is placed uniformly inside it. Every replication owns a
//! [`Seed`] derived from `(master seed, replication index)`, so Monte Carlo
//! results do not depend on the order replications run in.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::measure::{Domain, Grid, GridFunction, GridIntensity};

/// Reproducible RNG identity: a 64-bit value plus a stream index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub value: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(value: u64) -> Self {
        Seed { value, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Seed { stream, ..self }
    }

    /// Seed of replication `index` under this master seed.
    pub fn replication(&self, index: u64) -> Seed {
        Seed { value: splitmix64(self.value ^ splitmix64(self.stream.wrapping_add(0x5851_f42d_4c95_7f2d))), stream: index }
    }

    /// Independent child seed for a named sub-task.
    pub fn derive(&self, tag: u64) -> Seed {
        Seed { value: splitmix64(self.value.wrapping_add(splitmix64(tag ^ self.stream))), stream: self.stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.value);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Poisson variate: inversion for small means, transformed rejection
/// (PTRS, Hörmann 1993) above [`POISSON_INVERSION_MAX`].
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean <= POISSON_INVERSION_MAX {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrs(rng, mean)
    }
}

pub const POISSON_INVERSION_MAX: f64 = 30.0;

fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        // Guard against the cdf stalling just below u in floating point.
        if p < f64::MIN_POSITIVE && k as f64 > mean {
            break;
        }
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln() <= -mean + k * loglam - ln_gamma(k + 1.0) {
            return k as u64;
        }
    }
}

/// One realization of a Poisson process: a finite set of points.
///
/// Points are kept in generation order; coordinates of discrete domains
/// are 1-based integers.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSample {
    domain: Domain,
    coords: Vec<f64>,
}

impl PointSample {
    pub fn empty(domain: Domain) -> Self {
        PointSample { domain, coords: Vec::new() }
    }

    pub fn new(domain: Domain, points: Vec<Vec<f64>>) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * domain.dim());
        for (i, p) in points.iter().enumerate() {
            if !domain.contains(p) {
                return Err(invalid(format!("point {i} = {p:?} lies outside {domain:?}")));
            }
            coords.extend_from_slice(p);
        }
        Ok(PointSample { domain, coords })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.domain.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks(self.domain.dim())
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let k = self.domain.dim();
        &self.coords[i * k..(i + 1) * k]
    }

    /// Superposition of two samples on the same domain.
    pub fn merge(&self, other: &PointSample) -> Result<PointSample> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch(format!("{:?} vs {:?}", self.domain, other.domain)));
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Ok(PointSample { domain: self.domain, coords })
    }

    /// Number of points in every cell of `grid`.
    pub fn cell_counts(&self, grid: &Grid) -> Result<Vec<u64>> {
        self.check_grid(grid)?;
        let mut counts = vec![0u64; grid.cell_count()];
        for p in self.points() {
            counts[grid.cell_of(p).expect("points lie in the domain")] += 1;
        }
        Ok(counts)
    }

    /// Occupied cells with their counts, sorted by cell index.
    pub fn occupied_cells(&self, grid: &Grid) -> Result<Vec<(usize, u64)>> {
        let mut cells: Vec<usize> = Vec::with_capacity(self.len());
        self.check_grid(grid)?;
        for p in self.points() {
            cells.push(grid.cell_of(p).expect("points lie in the domain"));
        }
        cells.sort_unstable();
        let mut out: Vec<(usize, u64)> = Vec::new();
        for c in cells {
            match out.last_mut() {
                Some((last, n)) if *last == c => *n += 1,
                _ => out.push((c, 1)),
            }
        }
        Ok(out)
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.domain() != self.domain {
            return Err(Error::DomainMismatch(format!("sample on {:?}, grid on {:?}", self.domain, grid.domain())));
        }
        Ok(())
    }

    /// One point per line, coordinates separated by spaces.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        for p in self.points() {
            let line: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(domain: Domain, input: R) -> Result<PointSample> {
        let mut points = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let p: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
            let p = p.map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            if !domain.contains(&p) {
                return Err(Error::Parse { line: i + 1, msg: format!("point {p:?} outside {domain:?}") });
            }
            points.push(p);
        }
        PointSample::new(domain, points)
    }
}

/// Draws one realization of the Poisson process with intensity `s`.
pub fn sample_process(s: &GridIntensity, seed: Seed) -> PointSample {
    sample_process_with(s, &mut seed.rng())
}

pub fn sample_process_with<R: Rng + ?Sized>(s: &GridIntensity, rng: &mut R) -> PointSample {
    Sampler::new(s).sample(rng)
}

/// Precomputed cell-selection table for repeated draws from one intensity.
#[derive(Debug, Clone)]
pub struct Sampler {
    grid: Grid,
    cumulative: Vec<f64>,
    mass: f64,
}

impl Sampler {
    pub fn new(s: &GridIntensity) -> Self {
        let mut acc = 0.0;
        let cumulative = s
            .cell_masses()
            .into_iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        Sampler { grid: *s.grid(), cumulative, mass: acc }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PointSample {
        let domain = self.grid.domain();
        let n = poisson(rng, self.mass);
        let k = domain.dim();
        let mut coords = Vec::with_capacity(n as usize * k);
        let w = self.grid.cell_width();
        for _ in 0..n {
            let cell = self.draw_cell(rng);
            for c in self.grid.cell_coords(cell) {
                coords.push(match domain {
                    Domain::Continuous { side, .. } => {
                        // Keep the point inside its cell despite rounding.
                        let x = (c as f64 + rng.random::<f64>()) * w;
                        x.min(side)
                    }
                    Domain::Discrete { .. } => (c + 1) as f64,
                });
            }
        }
        PointSample { domain, coords }
    }

    /// Cell counts of one draw without materializing the points.
    pub fn sample_counts<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        let n = poisson(rng, self.mass);
        let mut counts = vec![0u64; self.cumulative.len()];
        for _ in 0..n {
            counts[self.draw_cell(rng)] += 1;
        }
        counts
    }

    fn draw_cell<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.mass;
        let i = self.cumulative.partition_point(|&c| c <= u);
        // Skip zero-mass cells at the upper edge.
        let mut i = i.min(self.cumulative.len() - 1);
        while i > 0 && self.cumulative[i] == self.cumulative[i - 1] {
            i -= 1;
        }
        i
    }
}

/// Splits `x` into two independent processes with means `pμ` and `(1−p)μ`.
pub fn thin(x: &PointSample, p: f64, seed: Seed) -> Result<(PointSample, PointSample)> {
    thin_with(x, p, &mut seed.rng())
}

pub fn thin_with<R: Rng + ?Sized>(x: &PointSample, p: f64, rng: &mut R) -> Result<(PointSample, PointSample)> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("thinning probability must lie in (0, 1], got {p}")));
    }
    let mut first = PointSample::empty(x.domain);
    let mut second = PointSample::empty(x.domain);
    for pt in x.points() {
        if rng.random::<f64>() < p {
            first.coords.extend_from_slice(pt);
        } else {
            second.coords.extend_from_slice(pt);
        }
    }
    Ok((first, second))
}

/// Binomial thinning of cell counts, the count-level analogue of [`thin`].
pub fn thin_counts<R: Rng + ?Sized>(counts: &[u64], p: f64, rng: &mut R) -> Result<(Vec<u64>, Vec<u64>)> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("thinning probability must lie in (0, 1], got {p}")));
    }
    let mut a = Vec::with_capacity(counts.len());
    let mut b = Vec::with_capacity(counts.len());
    for &n in counts {
        let k = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
        a.push(k);
        b.push(n - k);
    }
    Ok((a, b))
}

/// `Σ_i φ(X_i)`.
pub fn empirical_functional(x: &PointSample, phi: &GridFunction) -> Result<f64> {
    let grid = phi.grid();
    if grid.domain() != x.domain {
        return Err(Error::DomainMismatch(format!("sample on {:?}, φ on {:?}", x.domain, grid.domain())));
    }
    Ok(x.points().map(|p| phi.values()[grid.cell_of(p).expect("points lie in the domain")]).sum())
}

/// `Π_i φ(X_i)` (1 for the empty sample).
pub fn product_functional(x: &PointSample, phi: &GridFunction) -> Result<f64> {
    let grid = phi.grid();
    if grid.domain() != x.domain {
        return Err(Error::DomainMismatch(format!("sample on {:?}, φ on {:?}", x.domain, grid.domain())));
    }
    Ok(x.points().map(|p| phi.values()[grid.cell_of(p).expect("points lie in the domain")]).product())
}

/// Independent Poisson counts with means equal to the cell masses of `s`.
pub fn regression_counts(s: &GridIntensity, seed: Seed) -> Vec<u64> {
    regression_counts_with(s, &mut seed.rng())
}

pub fn regression_counts_with<R: Rng + ?Sized>(s: &GridIntensity, rng: &mut R) -> Vec<u64> {
    s.cell_masses().into_iter().map(|m| poisson(rng, m)).collect()
}

/// `log (dQ_num/dQ_den)(X) = (den(X) − num(X)) + Σ_i log(num/den)(X_i)`.
///
/// A point where both intensities vanish contributes 0; a point where only
/// `den` vanishes makes the ratio `+∞` (and `−∞` in the mirrored case).
pub fn log_likelihood_ratio(x: &PointSample, num: &GridIntensity, den: &GridIntensity) -> Result<f64> {
    num.grid().ensure_same(den.grid())?;
    let counts = x.occupied_cells(num.grid())?;
    Ok(log_likelihood_ratio_counts(&counts, num, den))
}

pub(crate) fn log_likelihood_ratio_counts(counts: &[(usize, u64)], num: &GridIntensity, den: &GridIntensity) -> f64 {
    let mut acc = den.mass() - num.mass();
    let (nv, dv) = (num.values(), den.values());
    for &(c, n) in counts {
        let (a, b) = (nv[c], dv[c]);
        if a == b {
            continue;
        }
        if b == 0.0 {
            return f64::INFINITY;
        }
        if a == 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += n as f64 * (a / b).ln();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::hellinger_sq;
    use statrs::distribution::{ContinuousCDF, ChiSquared};

    fn unit(c: f64) -> GridIntensity {
        GridIntensity::constant(Grid::unit(0), c).unwrap()
    }

    #[test]
    fn zero_intensity_gives_empty_samples() {
        let z = GridIntensity::zero(Grid::unit(4));
        for i in 0..50 {
            assert!(sample_process(&z, Seed::new(9).replication(i)).is_empty());
        }
        assert_eq!(regression_counts(&z, Seed::new(1)), vec![0; 16]);
    }

    #[test]
    fn same_seed_same_sample() {
        let s = GridIntensity::from_fn(Grid::unit(5), |x| 10.0 * x[0]).unwrap();
        let a = sample_process(&s, Seed::new(42).with_stream(3));
        let b = sample_process(&s, Seed::new(42).with_stream(3));
        let c = sample_process(&s, Seed::new(42).with_stream(4));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.points().all(|p| s.domain().contains(p)));
    }

    #[test]
    fn poisson_moments_both_regimes() {
        for mean in [0.7, 3.0, 29.5, 45.0, 400.0] {
            let mut rng = Seed::new(7).rng();
            let reps = 40_000;
            let xs: Vec<f64> = (0..reps).map(|_| poisson(&mut rng, mean) as f64).collect();
            let m = xs.iter().sum::<f64>() / reps as f64;
            let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (reps - 1) as f64;
            assert!((m - mean).abs() <= 4.0 * (mean / reps as f64).sqrt(), "mean {m} vs {mean}");
            // Var of the sample variance of a Poisson ≈ (μ + 2μ²)/n.
            let sv = ((mean + 2.0 * mean * mean) / reps as f64).sqrt();
            assert!((v - mean).abs() <= 4.0 * sv, "var {v} vs {mean}");
        }
    }

    #[test]
    fn ptrs_matches_pmf_chi_square() {
        let mean = 50.0;
        let mut rng = Seed::new(11).rng();
        let reps = 50_000;
        let (lo, hi) = (30u64, 70u64);
        let mut hist = vec![0f64; (hi - lo + 3) as usize];
        for _ in 0..reps {
            let k = poisson(&mut rng, mean);
            let b = if k < lo { 0 } else if k > hi { hist.len() - 1 } else { (k - lo + 1) as usize };
            hist[b] += 1.0;
        }
        let pmf = |k: u64| (-mean + k as f64 * mean.ln() - ln_gamma(k as f64 + 1.0)).exp();
        let mut probs = vec![0f64; hist.len()];
        let below: f64 = (0..lo).map(pmf).sum();
        probs[0] = below;
        for k in lo..=hi {
            probs[(k - lo + 1) as usize] = pmf(k);
        }
        let last = probs.len() - 1;
        probs[last] = 1.0 - probs[..last].iter().sum::<f64>();
        let chi: f64 = hist.iter().zip(&probs).map(|(o, p)| (o - reps as f64 * p).powi(2) / (reps as f64 * p)).sum();
        let pval = 1.0 - ChiSquared::new((hist.len() - 1) as f64).unwrap().cdf(chi);
        assert!(pval > 1e-4, "chi2 {chi}, p {pval}");
    }

    #[test]
    fn thinning_edge_cases() {
        let s = unit(20.0);
        let x = sample_process(&s, Seed::new(3));
        let (a, b) = thin(&x, 1.0, Seed::new(4)).unwrap();
        assert_eq!(a, x);
        assert!(b.is_empty());
        assert!(thin(&x, 0.0, Seed::new(4)).is_err());
        assert!(thin(&x, 1.5, Seed::new(4)).is_err());
        let (a, b) = thin(&x, 0.3, Seed::new(5)).unwrap();
        assert_eq!(a.len() + b.len(), x.len());
    }

    #[test]
    fn functionals() {
        let g = Grid::unit(2);
        let phi = GridFunction::new(g, vec![1.0, 2.0, -1.0, 0.5]).unwrap();
        assert_eq!(empirical_functional(&PointSample::empty(Domain::unit_interval()), &phi).unwrap(), 0.0);
        let x = PointSample::new(Domain::unit_interval(), vec![vec![0.1], vec![0.3], vec![0.9]]).unwrap();
        assert_eq!(empirical_functional(&x, &phi).unwrap(), 3.5);
        assert_eq!(product_functional(&x, &phi).unwrap(), 1.0);
        let one = GridFunction::new(g, vec![1.0; 4]).unwrap();
        assert_eq!(empirical_functional(&x, &one).unwrap(), 3.0);
        let other = GridFunction::zeros(Grid::dyadic(Domain::continuous(1, 2.0).unwrap(), 2).unwrap());
        assert!(empirical_functional(&x, &other).is_err());
    }

    #[test]
    fn likelihood_ratio_conventions() {
        let g = Grid::unit(1);
        let num = GridIntensity::new(g, vec![2.0, 0.0]).unwrap();
        let den = GridIntensity::new(g, vec![1.0, 0.0]).unwrap();
        let empty = PointSample::empty(Domain::unit_interval());
        assert_eq!(log_likelihood_ratio(&empty, &num, &den).unwrap(), den.mass() - num.mass());
        let x = PointSample::new(Domain::unit_interval(), vec![vec![0.2], vec![0.7]]).unwrap();
        assert!((log_likelihood_ratio(&x, &num, &den).unwrap() - (-0.5 + 2f64.ln())).abs() < 1e-15);
        assert_eq!(log_likelihood_ratio(&x, &num, &num).unwrap(), 0.0);
        let den0 = GridIntensity::new(g, vec![0.0, 1.0]).unwrap();
        assert_eq!(log_likelihood_ratio(&x, &num, &den0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn exponential_inequality_for_lr() {
        // P_den[log LR(num/den) ≥ 2x] ≤ exp(−H² − x).
        let g = Grid::unit(1);
        let den = GridIntensity::new(g, vec![3.0, 1.0]).unwrap();
        let num = GridIntensity::new(g, vec![1.0, 4.0]).unwrap();
        let h2 = hellinger_sq(&num, &den).unwrap();
        let sampler = Sampler::new(&den);
        let reps = 20_000;
        for x in [0.0, 1.0] {
            let mut hits = 0usize;
            for i in 0..reps {
                let s = sampler.sample(&mut Seed::new(77).replication(i).rng());
                if log_likelihood_ratio(&s, &num, &den).unwrap() >= 2.0 * x {
                    hits += 1;
                }
            }
            let p = hits as f64 / reps as f64;
            let se = (p * (1.0 - p) / reps as f64).sqrt();
            assert!(p <= (-h2 - x).exp() + 3.0 * se, "x={x}: {p} vs {}", (-h2 - x).exp());
        }
    }

    #[test]
    fn text_round_trip() {
        let d = Domain::continuous(2, 1.0).unwrap();
        let x = PointSample::new(d, vec![vec![0.25, 0.5], vec![0.125, 1.0]]).unwrap();
        let mut buf = Vec::new();
        x.write_text(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "0.25 0.5\n0.125 1\n");
        assert_eq!(PointSample::read_text(d, buf.as_slice()).unwrap(), x);
        assert!(PointSample::read_text(d, "2 0\n".as_bytes()).is_err());
    }
}
