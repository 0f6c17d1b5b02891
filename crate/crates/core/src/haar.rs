//! Orthonormal Haar analysis of grid functions in one and two dimensions.
//!
//! Coefficients are those of the piecewise-constant function in `L2(λ)`,
//! so Parseval reads `Σ β² = ‖f‖₂²` with the grid's cell measure. Level
//! `-1` holds the single scaling coefficient; detail level `j` holds `2^j`
//! coefficients in 1-D and `3·4^j` in 2-D (horizontal, vertical and
//! diagonal blocks, in that order).

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{invalid, Result};
use crate::measure::{Grid, GridFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct HaarCoefficients {
    grid: Grid,
    /// `levels[0]` is the scaling level `-1`; `levels[j + 1]` is detail level `j`.
    levels: Vec<Vec<f64>>,
}

impl HaarCoefficients {
    pub fn dimension(&self) -> usize {
        self.grid.dim()
    }

    /// Finest detail level `J - 1` (the grid has `2^J` cells per axis).
    pub fn max_level(&self) -> i32 {
        self.levels.len() as i32 - 2
    }

    pub fn scaling(&self) -> f64 {
        self.levels[0][0]
    }

    /// Coefficients of level `j`, with `j = -1` the scaling level.
    pub fn level(&self, j: i32) -> &[f64] {
        &self.levels[(j + 1) as usize]
    }

    pub fn get(&self, j: i32, k: usize) -> f64 {
        self.level(j)[k]
    }

    /// All coefficients, coarse to fine.
    pub fn flatten(&self) -> Vec<f64> {
        self.levels.iter().flatten().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn energy(&self) -> f64 {
        self.levels.iter().flatten().map(|b| b * b).sum()
    }

    /// `Σ_{j > level} Σ_k β²_{j,k}`.
    pub fn tail_energy(&self, level: i32) -> f64 {
        self.levels.iter().skip((level + 2).max(0) as usize).flatten().map(|b| b * b).sum()
    }

    pub fn level_l1(&self, j: i32) -> f64 {
        self.level(j).iter().map(|b| b.abs()).sum()
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn from_flat(grid: Grid, flat: &[f64]) -> Result<Self> {
        let n = grid.cells_per_axis();
        if !n.is_power_of_two() || !(1..=2).contains(&grid.dim()) {
            return Err(invalid("Haar coefficients need a 1-D or 2-D power-of-2 grid"));
        }
        if flat.len() != grid.cell_count() {
            return Err(invalid(format!("expected {} coefficients, got {}", grid.cell_count(), flat.len())));
        }
        let mut levels = vec![vec![flat[0]]];
        let mut at = 1;
        let mut h = 1usize;
        while at < flat.len() {
            let size = if grid.dim() == 1 { h } else { 3 * h * h };
            levels.push(flat[at..at + size].to_vec());
            at += size;
            h *= 2;
        }
        Ok(HaarCoefficients { grid, levels })
    }

    pub fn synthesize(&self) -> GridFunction {
        let scale = self.grid.cell_measure().sqrt();
        let values = match self.grid.dim() {
            1 => synth_1d(&self.levels),
            _ => synth_2d(&self.levels),
        };
        GridFunction::new(self.grid, values.into_iter().map(|v| v / scale).collect()).expect("synthesis preserves length")
    }
}

pub fn haar_analyze(f: &GridFunction) -> Result<HaarCoefficients> {
    let grid = *f.grid();
    let n = grid.cells_per_axis();
    if !n.is_power_of_two() {
        return Err(invalid(format!("Haar analysis needs a power-of-2 grid, got {n} cells per axis")));
    }
    let scale = grid.cell_measure().sqrt();
    let v: Vec<f64> = f.values().iter().map(|x| x * scale).collect();
    let levels = match grid.dim() {
        1 => analyze_1d(v),
        2 => analyze_2d(v, n),
        d => return Err(invalid(format!("Haar analysis supports dimension 1 or 2, got {d}"))),
    };
    Ok(HaarCoefficients { grid, levels })
}

pub fn haar_synthesize(c: &HaarCoefficients) -> GridFunction {
    c.synthesize()
}

fn analyze_1d(mut a: Vec<f64>) -> Vec<Vec<f64>> {
    let mut details = Vec::new();
    while a.len() > 1 {
        let half = a.len() / 2;
        let mut next = Vec::with_capacity(half);
        let mut d = Vec::with_capacity(half);
        for i in 0..half {
            next.push((a[2 * i] + a[2 * i + 1]) * FRAC_1_SQRT_2);
            d.push((a[2 * i] - a[2 * i + 1]) * FRAC_1_SQRT_2);
        }
        details.push(d);
        a = next;
    }
    let mut levels = vec![a];
    levels.extend(details.into_iter().rev());
    levels
}

fn synth_1d(levels: &[Vec<f64>]) -> Vec<f64> {
    let mut a = levels[0].clone();
    for d in &levels[1..] {
        let mut next = Vec::with_capacity(2 * a.len());
        for (s, w) in a.iter().zip(d) {
            next.push((s + w) * FRAC_1_SQRT_2);
            next.push((s - w) * FRAC_1_SQRT_2);
        }
        a = next;
    }
    a
}

fn analyze_2d(mut a: Vec<f64>, mut n: usize) -> Vec<Vec<f64>> {
    let mut details = Vec::new();
    while n > 1 {
        let h = n / 2;
        let mut ll = vec![0.0; h * h];
        let mut d = vec![0.0; 3 * h * h];
        for i in 0..h {
            for j in 0..h {
                let p = a[2 * i * n + 2 * j];
                let q = a[2 * i * n + 2 * j + 1];
                let r = a[(2 * i + 1) * n + 2 * j];
                let s = a[(2 * i + 1) * n + 2 * j + 1];
                let k = i * h + j;
                ll[k] = 0.5 * (p + q + r + s);
                d[k] = 0.5 * (p - q + r - s);
                d[h * h + k] = 0.5 * (p + q - r - s);
                d[2 * h * h + k] = 0.5 * (p - q - r + s);
            }
        }
        details.push(d);
        a = ll;
        n = h;
    }
    let mut levels = vec![a];
    levels.extend(details.into_iter().rev());
    levels
}

fn synth_2d(levels: &[Vec<f64>]) -> Vec<f64> {
    let mut a = levels[0].clone();
    let mut h = 1usize;
    for d in &levels[1..] {
        let n = 2 * h;
        let mut next = vec![0.0; n * n];
        for i in 0..h {
            for j in 0..h {
                let k = i * h + j;
                let (ll, lh, hl, hh) = (a[k], d[k], d[h * h + k], d[2 * h * h + k]);
                next[2 * i * n + 2 * j] = 0.5 * (ll + lh + hl + hh);
                next[2 * i * n + 2 * j + 1] = 0.5 * (ll - lh + hl - hh);
                next[(2 * i + 1) * n + 2 * j] = 0.5 * (ll + lh - hl - hh);
                next[(2 * i + 1) * n + 2 * j + 1] = 0.5 * (ll - lh - hl + hh);
            }
        }
        a = next;
        h = n;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Domain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fn(grid: Grid, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..grid.cell_count()).map(|_| rng.random_range(-3.0..3.0)).collect();
        GridFunction::new(grid, v).unwrap()
    }

    #[test]
    fn constant_has_only_scaling_coefficient() {
        let g = Grid::unit(5);
        let c = haar_analyze(&GridFunction::new(g, vec![2.0; 32]).unwrap()).unwrap();
        assert!((c.scaling() - 2.0).abs() < 1e-14);
        assert!(c.tail_energy(-1) < 1e-28);
        assert_eq!(c.len(), 32);
        let g2 = Grid::dyadic(Domain::continuous(2, 1.0).unwrap(), 3).unwrap();
        let c2 = haar_analyze(&GridFunction::new(g2, vec![-1.5; 64]).unwrap()).unwrap();
        assert!((c2.scaling() + 1.5).abs() < 1e-14);
        assert!(c2.tail_energy(-1) < 1e-28);
        assert_eq!(c2.level(2).len(), 48);
    }

    #[test]
    fn round_trip_and_parseval() {
        let grids = [
            Grid::unit(7),
            Grid::dyadic(Domain::continuous(1, 3.0).unwrap(), 4).unwrap(),
            Grid::dyadic(Domain::continuous(2, 1.0).unwrap(), 4).unwrap(),
            Grid::dyadic(Domain::continuous(2, 2.0).unwrap(), 2).unwrap(),
        ];
        for (s, g) in grids.into_iter().enumerate() {
            let f = random_fn(g, s as u64);
            let c = haar_analyze(&f).unwrap();
            let back = c.synthesize();
            for (a, b) in f.values().iter().zip(back.values()) {
                assert!((a - b).abs() < 1e-12);
            }
            assert_eq!(HaarCoefficients::from_flat(g, &c.flatten()).unwrap(), c);
            let direct = f.norm_sq();
            assert!(((c.energy() - direct) / direct).abs() < 1e-12);
        }
    }

    #[test]
    fn single_step_detail_sign() {
        let g = Grid::unit(1);
        let c = haar_analyze(&GridFunction::new(g, vec![1.0, 0.0]).unwrap()).unwrap();
        // ψ = +1 on the left half, −1 on the right, normalized on [0,1].
        assert!((c.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((c.scaling() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_dyadic_and_3d() {
        let d = Grid::discrete(Domain::discrete(1, 6).unwrap()).unwrap();
        assert!(haar_analyze(&GridFunction::zeros(d)).is_err());
        let g3 = Grid::dyadic(Domain::continuous(3, 1.0).unwrap(), 1).unwrap();
        assert!(haar_analyze(&GridFunction::zeros(g3)).is_err());
    }
}
