//! Assouad-type hypercube families of intensities on `[0,1]`, the risk
//! lower bounds they yield, and Monte Carlo checks of estimators against
//! those bounds.
//!
//! A family is indexed by `δ ∈ {0,1}^D`, stored as a bit mask with bit `j`
//! holding `δ_{j+1}`.

use rayon::prelude::*;

use crate::approx::p_variation;
use crate::error::{invalid, Error, Result};
use crate::measure::{hellinger_sq, l2_dist, Grid, GridFunction, GridIntensity};
use crate::sim::{PointSample, Sampler, Seed};
use crate::stats::mean_stderr;

/// Largest `D` for which all members or neighbor pairs are enumerated.
pub const MAX_ENUMERATED_D: usize = 16;
/// Largest `D` accepted at all.
pub const MAX_D: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct AssouadFamily {
    d: usize,
    /// `g` on the whole grid, zero outside `[0, 1/D)`.
    g: GridFunction,
    a: f64,
}

impl AssouadFamily {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn grid(&self) -> &Grid {
        self.g.grid()
    }

    pub fn g(&self) -> &GridFunction {
        &self.g
    }

    /// `a = ∫g²`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Number of members, `2^D`.
    pub fn size(&self) -> u64 {
        1u64 << self.d
    }

    /// `s_δ = a^{−1}[1 + Σ_j (δ_j − 1/2) g_j]`.
    pub fn member(&self, delta: u64) -> GridIntensity {
        let n = self.g.values().len();
        let block = n / self.d;
        let gv = self.g.values();
        let v = (0..n)
            .map(|c| {
                let j = c / block;
                let sign = if delta >> j & 1 == 1 { 0.5 } else { -0.5 };
                (1.0 + sign * gv[c - j * block]) / self.a
            })
            .collect();
        GridIntensity::new(*self.grid(), v).expect("members are nonnegative")
    }

    pub fn members(&self) -> Result<Vec<GridIntensity>> {
        if self.d > MAX_ENUMERATED_D {
            return Err(Error::Capacity { what: "family members".into(), count: self.size(), cap: 1 << MAX_ENUMERATED_D });
        }
        Ok((0..self.size()).map(|m| self.member(m)).collect())
    }

    /// `H²(s_δ, s_δ′)` for any pair differing only in coordinate `k`
    /// (0-based). The translates `g_j` have disjoint supports, so this does
    /// not depend on the other coordinates.
    pub fn neighbor_hellinger_sq(&self, k: usize) -> f64 {
        let lo = self.member(0);
        let hi = self.member(1 << k);
        hellinger_sq(&lo, &hi).expect("members share a grid")
    }

    /// The neighbor pair set `C`: `(δ, δ′)` with `δ_k = 0`, `δ′_k = 1` and
    /// equal elsewhere, as `(δ, δ′, k)`.
    pub fn neighbor_pairs(&self) -> Result<Vec<(u64, u64, usize)>> {
        if self.d > MAX_ENUMERATED_D {
            return Err(Error::Capacity { what: "neighbor pairs".into(), count: self.d as u64 * (self.size() / 2), cap: (MAX_ENUMERATED_D as u64) << (MAX_ENUMERATED_D - 1) });
        }
        let mut out = Vec::with_capacity(self.d << (self.d - 1));
        for delta in 0..self.size() {
            for k in 0..self.d {
                if delta >> k & 1 == 0 {
                    out.push((delta, delta | 1 << k, k));
                }
            }
        }
        Ok(out)
    }

    /// `|C|^{−1} Σ_C exp(−2H²(s_δ, s_δ′))`. Each coordinate contributes
    /// `2^{D−1}` pairs with the same `H²`, so the average is taken over `k`.
    pub fn pair_average(&self) -> f64 {
        (0..self.d).map(|k| (-2.0 * self.neighbor_hellinger_sq(k)).exp()).sum::<f64>() / self.d as f64
    }
}

/// Hamming distance between two masks.
pub fn hamming(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones()
}

fn family_grid_check(grid: &Grid, d: usize) -> Result<usize> {
    if grid.dim() != 1 || grid.domain().is_discrete() || grid.domain().volume() != 1.0 {
        return Err(invalid("hypercube families live on a dyadic grid of [0,1]"));
    }
    if d == 0 || d > MAX_D {
        return Err(invalid(format!("need 1 ≤ D ≤ {MAX_D}, got {d}")));
    }
    let n = grid.cell_count();
    if n % d != 0 {
        return Err(invalid(format!("{n} cells cannot be split into D = {d} equal blocks")));
    }
    Ok(n / d)
}

/// The family built from `g` given by its values on the cells of `[0, 1/D)`.
pub fn build_hypercube_family(grid: Grid, d: usize, g: &[f64]) -> Result<AssouadFamily> {
    let block = family_grid_check(&grid, d)?;
    if g.len() != block {
        return Err(invalid(format!("g needs {block} values on [0, 1/D), got {}", g.len())));
    }
    if let Some(v) = g.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(invalid(format!("g must take values in [0, 1], found {v}")));
    }
    let a = g.iter().map(|v| v * v).sum::<f64>() * grid.cell_measure();
    if !(a > 0.0) {
        return Err(invalid("g must have positive energy"));
    }
    let mut full = g.to_vec();
    full.resize(grid.cell_count(), 0.0);
    Ok(AssouadFamily { d, g: GridFunction::new(grid, full)?, a })
}

/// `g = √(D/θ) 1_{[0,1/D)}` with `θ = 2L/3`, so that `a = 1/θ` and
/// `‖s_δ‖_∞ ≤ L`.
pub fn build_bounded_hypercube_family(grid: Grid, d: usize, l: f64) -> Result<AssouadFamily> {
    if !(l >= 1.5 * d as f64) {
        return Err(invalid(format!("need L ≥ 3D/2 = {}, got {l}", 1.5 * d as f64)));
    }
    let block = family_grid_check(&grid, d)?;
    let theta = 2.0 * l / 3.0;
    build_hypercube_family(grid, d, &vec![(d as f64 / theta).sqrt(); block])
}

/// The triangular bump `g(x) = x ∧ (1/D − x)` on `[0, 1/D]`, each cell
/// holding the root mean square of `g` over the cell so that the grid
/// energy is exactly `(12D³)^{−1}`. Needs at least `64D` cells.
pub fn build_sqrt_lipschitz_family(grid: Grid, d: usize) -> Result<AssouadFamily> {
    let block = family_grid_check(&grid, d)?;
    if block < 64 {
        return Err(invalid(format!("need at least 64 cells per block, got {block}")));
    }
    let h = grid.cell_width();
    let df = d as f64;
    let peak = 0.5 / df;
    let g = |x: f64| x.min(1.0 / df - x).max(0.0);
    // Simpson's rule is exact on each linear piece of g².
    let simpson = |u: f64, v: f64| (v - u) / 6.0 * (g(u).powi(2) + 4.0 * g(0.5 * (u + v)).powi(2) + g(v).powi(2));
    let values: Vec<f64> = (0..block)
        .map(|i| {
            let (u, v) = (i as f64 * h, (i + 1) as f64 * h);
            let e = if u < peak && peak < v { simpson(u, peak) + simpson(peak, v) } else { simpson(u, v) };
            (e / h).sqrt()
        })
        .collect();
    build_hypercube_family(grid, d, &values)
}

/// `(Dθ/16) |C|^{−1} Σ_C exp(−2H²)`, where `d²(s_δ, s_δ′) ≥ θΔ(δ, δ′)`.
pub fn assouad_lower_bound(family: &AssouadFamily, theta: f64) -> f64 {
    family.dim() as f64 * theta / 16.0 * family.pair_average()
}

/// `θ` for the `L2` distance, `1/a`.
pub fn l2_theta(family: &AssouadFamily) -> f64 {
    1.0 / family.a()
}

/// `θ` for the Hellinger distance, `1/8`.
pub const HELLINGER_THETA: f64 = 0.125;

/// `d²(s₀, s₁)/16 · exp(−2H²(s₀, s₁))` with `d` the `L2` distance.
pub fn two_point_bound(s0: &GridIntensity, s1: &GridIntensity) -> Result<f64> {
    let d = l2_dist(&s0.as_function(), &s1.as_function())?;
    Ok(d * d / 16.0 * (-2.0 * hellinger_sq(s0, s1)?).exp())
}

/// `α`-variation of `√s_δ`, `(sup Σ|Δ√s|^{1/α})^α`, over the grid values.
pub fn sqrt_alpha_variation(s: &GridIntensity, alpha: f64) -> Result<f64> {
    p_variation(s.sqrt().values(), 1.0 / alpha)
}

/// `√s_δ(x)` of the triangular family from its closed form
/// `s_δ = 12D³[1 + Σ_j (δ_j − 1/2) g(x − j/D)]`.
pub fn sqrt_lipschitz_sqrt_member(d: usize, delta: u64, x: f64) -> f64 {
    let df = d as f64;
    let j = ((x * df).floor().max(0.0) as usize).min(d - 1);
    let u = x - j as f64 / df;
    let g = u.min(1.0 / df - u).max(0.0);
    let sign = if delta >> j & 1 == 1 { 0.5 } else { -0.5 };
    (12.0 * df.powi(3) * (1.0 + sign * g)).sqrt()
}

/// Largest `|r_i − r_j| / (√D[1 ∧ D|x_i − x_j|])` over pairs of cell
/// centers `x_i`.
fn lipschitz_ratio(r: &[f64], h: f64, d: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            let bound = d.sqrt() * (d * (j - i) as f64 * h).min(1.0);
            worst = worst.max((r[i] - r[j]).abs() / bound);
        }
    }
    worst
}

/// Checks `|√s_δ(x) − √s_δ(y)| ≤ √D [1 ∧ D|x − y|]` on all pairs of cell
/// centers of `grid`, with `s_δ` evaluated from its closed form.
pub fn sqrt_lipschitz_lipschitz_holds(grid: &Grid, d: usize, delta: u64) -> bool {
    let r: Vec<f64> = (0..grid.cell_count()).map(|c| sqrt_lipschitz_sqrt_member(d, delta, grid.cell_center(c)[0])).collect();
    lipschitz_ratio(&r, grid.cell_width(), d as f64) <= 1.0 + 1e-12
}

/// The same ratio for the member's cell values. Cells hold root mean
/// squares of `g`, which overshoot the bound slightly where `δ` changes
/// sign between neighboring blocks.
pub fn sqrt_lipschitz_cell_lipschitz_ratio(family: &AssouadFamily, delta: u64) -> f64 {
    let r = family.member(delta).sqrt();
    lipschitz_ratio(r.values(), family.grid().cell_width(), family.dim() as f64)
}

/// Risk of an estimator at one member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberRisk {
    pub delta: u64,
    pub l2_sq: f64,
    pub l2_sq_stderr: f64,
    pub hellinger_sq: f64,
    pub hellinger_sq_stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub risks: Vec<MemberRisk>,
    /// The `L2` bound `(Dθ/16)·avg` with `θ = 1/a`.
    pub l2_bound: f64,
    /// The Hellinger bound with `θ = 1/8`.
    pub hellinger_bound: f64,
}

impl BoundCheck {
    fn worst(&self, f: impl Fn(&MemberRisk) -> (f64, f64)) -> (f64, f64) {
        self.risks.iter().map(f).fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a })
    }

    /// Largest `L2` risk over the probed members, with its standard error.
    pub fn max_l2(&self) -> (f64, f64) {
        self.worst(|r| (r.l2_sq, r.l2_sq_stderr))
    }

    pub fn max_hellinger(&self) -> (f64, f64) {
        self.worst(|r| (r.hellinger_sq, r.hellinger_sq_stderr))
    }

    /// `max risk ≥ bound − 3 stderr` for both losses.
    pub fn passes(&self) -> bool {
        let (l, ls) = self.max_l2();
        let (h, hs) = self.max_hellinger();
        l >= self.l2_bound - 3.0 * ls && h >= self.hellinger_bound - 3.0 * hs
    }
}

/// Monte Carlo risks of `procedure` at the members `deltas` (all members
/// when `None`, which needs `D ≤ 4`). Replication `i` at member `δ` uses
/// `seed.derive(δ).replication(i)`.
pub fn estimator_vs_bound<F>(family: &AssouadFamily, procedure: F, deltas: Option<&[u64]>, reps: usize, seed: Seed) -> Result<BoundCheck>
where
    F: Fn(&PointSample, Seed) -> Result<GridIntensity> + Sync,
{
    if reps < 2 {
        return Err(invalid("risk estimation needs at least 2 replications"));
    }
    let all: Vec<u64>;
    let deltas = match deltas {
        Some(d) => d,
        None if family.dim() <= 4 => {
            all = (0..family.size()).collect();
            &all
        }
        None => return Err(invalid("pass the members to probe when D > 4")),
    };
    let mut risks = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        if delta >= family.size() {
            return Err(invalid(format!("δ = {delta} is not a member index")));
        }
        let s = family.member(delta);
        let sampler = Sampler::new(&s);
        let seed = seed.derive(delta);
        let losses: Vec<(f64, f64)> = (0..reps)
            .into_par_iter()
            .map(|i| {
                let rs = seed.replication(i as u64);
                let x = sampler.sample(&mut rs.rng());
                let est = procedure(&x, rs.derive(1))?;
                let d = l2_dist(&est.as_function(), &s.as_function())?;
                Ok((d * d, hellinger_sq(&s, &est)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let (l2, l2e) = mean_stderr(&losses.iter().map(|l| l.0).collect::<Vec<_>>());
        let (h2, h2e) = mean_stderr(&losses.iter().map(|l| l.1).collect::<Vec<_>>());
        risks.push(MemberRisk { delta, l2_sq: l2, l2_sq_stderr: l2e, hellinger_sq: h2, hellinger_sq_stderr: h2e });
    }
    Ok(BoundCheck { risks, l2_bound: assouad_lower_bound(family, l2_theta(family)), hellinger_bound: assouad_lower_bound(family, HELLINGER_THETA) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_family() {
        let f = build_hypercube_family(Grid::unit(3), 1, &[1.0; 8]).unwrap();
        assert_eq!(f.a(), 1.0);
        assert!(f.member(0).values().iter().all(|v| *v == 0.5));
        assert!(f.member(1).values().iter().all(|v| *v == 1.5));
        let pairs = f.neighbor_pairs().unwrap();
        assert_eq!(pairs, vec![(0, 1, 0)]);
        let h2 = hellinger_sq(&f.member(0), &f.member(1)).unwrap();
        assert!((f.pair_average() - (-2.0 * h2).exp()).abs() < 1e-15);
    }

    #[test]
    fn distances_follow_hamming() {
        let g: Vec<f64> = (0..16).map(|i| (i as f64 + 0.5) / 16.0).collect();
        let f = build_hypercube_family(Grid::unit(6), 4, &g).unwrap();
        for a in 0..16u64 {
            for b in 0..16u64 {
                let d = l2_dist(&f.member(a).as_function(), &f.member(b).as_function()).unwrap();
                assert!((d * d - hamming(a, b) as f64 / f.a()).abs() < 1e-9 * (1.0 + d * d));
            }
        }
        assert_eq!(f.neighbor_pairs().unwrap().len(), 4 * 8);
        // The coordinate-wise average equals the full pair average.
        let full: f64 = f.neighbor_pairs().unwrap().iter().map(|&(a, b, _)| (-2.0 * hellinger_sq(&f.member(a), &f.member(b)).unwrap()).exp()).sum::<f64>() / 32.0;
        assert!((full - f.pair_average()).abs() < 1e-12);
        assert!(build_hypercube_family(Grid::unit(6), 4, &[2.0; 16]).is_err());
        assert!(build_hypercube_family(Grid::unit(6), 3, &[0.5; 21]).is_err());
    }

    #[test]
    fn two_point_example() {
        let g = Grid::unit(0);
        let b = two_point_bound(&GridIntensity::constant(g, 1.0).unwrap(), &GridIntensity::constant(g, 4.0).unwrap()).unwrap();
        assert!((b - 9.0 / 16.0 * (-1.0f64).exp()).abs() < 1e-12);
        let s = GridIntensity::constant(g, 2.0).unwrap();
        assert_eq!(two_point_bound(&s, &s).unwrap(), 0.0);
    }

    #[test]
    fn sqrt_lipschitz_energy() {
        for d in [1usize, 2, 4] {
            let f = build_sqrt_lipschitz_family(Grid::unit(8), d).unwrap();
            let exact = 1.0 / (12.0 * (d as f64).powi(3));
            assert!((f.a() - exact).abs() <= 1e-9 * exact);
        }
        assert!(build_sqrt_lipschitz_family(Grid::unit(7), 4).is_err());
    }

    #[test]
    fn sqrt_lipschitz_lipschitz() {
        let grid = Grid::unit(8);
        for d in [1usize, 2, 4] {
            let f = build_sqrt_lipschitz_family(grid, d).unwrap();
            for delta in 0..f.size() {
                assert!(sqrt_lipschitz_lipschitz_holds(&grid, d, delta));
                // Closed form and cell values agree away from the peaks.
                let m = f.member(delta).sqrt();
                let c = 3;
                assert!((m.values()[c] - sqrt_lipschitz_sqrt_member(d, delta, grid.cell_center(c)[0])).abs() < 1e-3);
                assert!(sqrt_lipschitz_cell_lipschitz_ratio(&f, delta) < 1.001);
            }
        }
    }
}
