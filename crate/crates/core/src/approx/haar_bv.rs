//! Decay of Haar detail energy for functions of bounded variation on the
//! unit square.

use crate::error::{invalid, Result};
use crate::haar::haar_analyze;
use crate::measure::GridFunction;

use super::weak_lq::weak_lq_weight;

#[derive(Debug, Clone, PartialEq)]
pub struct HaarBvReport {
    /// Least-squares slope of `log₂ tail(J)` against `J`.
    pub slope: f64,
    /// `tail(J) = Σ_{j>J} Σ_k β²_{j,k}` for `J = 0..=max_level − 1`.
    pub tails: Vec<f64>,
    /// `Σ_k |β_{j,k}|` for each detail level `j`.
    pub level_l1: Vec<f64>,
    /// Weak-ℓ₁ weight of all detail coefficients.
    pub weak_l1: f64,
    /// `−2(1/2 − 1/p)`, the decay rate guaranteed for `f ∈ L_p ∩ BV`.
    pub target_slope: f64,
}

/// The slope fit uses the levels where the tail is positive; at least two
/// are needed.
pub fn haar_bv_tail_check(f: &GridFunction, p: f64) -> Result<HaarBvReport> {
    if f.grid().dim() != 2 {
        return Err(invalid("the BV tail check works on 2-D grids"));
    }
    if !(p > 2.0) {
        return Err(invalid(format!("need p > 2, got {p}")));
    }
    let c = haar_analyze(f)?;
    let top = c.max_level();
    let details: Vec<f64> = (0..=top).flat_map(|j| c.level(j).iter().copied()).collect();
    if details.iter().all(|b| *b == 0.0) {
        return Err(invalid("constant function: all detail coefficients vanish"));
    }
    let tails: Vec<f64> = (0..top).map(|j| c.tail_energy(j)).collect();
    let pts: Vec<(f64, f64)> = tails.iter().enumerate().filter(|(_, t)| **t > 0.0).map(|(j, t)| (j as f64, t.log2())).collect();
    if pts.len() < 2 {
        return Err(invalid("fewer than two levels with positive tail energy"));
    }
    Ok(HaarBvReport {
        slope: ls_slope(&pts),
        tails,
        level_l1: (0..=top).map(|j| c.level_l1(j)).collect(),
        weak_l1: weak_lq_weight(&details, 1.0),
        target_slope: -2.0 * (0.5 - 1.0 / p),
    })
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Domain, Grid};

    fn grid(r: u32) -> Grid {
        Grid::dyadic(Domain::continuous(2, 1.0).unwrap(), r).unwrap()
    }

    #[test]
    fn constant_is_rejected() {
        let f = GridFunction::from_fn(grid(4), |_| 2.0).unwrap();
        assert!(haar_bv_tail_check(&f, 4.0).is_err());
    }

    #[test]
    fn half_plane_decays() {
        let f = GridFunction::from_fn(grid(7), |x| if x[0] < 1.0 / 3.0 { 1.0 } else { 0.0 }).unwrap();
        let r = haar_bv_tail_check(&f, 4.0).unwrap();
        assert!(r.slope <= r.target_slope + 0.1, "slope {}", r.slope);
        assert!((r.slope + 1.0).abs() < 0.15);
        let m = r.level_l1.iter().cloned().fold(0.0, f64::max);
        assert!(m < 1.0);
    }

    #[test]
    fn slope_of_a_line() {
        assert!((ls_slope(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]) - 2.0).abs() < 1e-12);
    }
}
