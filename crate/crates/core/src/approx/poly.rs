//! Least-squares approximation by piecewise tensor polynomials on a
//! regular partition of a one- or two-dimensional box.
//!
//! Grid values are read as samples at cell centers; on each block the
//! polynomial of degree at most `r` per variable closest to them in the
//! grid `L2` norm is computed from an orthonormal basis built by
//! Gram-Schmidt on centered monomials.

use crate::error::{invalid, Result};
use crate::measure::GridFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct PolyApprox {
    pub approx: GridFunction,
    /// `‖f − g‖₂`.
    pub l2_error: f64,
    /// `max |f − g|` over the grid.
    pub sup_error: f64,
    /// `(r+1)^k ∏ N_j`.
    pub dimension: usize,
}

pub const MAX_POLY_DEGREE: usize = 2;

pub fn piecewise_poly_approx(f: &GridFunction, blocks: &[usize], r: usize) -> Result<PolyApprox> {
    let grid = *f.grid();
    let k = grid.dim();
    if grid.domain().is_discrete() || k > 2 {
        return Err(invalid("piecewise polynomials need a continuous 1-D or 2-D grid"));
    }
    if blocks.len() != k {
        return Err(invalid(format!("need one block count per axis ({k}), got {}", blocks.len())));
    }
    if r > MAX_POLY_DEGREE {
        return Err(invalid(format!("degree {r} exceeds the supported maximum {MAX_POLY_DEGREE}")));
    }
    let n = grid.cells_per_axis();
    if let Some(b) = blocks.iter().find(|&&b| b == 0 || n % b != 0) {
        return Err(invalid(format!("{b} blocks do not divide {n} cells per axis")));
    }
    let sizes: Vec<usize> = blocks.iter().map(|b| n / b).collect();
    let values = f.values();
    let mut out = vec![0.0; values.len()];
    let block_count: usize = blocks.iter().product();
    for b in 0..block_count {
        // Block coordinates, axis 0 slowest like the grid.
        let (bi, bj) = if k == 1 { (b, 0) } else { (b / blocks[1], b % blocks[1]) };
        let cells: Vec<(usize, f64, f64)> = if k == 1 {
            (0..sizes[0]).map(|i| (bi * sizes[0] + i, i as f64 + 0.5 - sizes[0] as f64 / 2.0, 0.0)).collect()
        } else {
            let mut v = Vec::with_capacity(sizes[0] * sizes[1]);
            for i in 0..sizes[0] {
                for j in 0..sizes[1] {
                    let idx = (bi * sizes[0] + i) * n + bj * sizes[1] + j;
                    v.push((idx, i as f64 + 0.5 - sizes[0] as f64 / 2.0, j as f64 + 0.5 - sizes[1] as f64 / 2.0));
                }
            }
            v
        };
        let basis = orthonormal_basis(&cells, k, r);
        let local: Vec<f64> = cells.iter().map(|c| values[c.0]).collect();
        let mut fit = vec![0.0; cells.len()];
        for e in &basis {
            let coef: f64 = e.iter().zip(&local).map(|(a, b)| a * b).sum();
            for (t, v) in fit.iter_mut().zip(e) {
                *t += coef * v;
            }
        }
        for (c, v) in cells.iter().zip(fit) {
            out[c.0] = v;
        }
    }
    let cm = grid.cell_measure();
    let mut l2 = 0.0;
    let mut sup = 0.0f64;
    for (a, b) in values.iter().zip(&out) {
        l2 += cm * (a - b).powi(2);
        sup = sup.max((a - b).abs());
    }
    Ok(PolyApprox {
        approx: GridFunction::new(grid, out)?,
        l2_error: l2.sqrt(),
        sup_error: sup,
        dimension: (r + 1).pow(k as u32) * blocks.iter().product::<usize>(),
    })
}

/// Orthonormal (in the counting inner product) span of the monomials
/// `x^i y^j`, `i, j ≤ r`, evaluated at the given points.
fn orthonormal_basis(cells: &[(usize, f64, f64)], k: usize, r: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let powers: Vec<(i32, i32)> = if k == 1 {
        (0..=r as i32).map(|i| (i, 0)).collect()
    } else {
        (0..=r as i32).flat_map(|i| (0..=r as i32).map(move |j| (i, j))).collect()
    };
    for (px, py) in powers {
        let mut v: Vec<f64> = cells.iter().map(|c| c.1.powi(px) * c.2.powi(py)).collect();
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // Two Gram-Schmidt passes for stability.
        for _ in 0..2 {
            for e in &basis {
                let d: f64 = e.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(e) {
                    *x -= d * y;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // Monomials dependent on the points (too few cells per block) are dropped.
        if norm > 1e-9 * norm0.max(1.0) {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Domain, Grid};

    #[test]
    fn linear_is_exact_with_degree_one() {
        let g = Grid::unit(8);
        let f = GridFunction::from_fn(g, |x| 3.0 * x[0] - 1.0).unwrap();
        for b in [1, 2, 16] {
            let a = piecewise_poly_approx(&f, &[b], 1).unwrap();
            assert!(a.l2_error < 1e-10);
            assert_eq!(a.dimension, 2 * b);
        }
    }

    #[test]
    fn members_of_the_space_are_reproduced() {
        let g = Grid::dyadic(Domain::continuous(2, 1.0).unwrap(), 5).unwrap();
        let f = GridFunction::from_fn(g, |x| if x[0] < 0.5 { x[0] * x[1] + x[1] * x[1] } else { 2.0 - x[0] * x[0] }).unwrap();
        let a = piecewise_poly_approx(&f, &[2, 4], 2).unwrap();
        assert!(a.l2_error < 1e-10);
        assert_eq!(a.dimension, 9 * 8);
        assert!(piecewise_poly_approx(&f, &[3, 4], 2).is_err());
        assert!(piecewise_poly_approx(&f, &[2, 4], 3).is_err());
    }

    #[test]
    fn degree_zero_is_block_mean() {
        let g = Grid::unit(2);
        let f = GridFunction::new(g, vec![1.0, 3.0, 0.0, 8.0]).unwrap();
        let a = piecewise_poly_approx(&f, &[2], 0).unwrap();
        for (x, y) in a.approx.values().iter().zip([2.0, 2.0, 4.0, 4.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((a.sup_error - 4.0).abs() < 1e-12);
    }
}
