//! Piecewise-constant intensities on dyadic grids and the Hellinger-type
//! distance between finite measures.
//!
//! Every intensity handled by the crate lives on a [`Grid`]: either the box
//! `[0, L]^k` cut into `2^r` cells per axis, or the discrete set
//! `{1..N}^k` with the counting measure. Integrals against the reference
//! measure are then finite sums, so
//!
//! ```text
//! H²(t, u) = ½ Σ_cells |cell| (√t_i − √u_i)²
//! ```
//!
//! is computed without quadrature error. Operands must share a grid; use
//! [`GridIntensity::refine`] to bring two continuous intensities onto a
//! common resolution first.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{invalid, Error, Result};

/// Resolution used when discretizing closed-form intensities in 1-D.
pub const MASTER_RESOLUTION_1D: u32 = 10;
/// Per-axis resolution used when discretizing closed-form intensities in 2-D.
pub const MASTER_RESOLUTION_2D: u32 = 5;

/// The observation space together with its reference measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// `[0, side]^dim` with the Lebesgue measure.
    Continuous { dim: usize, side: f64 },
    /// `{1..cells}^dim` with the counting measure.
    Discrete { dim: usize, cells: usize },
}

impl Domain {
    pub fn continuous(dim: usize, side: f64) -> Result<Self> {
        if dim == 0 || !(side > 0.0 && side.is_finite()) {
            return Err(invalid(format!("continuous domain needs dim >= 1 and side > 0, got dim={dim}, side={side}")));
        }
        Ok(Domain::Continuous { dim, side })
    }

    pub fn unit_interval() -> Self {
        Domain::Continuous { dim: 1, side: 1.0 }
    }

    pub fn discrete(dim: usize, cells: usize) -> Result<Self> {
        if dim == 0 || cells == 0 {
            return Err(invalid(format!("discrete domain needs dim >= 1 and N >= 1, got dim={dim}, N={cells}")));
        }
        Ok(Domain::Discrete { dim, cells })
    }

    pub fn dim(&self) -> usize {
        match *self {
            Domain::Continuous { dim, .. } | Domain::Discrete { dim, .. } => dim,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Domain::Discrete { .. })
    }

    /// Whether a point (one coordinate per axis) lies in the domain.
    /// Discrete coordinates are 1-based integers.
    pub fn contains(&self, point: &[f64]) -> bool {
        if point.len() != self.dim() {
            return false;
        }
        match *self {
            Domain::Continuous { side, .. } => point.iter().all(|&x| (0.0..=side).contains(&x)),
            Domain::Discrete { cells, .. } => point
                .iter()
                .all(|&x| x.fract() == 0.0 && x >= 1.0 && x <= cells as f64),
        }
    }

    /// Total reference measure of the domain.
    pub fn volume(&self) -> f64 {
        match *self {
            Domain::Continuous { dim, side } => side.powi(dim as i32),
            Domain::Discrete { dim, cells } => (cells as f64).powi(dim as i32),
        }
    }
}

/// Cell geometry shared by every function on the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    domain: Domain,
    resolution: u32,
}

impl Grid {
    /// Dyadic grid with `2^resolution` cells per axis on a continuous box.
    pub fn dyadic(domain: Domain, resolution: u32) -> Result<Self> {
        match domain {
            Domain::Continuous { .. } => {
                if resolution > 30 {
                    return Err(invalid(format!("resolution {resolution} too large")));
                }
                Ok(Grid { domain, resolution })
            }
            Domain::Discrete { .. } => Err(invalid("dyadic resolution applies to continuous domains only")),
        }
    }

    /// One cell per point of a discrete domain.
    pub fn discrete(domain: Domain) -> Result<Self> {
        match domain {
            Domain::Discrete { .. } => Ok(Grid { domain, resolution: 0 }),
            Domain::Continuous { .. } => Err(invalid("expected a discrete domain")),
        }
    }

    /// `[0,1]` with `2^resolution` cells.
    pub fn unit(resolution: u32) -> Self {
        Grid { domain: Domain::unit_interval(), resolution }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn cells_per_axis(&self) -> usize {
        match self.domain {
            Domain::Continuous { .. } => 1usize << self.resolution,
            Domain::Discrete { cells, .. } => cells,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_axis().pow(self.dim() as u32)
    }

    /// Reference measure of one cell.
    pub fn cell_measure(&self) -> f64 {
        match self.domain {
            Domain::Continuous { dim, side } => (side / self.cells_per_axis() as f64).powi(dim as i32),
            Domain::Discrete { .. } => 1.0,
        }
    }

    /// Side length of one cell along an axis (1 in the discrete case).
    pub fn cell_width(&self) -> f64 {
        match self.domain {
            Domain::Continuous { side, .. } => side / self.cells_per_axis() as f64,
            Domain::Discrete { .. } => 1.0,
        }
    }

    /// Row-major index of the cell holding `point`, axis 0 varying slowest.
    pub fn cell_of(&self, point: &[f64]) -> Option<usize> {
        if !self.domain.contains(point) {
            return None;
        }
        let n = self.cells_per_axis();
        let mut idx = 0usize;
        for &x in point {
            let i = match self.domain {
                Domain::Continuous { side, .. } => (((x / side) * n as f64) as usize).min(n - 1),
                Domain::Discrete { .. } => x as usize - 1,
            };
            idx = idx * n + i;
        }
        Some(idx)
    }

    /// Per-axis integer coordinates of a cell.
    pub fn cell_coords(&self, mut index: usize) -> Vec<usize> {
        let n = self.cells_per_axis();
        let k = self.dim();
        let mut out = vec![0; k];
        for a in (0..k).rev() {
            out[a] = index % n;
            index /= n;
        }
        out
    }

    /// Center of a cell; for discrete grids the 1-based point itself.
    pub fn cell_center(&self, index: usize) -> Vec<f64> {
        let w = self.cell_width();
        self.cell_coords(index)
            .into_iter()
            .map(|i| match self.domain {
                Domain::Continuous { .. } => (i as f64 + 0.5) * w,
                Domain::Discrete { .. } => (i + 1) as f64,
            })
            .collect()
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::DomainMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// A real-valued (possibly signed) function, constant on the cells of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(invalid(format!("expected {} cell values, got {}", grid.cell_count(), values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("grid function values must be finite"));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction { grid, values: vec![0.0; grid.cell_count()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.cell_count()).map(|i| f(&grid.cell_center(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at a point of the domain, `None` outside.
    pub fn at(&self, point: &[f64]) -> Option<f64> {
        self.grid.cell_of(point).map(|i| self.values[i])
    }

    /// `⟨f, g⟩` in `L2(λ)`.
    pub fn dot(&self, other: &GridFunction) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self.grid.cell_measure() * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>())
    }

    pub fn norm_sq(&self) -> f64 {
        self.grid.cell_measure() * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    /// `∫ f dλ`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_measure() * self.values.iter().sum::<f64>()
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn add_scaled(&mut self, c: f64, other: &GridFunction) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    /// Positive part `f ∨ 0`.
    pub fn positive_part(&self) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| v.max(0.0)).collect() }
    }

    /// `(f ∨ 0)²`, the intensity whose square root is the positive part.
    pub fn clipped_square(&self) -> GridIntensity {
        GridIntensity {
            grid: self.grid,
            values: self.values.iter().map(|v| { let p = v.max(0.0); p * p }).collect(),
        }
    }

    /// Nonnegative function reinterpreted as an intensity.
    pub fn to_intensity(&self) -> Result<GridIntensity> {
        GridIntensity::new(self.grid, self.values.clone())
    }
}

/// A nonnegative piecewise-constant intensity with finite mass.
#[derive(Debug, Clone, PartialEq)]
pub struct GridIntensity {
    grid: Grid,
    values: Vec<f64>,
}

impl GridIntensity {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(invalid(format!("expected {} cell values, got {}", grid.cell_count(), values.len())));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid(format!("intensity values must be finite and nonnegative, found {v}")));
        }
        Ok(GridIntensity { grid, values })
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.cell_count()])
    }

    pub fn zero(grid: Grid) -> Self {
        GridIntensity { grid, values: vec![0.0; grid.cell_count()] }
    }

    /// Discretize a closed-form intensity by evaluating it at cell centers.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.cell_count()).map(|i| f(&grid.cell_center(i))).collect();
        Self::new(grid, values)
    }

    /// Intensity with square root `sqrt` (which must be nonnegative).
    pub fn from_sqrt(sqrt: &GridFunction) -> Result<Self> {
        if sqrt.values.iter().any(|v| *v < 0.0) {
            return Err(invalid("square-root representation must be nonnegative"));
        }
        Ok(sqrt.clipped_square())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.grid.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, point: &[f64]) -> Option<f64> {
        self.grid.cell_of(point).map(|i| self.values[i])
    }

    /// `μ_t(X) = ∫ t dλ`.
    pub fn mass(&self) -> f64 {
        self.grid.cell_measure() * self.values.iter().sum::<f64>()
    }

    /// Mass of each cell.
    pub fn cell_masses(&self) -> Vec<f64> {
        let cm = self.grid.cell_measure();
        self.values.iter().map(|v| v * cm).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn sqrt(&self) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| v.sqrt()).collect() }
    }

    pub fn as_function(&self) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.clone() }
    }

    pub fn scaled(&self, c: f64) -> Result<GridIntensity> {
        GridIntensity::new(self.grid, self.values.iter().map(|v| c * v).collect())
    }

    pub fn sum(&self, other: &GridIntensity) -> Result<GridIntensity> {
        self.grid.ensure_same(&other.grid)?;
        Ok(GridIntensity { grid: self.grid, values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() })
    }

    /// Same intensity on a finer dyadic grid (continuous domains only).
    pub fn refine(&self, resolution: u32) -> Result<GridIntensity> {
        if self.grid.domain.is_discrete() {
            return Err(invalid("cannot refine a discrete grid"));
        }
        if resolution < self.grid.resolution {
            return Err(invalid(format!("cannot refine resolution {} down to {resolution}", self.grid.resolution)));
        }
        let fine = Grid::dyadic(self.grid.domain, resolution)?;
        let shift = resolution - self.grid.resolution;
        let values = (0..fine.cell_count())
            .map(|i| {
                let coarse = fine.cell_coords(i).into_iter().fold(0usize, |acc, c| acc * self.grid.cells_per_axis() + (c >> shift));
                self.values[coarse]
            })
            .collect();
        Ok(GridIntensity { grid: fine, values })
    }

    /// Writes the flat text format: `kind k r L` header, then cell values.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match self.grid.domain {
            Domain::Continuous { dim, side } => writeln!(s, "continuous {dim} {} {side}", self.grid.resolution),
            Domain::Discrete { dim, cells } => writeln!(s, "discrete {dim} 0 {cells}"),
        }
        .unwrap();
        let row = self.grid.cells_per_axis();
        for chunk in self.values.chunks(row) {
            let line: Vec<String> = chunk.iter().map(|v| format!("{v}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<GridIntensity> {
        let mut lines = input.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('#') => None,
            other => Some((i + 1, other)),
        });
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty input".into() })?;
        let header = header?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        if parts.len() != 4 {
            return Err(perr(hline, format!("header must be `kind k r L`, got `{header}`")));
        }
        let dim: usize = parts[1].parse().map_err(|e| perr(hline, format!("dimension: {e}")))?;
        let res: u32 = parts[2].parse().map_err(|e| perr(hline, format!("resolution: {e}")))?;
        let grid = match parts[0] {
            "continuous" => {
                let side: f64 = parts[3].parse().map_err(|e| perr(hline, format!("side: {e}")))?;
                Grid::dyadic(Domain::continuous(dim, side)?, res)?
            }
            "discrete" => {
                let n: usize = parts[3].parse().map_err(|e| perr(hline, format!("cell count: {e}")))?;
                Grid::discrete(Domain::discrete(dim, n)?)?
            }
            other => return Err(perr(hline, format!("unknown domain kind `{other}`"))),
        };
        let mut values = Vec::with_capacity(grid.cell_count());
        for (lno, line) in lines {
            for tok in line?.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|e| perr(lno, format!("value `{tok}`: {e}")))?);
            }
        }
        GridIntensity::new(grid, values)
    }
}

/// A measure split into its grid-absolutely-continuous part and atoms.
///
/// Atom locations are treated as reference-null; no overlap check against
/// the grid cells is attempted.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureWithAtoms {
    absolutely_continuous: GridIntensity,
    atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub location: Vec<f64>,
    pub weight: f64,
}

impl MeasureWithAtoms {
    pub fn new(absolutely_continuous: GridIntensity, atoms: Vec<Atom>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return Err(invalid(format!("atom {i} has non-positive weight {}", a.weight)));
            }
            if atoms[..i].iter().any(|b| b.location == a.location) {
                return Err(invalid(format!("atom {i} repeats location {:?}", a.location)));
            }
        }
        Ok(MeasureWithAtoms { absolutely_continuous, atoms })
    }

    pub fn absolutely_continuous(&self) -> &GridIntensity {
        &self.absolutely_continuous
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// `μ⊥(X)`.
    pub fn singular_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }
}

/// `H²(a, b) = ½ ∫ (√a − √b)² dλ`.
pub fn hellinger_sq(a: &GridIntensity, b: &GridIntensity) -> Result<f64> {
    a.grid.ensure_same(&b.grid)?;
    Ok(hellinger_sq_unchecked(a.grid.cell_measure(), &a.values, &b.values))
}

pub(crate) fn hellinger_sq_unchecked(cell_measure: f64, a: &[f64], b: &[f64]) -> f64 {
    let s: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x.sqrt() - y.sqrt();
            d * d
        })
        .sum();
    0.5 * cell_measure * s
}

pub fn hellinger(a: &GridIntensity, b: &GridIntensity) -> Result<f64> {
    hellinger_sq(a, b).map(f64::sqrt)
}

/// `H²(μ, μ_t) = H²(s, t) + μ⊥(X)/2`.
pub fn hellinger_sq_with_atoms(m: &MeasureWithAtoms, t: &GridIntensity) -> Result<f64> {
    Ok(hellinger_sq(&m.absolutely_continuous, t)? + 0.5 * m.singular_mass())
}

/// Hellinger affinity of the two Poisson laws, `exp(−H²)`.
pub fn affinity(a: &GridIntensity, b: &GridIntensity) -> Result<f64> {
    hellinger_sq(a, b).map(|h| (-h).exp())
}

/// `‖√a − √b‖₂`, so that `H = value / √2`.
pub fn l2_dist_sqrt(a: &GridIntensity, b: &GridIntensity) -> Result<f64> {
    a.grid.ensure_same(&b.grid)?;
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x.sqrt() - y.sqrt()).powi(2)).sum();
    Ok((a.grid.cell_measure() * s).sqrt())
}

/// `‖a − b‖₂` between intensities.
pub fn l2_dist(a: &GridFunction, b: &GridFunction) -> Result<f64> {
    a.grid.ensure_same(&b.grid)?;
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).powi(2)).sum();
    Ok((a.grid.cell_measure() * s).sqrt())
}

/// Maps an intensity on `[0, T]` to `t_T(x) = T t(Tx)` on `[0, 1]`.
pub fn rescale_to_unit(t: &GridIntensity) -> Result<GridIntensity> {
    let side = match t.grid.domain {
        Domain::Continuous { dim: 1, side } => side,
        _ => return Err(invalid("rescale_to_unit needs a 1-D continuous domain")),
    };
    let grid = Grid::dyadic(Domain::unit_interval(), t.grid.resolution)?;
    GridIntensity::new(grid, t.values.iter().map(|v| side * v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_const(c: f64) -> GridIntensity {
        GridIntensity::constant(Grid::unit(0), c).unwrap()
    }

    #[test]
    fn hellinger_constant_cases() {
        assert_eq!(hellinger_sq(&unit_const(1.0), &unit_const(4.0)).unwrap(), 0.5);
        assert!((hellinger_sq(&unit_const(2.0), &unit_const(8.0)).unwrap() - 1.0).abs() < 1e-15);
        let t = GridIntensity::from_fn(Grid::unit(6), |x| 1.0 + x[0]).unwrap();
        assert_eq!(hellinger_sq(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_for_constants() {
        for (c, d, r) in [(1.0, 4.0, 0), (0.3, 7.5, 3), (2.0, 2.0, 5)] {
            let g = Grid::dyadic(Domain::continuous(1, 2.5).unwrap(), r).unwrap();
            let a = GridIntensity::constant(g, c).unwrap();
            let b = GridIntensity::constant(g, d).unwrap();
            let (mc, md) = (a.mass(), b.mass());
            let expect = 0.5 * (mc + md) - (mc * md).sqrt();
            assert!((hellinger_sq(&a, &b).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn atoms_add_half_their_weight() {
        let s = unit_const(1.0);
        let t = unit_const(4.0);
        let none = MeasureWithAtoms::new(s.clone(), vec![]).unwrap();
        assert_eq!(hellinger_sq_with_atoms(&none, &t).unwrap(), 0.5);
        let three = MeasureWithAtoms::new(s.clone(), vec![Atom { location: vec![0.5], weight: 3.0 }]).unwrap();
        assert_eq!(hellinger_sq_with_atoms(&three, &s).unwrap(), 1.5);
        let one = MeasureWithAtoms::new(s, vec![Atom { location: vec![0.25], weight: 1.0 }]).unwrap();
        assert_eq!(hellinger_sq_with_atoms(&one, &t).unwrap(), 1.0);
        assert!(MeasureWithAtoms::new(unit_const(1.0), vec![Atom { location: vec![0.1], weight: 0.0 }]).is_err());
    }

    #[test]
    fn affinity_and_sqrt_distance() {
        assert_eq!(affinity(&unit_const(3.0), &unit_const(3.0)).unwrap(), 1.0);
        assert!((affinity(&unit_const(1.0), &unit_const(4.0)).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(affinity(&unit_const(0.0), &unit_const(0.0)).unwrap(), 1.0);
        assert_eq!(l2_dist_sqrt(&unit_const(1.0), &unit_const(4.0)).unwrap(), 1.0);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = GridIntensity::constant(Grid::unit(2), 1.0).unwrap();
        let b = GridIntensity::constant(Grid::unit(3), 1.0).unwrap();
        assert!(matches!(hellinger_sq(&a, &b), Err(Error::DomainMismatch(_))));
        let r = a.refine(3).unwrap();
        assert_eq!(hellinger_sq(&r, &b).unwrap(), 0.0);
    }

    #[test]
    fn refinement_preserves_distance_2d() {
        let g = Grid::dyadic(Domain::continuous(2, 1.0).unwrap(), 2).unwrap();
        let a = GridIntensity::from_fn(g, |x| 1.0 + x[0] * 3.0 + x[1]).unwrap();
        let b = GridIntensity::from_fn(g, |x| 2.0 + (x[0] - x[1]).abs()).unwrap();
        let h = hellinger_sq(&a, &b).unwrap();
        let hr = hellinger_sq(&a.refine(4).unwrap(), &b.refine(4).unwrap()).unwrap();
        assert!((h - hr).abs() < 1e-12);
        assert!((a.mass() - a.refine(4).unwrap().mass()).abs() < 1e-12);
    }

    #[test]
    fn rescale_identity_and_constant() {
        let t = GridIntensity::constant(Grid::unit(3), 2.0).unwrap();
        assert_eq!(rescale_to_unit(&t).unwrap(), t);
        let big = GridIntensity::constant(Grid::dyadic(Domain::continuous(1, 5.0).unwrap(), 2).unwrap(), 3.0).unwrap();
        let r = rescale_to_unit(&big).unwrap();
        assert!(r.values().iter().all(|&v| v == 15.0));
        assert!((r.mass() - big.mass()).abs() < 1e-12);
        let g2 = Grid::dyadic(Domain::continuous(2, 1.0).unwrap(), 1).unwrap();
        assert!(rescale_to_unit(&GridIntensity::zero(g2)).is_err());
    }

    #[test]
    fn rejects_negative_values() {
        assert!(GridIntensity::new(Grid::unit(1), vec![1.0, -0.5]).is_err());
        assert!(GridIntensity::new(Grid::unit(1), vec![1.0]).is_err());
    }

    #[test]
    fn text_format_round_trip() {
        let g = Grid::dyadic(Domain::continuous(2, 1.0).unwrap(), 1).unwrap();
        let t = GridIntensity::new(g, vec![0.0, 1.5, 0.125, 7.0]).unwrap();
        let text = t.to_text();
        assert_eq!(text, "continuous 2 1 1\n0 1.5\n0.125 7\n");
        assert_eq!(GridIntensity::read_text(text.as_bytes()).unwrap(), t);
        let d = GridIntensity::new(Grid::discrete(Domain::discrete(1, 3).unwrap()).unwrap(), vec![1.0, 2.0, 0.0]).unwrap();
        assert_eq!(GridIntensity::read_text(d.to_text().as_bytes()).unwrap(), d);
        let err = GridIntensity::read_text("continuous 1 1 1\n1 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn cell_lookup() {
        let g = Grid::dyadic(Domain::continuous(2, 2.0).unwrap(), 1).unwrap();
        assert_eq!(g.cell_of(&[0.1, 1.9]), Some(1));
        assert_eq!(g.cell_of(&[1.5, 0.1]), Some(2));
        assert_eq!(g.cell_of(&[2.0, 2.0]), Some(3));
        assert_eq!(g.cell_of(&[2.1, 0.0]), None);
        let d = Grid::discrete(Domain::discrete(1, 4).unwrap()).unwrap();
        assert_eq!(d.cell_of(&[1.0]), Some(0));
        assert_eq!(d.cell_of(&[4.0]), Some(3));
        assert_eq!(d.cell_of(&[0.0]), None);
        assert_eq!(d.cell_center(2), vec![3.0]);
    }
}
