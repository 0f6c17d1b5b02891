//! Baseline estimators: projection and histogram estimators, aggregation
//! of preliminary estimators by thinning, and the linear-aggregation model
//! family on the square-root scale.

use std::ops::Range;

use nalgebra::DMatrix;
use statrs::function::factorial::ln_binomial;

use crate::approx::IntervalPartition;
use crate::error::{invalid, Error, Result};
use crate::measure::{hellinger_sq, Grid, GridFunction, GridIntensity};
use crate::net::{lattice_model, BasisSpec, GridNetOptions, ModelSpec, Net};
use crate::sim::{empirical_functional, PointSample};

/// Relative singular-value cutoff when orthonormalizing a span.
pub const RANK_RTOL: f64 = 1e-10;

/// An estimate before and after clipping at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub raw: GridFunction,
    pub estimate: GridIntensity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Losses {
    pub l2_sq: f64,
    pub hellinger_sq: f64,
}

impl EstimatorReport {
    fn from_raw(raw: GridFunction) -> Self {
        let estimate = GridIntensity::new(*raw.grid(), raw.positive_part().into_values()).expect("positive part is nonnegative");
        EstimatorReport { raw, estimate }
    }

    /// Losses of the clipped estimate.
    pub fn losses(&self, truth: &GridIntensity) -> Result<Losses> {
        let d = crate::measure::l2_dist(&self.estimate.as_function(), &truth.as_function())?;
        Ok(Losses { l2_sq: d * d, hellinger_sq: hellinger_sq(truth, &self.estimate)? })
    }
}

/// `ŝ = Σ_j [Σ_i φ_j(X_i)] φ_j`.
pub fn projection_estimator(sample: &PointSample, basis: &BasisSpec) -> Result<EstimatorReport> {
    let coeffs = basis.functions().iter().map(|phi| empirical_functional(sample, phi)).collect::<Result<Vec<_>>>()?;
    Ok(EstimatorReport::from_raw(basis.combine(&coeffs)))
}

fn check_cells(grid: &Grid, cells: &[Range<usize>]) -> Result<()> {
    let n = grid.cell_count();
    let mut covered = vec![false; n];
    for r in cells {
        if r.is_empty() {
            return Err(invalid("partition has a cell of zero measure"));
        }
        if r.end > n {
            return Err(invalid(format!("partition cell {r:?} exceeds the {n} grid cells")));
        }
        for c in r.clone() {
            if std::mem::replace(&mut covered[c], true) {
                return Err(invalid(format!("grid cell {c} is covered twice")));
            }
        }
    }
    if covered.iter().any(|c| !c) {
        return Err(invalid("partition does not cover the grid"));
    }
    Ok(())
}

/// `ŝ_m = Σ N_j λ(I_j)^{−1} 1_{I_j}` for a partition given as ranges of
/// grid cells.
pub fn histogram_estimator(sample: &PointSample, grid: &Grid, cells: &[Range<usize>]) -> Result<EstimatorReport> {
    check_cells(grid, cells)?;
    let counts = sample.cell_counts(grid)?;
    let cm = grid.cell_measure();
    let mut v = vec![0.0; grid.cell_count()];
    for r in cells {
        let n: u64 = counts[r.clone()].iter().sum();
        let h = n as f64 / (r.len() as f64 * cm);
        v[r.clone()].iter_mut().for_each(|x| *x = h);
    }
    Ok(EstimatorReport::from_raw(GridFunction::new(*grid, v)?))
}

/// `s̄_m = Σ (∫_{I_j} s) λ(I_j)^{−1} 1_{I_j}`.
pub fn histogram_projection(truth: &GridIntensity, cells: &[Range<usize>]) -> Result<GridIntensity> {
    check_cells(truth.grid(), cells)?;
    let mut v = vec![0.0; truth.values().len()];
    for r in cells {
        let mean = truth.values()[r.clone()].iter().sum::<f64>() / r.len() as f64;
        v[r.clone()].iter_mut().for_each(|x| *x = mean);
    }
    GridIntensity::new(*truth.grid(), v)
}

/// Cell ranges of an interval partition of the points of a 1-D discrete domain.
pub fn interval_cells(m: &IntervalPartition) -> Vec<Range<usize>> {
    m.intervals().into_iter().map(|(a, b)| a - 1..b).collect()
}

/// Orthonormal basis of the span of `functions` in `L2(λ)`, from the SVD
/// of the cell-scaled value matrix. Directions with singular value below
/// `RANK_RTOL` times the largest are dropped.
pub fn orthonormal_span(functions: &[GridFunction]) -> Result<BasisSpec> {
    let first = functions.first().ok_or_else(|| invalid("cannot span an empty family"))?;
    let grid = *first.grid();
    for f in functions {
        grid.ensure_same(f.grid())?;
    }
    let scale = grid.cell_measure().sqrt();
    let n = grid.cell_count();
    let m = DMatrix::from_fn(n, functions.len(), |i, j| functions[j].values()[i] * scale);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(invalid("the family spans the zero space"));
    }
    let basis = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > RANK_RTOL * top)
        .map(|(j, _)| GridFunction::new(grid, u.column(j).iter().map(|x| x / scale).collect()))
        .collect::<Result<Vec<_>>>()?;
    BasisSpec::new(basis)
}

/// Output of [`rt_aggregate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    /// `s̃(X₂)`, the projection estimator of `(1−p)s` on the span.
    pub tilde: GridFunction,
    /// `(s̃ ∨ 0)/(1−p)`.
    pub estimate: GridIntensity,
    /// The orthonormal basis of the span actually used.
    pub basis: BasisSpec,
}

impl Aggregate {
    pub fn rank(&self) -> usize {
        self.basis.dim()
    }

    /// `inf_θ ‖c·s − Σθ_m ŝ_m‖₂²`, by projection on the retained span.
    pub fn span_distance_sq(&self, truth: &GridIntensity, c: f64) -> Result<f64> {
        let target = truth.as_function().scaled(c);
        let coeffs = self.basis.project(&target)?;
        Ok((target.norm_sq() - coeffs.iter().map(|a| a * a).sum::<f64>()).max(0.0))
    }
}

/// Aggregates estimates built from the first thinned process by projecting
/// the second, `sample2` (thinned with probability `1−p`), on their span.
pub fn rt_aggregate(estimates: &[GridIntensity], sample2: &PointSample, p: f64) -> Result<Aggregate> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("thinning probability must lie in (0, 1), got {p}")));
    }
    let functions: Vec<GridFunction> = estimates.iter().map(GridIntensity::as_function).collect();
    let basis = orthonormal_span(&functions)?;
    let tilde = projection_estimator(sample2, &basis)?.raw;
    let estimate = GridIntensity::new(*tilde.grid(), tilde.positive_part().scaled(1.0 / (1.0 - p)).into_values())?;
    Ok(Aggregate { tilde, estimate, basis })
}

/// Largest number of preliminary estimates accepted by
/// [`linear_aggregation_models`].
pub const MAX_AGGREGATED: usize = 12;

/// One model per nonvoid subset `m` of the estimates: the span of
/// `{√ŝ_j : j ∈ m}` discretized as a lattice net, with
/// `Δ_m = log C(k, |m|) + 2 log |m|` and `η_m² = 84 max(Δ_m, D_m/5)` at least.
pub fn linear_aggregation_models(estimates: &[GridIntensity], n_observed: u64, opts: &GridNetOptions) -> Result<Net> {
    let k = estimates.len();
    if k == 0 {
        return Err(invalid("no estimates to aggregate"));
    }
    if k > MAX_AGGREGATED {
        return Err(Error::Capacity { what: "aggregated estimates".into(), count: k as u64, cap: MAX_AGGREGATED as u64 });
    }
    let roots: Vec<GridFunction> = estimates.iter().map(GridIntensity::sqrt).collect();
    let mut models = Vec::new();
    for mask in 1u32..(1 << k) {
        let members: Vec<usize> = (0..k).filter(|j| mask >> j & 1 == 1).collect();
        let span: Vec<GridFunction> = members.iter().map(|&j| roots[j].clone()).collect();
        let basis = match orthonormal_span(&span) {
            Ok(b) => b,
            // Subsets of zero estimates span only 0.
            Err(Error::InvalidArgument(_)) => zero_model_basis(estimates[0].grid())?,
            Err(e) => return Err(e),
        };
        let id = format!("agg{}", members.iter().map(|j| j.to_string()).collect::<Vec<_>>().join("+"));
        let (spec, elems) = lattice_model(&basis, n_observed, opts, &id)?;
        let size = members.len();
        let delta = ln_binomial(k as u64, size as u64) + 2.0 * (size as f64).ln();
        let d = spec.d.max(0.5);
        let eta = spec.eta.max((84.0 * delta).sqrt()).max((84.0 * d / 5.0).sqrt());
        models.push((ModelSpec::new(id, eta, d, delta), elems));
    }
    Net::from_models(models)
}

/// Stands in for the span of identically zero estimates.
fn zero_model_basis(grid: &Grid) -> Result<BasisSpec> {
    let h = 1.0 / grid.domain().volume().sqrt();
    BasisSpec::new(vec![GridFunction::from_fn(*grid, |_| h)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Domain;

    fn unit_sample(pts: &[f64]) -> PointSample {
        PointSample::new(Domain::unit_interval(), pts.iter().map(|x| vec![*x]).collect()).unwrap()
    }

    #[test]
    fn projection_on_constants() {
        let basis = BasisSpec::haar(Grid::unit(3), 1).unwrap();
        let r = projection_estimator(&unit_sample(&[0.1, 0.5, 0.9]), &basis).unwrap();
        assert!(r.estimate.values().iter().all(|v| (v - 3.0).abs() < 1e-12));
        let r = projection_estimator(&PointSample::empty(Domain::unit_interval()), &basis).unwrap();
        assert!(r.estimate.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn histogram_on_halves() {
        let g = Grid::unit(1);
        let r = histogram_estimator(&unit_sample(&[0.2, 0.7, 0.9]), &g, &[0..1, 1..2]).unwrap();
        assert_eq!(r.estimate.values(), &[2.0, 4.0]);
        assert!(histogram_estimator(&unit_sample(&[]), &g, &[0..1, 1..1, 1..2]).is_err());
        assert!(histogram_estimator(&unit_sample(&[]), &g, &[0..1]).is_err());
    }

    #[test]
    fn projection_keeps_cell_masses() {
        let t = GridIntensity::from_fn(Grid::unit(3), |x| 1.0 + x[0]).unwrap();
        let p = histogram_projection(&t, &[0..3, 3..8]).unwrap();
        assert!((p.mass() - t.mass()).abs() < 1e-12);
        assert!((p.values()[0] - p.values()[2]).abs() < 1e-15);
    }

    #[test]
    fn span_drops_duplicates() {
        let g = Grid::unit(3);
        let a = GridFunction::from_fn(g, |x| x[0]).unwrap();
        let b = GridFunction::from_fn(g, |x| 1.0 - x[0]).unwrap();
        let basis = orthonormal_span(&[a.clone(), a.scaled(2.0), b]).unwrap();
        assert_eq!(basis.dim(), 2);
        assert!(orthonormal_span(&[GridFunction::zeros(g)]).is_err());
    }

    #[test]
    fn aggregation_with_one_direction() {
        let g = Grid::unit(2);
        let s = GridIntensity::from_fn(g, |x| 1.0 + x[0]).unwrap();
        let x2 = unit_sample(&[0.1, 0.3, 0.6, 0.8, 0.9]);
        let one = rt_aggregate(&[s.clone()], &x2, 0.5).unwrap();
        let dup = rt_aggregate(&[s.clone(), s.scaled(3.0).unwrap()], &x2, 0.5).unwrap();
        assert_eq!(one.rank(), 1);
        assert_eq!(dup.rank(), 1);
        for (a, b) in one.tilde.values().iter().zip(dup.tilde.values()) {
            assert!((a - b).abs() < 1e-10);
        }
        // The coefficient is Σ φ(X_i) with φ = s/‖s‖.
        let phi = s.as_function().scaled(1.0 / s.as_function().norm_sq().sqrt());
        let c = empirical_functional(&x2, &phi).unwrap();
        for (t, f) in one.tilde.values().iter().zip(phi.values()) {
            assert!((t - c * f).abs() < 1e-10);
        }
        assert!(one.span_distance_sq(&s, 0.5).unwrap() < 1e-12);
    }

    #[test]
    fn aggregation_weights() {
        let g = Grid::unit(2);
        let est: Vec<GridIntensity> = (0..3).map(|i| GridIntensity::from_fn(g, move |x| 1.0 + i as f64 * x[0]).unwrap()).collect();
        let net = linear_aggregation_models(&est, 4, &GridNetOptions { theta: Some(1.0), ..Default::default() }).unwrap();
        assert_eq!(net.models().len(), 7);
        let sigma: f64 = net.models().iter().map(|m| (-m.delta).exp()).sum();
        assert!((sigma - (1.0 + 0.25 + 1.0 / 9.0)).abs() < 1e-12);
        let one = linear_aggregation_models(&est[..1], 4, &GridNetOptions { theta: Some(1.0), ..Default::default() }).unwrap();
        assert_eq!(one.models().len(), 1);
        assert_eq!(one.models()[0].delta, 0.0);
    }
}
