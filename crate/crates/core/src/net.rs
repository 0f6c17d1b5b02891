//! Finite candidate sets built from models, with their radii and weights.
//!
//! A [`Net`] is the union of the members of several models. Each model
//! carries a radius `η_m`, a dimension-like parameter `D_m` and a weight
//! `Δ_m`; an element's radius `η(t)` is the smallest `η_m` over the models
//! that contain it.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::haar::HaarCoefficients;
use crate::measure::{hellinger_sq_unchecked, Grid, GridFunction, GridIntensity};
use crate::sim::Seed;

/// `c = √(πe/2)`, the constant of the lattice-ball cardinality bound.
pub const LATTICE_C: f64 = 2.066_365_677_061_246_4;

/// Default enumeration cap for lattice nets.
pub const DEFAULT_LATTICE_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub id: String,
    pub eta: f64,
    pub d: f64,
    pub delta: f64,
    pub members: Vec<usize>,
}

/// Model parameters without members, used when assembling a net.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub id: String,
    pub eta: f64,
    pub d: f64,
    pub delta: f64,
}

impl ModelSpec {
    pub fn new(id: impl Into<String>, eta: f64, d: f64, delta: f64) -> Self {
        ModelSpec { id: id.into(), eta, d, delta }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    elements: Vec<GridIntensity>,
    eta: Vec<f64>,
    models: Vec<Model>,
}

impl Net {
    /// Assembles a net from models and their members. Identical members,
    /// within or across models, are merged into one element.
    pub fn from_models(models: Vec<(ModelSpec, Vec<GridIntensity>)>) -> Result<Net> {
        let mut elements: Vec<GridIntensity> = Vec::new();
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut out = Vec::with_capacity(models.len());
        let mut grid: Option<Grid> = None;
        for (spec, members) in models {
            if !(spec.eta >= 0.0 && spec.eta.is_finite()) {
                return Err(invalid(format!("model {} has invalid η = {}", spec.id, spec.eta)));
            }
            let mut ids = Vec::with_capacity(members.len());
            for m in members {
                match grid {
                    None => grid = Some(*m.grid()),
                    Some(g) => g.ensure_same(m.grid())?,
                }
                let key = bit_key(m.values());
                let id = *index.entry(key).or_insert_with(|| {
                    elements.push(m);
                    elements.len() - 1
                });
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
            out.push(Model { id: spec.id, eta: spec.eta, d: spec.d, delta: spec.delta, members: ids });
        }
        Net::new(elements, out)
    }

    /// Builds a net from explicit elements and membership lists.
    pub fn new(elements: Vec<GridIntensity>, models: Vec<Model>) -> Result<Net> {
        let mut eta = vec![f64::INFINITY; elements.len()];
        for m in &models {
            for &i in &m.members {
                let e = eta.get_mut(i).ok_or_else(|| invalid(format!("model {} refers to element {i}", m.id)))?;
                *e = e.min(m.eta);
            }
        }
        if let Some(i) = eta.iter().position(|e| e.is_infinite()) {
            return Err(invalid(format!("element {i} belongs to no model")));
        }
        let mut seen = HashMap::new();
        for (i, e) in elements.iter().enumerate() {
            if let Some(j) = seen.insert(bit_key(e.values()), i) {
                return Err(invalid(format!("elements {j} and {i} coincide")));
            }
            if i > 0 {
                elements[0].grid().ensure_same(e.grid())?;
            }
        }
        Ok(Net { elements, eta, models })
    }

    /// One singleton model per candidate.
    pub fn singletons(candidates: Vec<GridIntensity>, etas: &[f64], ds: &[f64], deltas: &[f64]) -> Result<Net> {
        if candidates.len() != etas.len() || etas.len() != ds.len() || ds.len() != deltas.len() {
            return Err(invalid("candidate and parameter lists differ in length"));
        }
        let models = candidates
            .into_iter()
            .enumerate()
            .map(|(i, c)| (ModelSpec::new(format!("m{i}"), etas[i], ds[i], deltas[i]), vec![c]))
            .collect();
        Net::from_models(models)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GridIntensity] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &GridIntensity {
        &self.elements[i]
    }

    pub fn etas(&self) -> &[f64] {
        &self.eta
    }

    pub fn models(&self) -> &[Model] {
        &self.models
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.elements.first().map(GridIntensity::grid)
    }

    /// Index of an element equal to `t`, if any.
    pub fn position(&self, t: &GridIntensity) -> Option<usize> {
        self.elements.iter().position(|e| e == t)
    }

    /// Writes `manifest.txt` plus one `element_<i>.txt` per element.
    pub fn write_manifest(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut manifest = String::from("# id eta D Delta members\n");
        for m in &self.models {
            let members: Vec<String> = m.members.iter().map(usize::to_string).collect();
            manifest.push_str(&format!("{} {} {} {} {}\n", m.id, m.eta, m.d, m.delta, members.join(",")));
        }
        fs::write(dir.join("manifest.txt"), manifest)?;
        for (i, e) in self.elements.iter().enumerate() {
            fs::write(dir.join(format!("element_{i}.txt")), e.to_text())?;
        }
        Ok(())
    }

    pub fn read_manifest(dir: &Path) -> Result<Net> {
        let text = fs::read_to_string(dir.join("manifest.txt"))?;
        let mut models = Vec::new();
        let mut count = 0usize;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: ln + 1, msg };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 5 {
                return Err(parse_err(format!("expected 5 fields, got {}", f.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(e.to_string()));
            let members = f[4]
                .split(',')
                .map(|s| s.parse::<usize>().map_err(|e| parse_err(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            count = count.max(members.iter().max().map_or(0, |m| m + 1));
            models.push(Model { id: f[0].to_string(), eta: num(f[1])?, d: num(f[2])?, delta: num(f[3])?, members });
        }
        let elements = (0..count)
            .map(|i| GridIntensity::read_text(fs::read_to_string(dir.join(format!("element_{i}.txt")))?.as_bytes()))
            .collect::<Result<Vec<_>>>()?;
        Net::new(elements, models)
    }
}

fn bit_key(values: &[f64]) -> Vec<u64> {
    // +0 and −0 must hash alike.
    values.iter().map(|v| (v + 0.0).to_bits()).collect()
}

/// `η(t)`: smallest `η_m` over the models containing element `i`.
pub fn eta_of(net: &Net, i: usize) -> Result<f64> {
    net.eta.get(i).copied().ok_or_else(|| invalid(format!("element index {i} out of range (net has {})", net.len())))
}

/// An orthonormal family of grid functions in `L2(λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    functions: Vec<GridFunction>,
}

impl BasisSpec {
    pub fn new(functions: Vec<GridFunction>) -> Result<Self> {
        if functions.is_empty() {
            return Err(invalid("a basis needs at least one function"));
        }
        for (i, f) in functions.iter().enumerate() {
            functions[0].grid().ensure_same(f.grid())?;
            for (j, g) in functions.iter().enumerate().take(i + 1) {
                let target = if i == j { 1.0 } else { 0.0 };
                let d = f.dot(g)?;
                if (d - target).abs() > 1e-10 {
                    return Err(invalid(format!("basis is not orthonormal: ⟨φ{i}, φ{j}⟩ = {d}")));
                }
            }
        }
        Ok(BasisSpec { functions })
    }

    /// First `k` Haar functions on a 1-D or 2-D dyadic grid, coarse to fine.
    pub fn haar(grid: Grid, k: usize) -> Result<Self> {
        if k == 0 || k > grid.cell_count() {
            return Err(invalid(format!("need 1 ≤ k ≤ {} Haar functions, got {k}", grid.cell_count())));
        }
        let functions = (0..k)
            .map(|i| {
                let mut flat = vec![0.0; grid.cell_count()];
                flat[i] = 1.0;
                Ok(HaarCoefficients::from_flat(grid, &flat)?.synthesize())
            })
            .collect::<Result<Vec<_>>>()?;
        BasisSpec::new(functions)
    }

    /// Normalized indicators of `k` consecutive equal blocks of cells.
    pub fn indicators(grid: Grid, k: usize) -> Result<Self> {
        let n = grid.cell_count();
        if k == 0 || n % k != 0 {
            return Err(invalid(format!("{k} blocks do not divide {n} cells")));
        }
        let block = n / k;
        let height = 1.0 / (block as f64 * grid.cell_measure()).sqrt();
        let functions = (0..k)
            .map(|j| GridFunction::new(grid, (0..n).map(|c| if c / block == j { height } else { 0.0 }).collect()))
            .collect::<Result<Vec<_>>>()?;
        BasisSpec::new(functions)
    }

    pub fn dim(&self) -> usize {
        self.functions.len()
    }

    pub fn functions(&self) -> &[GridFunction] {
        &self.functions
    }

    pub fn grid(&self) -> &Grid {
        self.functions[0].grid()
    }

    /// `Σ_i a_i φ_i`.
    pub fn combine(&self, coeffs: &[f64]) -> GridFunction {
        let mut out = GridFunction::zeros(*self.grid());
        for (c, f) in coeffs.iter().zip(&self.functions) {
            out.add_scaled(*c, f).expect("basis functions share a grid");
        }
        out
    }

    /// Coefficients `⟨f, φ_i⟩` of the orthogonal projection of `f`.
    pub fn project(&self, f: &GridFunction) -> Result<Vec<f64>> {
        self.functions.iter().map(|p| f.dot(p)).collect()
    }
}

/// Radius of a `θ`-lattice net in dimension `k`: `η = √k·θ/2`.
pub fn lattice_eta(theta: f64, k: usize) -> f64 {
    (k as f64).sqrt() * theta / 2.0
}

/// Spacing giving a lattice radius `η`: `θ = 2η/√k`.
pub fn lattice_theta(eta: f64, k: usize) -> f64 {
    2.0 * eta / (k as f64).sqrt()
}

/// `η² = 4.2k·log(c(√(N/k) + 1))`.
pub fn nominal_eta(n_observed: u64, k: usize) -> f64 {
    let k = k as f64;
    (4.2 * k * (LATTICE_C * ((n_observed as f64 / k).sqrt() + 1.0)).ln()).sqrt()
}

/// `K = [c(√(2N)/η + 1)]^k`, an upper bound on the lattice net size.
pub fn grid_net_cardinality_bound(n_observed: u64, k: usize, eta: f64) -> f64 {
    (LATTICE_C * ((2.0 * n_observed as f64).sqrt() / eta + 1.0)).powi(k as i32)
}

/// `[c(√(N/k) + 1)]^k`, the bound on `K` under the nominal radius.
pub fn nominal_cardinality_bound(n_observed: u64, k: usize) -> f64 {
    (LATTICE_C * ((n_observed as f64 / k as f64).sqrt() + 1.0)).powi(k as i32)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridNetOptions {
    /// Lattice spacing; `None` derives `θ = 2η/√k` from the nominal `η`.
    pub theta: Option<f64>,
    /// Use the nominal `η` as the model radius instead of the lattice radius.
    pub nominal_eta: bool,
    pub cap: u64,
}

impl Default for GridNetOptions {
    fn default() -> Self {
        GridNetOptions { theta: None, nominal_eta: false, cap: DEFAULT_LATTICE_CAP }
    }
}

/// The lattice net `{(Σ a_i φ_i ∨ 0)² : a ∈ θZ^k, |a| ≤ √(2N) + η}` as a
/// single model, with `η² = k(θ/2)²`.
pub fn build_grid_net(basis: &BasisSpec, theta: f64, n_observed: u64) -> Result<Net> {
    build_grid_net_with(basis, n_observed, &GridNetOptions { theta: Some(theta), ..Default::default() })
}

pub fn build_grid_net_with(basis: &BasisSpec, n_observed: u64, opts: &GridNetOptions) -> Result<Net> {
    Net::from_models(vec![lattice_model(basis, n_observed, opts, "lattice")?])
}

/// The members and parameters of one lattice model, `D = (log K)/4` and
/// `Δ = η²/84`.
pub fn lattice_model(basis: &BasisSpec, n_observed: u64, opts: &GridNetOptions, id: &str) -> Result<(ModelSpec, Vec<GridIntensity>)> {
    let k = basis.dim();
    let theta = match opts.theta {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(invalid(format!("θ must be positive, got {t}"))),
        None => lattice_theta(nominal_eta(n_observed, k), k),
    };
    let eta = lattice_eta(theta, k);
    let radius = (2.0 * n_observed as f64).sqrt() + eta;
    let points = lattice_ball(k, theta, radius, opts.cap)?;
    log::debug!("lattice net {id}: k={k} θ={theta} radius={radius} points={}", points.len());
    let members: Vec<GridIntensity> = points
        .iter()
        .map(|a| basis.combine(&a.iter().map(|&z| z as f64 * theta).collect::<Vec<_>>()).clipped_square())
        .collect();
    let model_eta = if opts.nominal_eta { nominal_eta(n_observed, k) } else { eta };
    let d = grid_net_cardinality_bound(n_observed, k, eta).ln() / 4.0;
    Ok((ModelSpec::new(id, model_eta, d, model_eta * model_eta / 84.0), members))
}

/// Integer points `z` with `θ|z| ≤ radius`, in lexicographic order.
pub fn lattice_ball(k: usize, theta: f64, radius: f64, cap: u64) -> Result<Vec<Vec<i64>>> {
    let r2 = (radius / theta).powi(2);
    let count = count_ball(k, r2, cap);
    if count > cap {
        return Err(Error::Capacity { what: "enumerating lattice points".into(), count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut cur = Vec::with_capacity(k);
    enumerate_ball(k, r2, &mut cur, &mut out);
    Ok(out)
}

// Small slack so that points exactly on the sphere are kept.
const BALL_SLACK: f64 = 1e-9;

fn coord_bound(r2: f64) -> i64 {
    (r2 + BALL_SLACK).max(0.0).sqrt().floor() as i64
}

fn count_ball(k: usize, r2: f64, cap: u64) -> u64 {
    if r2 < -BALL_SLACK {
        return 0;
    }
    if k == 1 {
        return 2 * coord_bound(r2) as u64 + 1;
    }
    let b = coord_bound(r2);
    let mut total = 0u64;
    for z in -b..=b {
        total += count_ball(k - 1, r2 - (z * z) as f64, cap);
        if total > cap {
            return total;
        }
    }
    total
}

fn enumerate_ball(k: usize, r2: f64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    let b = coord_bound(r2);
    for z in -b..=b {
        cur.push(z);
        enumerate_ball(k, r2 - (z * z) as f64, cur, out);
        cur.pop();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DModelReport {
    /// Whether `|S ∩ B(t, xη)| ≤ B′e^{Dx²}` held for every probe and `x`.
    pub holds: bool,
    /// Largest `count / (B′e^{Dx²})` observed.
    pub max_ratio: f64,
    pub witness: Option<DModelWitness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DModelWitness {
    /// Probe index; net elements come first, then the extra probes.
    pub probe: usize,
    pub x: f64,
    pub count: usize,
}

/// Default radii multipliers for the D-model check.
pub const DEFAULT_X_GRID: [f64; 4] = [2.0, 2.5, 3.0, 4.0];

/// Empirical check of the D-model inequality on the whole net, with balls
/// in `H` centered at every net element and every extra probe.
pub fn dmodel_check(net: &Net, eta: f64, d: f64, b_prime: f64, probes: &[GridIntensity], x_grid: &[f64]) -> Result<DModelReport> {
    dmodel_check_members(net, &(0..net.len()).collect::<Vec<_>>(), eta, d, b_prime, probes, x_grid)
}

/// D-model check of one model with its own `η_m` and `D_m`.
pub fn dmodel_check_model(net: &Net, model: usize, b_prime: f64, probes: &[GridIntensity], x_grid: &[f64]) -> Result<DModelReport> {
    let m = net.models.get(model).ok_or_else(|| invalid(format!("model index {model} out of range")))?;
    dmodel_check_members(net, &m.members, m.eta, m.d, b_prime, probes, x_grid)
}

fn dmodel_check_members(
    net: &Net,
    members: &[usize],
    eta: f64,
    d: f64,
    b_prime: f64,
    probes: &[GridIntensity],
    x_grid: &[f64],
) -> Result<DModelReport> {
    if let Some(x) = x_grid.iter().find(|&&x| !(x >= 2.0)) {
        return Err(invalid(format!("x grid values must be ≥ 2, got {x}")));
    }
    if x_grid.is_empty() {
        return Err(invalid("empty x grid"));
    }
    let Some(grid) = net.grid().copied() else {
        return Ok(DModelReport { holds: true, max_ratio: 0.0, witness: None });
    };
    for p in probes {
        grid.ensure_same(p.grid())?;
    }
    let cm = grid.cell_measure();
    let roots: Vec<Vec<f64>> = members.iter().map(|&i| net.elements[i].values().to_vec()).collect();
    let centers: Vec<&GridIntensity> = members.iter().map(|&i| &net.elements[i]).chain(probes.iter()).collect();
    let best = centers
        .par_iter()
        .enumerate()
        .map(|(pi, c)| {
            let mut dists: Vec<f64> = roots.iter().map(|r| hellinger_sq_unchecked(cm, c.values(), r).sqrt()).collect();
            dists.sort_by(f64::total_cmp);
            let mut local: Option<(f64, DModelWitness)> = None;
            for &x in x_grid {
                let count = dists.partition_point(|&h| h <= x * eta);
                let ratio = count as f64 / (b_prime * (d * x * x).exp());
                if local.as_ref().is_none_or(|(r, _)| ratio > *r) {
                    local = Some((ratio, DModelWitness { probe: pi, x, count }));
                }
            }
            local.expect("x grid is nonempty")
        })
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1.probe < a.1.probe) { b } else { a })
        .expect("at least one center");
    Ok(DModelReport { holds: best.0 <= 1.0, max_ratio: best.0, witness: Some(best.1) })
}

/// Random probes: squares of random convex combinations of the square
/// roots of two net elements.
pub fn default_probes(net: &Net, count: usize, seed: Seed) -> Vec<GridIntensity> {
    if net.is_empty() {
        return Vec::new();
    }
    let mut rng = seed.rng();
    (0..count)
        .map(|_| {
            let a = net.elements[rng.random_range(0..net.len())].sqrt();
            let b = net.elements[rng.random_range(0..net.len())].sqrt();
            let w: f64 = rng.random();
            let mut f = a.scaled(w);
            f.add_scaled(1.0 - w, &b).expect("net elements share a grid");
            f.clipped_square()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightReport {
    /// `D_m ≥ 1/2` for every model.
    pub d_condition: bool,
    /// `η_m² ≥ 84D_m/5` for every model.
    pub eta_condition: bool,
    /// `Σ exp(−η_m²/84)`.
    pub sigma_eta: f64,
    /// `Σ exp(−Δ_m)`.
    pub sigma_delta: f64,
    /// Ids of models violating either condition.
    pub violations: Vec<String>,
}

impl WeightReport {
    pub fn holds(&self) -> bool {
        self.d_condition && self.eta_condition
    }
}

const WEIGHT_RTOL: f64 = 1e-12;

pub fn weight_conditions(net: &Net) -> WeightReport {
    let mut report = WeightReport { d_condition: true, eta_condition: true, sigma_eta: 0.0, sigma_delta: 0.0, violations: Vec::new() };
    for m in &net.models {
        let d_ok = m.d >= 0.5 * (1.0 - WEIGHT_RTOL);
        let eta_ok = m.eta * m.eta >= 84.0 * m.d / 5.0 * (1.0 - WEIGHT_RTOL);
        report.d_condition &= d_ok;
        report.eta_condition &= eta_ok;
        if !(d_ok && eta_ok) {
            report.violations.push(m.id.clone());
        }
        report.sigma_eta += (-m.eta * m.eta / 84.0).exp();
        report.sigma_delta += (-m.delta).exp();
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{hellinger_sq, Domain};

    fn const_basis(r: u32) -> BasisSpec {
        BasisSpec::haar(Grid::unit(r), 1).unwrap()
    }

    #[test]
    fn zero_observations_unit_spacing() {
        let net = build_grid_net(&const_basis(2), 1.0, 0).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(net.element(0).mass(), 0.0);
        assert_eq!(eta_of(&net, 0).unwrap(), 0.5);
    }

    #[test]
    fn clipping_merges_negative_points() {
        // Radius √8 + 0.5 with θ = 1 gives a ∈ {−3..3}; negatives collapse to 0.
        let net = build_grid_net(&const_basis(1), 1.0, 4).unwrap();
        assert_eq!(net.len(), 4);
        let masses: Vec<f64> = net.elements().iter().map(GridIntensity::mass).collect();
        assert_eq!(masses, vec![0.0, 1.0, 4.0, 9.0]);
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(lattice_ball(1, 1.0, 0.5, 100).unwrap().len(), 1);
        assert_eq!(lattice_ball(2, 1.0, 1.0, 100).unwrap().len(), 5);
        assert_eq!(lattice_ball(3, 1.0, 1.5, 100).unwrap().len(), 19);
        assert!(matches!(lattice_ball(5, 0.1, 3.0, 1000), Err(Error::Capacity { .. })));
    }

    #[test]
    fn basis_constructors() {
        let g = Grid::unit(3);
        assert_eq!(BasisSpec::haar(g, 8).unwrap().dim(), 8);
        assert!(BasisSpec::haar(g, 9).is_err());
        assert_eq!(BasisSpec::indicators(g, 4).unwrap().dim(), 4);
        assert!(BasisSpec::indicators(g, 3).is_err());
        let g2 = Grid::dyadic(Domain::continuous(2, 1.0).unwrap(), 2).unwrap();
        assert_eq!(BasisSpec::haar(g2, 5).unwrap().dim(), 5);
        let bad = GridFunction::new(g, vec![1.0; 8]).unwrap();
        assert!(BasisSpec::new(vec![bad.clone(), bad]).is_err());
    }

    #[test]
    fn one_dimensional_distances_closed_form() {
        let net = build_grid_net(&const_basis(3), 0.7, 20).unwrap();
        for a in net.elements() {
            for b in net.elements() {
                let direct = hellinger_sq(a, b).unwrap();
                let closed = 0.5 * (a.mass().sqrt() - b.mass().sqrt()).powi(2);
                assert!((direct - closed).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eta_is_smallest_model_radius() {
        let g = Grid::unit(0);
        let a = GridIntensity::constant(g, 1.0).unwrap();
        let b = GridIntensity::constant(g, 2.0).unwrap();
        let net = Net::from_models(vec![
            (ModelSpec::new("m1", 5.0, 1.0, 1.0), vec![a.clone(), b.clone()]),
            (ModelSpec::new("m2", 3.0, 1.0, 1.0), vec![b.clone()]),
        ])
        .unwrap();
        assert_eq!(net.len(), 2);
        assert_eq!(eta_of(&net, 0).unwrap(), 5.0);
        assert_eq!(eta_of(&net, 1).unwrap(), 3.0);
        assert!(eta_of(&net, 2).is_err());
    }

    #[test]
    fn singleton_dmodel() {
        let g = Grid::unit(0);
        let net = Net::singletons(vec![GridIntensity::constant(g, 1.0).unwrap()], &[1.0], &[0.5], &[1.0]).unwrap();
        let r = dmodel_check(&net, 1.0, 0.5, (-2f64).exp(), &[], &DEFAULT_X_GRID).unwrap();
        assert!(r.holds);
        assert!((r.max_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn over_dense_net_fails() {
        let g = Grid::unit(0);
        let elems: Vec<GridIntensity> = (0..40).map(|i| GridIntensity::constant(g, 100.0 + 0.01 * i as f64).unwrap()).collect();
        let n = elems.len();
        let net = Net::singletons(elems, &vec![1.0; n], &vec![0.5; n], &vec![1.0; n]).unwrap();
        let r = dmodel_check(&net, 1.0, 0.5, 1.0, &[], &DEFAULT_X_GRID).unwrap();
        assert!(!r.holds);
        assert_eq!(r.witness.unwrap().count, 40);
        assert!(dmodel_check(&net, 1.0, 0.5, 1.0, &[], &[1.0]).is_err());
    }

    #[test]
    fn weight_boundary_case() {
        let g = Grid::unit(0);
        let eta = (84.0 * 0.5 / 5.0f64).sqrt();
        let net = Net::singletons(vec![GridIntensity::constant(g, 1.0).unwrap()], &[eta], &[0.5], &[0.1]).unwrap();
        let w = weight_conditions(&net);
        assert!(w.holds());
        assert!((w.sigma_eta - (-0.1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn manifest_round_trip() {
        let net = build_grid_net(&BasisSpec::haar(Grid::unit(2), 2).unwrap(), 1.0, 3).unwrap();
        let dir = std::env::temp_dir().join(format!("hpl-net-{}", std::process::id()));
        net.write_manifest(&dir).unwrap();
        let back = Net::read_manifest(&dir).unwrap();
        fs::remove_dir_all(&dir).unwrap();
        assert_eq!(back, net);
    }
}
