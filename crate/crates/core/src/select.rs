//! Selection of a net element by pairwise robust tests.
//!
//! Every unordered pair `{i, j}` with `i < j` is tested once with `t = i`,
//! `u = j`. The test deciding `u` puts `u` in `R_t`, and conversely. The
//! selected element minimizes `D_X(t) = max_{u ∈ R_t} H(t, u)` (0 when
//! `R_t` is empty); ties go to the smallest `η(t)`, then the lowest index.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::measure::{hellinger_sq, hellinger_sq_unchecked, GridIntensity};
use crate::net::{weight_conditions, Net};
use crate::robust::{pair_threshold, statistic_sqrt, Decision, PAIR_XI};
use crate::sim::{PointSample, Seed};

/// Default cap on the number of net elements.
pub const DEFAULT_MAX_ELEMENTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDecision {
    pub i: usize,
    pub j: usize,
    pub statistic: f64,
    /// `PiC` decides element `i`, `NuC` decides element `j`.
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionTrace {
    pub decisions: Vec<PairDecision>,
    pub dx: Vec<f64>,
    pub eta: Vec<f64>,
    pub selected: usize,
    /// Number of elements sharing the minimal `D_X`.
    pub tie_count: usize,
}

impl SelectionTrace {
    /// CSV with columns `i,j,statistic,decision` (decision is the chosen index).
    pub fn write_pairs_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "i,j,statistic,decision")?;
        for d in &self.decisions {
            let chosen = match d.decision {
                Decision::PiC => d.i,
                Decision::NuC => d.j,
            };
            writeln!(out, "{},{},{},{}", d.i, d.j, d.statistic, chosen)?;
        }
        Ok(())
    }

    /// CSV with columns `i,eta,dx`.
    pub fn write_dx_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "i,eta,dx")?;
        for (i, (e, d)) in self.eta.iter().zip(&self.dx).enumerate() {
            writeln!(out, "{i},{e},{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectOptions {
    pub max_elements: usize,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions { max_elements: DEFAULT_MAX_ELEMENTS }
    }
}

/// Square roots and masses of the net elements plus the occupied cells of
/// one sample: everything a pairwise test needs.
struct Prepared<'a> {
    net: &'a Net,
    roots: Vec<Vec<f64>>,
    masses: Vec<f64>,
    occupied: Vec<(usize, u64)>,
    cell_measure: f64,
}

impl<'a> Prepared<'a> {
    fn new(net: &'a Net, sample: &PointSample, opts: &SelectOptions) -> Result<Self> {
        let Some(grid) = net.grid() else {
            return Err(invalid("cannot select from an empty net"));
        };
        if net.len() > opts.max_elements {
            return Err(Error::Capacity { what: "selecting from a net".into(), count: net.len() as u64, cap: opts.max_elements as u64 });
        }
        let w = weight_conditions(net);
        if !w.holds() {
            log::warn!("weight conditions fail for models {:?}", w.violations);
        }
        Ok(Prepared {
            net,
            roots: net.elements().iter().map(|e| e.sqrt().into_values()).collect(),
            masses: net.elements().iter().map(GridIntensity::mass).collect(),
            occupied: sample.occupied_cells(grid)?,
            cell_measure: grid.cell_measure(),
        })
    }

    /// Statistic of the test between elements `i < j` with `t = i`.
    fn statistic(&self, i: usize, j: usize) -> f64 {
        let eta = self.net.etas();
        statistic_sqrt(
            &self.roots[i],
            &self.roots[j],
            self.masses[i],
            self.masses[j],
            &self.occupied,
            PAIR_XI,
            pair_threshold(eta[i], eta[j]),
        )
    }

    /// `H` between two elements, symmetric bit for bit.
    fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        hellinger_sq_unchecked(self.cell_measure, self.net.element(a).values(), self.net.element(b).values()).sqrt()
    }

    /// Whether the test between `a` and `b` decides `b`.
    fn rejects(&self, a: usize, b: usize) -> bool {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        let decides_i = self.statistic(i, j) > 0.0;
        decides_i == (b == i)
    }
}

/// Lexicographic order on `(D_X, η, index)`.
fn better(d: f64, eta: f64, i: usize, bd: f64, beta: f64, bi: usize) -> bool {
    (d, eta, i).partial_cmp(&(bd, beta, bi)) == Some(std::cmp::Ordering::Less)
}

/// Runs every pairwise test and returns the selected element with the
/// complete trace.
pub fn select(net: &Net, sample: &PointSample) -> Result<(GridIntensity, SelectionTrace)> {
    select_with(net, sample, &SelectOptions::default())
}

pub fn select_with(net: &Net, sample: &PointSample, opts: &SelectOptions) -> Result<(GridIntensity, SelectionTrace)> {
    let p = Prepared::new(net, sample, opts)?;
    let n = net.len();
    let decisions: Vec<PairDecision> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let p = &p;
            (i + 1..n).map(move |j| {
                let s = p.statistic(i, j);
                PairDecision { i, j, statistic: s, decision: if s > 0.0 { Decision::PiC } else { Decision::NuC } }
            })
        })
        .collect();
    let mut dx = vec![0.0f64; n];
    for d in &decisions {
        let loser = match d.decision {
            Decision::PiC => d.j,
            Decision::NuC => d.i,
        };
        // The loser belongs to the rejection set of the winner's opponent.
        let h = p.distance(d.i, d.j);
        dx[loser] = dx[loser].max(h);
    }
    let eta = net.etas().to_vec();
    let mut best = 0;
    for i in 1..n {
        if better(dx[i], eta[i], i, dx[best], eta[best], best) {
            best = i;
        }
    }
    let tie_count = dx.iter().filter(|&&d| d == dx[best]).count();
    let trace = SelectionTrace { decisions, dx, eta, selected: best, tie_count };
    Ok((net.element(best).clone(), trace))
}

/// Same argmin as [`select`], found by branch and bound.
///
/// Candidates are visited in order of `H²(t, empirical) + η²(t)/4`; each
/// candidate is abandoned as soon as its partial `D_X` shows it cannot beat
/// the current best, and distances are only computed for rejections.
pub fn select_fast(net: &Net, sample: &PointSample) -> Result<usize> {
    select_fast_with(net, sample, &SelectOptions::default())
}

pub fn select_fast_with(net: &Net, sample: &PointSample, opts: &SelectOptions) -> Result<usize> {
    let p = Prepared::new(net, sample, opts)?;
    let order = heuristic_order(&p);
    let eta = net.etas();
    let mut best: Option<(f64, usize)> = None;
    for &a in &order {
        let mut d = 0.0f64;
        let mut alive = true;
        for &u in &order {
            if u == a {
                continue;
            }
            if p.rejects(a, u) {
                d = d.max(p.distance(a, u));
                if let Some((bd, bi)) = best {
                    if !better(d, eta[a], a, bd, eta[bi], bi) {
                        alive = false;
                        break;
                    }
                }
            }
        }
        if alive && best.is_none_or(|(bd, bi)| better(d, eta[a], a, bd, eta[bi], bi)) {
            best = Some((d, a));
        }
    }
    Ok(best.expect("net is nonempty").1)
}

fn heuristic_order(p: &Prepared) -> Vec<usize> {
    let cm = p.cell_measure;
    // H² to the empirical intensity counts/cellMeasure, using only occupied cells
    // for the cross term.
    let empirical_mass: f64 = p.occupied.iter().map(|&(_, n)| n as f64).sum();
    let score: Vec<f64> = (0..p.roots.len())
        .map(|i| {
            let cross: f64 = p.occupied.iter().map(|&(c, n)| p.roots[i][c] * (n as f64 / cm).sqrt()).sum::<f64>() * cm;
            let eta = p.net.etas()[i];
            0.5 * (p.masses[i] + empirical_mass) - cross + eta * eta / 4.0
        })
        .collect();
    let mut order: Vec<usize> = (0..score.len()).collect();
    order.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(a.cmp(&b)));
    order
}

/// Singleton models with `η_m² = 84Δ_m`, `D_m = 1/2`; returns the index of
/// the selected candidate.
pub fn estimator_select(candidates: &[GridIntensity], deltas: &[f64], sample: &PointSample) -> Result<usize> {
    if candidates.is_empty() {
        return Err(invalid("no candidates to select from"));
    }
    if candidates.len() != deltas.len() {
        return Err(invalid("one weight per candidate is required"));
    }
    if let Some(d) = deltas.iter().find(|&&d| !(d >= 0.1)) {
        return Err(invalid(format!("weights must be at least 1/10, got {d}")));
    }
    // Duplicate candidates keep the smallest weight.
    let mut unique: Vec<usize> = Vec::new();
    let mut rep: Vec<usize> = Vec::with_capacity(candidates.len());
    for (i, c) in candidates.iter().enumerate() {
        match unique.iter().position(|&u| &candidates[u] == c) {
            Some(k) => rep.push(k),
            None => {
                rep.push(unique.len());
                unique.push(i);
            }
        }
    }
    let mut best_delta = vec![f64::INFINITY; unique.len()];
    for (i, &k) in rep.iter().enumerate() {
        best_delta[k] = best_delta[k].min(deltas[i]);
    }
    let etas: Vec<f64> = best_delta.iter().map(|d| (84.0 * d).sqrt()).collect();
    let net = Net::singletons(
        unique.iter().map(|&i| candidates[i].clone()).collect(),
        &etas,
        &vec![0.5; unique.len()],
        &best_delta,
    )?;
    let k = select_fast(&net, sample)?;
    // Report the first candidate with the selected value and weight.
    Ok((0..candidates.len()).find(|&i| rep[i] == k && deltas[i] == best_delta[k]).expect("representative exists"))
}

/// Monte Carlo estimate of `E[H^q(s, ŝ)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskReport {
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
    pub q: f64,
    pub seed: Seed,
}

/// Draws `reps` samples from `truth` (replication `i` uses
/// `seed.replication(i)`) and averages `H^q(truth, procedure(sample))`.
pub fn risk_mc<F>(truth: &GridIntensity, procedure: F, q: f64, reps: usize, seed: Seed) -> Result<RiskReport>
where
    F: Fn(&PointSample, Seed) -> Result<GridIntensity> + Sync,
{
    if reps < 2 {
        return Err(invalid("risk estimation needs at least 2 replications"));
    }
    if !(q >= 1.0) {
        return Err(invalid(format!("loss exponent q must be ≥ 1, got {q}")));
    }
    let sampler = crate::sim::Sampler::new(truth);
    let losses: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let rs = seed.replication(i as u64);
            let x = sampler.sample(&mut rs.rng());
            let est = procedure(&x, rs.derive(1))?;
            Ok(hellinger_sq(truth, &est)?.sqrt().powf(q))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, stderr) = crate::stats::mean_stderr(&losses);
    Ok(RiskReport { mean, stderr, reps, q, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Domain, Grid};
    use crate::net::{build_grid_net, BasisSpec};
    use crate::sim::sample_process;

    fn c(v: f64) -> GridIntensity {
        GridIntensity::constant(Grid::unit(0), v).unwrap()
    }

    #[test]
    fn singleton_net() {
        let net = Net::singletons(vec![c(3.0)], &[1.0], &[0.5], &[1.0]).unwrap();
        let x = sample_process(&c(3.0), Seed::new(1));
        let (s, t) = select(&net, &x).unwrap();
        assert_eq!(s, c(3.0));
        assert_eq!(t.dx, vec![0.0]);
        assert!(t.decisions.is_empty());
        assert_eq!(select_fast(&net, &x).unwrap(), 0);
    }

    #[test]
    fn empty_net_is_an_error() {
        let net = Net::new(Vec::new(), Vec::new()).unwrap();
        assert!(select(&net, &PointSample::empty(Domain::unit_interval())).is_err());
    }

    #[test]
    fn dx_zero_iff_nothing_rejected() {
        let g = Grid::unit(2);
        let basis = BasisSpec::haar(g, 2).unwrap();
        let net = build_grid_net(&basis, 1.5, 30).unwrap();
        let truth = GridIntensity::from_fn(g, |x| 20.0 + 10.0 * x[0]).unwrap();
        for r in 0..5 {
            let x = sample_process(&truth, Seed::new(3).replication(r));
            let (_, t) = select(&net, &x).unwrap();
            let mut rejected = vec![false; net.len()];
            for d in &t.decisions {
                match d.decision {
                    Decision::PiC => rejected[d.j] = true,
                    Decision::NuC => rejected[d.i] = true,
                }
            }
            for i in 0..net.len() {
                assert_eq!(t.dx[i] == 0.0, !rejected[i]);
            }
            assert_eq!(select_fast(&net, &x).unwrap(), t.selected);
        }
    }

    #[test]
    fn estimator_select_handles_duplicates() {
        let x = sample_process(&c(5.0), Seed::new(2));
        assert_eq!(estimator_select(&[c(5.0)], &[1.0], &x).unwrap(), 0);
        let k = estimator_select(&[c(5.0), c(5.0), c(400.0)], &[2.0, 1.0, 1.0], &x).unwrap();
        assert_eq!(k, 1);
        assert!(estimator_select(&[c(5.0)], &[0.05], &x).is_err());
    }

    #[test]
    fn risk_of_exact_procedure_is_zero() {
        let truth = c(4.0);
        let r = risk_mc(&truth, |_, _| Ok(c(4.0)), 2.0, 10, Seed::new(5)).unwrap();
        assert_eq!(r.mean, 0.0);
        assert_eq!(r.stderr, 0.0);
    }

    #[test]
    fn trace_csv() {
        let net = Net::singletons(vec![c(1.0), c(4.0)], &[1.0, 1.0], &[0.5, 0.5], &[1.0, 1.0]).unwrap();
        let x = PointSample::empty(Domain::unit_interval());
        let (_, t) = select(&net, &x).unwrap();
        let mut buf = Vec::new();
        t.write_pairs_csv(&mut buf).unwrap();
        // Empty sample: statistic = (1−2ξ)(4 − 1) = 1.5 > 0, element 0 wins.
        assert_eq!(String::from_utf8(buf).unwrap(), "i,j,statistic,decision\n0,1,1.5,0\n");
        assert_eq!(t.selected, 0);
    }
}
