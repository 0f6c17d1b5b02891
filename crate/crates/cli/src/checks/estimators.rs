use std::f64::consts::PI;
use std::ops::Range;

use hpl::baseline::{histogram_estimator, histogram_projection, projection_estimator, rt_aggregate};
use hpl::measure::{hellinger_sq, l2_dist};
use hpl::net::BasisSpec;
use hpl::select::estimator_select;
use hpl::sim::{thin_with, Sampler};
use hpl::stats::{mean_stderr, proportion};
use hpl::{Grid, GridIntensity};
use rayon::prelude::*;

use super::{summary, within, Ctx, Outcome};
use crate::config::Params;
use crate::error::Result;
use crate::row;
use crate::table::{num, Table};

pub const RISK_REPS: usize = 2000;
pub const RISK_SIGMAS: f64 = 3.0;
pub const RISK_RESOLUTION: u32 = 6;
/// Thinning probability of the aggregation split; at 1/2 the two readings
/// of the target (`p·s` or `(1−p)·s`) coincide.
pub const AGGREGATION_P: f64 = 0.5;
pub const AGGREGATED_DIMS: [usize; 5] = [1, 2, 4, 8, 16];
pub const SELECT_REPS: usize = 2000;
pub const SELECT_FREQUENCY: f64 = 0.9;

struct Scenario {
    name: &'static str,
    truth: GridIntensity,
    basis_dim: usize,
    cells: Vec<Range<usize>>,
}

fn scenarios() -> Result<Vec<Scenario>> {
    let g = Grid::unit(RISK_RESOLUTION);
    let step = [(0..16, 30.0), (16..24, 80.0), (24..48, 10.0), (48..64, 50.0)];
    let mut sv = vec![0.0; 64];
    for (r, v) in &step {
        sv[r.clone()].iter_mut().for_each(|x| *x = *v);
    }
    Ok(vec![
        Scenario {
            name: "sine",
            truth: GridIntensity::from_fn(g, |x| 50.0 * (1.0 + 0.8 * (2.0 * PI * x[0]).sin()))?,
            basis_dim: 8,
            cells: (0..8).map(|i| 8 * i..8 * i + 8).collect(),
        },
        Scenario { name: "step", truth: GridIntensity::new(g, sv)?, basis_dim: 16, cells: step.iter().map(|(r, _)| r.clone()).collect() },
        Scenario { name: "quadratic", truth: GridIntensity::from_fn(g, |x| 30.0 + 60.0 * x[0] * x[0])?, basis_dim: 4, cells: vec![0..32, 32..64] },
    ])
}

struct RepLoss {
    projection: f64,
    histogram: f64,
    aggregate_excess: f64,
    rank: usize,
}

pub fn risk_bounds(ctx: &Ctx, _p: &Params) -> Result<Outcome> {
    let reps = ctx.reps(RISK_REPS);
    let g = Grid::unit(RISK_RESOLUTION);
    let prelim: Vec<BasisSpec> = AGGREGATED_DIMS.iter().map(|&k| BasisSpec::haar(g, k)).collect::<Result<_, hpl::Error>>()?;
    let mut t = Table::new(&["scenario", "estimator", "mean_loss", "stderr", "bound", "pass"]);
    let mut pass = true;
    let mut worst = f64::NEG_INFINITY;
    for (si, sc) in scenarios()?.into_iter().enumerate() {
        let s = &sc.truth;
        let basis = BasisSpec::haar(g, sc.basis_dim)?;
        let sampler = Sampler::new(s);
        let seed = ctx.seed(13, si as u64);
        let sf = s.as_function();
        let losses: Vec<RepLoss> = (0..reps)
            .into_par_iter()
            .map(|i| {
                let mut rng = seed.replication(i as u64).rng();
                let x = sampler.sample(&mut rng);
                let proj = projection_estimator(&x, &basis)?;
                let d = l2_dist(&proj.raw, &sf)?;
                let hist = histogram_estimator(&x, &g, &sc.cells)?;
                let (x1, x2) = thin_with(&x, AGGREGATION_P, &mut rng)?;
                let ests = prelim.iter().map(|b| Ok(projection_estimator(&x1, b)?.estimate)).collect::<Result<Vec<_>, hpl::Error>>()?;
                let agg = rt_aggregate(&ests, &x2, AGGREGATION_P)?;
                let da = l2_dist(&agg.tilde, &sf.scaled(1.0 - AGGREGATION_P))?;
                let inf = agg.span_distance_sq(s, AGGREGATION_P)?;
                Ok(RepLoss { projection: d * d, histogram: hellinger_sq(s, &hist.estimate)?, aggregate_excess: da * da - inf, rank: agg.rank() })
            })
            .collect::<Result<Vec<_>, hpl::Error>>()?;
        let col = |f: fn(&RepLoss) -> f64| losses.iter().map(f).collect::<Vec<_>>();
        let sup = s.sup_norm();
        let coefs = basis.project(&sf)?;
        let approx = sf.norm_sq() - coefs.iter().map(|c| c * c).sum::<f64>();
        let bounds = [
            ("projection_l2", col(|r| r.projection), approx.max(0.0) + sup * sc.basis_dim as f64),
            ("histogram_hellinger", col(|r| r.histogram), hellinger_sq(s, &histogram_projection(s, &sc.cells)?)? + sc.cells.len() as f64 / 2.0),
            ("aggregate_excess_l2", col(|r| r.aggregate_excess), (1.0 - AGGREGATION_P) * sup * AGGREGATED_DIMS.len() as f64),
        ];
        for (name, xs, bound) in bounds {
            let (m, se) = mean_stderr(&xs);
            let ok = within(m, bound, se, RISK_SIGMAS);
            pass &= ok;
            worst = worst.max(m / bound);
            t.push(row![sc.name, name, m, se, bound, ok]);
        }
        let mean_rank = losses.iter().map(|r| r.rank as f64).sum::<f64>() / reps as f64;
        t.push(row![sc.name, "aggregate_mean_rank", mean_rank, "", AGGREGATED_DIMS.len(), ""]);
    }
    Ok(Outcome { pass, measured: summary(&[("max_mean_over_bound", num(worst)), ("reps", reps.to_string())]), table: t })
}

/// Candidates at Hellinger distance at least `√min_h2` from the truth,
/// with the truth at index 2.
pub(crate) fn far_candidates(s: &GridIntensity, min_h2: f64) -> Result<Vec<GridIntensity>> {
    let grid = *s.grid();
    let mass = s.mass() / grid.domain().volume();
    let shifted = GridIntensity::from_fn(grid, |x| mass * (1.0 + 0.5 * (2.0 * PI * x[0] + PI).sin()))?;
    let mut out = Vec::new();
    for c in [s.scaled(4.0)?, s.scaled(9.0)?, shifted.scaled(4.0)?] {
        let mut c = c;
        while hellinger_sq(s, &c)? < min_h2 {
            c = c.scaled(4.0)?;
        }
        out.push(c);
    }
    let zero = GridIntensity::zero(grid);
    if hellinger_sq(s, &zero)? >= min_h2 {
        out.insert(0, zero);
    }
    out.insert(2, s.clone());
    Ok(out)
}

pub fn selection(ctx: &Ctx, p: &Params) -> Result<Outcome> {
    let grid = Grid::unit(p.usize("resolution") as u32);
    let mass = p.f64("mass");
    let s = GridIntensity::from_fn(grid, |x| mass * (1.0 + 0.5 * (2.0 * PI * x[0]).sin()))?;
    let cands = far_candidates(&s, p.f64("min_h2"))?;
    let deltas = vec![1.0; cands.len()];
    let reps = ctx.reps(SELECT_REPS);
    let sampler = Sampler::new(&s);
    let seed = ctx.seed(14, 0);
    let picks: Vec<usize> = (0..reps)
        .into_par_iter()
        .map(|i| estimator_select(&cands, &deltas, &sampler.sample(&mut seed.replication(i as u64).rng())))
        .collect::<Result<Vec<_>, hpl::Error>>()?;
    let mut t = Table::new(&["candidate", "h2_to_truth", "mass", "picked", "frequency"]);
    for (i, c) in cands.iter().enumerate() {
        let k = picks.iter().filter(|&&j| j == i).count();
        t.push(row![i, hellinger_sq(&s, c)?, c.mass(), k, k as f64 / reps as f64]);
    }
    let (freq, se) = proportion(picks.iter().filter(|&&j| j == 2).count(), reps);
    Ok(Outcome {
        pass: freq >= SELECT_FREQUENCY,
        measured: summary(&[("truth_frequency", num(freq)), ("stderr", num(se)), ("candidates", cands.len().to_string()), ("reps", reps.to_string())]),
        table: t,
    })
}
