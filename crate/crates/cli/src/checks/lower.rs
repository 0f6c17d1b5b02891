use hpl::baseline::histogram_estimator;
use hpl::lower::{assouad_lower_bound, build_bounded_hypercube_family, build_sqrt_lipschitz_family, estimator_vs_bound, l2_theta, sqrt_lipschitz_cell_lipschitz_ratio, sqrt_lipschitz_lipschitz_holds, sqrt_alpha_variation};
use hpl::robust::{ratio_inequality_sides, llr_expectation_bound, llr_expectation};
use hpl::sim::{log_likelihood_ratio, Sampler};
use hpl::stats::mean_stderr;
use hpl::{Grid, GridFunction, GridIntensity};
use rand::Rng;
use rayon::prelude::*;

use super::metric::hypercube_families;
use super::{summary, within, Ctx, Outcome};
use crate::config::Params;
use crate::error::Result;
use crate::row;
use crate::table::{num, Table};

pub const LOWER_REPS: usize = 5000;
pub const FORMULA_TOL: f64 = 1e-9;
/// The histogram's worst risk must reach this fraction of the bound.
pub const RISK_FRACTION: f64 = 0.9;
pub const SQRT_LIPSCHITZ_DIMS: [usize; 3] = [1, 2, 4];
pub const SQRT_LIPSCHITZ_RESOLUTION: u32 = 8;
pub const LR_GAP_TRIPLES: usize = 1000;
pub const LLR_MEAN_TRIPLES: usize = 5;
pub const LLR_MEAN_REPS: usize = 20_000;
pub const LLR_MEAN_SIGMAS: f64 = 3.0;
pub const LLR_MEAN_K: f64 = 2.0;

pub fn lower_bounds(ctx: &Ctx, p: &Params) -> Result<Outcome> {
    let floor = (-2.0f64 / 7.0).exp();
    let mut t = Table::new(&["check", "value", "reference", "pass"]);
    let mut pass = true;
    let mut min_avg = f64::INFINITY;
    for (name, fam) in hypercube_families()? {
        let avg = fam.pair_average();
        let ok = avg >= floor;
        pass &= ok;
        min_avg = min_avg.min(avg);
        t.push(row![format!("pair_average_{name}"), avg, floor, ok]);
    }

    let (d, l) = (p.usize("d"), p.f64("l"));
    let grid = Grid::unit(p.usize("resolution") as u32);
    let fam = build_bounded_hypercube_family(grid, d, l)?;
    let theta = l2_theta(&fam);
    let formula = d as f64 * l / 24.0 * floor;
    let substituted = d as f64 * theta / 16.0 * floor;
    let bound = assouad_lower_bound(&fam, theta);
    let formula_ok = (substituted - formula).abs() <= FORMULA_TOL && bound >= formula - FORMULA_TOL;
    pass &= formula_ok;
    t.push(row!["bounded_cube_formula", formula, substituted, (substituted - formula).abs() <= FORMULA_TOL]);
    t.push(row!["bounded_cube_bound", bound, formula, bound >= formula - FORMULA_TOL]);

    let block = grid.cell_count() / d;
    let cells: Vec<_> = (0..d).map(|j| j * block..(j + 1) * block).collect();
    let reps = ctx.reps(LOWER_REPS);
    let check = estimator_vs_bound(&fam, |x, _| Ok(histogram_estimator(x, &grid, &cells)?.estimate), None, reps, ctx.seed(15, 0))?;
    let (risk, se) = check.max_l2();
    let risk_ok = risk >= RISK_FRACTION * check.l2_bound;
    pass &= risk_ok;
    t.push(row!["histogram_max_l2_risk", risk, RISK_FRACTION * check.l2_bound, risk_ok]);
    t.push(row!["histogram_max_l2_risk_stderr", se, "", ""]);
    let (hr, _) = check.max_hellinger();
    t.push(row!["histogram_max_hellinger_risk", hr, check.hellinger_bound, hr >= check.hellinger_bound]);

    let pgrid = Grid::unit(SQRT_LIPSCHITZ_RESOLUTION);
    let mut cert_ok = true;
    for d in SQRT_LIPSCHITZ_DIMS {
        let fam = build_sqrt_lipschitz_family(pgrid, d)?;
        let df = d as f64;
        let (lo, hi) = (9.0 * df.powi(3), 15.0 * df.powi(3));
        for alpha in [0.5, 1.0] {
            let limit = df.powf((1.0 + 2.0 * alpha) / 2.0);
            let mut worst = 0.0f64;
            let mut cell_ratio = 0.0f64;
            let mut ok = true;
            for delta in 0..fam.size() {
                let m = fam.member(delta);
                let v = sqrt_alpha_variation(&m, alpha)?;
                worst = worst.max(v);
                ok &= v <= limit * (1.0 + 1e-12);
                ok &= m.values().iter().all(|&x| x >= lo && x <= hi);
                ok &= sqrt_lipschitz_lipschitz_holds(&pgrid, d, delta);
                cell_ratio = cell_ratio.max(sqrt_lipschitz_cell_lipschitz_ratio(&fam, delta));
            }
            cert_ok &= ok;
            t.push(row![format!("sqrt_lipschitz_variation_D{d}_alpha{alpha}"), worst, limit, ok]);
            if alpha == 1.0 {
                t.push(row![format!("sqrt_lipschitz_cell_value_lipschitz_ratio_D{d}"), cell_ratio, 1.0, ""]);
            }
        }
    }
    pass &= cert_ok;
    Ok(Outcome {
        pass,
        measured: summary(&[
            ("min_pair_average", num(min_avg)),
            ("bound", num(bound)),
            ("formula", num(formula)),
            ("max_risk", num(risk)),
            ("certificate", cert_ok.to_string()),
        ]),
        table: t,
    })
}

fn random_values<R: Rng>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn ratio_inequalities(ctx: &Ctx, _p: &Params) -> Result<Outcome> {
    let mut rng = ctx.seed(16, 0).rng();
    let grid = Grid::unit(4);
    let n = grid.cell_count();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut l8_ok = true;
    for _ in 0..LR_GAP_TRIPLES {
        let k: f64 = rng.random_range(1.0..4.0);
        let f: Vec<f64> = (0..n).map(|_| if rng.random::<f64>() < 0.1 { 0.0 } else { rng.random_range(0.0..5.0) }).collect();
        let g: Vec<f64> = f.iter().map(|v| k * v * rng.random::<f64>()).collect();
        let fp = random_values(n, 0.0, 5.0, &mut rng);
        let (lhs, rhs) = ratio_inequality_sides(&GridFunction::new(grid, f)?, &GridFunction::new(grid, g)?, &GridFunction::new(grid, fp)?, k)?;
        worst_gap = worst_gap.max(lhs - rhs);
        l8_ok &= lhs <= rhs + 1e-12 * (1.0 + rhs.abs());
    }
    let mut t = Table::new(&["check", "mc_mean", "stderr", "exact", "bound", "pass"]);
    t.push(row![format!("lr_gap_{LR_GAP_TRIPLES}_triples_max_gap"), worst_gap, "", "", 0.0, l8_ok]);
    let mut pass = l8_ok;
    let g3 = Grid::unit(3);
    let reps = ctx.reps(LLR_MEAN_REPS);
    for i in 0..LLR_MEAN_TRIPLES {
        let mu = GridIntensity::new(g3, random_values(8, 1.0, 10.0, &mut rng))?;
        let nu_v = random_values(8, 1.0, 10.0, &mut rng);
        let pi_v: Vec<f64> = nu_v.iter().map(|v| v * rng.random_range(0.25..LLR_MEAN_K * LLR_MEAN_K)).collect();
        let (nu, pi) = (GridIntensity::new(g3, nu_v)?, GridIntensity::new(g3, pi_v)?);
        let exact = llr_expectation(&mu, &pi, &nu)?;
        let bound = llr_expectation_bound(&mu, &pi, &nu, LLR_MEAN_K)?;
        let sampler = Sampler::new(&mu);
        let seed = ctx.seed(16, 1 + i as u64);
        let vals: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|r| Ok((0.5 * log_likelihood_ratio(&sampler.sample(&mut seed.replication(r as u64).rng()), &pi, &nu)?).exp()))
            .collect::<Result<Vec<_>, hpl::Error>>()?;
        let (m, se) = mean_stderr(&vals);
        let ok = within(m, bound, se, LLR_MEAN_SIGMAS) && exact <= bound && (m - exact).abs() <= 4.0 * se;
        pass &= ok;
        t.push(row![format!("llr_mean_triple_{i}"), m, se, exact, bound, ok]);
    }
    Ok(Outcome { pass, measured: summary(&[("ratio_max_gap", num(worst_gap)), ("expectation_triples", LLR_MEAN_TRIPLES.to_string())]), table: t })
}
