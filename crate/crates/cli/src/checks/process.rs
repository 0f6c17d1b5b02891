use std::f64::consts::PI;

use hpl::measure::hellinger_sq;
use hpl::sim::{empirical_functional, log_likelihood_ratio, product_functional, thin_with, Sampler};
use hpl::stats::{correlation, mean_stderr, proportion};
use hpl::{Grid, GridFunction, GridIntensity};
use rayon::prelude::*;

use super::{summary, Ctx, Outcome};
use crate::config::Params;
use crate::error::Result;
use crate::row;
use crate::table::{num, Table};

pub const PROCESS_REPS: usize = 20_000;
/// Mean and functional checks allow this many standard errors.
pub const MEAN_SIGMAS: f64 = 4.0;
/// The exponential tail bound allows this many standard errors.
pub const TAIL_SIGMAS: f64 = 3.0;
pub const THIN_P: f64 = 0.3;

/// `s(x) = level + slope·x` on the configured grid.
pub(crate) fn linear_intensity(p: &Params) -> Result<GridIntensity> {
    let (level, slope) = (p.f64("level"), p.f64("slope"));
    let grid = Grid::unit(p.usize("resolution") as u32);
    Ok(GridIntensity::from_fn(grid, |x| level + slope * x[0])?)
}

struct Draw {
    n: f64,
    sum: f64,
    product: f64,
    llr: f64,
}

pub fn laws(ctx: &Ctx, p: &Params) -> Result<Outcome> {
    let s = linear_intensity(p)?;
    let grid = *s.grid();
    let level = p.f64("level");
    let phi = GridFunction::from_fn(grid, |x| 1.0 + 0.8 * (2.0 * PI * x[0]).cos())?;
    let alt = GridIntensity::from_fn(grid, |x| level * (2.0 + 1.8 * (2.0 * PI * x[0]).sin()))?;
    let reps = ctx.reps(PROCESS_REPS);
    let sampler = Sampler::new(&s);
    let seed = ctx.seed(4, 0);
    let draws: Vec<Draw> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let x = sampler.sample(&mut seed.replication(i as u64).rng());
            Ok(Draw {
                n: x.len() as f64,
                sum: empirical_functional(&x, &phi)?,
                product: product_functional(&x, &phi)?,
                llr: log_likelihood_ratio(&x, &alt, &s)?,
            })
        })
        .collect::<Result<Vec<_>, hpl::Error>>()?;
    let col = |f: fn(&Draw) -> f64| draws.iter().map(f).collect::<Vec<_>>();
    let mass = s.mass();
    let mut t = Table::new(&["check", "estimate", "target", "stderr", "sigmas", "pass"]);
    let mut pass = true;
    let (mn, _) = mean_stderr(&col(|d| d.n));
    let sd_n = (mass / reps as f64).sqrt();
    let ok = (mn - mass).abs() <= MEAN_SIGMAS * sd_n;
    pass &= ok;
    t.push(row!["mean_count", mn, mass, sd_n, MEAN_SIGMAS, ok]);
    let integral = phi.dot(&s.as_function())?;
    for (name, est, target) in [
        ("sum_functional", mean_stderr(&col(|d| d.sum)), integral),
        ("product_functional", mean_stderr(&col(|d| d.product)), (integral - mass).exp()),
    ] {
        let ok = (est.0 - target).abs() <= MEAN_SIGMAS * est.1;
        pass &= ok;
        t.push(row![name, est.0, target, est.1, MEAN_SIGMAS, ok]);
    }
    let h2 = hellinger_sq(&s, &alt)?;
    for x in [0.0, 1.0] {
        let k = draws.iter().filter(|d| d.llr >= 2.0 * x).count();
        let (rate, se) = proportion(k, reps);
        let bound = (-h2 - x).exp();
        let ok = super::within(rate, bound, se, TAIL_SIGMAS);
        pass &= ok;
        t.push(row![format!("llr_tail_x{x}"), rate, bound, se, TAIL_SIGMAS, ok]);
    }
    Ok(Outcome { pass, measured: summary(&[("mean_count", num(mn)), ("mass", num(mass)), ("reps", reps.to_string())]), table: t })
}

pub fn thinning(ctx: &Ctx, p: &Params) -> Result<Outcome> {
    let s = linear_intensity(p)?;
    let reps = ctx.reps(PROCESS_REPS);
    let sampler = Sampler::new(&s);
    let seed = ctx.seed(5, 0);
    let pairs: Vec<(f64, f64)> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.replication(i as u64).rng();
            let x = sampler.sample(&mut rng);
            let (a, b) = thin_with(&x, THIN_P, &mut rng)?;
            Ok((a.len() as f64, b.len() as f64))
        })
        .collect::<Result<Vec<_>, hpl::Error>>()?;
    let (n1, n2): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let rho = correlation(&n1, &n2);
    let rho_tol = 4.0 / (reps as f64).sqrt();
    let mass = s.mass();
    let mut t = Table::new(&["check", "estimate", "target", "tolerance", "pass"]);
    let rho_ok = rho.abs() <= rho_tol;
    t.push(row!["count_correlation", rho, 0.0, rho_tol, rho_ok]);
    let mut pass = rho_ok;
    for (name, xs, target) in [("kept_mean", &n1, THIN_P * mass), ("removed_mean", &n2, (1.0 - THIN_P) * mass)] {
        let (m, se) = mean_stderr(xs);
        let ok = (m - target).abs() <= MEAN_SIGMAS * se;
        pass &= ok;
        t.push(row![name, m, target, MEAN_SIGMAS * se, ok]);
    }
    Ok(Outcome { pass, measured: summary(&[("rho", num(rho)), ("rho_tol", num(rho_tol)), ("reps", reps.to_string())]), table: t })
}
