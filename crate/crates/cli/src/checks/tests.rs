use hpl::measure::hellinger_sq;
use hpl::robust::{error_bound_raw, make_test, run_test, llr_tail_bound, Decision, MuCase, TailSide};
use hpl::sim::Sampler;
use hpl::stats::proportion;
use hpl::{Grid, GridIntensity};
use rayon::prelude::*;

use super::{summary, within, Ctx, Outcome};
use crate::config::Params;
use crate::error::Result;
use crate::row;
use crate::table::{num, Table};

pub const TEST_REPS: usize = 5000;
pub const TEST_SIGMAS: f64 = 3.0;
/// How far from a center (on the square-root scale, as a fraction of the
/// center distance) the off-center means sit.
pub const OFF_CENTER: f64 = 0.125;

/// Centers `(π_c, ν_c)` at Hellinger distance `√h2`: a constant pair
/// (`ν_c` shifted on the whole interval) and a two-step pair (`ν_c`
/// shifted on the left half only).
pub(crate) fn centers(shape: &str, level: f64, h2: f64) -> Result<(GridIntensity, GridIntensity)> {
    let grid = Grid::unit(1);
    let r = level.sqrt();
    let (pi, nu) = match shape {
        "constant" => {
            let d = (2.0 * h2).sqrt();
            (vec![level, level], vec![(r + d).powi(2), (r + d).powi(2)])
        }
        _ => {
            let d = 2.0 * h2.sqrt();
            (vec![level, 4.0 * level], vec![(r + d).powi(2), 4.0 * level])
        }
    };
    Ok((GridIntensity::new(grid, pi)?, GridIntensity::new(grid, nu)?))
}

/// `((1−w)√a + w√b)²`.
fn between(a: &GridIntensity, b: &GridIntensity, w: f64) -> Result<GridIntensity> {
    let mut f = a.sqrt().scaled(1.0 - w);
    f.add_scaled(w, &b.sqrt())?;
    Ok(GridIntensity::from_sqrt(&f)?)
}

pub fn error_bounds(ctx: &Ctx, p: &Params) -> Result<Outcome> {
    let xi = p.f64("xi");
    let level = p.f64("level");
    let reps = ctx.reps(TEST_REPS);
    let mut t = Table::new(&["shape", "h2", "x", "mean_measure", "event", "reps", "hits", "rate", "stderr", "bound", "pass"]);
    let mut pass = true;
    let mut cells = 0usize;
    let mut worst = f64::NEG_INFINITY;
    let mut tag = 0u64;
    for shape in ["constant", "two-step"] {
        for &h2 in &p.f64_list("h2") {
            let (pi, nu) = centers(shape, level, h2)?;
            let h2_exact = hellinger_sq(&pi, &nu)?;
            for &x in &p.f64_list("x") {
                let spec = make_test(&pi, &nu, xi, x)?;
                let scenarios = [
                    ("pi_c", pi.clone(), "decides_nu", error_bound_raw(xi, x, h2_exact, MuCase::NearPiC)),
                    ("nu_c", nu.clone(), "decides_pi", error_bound_raw(xi, x, h2_exact, MuCase::NearNuC)),
                    ("near_nu_c", between(&nu, &pi, OFF_CENTER)?, "upper_tail", 0.0),
                    ("near_pi_c", between(&pi, &nu, OFF_CENTER)?, "lower_tail", 0.0),
                ];
                for (label, mu, event, bound) in scenarios {
                    let bound = match event {
                        "upper_tail" => llr_tail_bound(&spec, &mu, TailSide::Upper)?,
                        "lower_tail" => llr_tail_bound(&spec, &mu, TailSide::Lower)?,
                        _ => bound,
                    };
                    let sampler = Sampler::new(&mu);
                    let seed = ctx.seed(6, tag);
                    tag += 1;
                    let hits = (0..reps)
                        .into_par_iter()
                        .map(|i| {
                            let x = sampler.sample(&mut seed.replication(i as u64).rng());
                            let o = run_test(&spec, &x)?;
                            Ok(match event {
                                "decides_nu" => o.decision == Decision::NuC,
                                "decides_pi" => o.decision == Decision::PiC,
                                "upper_tail" => o.statistic >= 0.0,
                                _ => o.statistic <= 0.0,
                            })
                        })
                        .collect::<Result<Vec<bool>, hpl::Error>>()?
                        .into_iter()
                        .filter(|&h| h)
                        .count();
                    let (rate, se) = proportion(hits, reps);
                    let ok = within(rate, bound, se, TEST_SIGMAS);
                    pass &= ok;
                    cells += 1;
                    worst = worst.max(rate - bound);
                    t.push(row![shape, h2, x, label, event, reps, hits, rate, se, bound, ok]);
                }
            }
        }
    }
    Ok(Outcome { pass, measured: summary(&[("cells", cells.to_string()), ("worst_rate_minus_bound", num(worst)), ("reps", reps.to_string())]), table: t })
}
