use hpl::regression::{build_regression_family, regression_mc, RegressionFamily, RegressionOptions};
use hpl::stats::proportion;
use hpl::GridIntensity;

use super::{summary, Ctx, Outcome};
use crate::config::Params;
use crate::error::Result;
use crate::row;
use crate::table::{num, Table};

pub const REGRESSION_REPS: usize = 500;
pub const RECOVERY_FREQUENCY: f64 = 0.9;
pub const SMALL_MODEL_PIECES: usize = 2;
/// A 2× contrast, reported but not asserted.
pub const WEAK_CONTRAST: f64 = 2.0;

fn two_piece(family: &RegressionFamily, low: f64, high: f64) -> Result<GridIntensity> {
    let n = family.points();
    Ok(GridIntensity::new(family.grid(), (0..n).map(|i| if i < n / 2 { low } else { high }).collect())?)
}

pub fn recovery(ctx: &Ctx, p: &Params) -> Result<Outcome> {
    let family = build_regression_family(p.usize("n") as u32, p.usize("max_pieces"))?;
    let opts = RegressionOptions::default();
    let reps = ctx.reps(REGRESSION_REPS);
    let half = family.points() / 2;
    let cut_model = family.models().iter().position(|m| m.pieces() == 2 && m.cells[0].end == half).expect("the middle cut is a dyadic model");
    let mut t = Table::new(&["truth", "event", "hits", "reps", "frequency", "stderr", "mean_loss", "asserted", "pass"]);

    let flat = GridIntensity::constant(family.grid(), p.f64("level"))?;
    let r = regression_mc(&family, &flat, &opts, reps, ctx.seed(18, 0))?;
    let k = r.reps.iter().filter(|x| family.models()[x.model].pieces() <= SMALL_MODEL_PIECES).count();
    let (f_flat, se) = proportion(k, reps);
    let flat_ok = f_flat >= RECOVERY_FREQUENCY;
    t.push(row![format!("constant_{}", p.f64("level")), "at_most_2_pieces", k, reps, f_flat, se, r.mean, true, flat_ok]);

    let (low, high) = (p.f64("low"), p.f64("high"));
    let mut step_freq = 0.0;
    let mut step_ok = true;
    for (tag, hi, asserted) in [(1u64, high, true), (2, low * WEAK_CONTRAST, false)] {
        let s = two_piece(&family, low, hi)?;
        let r = regression_mc(&family, &s, &opts, reps, ctx.seed(18, tag))?;
        let k = r.reps.iter().filter(|x| family.models()[x.model].refines(&family.models()[cut_model])).count();
        let (f, se) = proportion(k, reps);
        let ok = f >= RECOVERY_FREQUENCY;
        if asserted {
            step_ok = ok;
            step_freq = f;
        }
        t.push(row![format!("step_{low}_{hi}"), "refines_middle_cut", k, reps, f, se, r.mean, asserted, ok]);
    }
    Ok(Outcome {
        pass: flat_ok && step_ok,
        measured: summary(&[("constant_small_freq", num(f_flat)), ("step_cut_freq", num(step_freq)), ("models", family.models().len().to_string()), ("reps", reps.to_string())]),
        table: t,
    })
}
