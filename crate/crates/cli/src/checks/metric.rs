use hpl::approx::partition::{catalan_bound_closed_form, catalan_bound_series};
use hpl::approx::{catalan_number, catalan_tree_family};
use hpl::lower::{build_bounded_hypercube_family, build_hypercube_family, build_sqrt_lipschitz_family, AssouadFamily};
use hpl::measure::{hellinger, hellinger_sq, l2_dist_sqrt};
use hpl::{Grid, GridIntensity};
use rand::Rng;

use super::{summary, Ctx, Outcome};
use crate::config::Params;
use crate::error::Result;
use crate::row;
use crate::table::{num, Table};

pub const EXACT_TOL: f64 = 1e-12;
pub const HYPERCUBE_SLACK: f64 = 1e-9;
pub const HYPERCUBE_RESOLUTION: u32 = 12;
pub const CATALAN_TRUNCATION_TOL: f64 = 1e-12;
pub const CATALAN_MAX_LEAVES: usize = 9;
/// The weight sum quoted to four digits.
pub const CATALAN_SUM_QUOTED: f64 = 0.1949;

fn random_intensity<R: Rng>(grid: Grid, rng: &mut R) -> Result<GridIntensity> {
    let v = (0..grid.cell_count()).map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { 5.0 * rng.random::<f64>() }).collect();
    Ok(GridIntensity::new(grid, v)?)
}

pub fn exactness(ctx: &Ctx, p: &Params) -> Result<Outcome> {
    let g0 = Grid::unit(0);
    let h = hellinger_sq(&GridIntensity::constant(g0, 1.0)?, &GridIntensity::constant(g0, 4.0)?)?;
    let grid = Grid::unit(p.usize("resolution") as u32);
    let mut rng = ctx.seed(1, 0).rng();
    let mut worst_slack = f64::NEG_INFINITY;
    let mut worst_identity = 0.0f64;
    let triples = p.usize("triples");
    for _ in 0..triples {
        let a = random_intensity(grid, &mut rng)?;
        let b = random_intensity(grid, &mut rng)?;
        let c = random_intensity(grid, &mut rng)?;
        worst_slack = worst_slack.max(hellinger(&a, &c)? - hellinger(&a, &b)? - hellinger(&b, &c)?);
        let d = l2_dist_sqrt(&a, &b)?;
        worst_identity = worst_identity.max((hellinger_sq(&a, &b)? - 0.5 * d * d).abs());
    }
    let checks = [
        ("h2_const_1_vs_4", h, 0.5, (h - 0.5).abs() <= EXACT_TOL),
        ("triangle_worst_excess", worst_slack, 0.0, worst_slack <= EXACT_TOL),
        ("sqrt_identity_max_error", worst_identity, 0.0, worst_identity <= EXACT_TOL),
    ];
    let mut t = Table::new(&["check", "value", "target", "tolerance", "pass"]);
    for (name, v, target, ok) in checks {
        t.push(row![name, v, target, EXACT_TOL, ok]);
    }
    Ok(Outcome {
        pass: checks.iter().all(|c| c.3),
        measured: summary(&[("h2", num(h)), ("triangle_excess", num(worst_slack)), ("identity_err", num(worst_identity)), ("triples", triples.to_string())]),
        table: t,
    })
}

/// The families the neighbor-pair and average checks run on.
pub(crate) fn hypercube_families() -> Result<Vec<(String, AssouadFamily)>> {
    let grid = Grid::unit(HYPERCUBE_RESOLUTION);
    let block = |d: usize| grid.cell_count() / d;
    let mut out = vec![
        ("flat_g1_D4".to_string(), build_hypercube_family(grid, 4, &vec![1.0; block(4)])?),
        ("flat_g0.5_D8".to_string(), build_hypercube_family(grid, 8, &vec![0.5; block(8)])?),
        ("bounded_cube_D4_L6".to_string(), build_bounded_hypercube_family(grid, 4, 6.0)?),
        ("bounded_cube_D8_L20".to_string(), build_bounded_hypercube_family(grid, 8, 20.0)?),
    ];
    for d in [1, 2, 4] {
        out.push((format!("triangular_D{d}"), build_sqrt_lipschitz_family(grid, d)?));
    }
    Ok(out)
}

pub fn neighbor_constant(_ctx: &Ctx, _p: &Params) -> Result<Outcome> {
    let (lo, hi) = (1.0 / 8.0 - HYPERCUBE_SLACK, 1.0 / 7.0 + HYPERCUBE_SLACK);
    let mut t = Table::new(&["family", "D", "pairs", "min_ratio", "max_ratio", "pass"]);
    let mut pass = true;
    let (mut gmin, mut gmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (name, fam) in hypercube_families()? {
        let members = fam.members()?;
        let pairs = fam.neighbor_pairs()?;
        let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(a, b, _) in &pairs {
            // Hamming distance 1, so the ratio is H² itself.
            let r = hellinger_sq(&members[a as usize], &members[b as usize])?;
            mn = mn.min(r);
            mx = mx.max(r);
        }
        let ok = mn >= lo && mx <= hi;
        pass &= ok;
        gmin = gmin.min(mn);
        gmax = gmax.max(mx);
        t.push(row![name, fam.dim(), pairs.len(), mn, mx, ok]);
    }
    Ok(Outcome { pass, measured: summary(&[("min_ratio", num(gmin)), ("max_ratio", num(gmax))]), table: t })
}

pub fn catalan(_ctx: &Ctx, _p: &Params) -> Result<Outcome> {
    let (series, terms) = catalan_bound_series();
    let closed = catalan_bound_closed_form();
    let trunc = (series - closed).abs();
    let sum_ok = trunc < CATALAN_TRUNCATION_TOL && closed < 1.0 && (closed - CATALAN_SUM_QUOTED).abs() < 5e-5;
    let family = catalan_tree_family(CATALAN_MAX_LEAVES)?;
    let mut t = Table::new(&["item", "value", "expected", "pass"]);
    t.push(row!["weight_sum_series", series, closed, sum_ok]);
    t.push(row!["series_terms", terms, "", true]);
    t.push(row!["truncation_error", trunc, CATALAN_TRUNCATION_TOL, trunc < CATALAN_TRUNCATION_TOL]);
    let mut counts_ok = true;
    for leaves in 1..=CATALAN_MAX_LEAVES {
        let n = family.iter().filter(|(p, _)| p.leaf_count() == leaves).count();
        let c = catalan_number(leaves as u32 - 1);
        counts_ok &= n as u64 == c;
        t.push(row![format!("trees_with_{leaves}_leaves"), n, c, n as u64 == c]);
    }
    Ok(Outcome {
        pass: sum_ok && counts_ok,
        measured: summary(&[("weight_sum", num(closed)), ("truncation_error", num(trunc)), ("counts_match", counts_ok.to_string())]),
        table: t,
    })
}
