use hpl::measure::hellinger;
use hpl::net::{
    build_grid_net_with, default_probes, dmodel_check_model, grid_net_cardinality_bound, lattice_model, nominal_cardinality_bound, nominal_eta, weight_conditions,
    BasisSpec, GridNetOptions, ModelSpec, Net, DEFAULT_X_GRID,
};
use hpl::select::select_fast;
use hpl::sim::Sampler;
use hpl::stats::proportion;
use hpl::Grid;
use rayon::prelude::*;

use super::{summary, within, Ctx, Outcome};
use crate::config::Params;
use crate::error::Result;
use crate::row;
use crate::table::{num, Table};

pub const TAIL_REPS: usize = 2000;
pub const TAIL_SIGMAS: f64 = 3.0;
/// The truth is the net element whose mass is closest to this.
pub const TAIL_TRUTH_MASS: f64 = 1000.0;
pub const B_PRIME: f64 = 1.0;
pub const PROBES: usize = 32;
/// `K²` for `(N, k) = (100, 5)` must land in this range.
pub const K_SQUARED_RANGE: (f64, f64) = (1e9, 1e11);

fn nominal_opts() -> GridNetOptions {
    GridNetOptions { theta: None, nominal_eta: true, ..Default::default() }
}

/// Smallest `N` for which the one-dimensional lattice net with the
/// nominal radius has exactly `elements` distinct members.
pub fn tail_net(elements: usize) -> Result<(u64, Net)> {
    let basis = BasisSpec::haar(Grid::unit(0), 1)?;
    // Members are (θz)² for z ≥ 0: floor((√(2N) + η)/(2η)) + 1 of them.
    let count = |n: u64| {
        let eta = nominal_eta(n, 1);
        (((2.0 * n as f64).sqrt() + eta) / (2.0 * eta)).floor() as usize + 1
    };
    let mut n = 1u64;
    while count(n) < elements {
        n += 1;
    }
    let net = build_grid_net_with(&basis, n, &nominal_opts())?;
    if net.len() != elements {
        return Err(hpl::Error::InvalidArgument(format!("no lattice net with exactly {elements} elements (N = {n} gives {})", net.len())).into());
    }
    Ok((n, net))
}

pub fn t_tail(ctx: &Ctx, p: &Params) -> Result<Outcome> {
    let (n_obs, net) = tail_net(p.usize("elements"))?;
    let idx = (0..net.len())
        .min_by(|&a, &b| (net.element(a).mass() - TAIL_TRUTH_MASS).abs().total_cmp(&(net.element(b).mass() - TAIL_TRUTH_MASS).abs()))
        .expect("nonempty net");
    let truth = net.element(idx).clone();
    let eta = net.etas()[idx];
    let weights = weight_conditions(&net);
    let probes = default_probes(&net, PROBES, ctx.seed(7, 1));
    let dm = dmodel_check_model(&net, 0, B_PRIME, &probes, &DEFAULT_X_GRID)?;
    let reps = ctx.reps(TAIL_REPS);
    let sampler = Sampler::new(&truth);
    let seed = ctx.seed(7, 0);
    let dists: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let x = sampler.sample(&mut seed.replication(i as u64).rng());
            let k = select_fast(&net, &x)?;
            hellinger(&truth, net.element(k))
        })
        .collect::<Result<Vec<_>, hpl::Error>>()?;
    let mut t = Table::new(&["radius", "exceedances", "rate", "stderr", "bound", "pass"]);
    let mut pass = dm.holds && weights.holds();
    let mut tail_rate = 0.0;
    for mult in [1.0, 2.0, 4.0] {
        let r = mult * eta;
        let k = dists.iter().filter(|&&d| d > r).count();
        let (rate, se) = proportion(k, reps);
        if mult == 4.0 {
            let bound = B_PRIME * weights.sigma_eta / 7.0 * (-(r * r) / 6.0).exp();
            let ok = within(rate, bound, se, TAIL_SIGMAS);
            pass &= ok;
            tail_rate = rate;
            t.push(row![format!("{mult}eta"), k, rate, se, bound, ok]);
        } else {
            t.push(row![format!("{mult}eta"), k, rate, se, "", ""]);
        }
    }
    t.push(row!["dmodel_max_ratio", "", dm.max_ratio, "", B_PRIME, dm.holds]);
    t.push(row!["weight_conditions", "", weights.sigma_eta, "", "", weights.holds()]);
    Ok(Outcome {
        pass,
        measured: summary(&[
            ("elements", net.len().to_string()),
            ("n_observed", n_obs.to_string()),
            ("eta", num(eta)),
            ("tail_rate", num(tail_rate)),
            ("reps", reps.to_string()),
        ]),
        table: t,
    })
}

fn pairs(p: &Params) -> Result<Vec<(u64, usize)>> {
    let (ns, ks) = (p.usize_list("n_observed"), p.usize_list("k"));
    if ns.len() != ks.len() {
        return Err(hpl::Error::InvalidArgument(format!("n_observed has {} entries but k has {}", ns.len(), ks.len())).into());
    }
    Ok(ns.into_iter().map(|n| n as u64).zip(ks).collect())
}

pub fn cardinality(_ctx: &Ctx, p: &Params) -> Result<Outcome> {
    let grid = Grid::unit(p.usize("resolution") as u32);
    let mut t = Table::new(&["n_observed", "k", "eta", "enumerated", "distinct", "bound_k", "nominal_bound", "pass"]);
    let mut pass = true;
    for (n, k) in pairs(p)? {
        let basis = BasisSpec::haar(grid, k)?;
        let (spec, members) = lattice_model(&basis, n, &GridNetOptions::default(), "lattice")?;
        let enumerated = members.len();
        let distinct = Net::from_models(vec![(spec.clone(), members)])?.len();
        let bound = grid_net_cardinality_bound(n, k, spec.eta);
        let ok = enumerated as f64 <= bound;
        pass &= ok;
        t.push(row![n, k, spec.eta, enumerated, distinct, bound, nominal_cardinality_bound(n, k), ok]);
    }
    let k2 = nominal_cardinality_bound(100, 5).powi(2);
    let k2_ok = (K_SQUARED_RANGE.0..=K_SQUARED_RANGE.1).contains(&k2);
    t.push(row![100u64, 5usize, nominal_eta(100, 5), "", "", "", k2, k2_ok]);
    Ok(Outcome { pass: pass && k2_ok, measured: summary(&[("k_squared_100_5", num(k2))]), table: t })
}

/// The one-dimensional lattice with spacing `0.01` claimed as a model with
/// `η = 1`, `D = 1/2`: far too many points per ball.
pub fn overdense_net() -> Result<Net> {
    let basis = BasisSpec::haar(Grid::unit(0), 1)?;
    let (_, members) = lattice_model(&basis, 10, &GridNetOptions { theta: Some(0.01), ..Default::default() }, "dense")?;
    Ok(Net::from_models(vec![(ModelSpec::new("dense", 1.0, 0.5, 0.0), members)])?)
}

pub fn dmodel(ctx: &Ctx, p: &Params) -> Result<Outcome> {
    let grid = Grid::unit(p.usize("resolution") as u32);
    let mut nets: Vec<(String, Net)> = Vec::new();
    for (n, k) in pairs(p)? {
        nets.push((format!("lattice_N{n}_k{k}"), build_grid_net_with(&BasisSpec::haar(grid, k)?, n, &GridNetOptions::default())?));
    }
    nets.push(("tail_net_50".into(), tail_net(50)?.1));
    // Two lattice models of different dimensions sharing one net.
    let two = Net::from_models(vec![
        lattice_model(&BasisSpec::haar(grid, 1)?, 40, &GridNetOptions::default(), "k1")?,
        lattice_model(&BasisSpec::haar(grid, 2)?, 40, &GridNetOptions::default(), "k2")?,
    ])?;
    nets.push(("two_models_N40".into(), two));
    let mut t = Table::new(&["net", "model", "elements", "eta", "d", "max_ratio", "holds", "expected", "pass"]);
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut check = |name: &str, net: &Net, expected: bool, tag: u64, t: &mut Table| -> Result<bool> {
        let probes = default_probes(net, PROBES, ctx.seed(9, tag));
        let mut all = true;
        for (m, model) in net.models().iter().enumerate() {
            let r = dmodel_check_model(net, m, B_PRIME, &probes, &DEFAULT_X_GRID)?;
            all &= r.holds;
            if expected {
                worst = worst.max(r.max_ratio);
            }
            t.push(row![name, model.id.clone(), model.members.len(), model.eta, model.d, r.max_ratio, r.holds, expected, r.holds == expected]);
        }
        Ok(all == expected)
    };
    for (tag, (name, net)) in nets.iter().enumerate() {
        pass &= check(name, net, true, tag as u64, &mut t)?;
    }
    let control = overdense_net()?;
    let control_ok = check("overdense_control", &control, false, 99, &mut t)?;
    pass &= control_ok;
    Ok(Outcome {
        pass,
        measured: summary(&[("nets", nets.len().to_string()), ("worst_ratio", num(worst)), ("control_fails", control_ok.to_string())]),
        table: t,
    })
}

