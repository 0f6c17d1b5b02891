//! Running one experiment from a config.

use std::fs;

use hpl::sim::Sampler;
use rayon::prelude::*;

use crate::checks::process::linear_intensity;
use crate::checks::{Ctx, CRITERIA};
use crate::config::{ExperimentConfig, Kind};
use crate::error::Result;
use crate::row;
use crate::table::Table;
use crate::verify::{criterion_comment, CriterionResult};

/// Counts of `reps` draws from the configured linear intensity.
pub fn simulate_counts(cfg: &ExperimentConfig, seed: u64) -> Result<Table> {
    let s = linear_intensity(&cfg.params)?;
    let sampler = Sampler::new(&s);
    let base = Ctx::new(seed).seed(0, 0);
    let counts: Vec<usize> = (0..cfg.reps).into_par_iter().map(|i| sampler.sample(&mut base.replication(i as u64).rng()).len()).collect();
    let mut t = Table::new(&["rep", "n"]);
    for (i, n) in counts.into_iter().enumerate() {
        t.push(row![i, n]);
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub results: Vec<CriterionResult>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }
}

/// Runs the checks attached to the config's kind (plus the count table for
/// `simulate`) and writes their CSV files and the config echo to `cfg.out`.
pub fn run(cfg: &ExperimentConfig, seed: u64) -> Result<RunReport> {
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("config.toml"), cfg.echo())?;
    let ctx = Ctx { seed, reps: Some(cfg.reps) };
    if cfg.kind == Kind::Simulate {
        let t = simulate_counts(cfg, seed)?;
        fs::write(cfg.out.join("counts.csv"), t.to_csv_string(&cfg.one_line(seed)))?;
    }
    let mut results = Vec::new();
    for c in CRITERIA.iter().filter(|c| c.kind == cfg.kind) {
        // Capacity errors abort the run instead of becoming rows.
        let out = (c.run)(&ctx, &cfg.params)?;
        let comment = criterion_comment(c, &ctx, &cfg.params);
        fs::write(cfg.out.join(format!("criterion_{:02}.csv", c.id)), out.table.to_csv_string(&comment))?;
        results.push(CriterionResult {
            id: c.id,
            name: c.name.to_string(),
            pass: out.pass,
            measured: out.measured,
            csv: String::new(),
            elapsed: Default::default(),
        });
    }
    Ok(RunReport { results })
}
