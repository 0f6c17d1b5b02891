//! The full acceptance suite and its summary table.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use crate::checks::{Criterion, Ctx, CRITERIA};
use crate::config::Params;
use crate::error::Result;
use crate::row;
use crate::table::Table;

pub const REPRODUCIBILITY_ID: u32 = 19;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub measured: String,
    /// The detail table as CSV, comment line included.
    pub csv: String,
    pub elapsed: Duration,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!("{} {:>2} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.id, self.name, self.measured)
    }
}

pub fn criterion_comment(c: &Criterion, ctx: &Ctx, params: &Params) -> String {
    let reps = ctx.reps.map_or("default".to_string(), |r| r.to_string());
    format!("criterion={}; name={}; kind={}; seed={}; reps={reps}; {}", c.id, c.name, c.kind, ctx.seed, params.one_line())
}

/// Runs one criterion; errors become failing rows.
pub fn run_criterion(c: &Criterion, ctx: &Ctx, params: &Params) -> CriterionResult {
    let start = Instant::now();
    let comment = criterion_comment(c, ctx, params);
    let (pass, measured, csv) = match (c.run)(ctx, params) {
        Ok(o) => (o.pass, o.measured, o.table.to_csv_string(&comment)),
        Err(e) => {
            let mut t = Table::new(&["error"]);
            t.push(row![e.to_string()]);
            (false, format!("error: {e}"), t.to_csv_string(&comment))
        }
    };
    let elapsed = start.elapsed();
    log::info!("criterion {} finished in {:.1?}", c.id, elapsed);
    CriterionResult { id: c.id, name: c.name.to_string(), pass, measured, csv, elapsed }
}

/// Criteria 1 to 18 with default parameters.
pub fn run_criteria(ctx: &Ctx, mut on_result: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|c| {
            let r = run_criterion(c, ctx, &Params::defaults(c.kind));
            on_result(&r);
            r
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub results: Vec<CriterionResult>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn summary_csv(&self, seed: u64) -> String {
        let mut t = Table::new(&["criterion", "name", "result", "measured"]);
        for r in &self.results {
            t.push(row![r.id, r.name.clone(), if r.pass { "PASS" } else { "FAIL" }, r.measured.clone()]);
        }
        t.to_csv_string(&format!("verify-all; seed={seed}"))
    }

    pub fn write(&self, dir: &Path, seed: u64) -> Result<()> {
        fs::create_dir_all(dir)?;
        for r in &self.results {
            if r.id != REPRODUCIBILITY_ID {
                fs::write(dir.join(format!("criterion_{:02}.csv", r.id)), &r.csv)?;
            }
        }
        fs::write(dir.join("summary.csv"), self.summary_csv(seed))?;
        Ok(())
    }
}

/// Runs criteria 1 to 18 twice and adds criterion 19, whether the two
/// passes produced byte-identical CSV.
pub fn verify_all(ctx: &Ctx, mut on_result: impl FnMut(&CriterionResult)) -> VerifyReport {
    let mut results = run_criteria(ctx, &mut on_result);
    let start = Instant::now();
    let second = run_criteria(ctx, |_| {});
    let differing: Vec<u32> = results.iter().zip(&second).filter(|(a, b)| a.csv != b.csv).map(|(a, _)| a.id).collect();
    let pass = differing.is_empty();
    let measured = if pass {
        format!("identical_files={}", results.len())
    } else {
        format!("differing={}", differing.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","))
    };
    let r = CriterionResult {
        id: REPRODUCIBILITY_ID,
        name: "reproducibility".into(),
        pass,
        measured,
        csv: String::new(),
        elapsed: start.elapsed(),
    };
    on_result(&r);
    results.push(r);
    VerifyReport { results }
}
