//! The acceptance checks. Each check is a pure function of a [`Ctx`]
//! and its parameters and returns a verdict, a one-line summary of the
//! measured values and a table with the details.

use hpl::Seed;

use crate::config::{Kind, Params};
use crate::error::Result;
use crate::table::Table;

pub mod approx;
pub mod estimators;
pub mod lower;
pub mod metric;
pub mod nets;
pub mod process;
pub mod regression;
pub mod tests;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ctx {
    pub seed: u64,
    /// Replication override; `None` keeps each check's default.
    pub reps: Option<usize>,
}

impl Ctx {
    pub fn new(seed: u64) -> Self {
        Ctx { seed, reps: None }
    }

    /// Seed of the sub-task `tag` of check `id`.
    pub fn seed(&self, id: u32, tag: u64) -> Seed {
        Seed::new(self.seed).derive(id as u64).derive(tag)
    }

    pub fn reps(&self, default: usize) -> usize {
        self.reps.unwrap_or(default)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub measured: String,
    pub table: Table,
}

pub type CheckFn = fn(&Ctx, &Params) -> Result<Outcome>;

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    /// Experiment kind whose parameter defaults the check runs with.
    pub kind: Kind,
    pub run: CheckFn,
}

pub const CRITERIA: [Criterion; 18] = [
    Criterion { id: 1, name: "metric exactness", kind: Kind::MetricChecks, run: metric::exactness },
    Criterion { id: 2, name: "neighbor-pair constant", kind: Kind::MetricChecks, run: metric::neighbor_constant },
    Criterion { id: 3, name: "tree weight sum and counts", kind: Kind::MetricChecks, run: metric::catalan },
    Criterion { id: 4, name: "process laws", kind: Kind::Simulate, run: process::laws },
    Criterion { id: 5, name: "thinning", kind: Kind::Simulate, run: process::thinning },
    Criterion { id: 6, name: "robust test error bounds", kind: Kind::TestBounds, run: tests::error_bounds },
    Criterion { id: 7, name: "T-estimator tail", kind: Kind::TSelect, run: nets::t_tail },
    Criterion { id: 8, name: "net cardinality", kind: Kind::NetInfo, run: nets::cardinality },
    Criterion { id: 9, name: "D-model check", kind: Kind::NetInfo, run: nets::dmodel },
    Criterion { id: 10, name: "adaptive partition and p-variation", kind: Kind::Approx, run: approx::adaptive },
    Criterion { id: 11, name: "weak-lq tails", kind: Kind::Approx, run: approx::weak_lq },
    Criterion { id: 12, name: "bias-complexity balance", kind: Kind::Approx, run: approx::balance },
    Criterion { id: 13, name: "estimator risk bounds", kind: Kind::Aggregate, run: estimators::risk_bounds },
    Criterion { id: 14, name: "aggregation picks the truth", kind: Kind::Aggregate, run: estimators::selection },
    Criterion { id: 15, name: "lower bounds", kind: Kind::LowerBound, run: lower::lower_bounds },
    Criterion { id: 16, name: "likelihood-ratio inequalities", kind: Kind::LowerBound, run: lower::ratio_inequalities },
    Criterion { id: 17, name: "Haar transform and BV decay", kind: Kind::Approx, run: approx::haar },
    Criterion { id: 18, name: "Poisson regression", kind: Kind::Regression, run: regression::recovery },
];

/// Formats `key=value` pairs for the summary column.
pub(crate) fn summary(parts: &[(&str, String)]) -> String {
    parts.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

/// `estimate ≤ bound + k·stderr`.
pub(crate) fn within(estimate: f64, bound: f64, stderr: f64, k: f64) -> bool {
    estimate <= bound + k * stderr
}
