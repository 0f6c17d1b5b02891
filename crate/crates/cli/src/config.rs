//! Experiment configuration files.
//!
//! A config is a TOML document with two flat sections:
//!
//! ```toml
//! [experiment]
//! kind = "simulate"
//! seed = 7
//! reps = 1000
//! out = "out/simulate"
//!
//! [params]
//! level = 3.0
//! ```
//!
//! Every kind has a fixed parameter schema; unknown keys are errors and
//! missing keys take the schema default, so the echo written next to the
//! outputs lists every value actually used and parses back to the same
//! config.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::Value;

use crate::error::{config_err, Result};
#[cfg(test)]
use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Simulate,
    MetricChecks,
    TestBounds,
    NetInfo,
    TSelect,
    Approx,
    Aggregate,
    LowerBound,
    Regression,
}

impl Kind {
    pub const ALL: [Kind; 9] =
        [Kind::Simulate, Kind::MetricChecks, Kind::TestBounds, Kind::NetInfo, Kind::TSelect, Kind::Approx, Kind::Aggregate, Kind::LowerBound, Kind::Regression];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::MetricChecks => "metric-checks",
            Kind::TestBounds => "test-bounds",
            Kind::NetInfo => "net-info",
            Kind::TSelect => "t-select",
            Kind::Approx => "approx",
            Kind::Aggregate => "aggregate",
            Kind::LowerBound => "lower-bound",
            Kind::Regression => "regression",
        }
    }

    pub fn default_reps(self) -> usize {
        match self {
            Kind::Simulate => 1000,
            Kind::MetricChecks | Kind::NetInfo | Kind::Approx => 1,
            Kind::TestBounds => 5000,
            Kind::TSelect | Kind::Aggregate => 2000,
            Kind::LowerBound => 5000,
            Kind::Regression => 500,
        }
    }

    /// Parameter names with their defaults.
    pub fn schema(self) -> Vec<(&'static str, Value)> {
        let f = Value::Float;
        let i = Value::Integer;
        let fl = |v: &[f64]| Value::Array(v.iter().map(|x| Value::Float(*x)).collect());
        let il = |v: &[i64]| Value::Array(v.iter().map(|x| Value::Integer(*x)).collect());
        match self {
            Kind::Simulate => vec![("level", f(3.0)), ("slope", f(0.0)), ("resolution", i(6))],
            Kind::MetricChecks => vec![("triples", i(10_000)), ("resolution", i(3))],
            Kind::TestBounds => vec![("xi", f(0.25)), ("level", f(10.0)), ("h2", fl(&[0.25, 0.5, 1.0, 2.0])), ("x", fl(&[-1.0, 0.0, 1.0]))],
            Kind::NetInfo => vec![("n_observed", il(&[10, 50, 100])), ("k", il(&[1, 2, 3])), ("resolution", i(3))],
            Kind::TSelect => vec![("elements", i(50))],
            Kind::Approx => vec![("alpha", fl(&[0.5, 1.0])), ("j_max", i(6)), ("resolution", i(10)), ("truths", i(4))],
            Kind::Aggregate => vec![("mass", f(100.0)), ("resolution", i(4)), ("min_h2", f(50.0))],
            Kind::LowerBound => vec![("d", i(4)), ("l", f(6.0)), ("resolution", i(8))],
            Kind::Regression => vec![("n", i(4)), ("max_pieces", i(3)), ("level", f(150.0)), ("low", f(100.0)), ("high", f(400.0))],
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Kind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Kind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown experiment kind {s:?} (expected one of {})", names.join(", "))
        })
    }
}

/// Resolved parameters of one experiment, every schema key present.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Params(BTreeMap<String, Value>);

impl Params {
    pub fn defaults(kind: Kind) -> Self {
        Params(kind.schema().into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.0.insert(key.to_string(), value);
    }

    fn get(&self, key: &str) -> &Value {
        self.0.get(key).unwrap_or_else(|| panic!("parameter {key} is not in the schema"))
    }

    pub fn f64(&self, key: &str) -> f64 {
        as_f64(self.get(key)).expect("validated as a number")
    }

    pub fn usize(&self, key: &str) -> usize {
        self.get(key).as_integer().expect("validated as an integer") as usize
    }

    pub fn f64_list(&self, key: &str) -> Vec<f64> {
        self.get(key).as_array().expect("validated as a list").iter().map(|v| as_f64(v).expect("validated")).collect()
    }

    pub fn usize_list(&self, key: &str) -> Vec<usize> {
        self.get(key).as_array().expect("validated as a list").iter().map(|v| v.as_integer().expect("validated") as usize).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }

    /// `key=value` pairs joined by `; `.
    pub fn one_line(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join("; ")
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: Option<u64>,
    pub reps: usize,
    pub out: PathBuf,
    pub params: Params,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: RawExperiment,
    #[serde(default)]
    params: toml::Table,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    kind: String,
    seed: Option<u64>,
    reps: Option<usize>,
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct EchoConfig<'a> {
    experiment: EchoExperiment<'a>,
    params: &'a BTreeMap<String, Value>,
}

#[derive(Serialize)]
struct EchoExperiment<'a> {
    kind: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    reps: usize,
    out: &'a str,
}

impl ExperimentConfig {
    /// A config with every value at its default.
    pub fn new(kind: Kind) -> Self {
        ExperimentConfig { kind, seed: None, reps: kind.default_reps(), out: PathBuf::from("out").join(kind.name()), params: Params::defaults(kind) }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
            config_err(line, e.message().to_string())
        })?;
        let kind: Kind = raw.experiment.kind.parse().map_err(|m| config_err(key_line(text, "experiment", "kind"), m))?;
        let mut cfg = ExperimentConfig::new(kind);
        cfg.seed = raw.experiment.seed;
        if let Some(r) = raw.experiment.reps {
            if r == 0 {
                return Err(config_err(key_line(text, "experiment", "reps"), "reps must be positive"));
            }
            cfg.reps = r;
        }
        if let Some(o) = raw.experiment.out {
            cfg.out = o;
        }
        let schema = kind.schema();
        for (key, value) in raw.params {
            let line = key_line(text, "params", &key);
            let Some((_, default)) = schema.iter().find(|(k, _)| *k == key) else {
                let names: Vec<&str> = schema.iter().map(|(k, _)| *k).collect();
                return Err(config_err(line, format!("unknown parameter {key:?} for kind {kind} (expected one of {})", names.join(", "))));
            };
            let value = coerce(&value, default).ok_or_else(|| config_err(line, format!("parameter {key} expects {}, got {value}", type_name(default))))?;
            cfg.params.set(&key, value);
        }
        Ok(cfg)
    }

    /// The resolved config as text that parses back to `self`.
    pub fn echo(&self) -> String {
        let out = self.out.to_string_lossy();
        let echo = EchoConfig {
            experiment: EchoExperiment { kind: self.kind.name(), seed: self.seed, reps: self.reps, out: &out },
            params: &self.params.0,
        };
        toml::to_string(&echo).expect("config values serialize")
    }

    /// The echo folded onto one line, for CSV comment headers.
    pub fn one_line(&self, seed: u64) -> String {
        format!("kind={}; seed={seed}; reps={}; {}", self.kind, self.reps, self.params.one_line())
    }
}

fn coerce(value: &Value, default: &Value) -> Option<Value> {
    match (default, value) {
        (Value::Float(_), Value::Float(_) | Value::Integer(_)) => as_f64(value).map(Value::Float),
        (Value::Integer(_), Value::Integer(i)) if *i >= 0 => Some(value.clone()),
        (Value::Array(d), Value::Array(v)) if !v.is_empty() => {
            let elem = d.first()?;
            v.iter().map(|x| coerce(x, elem)).collect::<Option<Vec<_>>>().map(Value::Array)
        }
        _ => None,
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Float(_) => "a number",
        Value::Integer(_) => "a nonnegative integer",
        Value::Array(a) if matches!(a.first(), Some(Value::Integer(_))) => "a nonempty list of nonnegative integers",
        Value::Array(_) => "a nonempty list of numbers",
        _ => "a string",
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]`, or 0 when it cannot be located.
fn key_line(text: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim().to_string();
        } else if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim().trim_matches('"') == key {
                    return i + 1;
                }
            }
        }
    }
    0
}
