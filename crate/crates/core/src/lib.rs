//! Estimation of Poisson process intensities under a Hellinger-type loss.
//!
//! Intensities live on regular grids over `[0, L]^k` or a finite lattice
//! `{1..N}^k`. The crate provides the metric, exact simulation, robust
//! likelihood-ratio tests, discretized models with their weights, the
//! T-estimator built from those tests, approximation families, classical
//! baselines and minimax lower bounds.

pub mod approx;
pub mod baseline;
pub mod error;
pub mod haar;
pub mod lower;
pub mod measure;
pub mod net;
pub mod regression;
pub mod robust;
pub mod select;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use measure::{Domain, Grid, GridFunction, GridIntensity};
pub use sim::{PointSample, Seed};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    pub struct Intro;
    #[doc = include_str!("../../../book/src/metric.md")]
    pub struct Metric;
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub struct Simulation;
    #[doc = include_str!("../../../book/src/tests.md")]
    pub struct Tests;
    #[doc = include_str!("../../../book/src/t-estimator.md")]
    pub struct TEstimator;
    #[doc = include_str!("../../../book/src/approximation.md")]
    pub struct Approximation;
    #[doc = include_str!("../../../book/src/baselines.md")]
    pub struct Baselines;
    #[doc = include_str!("../../../book/src/lower-bounds.md")]
    pub struct LowerBounds;
    #[doc = include_str!("../../../book/src/regression.md")]
    pub struct Regression;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
