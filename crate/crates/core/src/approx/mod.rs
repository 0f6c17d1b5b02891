//! Approximation-theoretic model families: adaptive dyadic partitions,
//! `p`-variation, weak-ℓq coefficient sequences, piecewise polynomials,
//! interval partitions and Haar decay for BV functions.

pub mod families;
pub mod haar_bv;
pub mod partition;
pub mod poly;
pub mod pvar;
pub mod weak_lq;

pub use families::{interval_partition_count, interval_partition_family, interval_partition_weight, mix_families, weight_sum, IntervalPartition};
pub use haar_bv::{haar_bv_tail_check, ls_slope, HaarBvReport};
pub use partition::{adaptive_alpha_partition, catalan_number, catalan_tree_family, piecewise_mean, DyadicPartition};
pub use poly::{piecewise_poly_approx, PolyApprox};
pub use pvar::{p_variation, p_variation_sum};
pub use weak_lq::{balance_minimize, tail_bounds, weak_lq_subset, weak_lq_weight, BalanceRegime, BalanceReport};
