//! Dyadic partitions of an interval, the adaptive splitting rule for
//! functions of bounded α-variation, and the Catalan family of trees.

use std::ops::Range;

use crate::approx::pvar::p_variation;
use crate::error::{invalid, Error, Result};

/// A partition of `[a, a+L)` into dyadic cells, stored as the leaves of a
/// complete binary tree in left-to-right order. A leaf `(d, i)` is the cell
/// `[a + iL2^{−d}, a + (i+1)L2^{−d})`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPartition {
    start: f64,
    length: f64,
    leaves: Vec<(u32, u64)>,
}

impl DyadicPartition {
    /// The one-cell partition `{J}`.
    pub fn trivial(start: f64, length: f64) -> Self {
        DyadicPartition { start, length, leaves: vec![(0, 0)] }
    }

    /// All `2^depth` cells of equal length.
    pub fn regular(start: f64, length: f64, depth: u32) -> Self {
        DyadicPartition { start, length, leaves: (0..1u64 << depth).map(|i| (depth, i)).collect() }
    }

    /// Builds a partition from leaves, checking that they tile the interval
    /// in order.
    pub fn from_leaves(start: f64, length: f64, leaves: Vec<(u32, u64)>) -> Result<Self> {
        if !(length > 0.0) {
            return Err(invalid(format!("interval length must be positive, got {length}")));
        }
        // Position measured in units of 2^{-64} would overflow; use exact
        // rationals with the deepest level as denominator instead.
        let max_depth = leaves.iter().map(|l| l.0).max().unwrap_or(0);
        if max_depth > 62 {
            return Err(invalid("partition deeper than 62 levels"));
        }
        let mut pos: u64 = 0;
        for &(d, i) in &leaves {
            if i >= 1u64 << d {
                return Err(invalid(format!("leaf index {i} out of range at depth {d}")));
            }
            let scale = 1u64 << (max_depth - d);
            if i * scale != pos {
                return Err(invalid("leaves do not tile the interval in order"));
            }
            pos += scale;
        }
        if pos != 1u64 << max_depth {
            return Err(invalid("leaves do not cover the interval"));
        }
        Ok(DyadicPartition { start, length, leaves })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn leaves(&self) -> &[(u32, u64)] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn max_depth(&self) -> u32 {
        self.leaves.iter().map(|l| l.0).max().unwrap_or(0)
    }

    /// Cell endpoints `(left, right)`.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.leaves
            .iter()
            .map(|&(d, i)| {
                let w = self.length / (1u64 << d) as f64;
                (self.start + i as f64 * w, self.start + (i + 1) as f64 * w)
            })
            .collect()
    }

    /// Number of leaves at each depth (`D_k`).
    pub fn depth_counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.max_depth() as usize + 1];
        for &(d, _) in &self.leaves {
            out[d as usize] += 1;
        }
        out
    }

    /// Grid-cell ranges of the leaves on a grid of `2^resolution` cells.
    pub fn cell_ranges(&self, resolution: u32) -> Result<Vec<Range<usize>>> {
        if self.max_depth() > resolution {
            return Err(invalid(format!("partition depth {} exceeds grid resolution {resolution}", self.max_depth())));
        }
        Ok(self
            .leaves
            .iter()
            .map(|&(d, i)| {
                let w = 1usize << (resolution - d);
                i as usize * w..(i as usize + 1) * w
            })
            .collect())
    }

    /// Preorder bitstring of the tree: `1` for an internal node, `0` for a leaf.
    pub fn to_bits(&self) -> String {
        let mut out = String::with_capacity(2 * self.leaves.len());
        let mut next = 0usize;
        self.write_bits(0, 0, &mut next, &mut out);
        out
    }

    fn write_bits(&self, d: u32, i: u64, next: &mut usize, out: &mut String) {
        if self.leaves[*next] == (d, i) {
            out.push('0');
            *next += 1;
        } else {
            out.push('1');
            self.write_bits(d + 1, 2 * i, next, out);
            self.write_bits(d + 1, 2 * i + 1, next, out);
        }
    }

    pub fn from_bits(start: f64, length: f64, bits: &str) -> Result<Self> {
        let b: Vec<u8> = bits.bytes().collect();
        let mut at = 0usize;
        let mut leaves = Vec::new();
        fn walk(b: &[u8], at: &mut usize, d: u32, i: u64, leaves: &mut Vec<(u32, u64)>) -> Result<()> {
            match b.get(*at) {
                Some(b'0') => {
                    *at += 1;
                    leaves.push((d, i));
                    Ok(())
                }
                Some(b'1') if d < 62 => {
                    *at += 1;
                    walk(b, at, d + 1, 2 * i, leaves)?;
                    walk(b, at, d + 1, 2 * i + 1, leaves)
                }
                Some(c) if *c != b'1' => Err(invalid(format!("unexpected character {:?} in tree bitstring", *c as char))),
                _ => Err(invalid("truncated or too deep tree bitstring")),
            }
        }
        walk(&b, &mut at, 0, 0, &mut leaves)?;
        if at != b.len() {
            return Err(invalid("trailing characters after a complete tree"));
        }
        DyadicPartition::from_leaves(start, length, leaves)
    }
}

/// Splits every cell with `E(I) = |I|·V_α(f; I)² > ε` into two halves until
/// no such cell remains.
///
/// `f` holds the values of a step function on `2^r` equal cells of
/// `[start, start+length)`. Cells may not be split beyond `max_depth`
/// (at most `r`); a cell at that depth with `E > ε` is an error.
pub fn adaptive_alpha_partition(f: &[f64], start: f64, length: f64, alpha: f64, epsilon: f64, max_depth: Option<u32>) -> Result<DyadicPartition> {
    let n = f.len();
    if !n.is_power_of_two() {
        return Err(invalid(format!("grid size {n} is not a power of 2")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("α must lie in (0, 1], got {alpha}")));
    }
    if !(epsilon > 0.0) {
        return Err(invalid(format!("ε must be positive, got {epsilon}")));
    }
    let r = n.trailing_zeros();
    let max_depth = max_depth.unwrap_or(r).min(r);
    let p = 1.0 / alpha;
    let mut leaves = Vec::new();
    let mut stack = vec![(0u32, 0u64)];
    // Depth-first, right child pushed first so leaves come out in order.
    while let Some((d, i)) = stack.pop() {
        let w = n >> d;
        let cell = &f[i as usize * w..(i as usize + 1) * w];
        let energy = length / (1u64 << d) as f64 * p_variation(cell, p)?.powi(2);
        if energy <= epsilon {
            leaves.push((d, i));
        } else if d >= max_depth {
            return Err(Error::ResolutionExhausted { depth: d, index: i, energy, epsilon });
        } else {
            stack.push((d + 1, 2 * i + 1));
            stack.push((d + 1, 2 * i));
        }
    }
    DyadicPartition::from_leaves(start, length, leaves)
}

/// Cell means of `f` on the partition and the squared `L2` error
/// `‖f − f̄‖₂²` (cell measure `length / f.len()`).
pub fn piecewise_mean(f: &[f64], partition: &DyadicPartition) -> Result<(Vec<f64>, f64)> {
    let n = f.len();
    if !n.is_power_of_two() {
        return Err(invalid(format!("grid size {n} is not a power of 2")));
    }
    let cm = partition.length / n as f64;
    let mut approx = vec![0.0; n];
    let mut err = 0.0;
    for range in partition.cell_ranges(n.trailing_zeros())? {
        let cell = &f[range.clone()];
        let mean = cell.iter().sum::<f64>() / cell.len() as f64;
        for (k, v) in range.zip(cell) {
            approx[k] = mean;
            err += cm * (v - mean).powi(2);
        }
    }
    Ok((approx, err))
}

/// `(c₁(α), c₂(α))` of the cardinality and approximation bounds for the
/// adaptive partition.
pub fn partition_constants(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("α must lie in (0, 1], got {alpha}")));
    }
    let s = 1.0 / (2.0 * alpha);
    let num = 1.0 - 2f64.powf(-(s + 1.0));
    let den = 1.0 - 2f64.powf(-s);
    let c1 = num / den;
    let c2 = (2f64.powf(1.0 + 2.0 * alpha) * num.powf(1.0 - 2.0 * alpha) / den).sqrt();
    Ok((c1, c2))
}

/// The threshold `ε = 2L(γ/2)^{−2α}V²` with `γ = (1 − 2^{−[1/(2α)+1]})2^{j[1/(2α)+1]}`
/// that yields at most `c₁(α)2^j` cells.
pub fn partition_epsilon(alpha: f64, j: u32, length: f64, variation: f64) -> f64 {
    let s = 1.0 / (2.0 * alpha) + 1.0;
    let gamma = (1.0 - 2f64.powf(-s)) * 2f64.powf(j as f64 * s);
    2.0 * length * (gamma / 2.0).powf(-2.0 * alpha) * variation * variation
}

/// Catalan number `C_j = (2j choose j)/(j+1)`, the number of complete
/// binary trees with `j+1` leaves.
pub fn catalan_number(j: u32) -> u64 {
    let mut c: u64 = 1;
    for i in 0..j as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

/// Default largest leaf count for [`catalan_tree_family`].
pub const DEFAULT_MAX_LEAVES: usize = 12;

/// Every complete binary tree with at most `max_leaves` leaves as a
/// partition of `[0, 1)`, paired with its weight `Δ_m = 2|m|`.
pub fn catalan_tree_family(max_leaves: usize) -> Result<Vec<(DyadicPartition, f64)>> {
    catalan_tree_family_capped(max_leaves, DEFAULT_MAX_LEAVES)
}

pub fn catalan_tree_family_capped(max_leaves: usize, cap: usize) -> Result<Vec<(DyadicPartition, f64)>> {
    if max_leaves > cap {
        return Err(Error::Capacity { what: "enumerating binary trees".into(), count: max_leaves as u64, cap: cap as u64 });
    }
    let mut out = Vec::new();
    for leaves in 1..=max_leaves {
        let mut acc = Vec::new();
        trees_with_leaves(0, 0, leaves, &mut Vec::new(), &mut acc);
        for t in acc {
            let p = DyadicPartition::from_leaves(0.0, 1.0, t)?;
            out.push((p, 2.0 * leaves as f64));
        }
    }
    Ok(out)
}

fn trees_with_leaves(d: u32, i: u64, leaves: usize, prefix: &mut Vec<(u32, u64)>, out: &mut Vec<Vec<(u32, u64)>>) {
    // Emits all subtrees rooted at (d, i) with exactly `leaves` leaves,
    // each appended to the current prefix.
    if leaves == 1 {
        let mut v = prefix.clone();
        v.push((d, i));
        out.push(v);
        return;
    }
    for left in 1..leaves {
        let mut lefts = Vec::new();
        trees_with_leaves(d + 1, 2 * i, left, prefix, &mut lefts);
        for mut l in lefts {
            trees_with_leaves(d + 1, 2 * i + 1, leaves - left, &mut l, out);
        }
    }
}

/// `Σ_m exp(−2|m|)` over the family truncated at `max_leaves` leaves.
pub fn catalan_weight_sum(max_leaves: u32) -> f64 {
    (0..max_leaves).map(|j| catalan_number(j) as f64 * (-2.0 * (j + 1) as f64).exp()).sum()
}

/// `e^{−2} Σ_{j≥0} (4/e²)^j/(j+1)`, the bound on the Catalan weight sum,
/// summed until the terms drop below `1e−17`.
pub fn catalan_bound_series() -> (f64, usize) {
    let r = 4.0 * (-2f64).exp();
    let mut sum = 0.0;
    let mut term = 1.0;
    let mut j = 0usize;
    while term / (j + 1) as f64 > 1e-17 {
        sum += term / (j + 1) as f64;
        term *= r;
        j += 1;
    }
    ((-2f64).exp() * sum, j)
}

/// Closed form of [`catalan_bound_series`]: `e^{−2}·(−ln(1−r)/r)`, `r = 4/e²`.
pub fn catalan_bound_closed_form() -> f64 {
    let r = 4.0 * (-2f64).exp();
    (-2f64).exp() * (-(1.0 - r).ln() / r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitstring_round_trip() {
        let p = DyadicPartition::from_leaves(0.0, 1.0, vec![(1, 0), (2, 2), (3, 6), (3, 7)]).unwrap();
        assert_eq!(p.to_bits(), "1010100");
        assert_eq!(DyadicPartition::from_bits(0.0, 1.0, "1010100").unwrap(), p);
        assert_eq!(DyadicPartition::trivial(0.0, 2.0).to_bits(), "0");
        assert!(DyadicPartition::from_bits(0.0, 1.0, "10").is_err());
        assert!(DyadicPartition::from_bits(0.0, 1.0, "1000").is_err());
        assert!(DyadicPartition::from_leaves(0.0, 1.0, vec![(1, 1), (1, 0)]).is_err());
    }

    #[test]
    fn intervals_and_counts() {
        let p = DyadicPartition::from_bits(2.0, 4.0, "10100").unwrap();
        assert_eq!(p.intervals(), vec![(2.0, 4.0), (4.0, 5.0), (5.0, 6.0)]);
        assert_eq!(p.depth_counts(), vec![0, 1, 2]);
        assert_eq!(p.cell_ranges(3).unwrap(), vec![0..4, 4..6, 6..8]);
    }

    #[test]
    fn constant_function_is_not_split() {
        let p = adaptive_alpha_partition(&[2.0; 64], 0.0, 1.0, 1.0, 1e-6, None).unwrap();
        assert_eq!(p.leaf_count(), 1);
        assert_eq!(piecewise_mean(&[2.0; 64], &p).unwrap().1, 0.0);
    }

    #[test]
    fn jump_at_three_eighths() {
        // E(I) = |I| on cells containing the jump and 0 elsewhere; ε = 0.2
        // stops once the jump cell has length 1/8, so the leaves are
        // [0,1/4) [1/4,3/8) [3/8,1/2) [1/2,1): 4 cells.
        let f: Vec<f64> = (0..64).map(|i| if i < 24 { 0.0 } else { 1.0 }).collect();
        let p = adaptive_alpha_partition(&f, 0.0, 1.0, 1.0, 0.2, None).unwrap();
        assert_eq!(p.leaves(), &[(2, 0), (3, 2), (3, 3), (1, 1)]);
        let g: Vec<f64> = (0..64).map(|i| if i < 25 { 0.0 } else { 1.0 }).collect();
        let err = adaptive_alpha_partition(&g, 0.0, 1.0, 1.0, 0.01, Some(3)).unwrap_err();
        assert!(matches!(err, Error::ResolutionExhausted { depth: 3, .. }));
    }

    #[test]
    fn constants_at_alpha_one() {
        let (c1, c2) = partition_constants(1.0).unwrap();
        assert!((c1 - 2.2071).abs() < 1e-4);
        assert!((c2 - 6.5002).abs() < 1e-4);
        assert!(partition_constants(0.0).is_err());
    }

    #[test]
    fn catalan_counts() {
        let family = catalan_tree_family(5).unwrap();
        let count = |l: usize| family.iter().filter(|(p, _)| p.leaf_count() == l).count();
        assert_eq!(count(1), 1);
        assert_eq!(count(4), 5);
        assert_eq!(count(5), 14);
        assert!(family.iter().all(|(p, d)| *d == 2.0 * p.leaf_count() as f64));
        assert_eq!(catalan_number(10), 16796);
        assert!(catalan_tree_family(13).is_err());
    }

    #[test]
    fn weight_series() {
        let (s, _) = catalan_bound_series();
        assert!((s - catalan_bound_closed_form()).abs() < 1e-12);
        assert!((s - 0.1949).abs() < 1e-4);
        assert!(catalan_weight_sum(30) < s);
    }
}
