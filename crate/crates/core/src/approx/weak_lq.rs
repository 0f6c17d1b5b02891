//! Weak-ℓq weights, best 2^j-term subsets and their tail bounds, and the
//! one-dimensional minimization used to balance bias against complexity.

use statrs::function::factorial::ln_binomial;

use crate::error::{invalid, Result};

/// Absolute values sorted in nonincreasing order (`a_1 ≥ a_2 ≥ …`).
pub fn rearrangement(beta: &[f64]) -> Vec<f64> {
    let mut a: Vec<f64> = beta.iter().map(|b| b.abs()).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    a
}

/// `|β|_{q,w} = max_j a_j j^{1/q}`, the smallest `y` with `a_j ≤ y j^{−1/q}`.
pub fn weak_lq_weight(beta: &[f64], q: f64) -> f64 {
    rearrangement(beta).iter().enumerate().map(|(j, a)| a * ((j + 1) as f64).powf(1.0 / q)).fold(0.0, f64::max)
}

/// The `2^j` largest `|β_i|` among the first `2^k` (ties to the lower
/// index), as sorted 1-based indices, with weight `Δ_m = k + log C(2^k, 2^j)`.
pub fn weak_lq_subset(beta: &[f64], j: u32, k: u32) -> Result<(Vec<usize>, f64)> {
    if k < j {
        return Err(invalid(format!("need k ≥ j, got j = {j}, k = {k}")));
    }
    if k >= 63 {
        return Err(invalid(format!("k = {k} is too large")));
    }
    let n = 1usize << k;
    if beta.len() < n {
        return Err(invalid(format!("need at least 2^{k} = {n} coefficients, got {}", beta.len())));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| beta[b].abs().total_cmp(&beta[a].abs()).then(a.cmp(&b)));
    let mut m: Vec<usize> = idx[..1usize << j].iter().map(|i| i + 1).collect();
    m.sort_unstable();
    Ok((m, k as f64 + ln_binomial(n as u64, 1u64 << j)))
}

/// `Σ_{j>n} a_j^p`.
pub fn tail_sum(beta: &[f64], p: f64, n: usize) -> f64 {
    rearrangement(beta).iter().skip(n).map(|a| a.powf(p)).sum()
}

/// `(q/(p−q)) w^p (n + 1/2)^{−(p−q)/q}`.
pub fn lq_tail_bound(weight: f64, q: f64, p: f64, n: usize) -> f64 {
    q / (p - q) * weight.powf(p) * (n as f64 + 0.5).powf(-(p - q) / q)
}

/// `(2/q − 1)^{−1} w² (D + 1/2)^{1−2/q}`, the best `D`-term approximation bound.
pub fn best_terms_bound(weight: f64, q: f64, d: usize) -> f64 {
    weight * weight / (2.0 / q - 1.0) * (d as f64 + 0.5).powf(1.0 - 2.0 / q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCheck {
    pub tail: f64,
    pub bound: f64,
}

impl TailCheck {
    pub fn holds(&self) -> bool {
        self.tail <= self.bound
    }
}

/// Compares `Σ_{j>n} a_j^p` with its weak-ℓq bound (`p > q`).
pub fn tail_bounds(beta: &[f64], q: f64, p: f64, n: usize) -> Result<TailCheck> {
    if !(q > 0.0 && p > q) {
        return Err(invalid(format!("need 0 < q < p, got q = {q}, p = {p}")));
    }
    if n == 0 {
        return Err(invalid("the tail bound starts at n = 1"));
    }
    Ok(TailCheck { tail: tail_sum(beta, p, n), bound: lq_tail_bound(weak_lq_weight(beta, q), q, p, n) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BalanceRegime {
    /// `V ≤ 2`: `inf f = c₁B`.
    Small { c1: f64 },
    /// `V > 2`: `x* = B^{1/a} z log₂V / V`; `c2_log2` and `c2_ln` solve
    /// `inf f = [c₂ a δ^{−1} log V]^a` with base-2 and natural logarithms.
    Large { z: f64, c2_log2: f64, c2_ln: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceReport {
    pub x_star: f64,
    pub f_star: f64,
    /// `V = δB^{1/a}/a`.
    pub v: f64,
    /// `|B2^{−δx*} − x*^a|`.
    pub residual: f64,
    pub regime: BalanceRegime,
}

/// Minimizes `f(x) = B2^{−δx} ∨ x^a` over `x ≥ 0` by bisection on
/// `B2^{−δx} = x^a`.
pub fn balance_minimize(b: f64, delta: f64, a: f64) -> Result<BalanceReport> {
    if !(b > 0.0 && delta > 0.0 && a > 0.0) || !(b.is_finite() && delta.is_finite() && a.is_finite()) {
        return Err(invalid(format!("parameters must be positive and finite, got B = {b}, δ = {delta}, a = {a}")));
    }
    let g = |x: f64| b * (-delta * x).exp2() - x.powf(a);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    let f_star = b * (-delta * x).exp2();
    let v = delta * b.powf(1.0 / a) / a;
    let regime = if v <= 2.0 {
        BalanceRegime::Small { c1: f_star / b }
    } else {
        let y = x / b.powf(1.0 / a);
        let log2v = v.log2();
        let base = f_star.powf(1.0 / a) * delta / a;
        BalanceRegime::Large { z: y * v / log2v, c2_log2: base / log2v, c2_ln: base / v.ln() }
    };
    Ok(BalanceReport { x_star: x, f_star, v, residual: g(x).abs(), regime })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights() {
        assert_eq!(weak_lq_weight(&[2.5, 0.0, 0.0], 0.7), 2.5);
        let exact: Vec<f64> = (1..50).map(|j| (j as f64).powf(-1.0)).collect();
        assert!((weak_lq_weight(&exact, 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(weak_lq_weight(&[3.0, 1.0, 1.0, 1.0], 1.0), 4.0);
    }

    #[test]
    fn subsets() {
        let (m, d) = weak_lq_subset(&[5.0, 1.0, 3.0, 0.0], 1, 2).unwrap();
        assert_eq!(m, vec![1, 3]);
        assert!((d - (2.0 + 6f64.ln())).abs() < 1e-12);
        let (m, d) = weak_lq_subset(&[5.0, 1.0, 3.0, 0.0], 2, 2).unwrap();
        assert_eq!(m, vec![1, 2, 3, 4]);
        assert!((d - 2.0).abs() < 1e-12);
        assert!(weak_lq_subset(&[1.0; 4], 2, 1).is_err());
        // Ties go to the lower index.
        assert_eq!(weak_lq_subset(&[1.0, 1.0, 1.0, 1.0], 0, 2).unwrap().0, vec![1]);
    }

    #[test]
    fn balance_examples() {
        let r = balance_minimize(1.0, 1.0, 1.0).unwrap();
        assert!((r.x_star - 0.6412).abs() < 1e-4);
        assert!(r.residual <= 1e-12);
        assert!(matches!(r.regime, BalanceRegime::Small { c1 } if (c1 - 0.6412).abs() < 1e-4));
        let r = balance_minimize(16.0, 1.0, 1.0).unwrap();
        assert!((r.x_star - 2.615).abs() < 2e-3);
        match r.regime {
            BalanceRegime::Large { z, .. } => assert!((z - 0.654).abs() < 1e-3),
            other => panic!("unexpected regime {other:?}"),
        }
    }

    #[test]
    fn balance_rescaling() {
        for (b, d, a) in [(3.0, 0.7, 0.5), (40.0, 1.3, 1.0), (0.2, 2.0, 2.0)] {
            let lhs = balance_minimize(b, 2.0 * d, a).unwrap().x_star;
            let rhs = balance_minimize(2f64.powf(a) * b, d, a).unwrap().x_star / 2.0;
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs));
        }
    }
}
