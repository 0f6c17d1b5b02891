//! p-variation of a step function on grid breakpoints.

use crate::error::{invalid, Result};

/// `V_α(f) = (sup Σ |f(x_j) − f(x_{j−1})|^p)^{1/p}` with `p = 1/α`, the
/// supremum taken over increasing subsequences of the grid values.
pub fn p_variation(f: &[f64], p: f64) -> Result<f64> {
    Ok(p_variation_sum(f, p)?.powf(1.0 / p))
}

/// `sup Σ |f(x_j) − f(x_{j−1})|^p`.
///
/// For `p ≥ 1` an optimal chain can be taken through the turning points of
/// `f`, so runs of equal values and interior points of monotone stretches
/// are dropped before the quadratic dynamic program.
pub fn p_variation_sum(f: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid(format!("p-variation needs p ≥ 1, got {p}")));
    }
    let ext = turning_points(f);
    if p == 1.0 {
        return Ok(ext.windows(2).map(|w| (w[1] - w[0]).abs()).sum());
    }
    let mut best = vec![0.0f64; ext.len()];
    let mut overall = 0.0f64;
    for i in 1..ext.len() {
        let mut b = 0.0f64;
        for j in 0..i {
            b = b.max(best[j] + (ext[i] - ext[j]).abs().powf(p));
        }
        best[i] = b;
        overall = overall.max(b);
    }
    Ok(overall)
}

fn turning_points(f: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = Vec::with_capacity(f.len());
    for &x in f {
        if v.last() != Some(&x) {
            v.push(x);
        }
    }
    if v.len() <= 2 {
        return v;
    }
    let mut out = vec![v[0]];
    for i in 1..v.len() - 1 {
        if (v[i] - v[i - 1]) * (v[i + 1] - v[i]) < 0.0 {
            out.push(v[i]);
        }
    }
    out.push(v[v.len() - 1]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_cases() {
        assert_eq!(p_variation(&[3.0; 7], 2.0).unwrap(), 0.0);
        assert!((p_variation(&[0.0, 1.0, 1.5, 4.0], 1.0).unwrap() - 4.0).abs() < 1e-12);
        assert!((p_variation(&[4.0, 1.0, 1.0, 0.0], 3.0).unwrap() - 4.0).abs() < 1e-12);
        assert!((p_variation(&[0.0, 1.0, 0.0], 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(p_variation(&[0.0, 1.0], 0.5).is_err());
        assert_eq!(p_variation(&[], 2.0).unwrap(), 0.0);
    }
}
