//! Robust likelihood-ratio tests between two intensities.
//!
//! The test compares the Poisson likelihoods of two mixtures `π_m`, `ν_m`
//! built on the square-root scale from the centers `π_c`, `ν_c`, so that the
//! density ratio stays bounded by `((1−ξ)/ξ)²` and the error probabilities
//! are controlled for every mean measure near either center.

use crate::error::{invalid, Error, Result};
use crate::measure::{hellinger_sq, GridFunction, GridIntensity};
use crate::sim::{log_likelihood_ratio, PointSample};

#[derive(Debug, Clone, PartialEq)]
pub struct TestSpec {
    pi_c: GridIntensity,
    nu_c: GridIntensity,
    pi_m: GridIntensity,
    nu_m: GridIntensity,
    xi: f64,
    x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    PiC,
    NuC,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub decision: Decision,
    pub statistic: f64,
}

impl TestOutcome {
    /// `π_c` iff the statistic is positive; a zero statistic decides `ν_c`.
    pub fn from_statistic(statistic: f64) -> Self {
        let decision = if statistic > 0.0 { Decision::PiC } else { Decision::NuC };
        TestOutcome { decision, statistic }
    }
}

/// Which center the true mean measure is assumed to be close to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuCase {
    NearPiC,
    NearNuC,
}

/// Tail of the log-likelihood ratio bounded by [`llr_tail_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailSide {
    /// `P[log LR ≥ 2x]`, controlled by `H(μ, ν_c)`.
    Upper,
    /// `P[log LR ≤ 2x]`, controlled by `H(μ, π_c)`.
    Lower,
}

pub fn make_test(pi_c: &GridIntensity, nu_c: &GridIntensity, xi: f64, x: f64) -> Result<TestSpec> {
    if !(xi > 0.0 && xi < 0.5) {
        return Err(invalid(format!("ξ must lie in (0, 1/2), got {xi}")));
    }
    if !x.is_finite() {
        return Err(invalid(format!("threshold x must be finite, got {x}")));
    }
    pi_c.grid().ensure_same(nu_c.grid())?;
    let mix = |w: f64| -> Vec<f64> {
        pi_c.values()
            .iter()
            .zip(nu_c.values())
            .map(|(&p, &n)| if p == n { p } else { (w * n.sqrt() + (1.0 - w) * p.sqrt()).powi(2) })
            .collect()
    };
    let (pi_m, nu_m) = (mix(xi), mix(1.0 - xi));
    Ok(TestSpec {
        pi_c: pi_c.clone(),
        nu_c: nu_c.clone(),
        pi_m: GridIntensity::new(*pi_c.grid(), pi_m)?,
        nu_m: GridIntensity::new(*pi_c.grid(), nu_m)?,
        xi,
        x,
    })
}

impl TestSpec {
    pub fn pi_c(&self) -> &GridIntensity {
        &self.pi_c
    }
    pub fn nu_c(&self) -> &GridIntensity {
        &self.nu_c
    }
    pub fn pi_m(&self) -> &GridIntensity {
        &self.pi_m
    }
    pub fn nu_m(&self) -> &GridIntensity {
        &self.nu_m
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }
    pub fn x(&self) -> f64 {
        self.x
    }

    /// `H²(π_c, ν_c)`.
    pub fn center_distance_sq(&self) -> f64 {
        hellinger_sq(&self.pi_c, &self.nu_c).expect("centers share a grid")
    }

    /// Same test with the roles of the centers exchanged and `x` negated.
    pub fn swapped(&self) -> TestSpec {
        TestSpec {
            pi_c: self.nu_c.clone(),
            nu_c: self.pi_c.clone(),
            pi_m: self.nu_m.clone(),
            nu_m: self.pi_m.clone(),
            xi: self.xi,
            x: -self.x,
        }
    }

    /// Whether `μ` satisfies the ball condition of the error bound for
    /// `case` (closed balls).
    pub fn ball_condition(&self, mu: &GridIntensity, case: MuCase) -> Result<bool> {
        let center = match case {
            MuCase::NearPiC => &self.pi_c,
            MuCase::NearNuC => &self.nu_c,
        };
        let d2 = hellinger_sq(mu, center)?;
        Ok(d2 <= self.xi * self.xi * self.center_distance_sq())
    }
}

/// `T(X) = log(dQ_{π_m}/dQ_{ν_m})(X) − 2x`.
pub fn run_test(spec: &TestSpec, sample: &PointSample) -> Result<TestOutcome> {
    let llr = log_likelihood_ratio(sample, &spec.pi_m, &spec.nu_m)?;
    Ok(TestOutcome::from_statistic(llr - 2.0 * spec.x))
}

/// Statistic of the test with centers given on the square-root scale,
/// evaluated from the occupied cells of a sample.
///
/// Uses `π_m(X) − ν_m(X) = (1−2ξ)(π_c(X) − ν_c(X))`, so only occupied cells
/// are visited. `mass_t`, `mass_u` are the masses of the two centers.
#[allow(clippy::too_many_arguments)]
pub(crate) fn statistic_sqrt(
    t_sqrt: &[f64],
    u_sqrt: &[f64],
    mass_t: f64,
    mass_u: f64,
    occupied: &[(usize, u64)],
    xi: f64,
    x: f64,
) -> f64 {
    let mut acc = (1.0 - 2.0 * xi) * (mass_u - mass_t) - 2.0 * x;
    for &(c, n) in occupied {
        let (a, b) = (t_sqrt[c], u_sqrt[c]);
        if a == b {
            continue;
        }
        let num = xi * b + (1.0 - xi) * a;
        let den = xi * a + (1.0 - xi) * b;
        // Both vanish only when a = b = 0, handled above.
        acc += 2.0 * n as f64 * (num / den).ln();
    }
    acc
}

/// Error bound of the test: `P[ψ = π_c] ≤ exp(−x − (1−2ξ)²H²)` when
/// `μ` is near `ν_c`, and `P[ψ = ν_c] ≤ exp(x − (1−2ξ)²H²)` when near `π_c`.
pub fn error_bounds(spec: &TestSpec, case: MuCase) -> f64 {
    error_bound_raw(spec.xi, spec.x, spec.center_distance_sq(), case)
}

pub fn error_bound_raw(xi: f64, x: f64, h2: f64, case: MuCase) -> f64 {
    let shrink = (1.0 - 2.0 * xi).powi(2) * h2;
    match case {
        MuCase::NearNuC => (-x - shrink).exp(),
        MuCase::NearPiC => (x - shrink).exp(),
    }
}

/// Bound on the tail of the log-likelihood ratio valid for any `μ`.
pub fn llr_tail_bound(spec: &TestSpec, mu: &GridIntensity, side: TailSide) -> Result<f64> {
    Ok(llr_log_tail_bound(spec, mu, side)?.exp())
}

/// Natural logarithm of [`llr_tail_bound`].
pub fn llr_log_tail_bound(spec: &TestSpec, mu: &GridIntensity, side: TailSide) -> Result<f64> {
    let h2 = spec.center_distance_sq();
    let k = 1.0 - 2.0 * spec.xi;
    Ok(match side {
        TailSide::Upper => -spec.x + k * (2.0 / spec.xi * hellinger_sq(mu, &spec.nu_c)? - h2),
        TailSide::Lower => spec.x + k * (2.0 / spec.xi * hellinger_sq(mu, &spec.pi_c)? - h2),
    })
}

/// The pairwise test between `t` and `u` used by the T-estimator:
/// `π_c = t`, `ν_c = u`, `ξ = 1/4`, `x = (η²(t) − η²(u))/4`.
pub fn pair_test(t: &GridIntensity, u: &GridIntensity, eta_t: f64, eta_u: f64) -> Result<TestSpec> {
    if t == u {
        return Err(invalid("the two centers of a pairwise test must differ"));
    }
    make_test(t, u, PAIR_XI, pair_threshold(eta_t, eta_u))
}

pub const PAIR_XI: f64 = 0.25;

pub fn pair_threshold(eta_t: f64, eta_u: f64) -> f64 {
    (eta_t * eta_t - eta_u * eta_u) / 4.0
}

/// Bounds on the two error probabilities of the pairwise test, each valid
/// for `μ` within `H(t,u)/4` of the corresponding center:
/// `(P[ψ = u], P[ψ = t])`.
pub fn pair_test_bounds(h2_tu: f64, eta_t: f64, eta_u: f64) -> (f64, f64) {
    let (a, b) = (eta_t * eta_t, eta_u * eta_u);
    ((-(h2_tu - a + b) / 4.0).exp(), (-(h2_tu - b + a) / 4.0).exp())
}

/// Bound on `P_μ[ψ_{t,u} = u]` valid for every `μ`:
/// `exp((16H²(μ,t) + η²(t) − η²(u))/4)`.
pub fn robustness_bound(h2_mu_t: f64, eta_t: f64, eta_u: f64) -> f64 {
    ((16.0 * h2_mu_t + eta_t * eta_t - eta_u * eta_u) / 4.0).exp()
}

/// Both sides of `∫ g f⁻¹ f′² ≤ K‖f − f′‖² + 2⟨g, f′⟩ − ⟨g, f⟩` for
/// nonnegative grid functions with `g ≤ K f`. Returns `(lhs, rhs)`.
pub fn ratio_inequality_sides(f: &GridFunction, g: &GridFunction, f_prime: &GridFunction, k: f64) -> Result<(f64, f64)> {
    let grid = f.grid();
    grid.ensure_same(g.grid())?;
    grid.ensure_same(f_prime.grid())?;
    let cm = grid.cell_measure();
    let (fv, gv, pv) = (f.values(), g.values(), f_prime.values());
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for i in 0..fv.len() {
        let (a, b, c) = (fv[i], gv[i], pv[i]);
        if a < 0.0 || b < 0.0 || c < 0.0 {
            return Err(invalid("the ratio inequality needs nonnegative functions"));
        }
        if b > k * a * (1.0 + 1e-12) {
            return Err(invalid(format!("g/f exceeds K = {k} in cell {i}")));
        }
        if b > 0.0 {
            lhs += cm * b / a * c * c;
        }
        rhs += cm * (k * (a - c).powi(2) + 2.0 * b * c - b * a);
    }
    Ok((lhs, rhs))
}

/// Exact `E_μ[√(dQ_π/dQ_ν)(X)] = exp((ν(X) − π(X))/2 − μ(X) + ∫√(dπ/dν) dμ)`.
pub fn llr_expectation(mu: &GridIntensity, pi: &GridIntensity, nu: &GridIntensity) -> Result<f64> {
    mu.grid().ensure_same(pi.grid())?;
    mu.grid().ensure_same(nu.grid())?;
    let cm = mu.grid().cell_measure();
    let mut integral = 0.0;
    for ((m, p), n) in mu.values().iter().zip(pi.values()).zip(nu.values()) {
        if *n == 0.0 {
            if *p > 0.0 {
                return Err(Error::InvalidArgument("π must be absolutely continuous w.r.t. ν".into()));
            }
            // Points where ν vanishes contribute a zero likelihood ratio.
            continue;
        }
        integral += cm * m * (p / n).sqrt();
    }
    Ok(((nu.mass() - pi.mass()) / 2.0 - mu.mass() + integral).exp())
}

/// `exp(2K H²(μ,ν) − 2H²(π,μ) + H²(π,ν))`, valid when `dπ/dν ≤ K²`.
pub fn llr_expectation_bound(mu: &GridIntensity, pi: &GridIntensity, nu: &GridIntensity, k: f64) -> Result<f64> {
    Ok((2.0 * k * hellinger_sq(mu, nu)? - 2.0 * hellinger_sq(pi, mu)? + hellinger_sq(pi, nu)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Grid;
    use crate::sim::{sample_process, Seed};

    fn c(v: f64) -> GridIntensity {
        GridIntensity::constant(Grid::unit(0), v).unwrap()
    }

    #[test]
    fn mixtures_for_constant_centers() {
        let s = make_test(&c(1.0), &c(4.0), 0.25, 0.0).unwrap();
        assert!((s.pi_m().values()[0] - 1.5625).abs() < 1e-15);
        assert!((s.nu_m().values()[0] - 3.0625).abs() < 1e-15);
        let same = make_test(&c(2.0), &c(2.0), 0.25, 0.0).unwrap();
        assert_eq!(same.pi_m(), &c(2.0));
        assert_eq!(same.nu_m(), &c(2.0));
        assert!(make_test(&c(1.0), &c(4.0), 0.5, 0.0).is_err());
        assert!(make_test(&c(1.0), &c(4.0), 0.0, 0.0).is_err());
    }

    #[test]
    fn density_ratio_cap() {
        let g = Grid::unit(3);
        let a = GridIntensity::new(g, vec![0.0, 1.0, 5.0, 0.0, 9.0, 0.1, 2.0, 0.0]).unwrap();
        let b = GridIntensity::new(g, vec![3.0, 0.0, 1.0, 0.0, 0.2, 7.0, 2.0, 1.0]).unwrap();
        let s = make_test(&a, &b, 0.25, 0.0).unwrap();
        for (p, n) in s.pi_m().values().iter().zip(s.nu_m().values()) {
            if *n > 0.0 {
                assert!(p / n <= 9.0 + 1e-12);
            }
        }
    }

    #[test]
    fn tie_and_empty_sample() {
        let empty = PointSample::empty(crate::measure::Domain::unit_interval());
        let same = make_test(&c(2.0), &c(2.0), 0.25, 0.0).unwrap();
        let o = run_test(&same, &empty).unwrap();
        assert_eq!(o.statistic, 0.0);
        assert_eq!(o.decision, Decision::NuC);
        let s = make_test(&c(1.0), &c(4.0), 0.25, 0.0).unwrap();
        let o = run_test(&s, &empty).unwrap();
        assert!((o.statistic - (3.0625 - 1.5625)).abs() < 1e-14);
        assert_eq!(o.decision, Decision::PiC);
    }

    #[test]
    fn fast_statistic_matches_run_test() {
        let g = Grid::unit(4);
        let t = GridIntensity::from_fn(g, |x| 30.0 * x[0]).unwrap();
        let u = GridIntensity::from_fn(g, |x| if x[0] < 0.5 { 20.0 } else { 0.0 }).unwrap();
        for (i, x) in [-1.0, 0.0, 0.7].into_iter().enumerate() {
            let spec = make_test(&t, &u, 0.3, x).unwrap();
            let sample = sample_process(&t, Seed::new(i as u64));
            let occ = sample.occupied_cells(&g).unwrap();
            let fast = statistic_sqrt(t.sqrt().values(), u.sqrt().values(), t.mass(), u.mass(), &occ, 0.3, x);
            let slow = run_test(&spec, &sample).unwrap().statistic;
            assert!((fast - slow).abs() < 1e-9 * (1.0 + slow.abs()), "{fast} vs {slow}");
        }
    }

    #[test]
    fn error_bound_constants() {
        let b = error_bound_raw(0.25, 0.0, 1.0, MuCase::NearPiC);
        assert!((b - (-0.25f64).exp()).abs() < 1e-15);
        assert_eq!(error_bound_raw(0.25, 0.0, 1.0, MuCase::NearNuC), b);
        assert!((error_bound_raw(0.25, 1.5, 0.0, MuCase::NearNuC) - (-1.5f64).exp()).abs() < 1e-15);
        assert!((error_bound_raw(0.25, 1.5, 0.0, MuCase::NearPiC) - 1.5f64.exp()).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for h2 in [0.0, 0.5, 1.0, 4.0, 30.0] {
            let v = error_bound_raw(0.25, 0.3, h2, MuCase::NearNuC);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn llr_tail_special_cases() {
        let s = make_test(&c(1.0), &c(4.0), 0.25, 0.4).unwrap();
        let h2 = s.center_distance_sq();
        let up = llr_tail_bound(&s, &c(4.0), TailSide::Upper).unwrap();
        assert!((up - (-0.4 - 0.5 * h2).exp()).abs() < 1e-15);
        let lo = llr_tail_bound(&s, &c(1.0), TailSide::Lower).unwrap();
        assert!((lo - (0.4 - 0.5 * h2).exp()).abs() < 1e-15);
    }

    #[test]
    fn pair_test_parameters() {
        assert!(pair_test(&c(1.0), &c(1.0), 1.0, 1.0).is_err());
        assert_eq!(pair_test(&c(1.0), &c(4.0), 1.3, 1.3).unwrap().x(), 0.0);
        assert_eq!(pair_test(&c(1.0), &c(4.0), 2.0, 0.0).unwrap().x(), 1.0);
    }

    #[test]
    fn lr_gap_example() {
        let g = Grid::unit(2);
        let f = GridFunction::new(g, vec![1.0, 2.0, 0.5, 3.0]).unwrap();
        let gg = GridFunction::new(g, vec![2.0, 0.0, 1.0, 6.0]).unwrap();
        let fp = GridFunction::new(g, vec![0.0, 4.0, 1.0, 1.0]).unwrap();
        let (lhs, rhs) = ratio_inequality_sides(&f, &gg, &fp, 2.0).unwrap();
        assert!(lhs <= rhs + 1e-12);
        assert!(ratio_inequality_sides(&f, &gg, &fp, 1.0).is_err());
    }

    #[test]
    fn llr_mean_equal_measures() {
        // π = ν gives a ratio of 1 and the bound exp(2K H²(μ,ν) − 2H²(ν,μ)) ≥ 1 for K ≥ 1.
        let mu = c(3.0);
        let nu = c(5.0);
        assert!((llr_expectation(&mu, &nu, &nu).unwrap() - 1.0).abs() < 1e-14);
        assert!(llr_expectation_bound(&mu, &nu, &nu, 1.0).unwrap() >= 1.0);
    }
}
