use std::io::Cursor;

use hpl::approx::{catalan_number, p_variation, p_variation_sum};
use hpl::haar::{haar_analyze, haar_synthesize};
use hpl::measure::{hellinger, hellinger_sq};
use hpl::net::lattice_ball;
use hpl::sim::{sample_process, thin_counts};
use hpl::{Grid, GridFunction, GridIntensity, Seed};
use proptest::prelude::*;

fn intensity(values: Vec<f64>) -> GridIntensity {
    GridIntensity::new(Grid::unit(3), values).unwrap()
}

fn values8() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..50.0f64, 8)
}

// Exhaustive supremum over increasing subsequences.
fn brute_pvar_sum(f: &[f64], p: f64) -> f64 {
    let n = f.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let s: f64 = idx.windows(2).map(|w| (f[w[1]] - f[w[0]]).abs().powf(p)).sum();
        best = best.max(s);
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hellinger_is_a_metric(a in values8(), b in values8(), c in values8()) {
        let (a, b, c) = (intensity(a), intensity(b), intensity(c));
        prop_assert_eq!(hellinger_sq(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(hellinger_sq(&a, &b).unwrap(), hellinger_sq(&b, &a).unwrap());
        let (ab, bc, ac) = (hellinger(&a, &b).unwrap(), hellinger(&b, &c).unwrap(), hellinger(&a, &c).unwrap());
        prop_assert!(ac <= ab + bc + 1e-12);
        // ½∫(√a − √b)² ≤ ½(∫a + ∫b)
        prop_assert!(ab * ab <= 0.5 * (a.mass() + b.mass()) + 1e-12);
    }

    #[test]
    fn squared_distance_scales_linearly(a in values8(), b in values8(), c in 0.01..100.0f64) {
        let (a, b) = (intensity(a), intensity(b));
        let scaled = hellinger_sq(&a.scaled(c).unwrap(), &b.scaled(c).unwrap()).unwrap();
        let h = hellinger_sq(&a, &b).unwrap();
        prop_assert!((scaled - c * h).abs() <= 1e-10 * (1.0 + c * h));
    }

    #[test]
    fn samples_lie_in_the_domain_and_repeat(v in values8(), seed in any::<u64>()) {
        let s = intensity(v);
        let x = sample_process(&s, Seed::new(seed));
        let counts = x.cell_counts(s.grid()).unwrap();
        prop_assert_eq!(counts.iter().sum::<u64>() as usize, x.len());
        for (n, m) in counts.iter().zip(s.cell_masses()) {
            if m == 0.0 {
                prop_assert_eq!(*n, 0);
            }
        }
        prop_assert_eq!(x, sample_process(&s, Seed::new(seed)));
    }

    #[test]
    fn thinning_conserves_points(counts in prop::collection::vec(0u64..40, 1..20), p in 0.01..1.0f64, seed in any::<u64>()) {
        let (a, b) = thin_counts(&counts, p, &mut Seed::new(seed).rng()).unwrap();
        for ((n, x), y) in counts.iter().zip(&a).zip(&b) {
            prop_assert_eq!(n, &(x + y));
        }
    }

    #[test]
    fn haar_round_trip(values in prop::collection::vec(-10.0..10.0f64, 32)) {
        let f = GridFunction::new(Grid::unit(5), values).unwrap();
        let c = haar_analyze(&f).unwrap();
        let g = haar_synthesize(&c);
        for (x, y) in f.values().iter().zip(g.values()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        prop_assert!((c.energy() - f.norm_sq()).abs() <= 1e-10 * (1.0 + f.norm_sq()));
    }

    #[test]
    fn p_variation_matches_exhaustive_search(f in prop::collection::vec(-5.0..5.0f64, 1..11), p in 1.0..4.0f64) {
        let fast = p_variation_sum(&f, p).unwrap();
        let slow = brute_pvar_sum(&f, p);
        prop_assert!((fast - slow).abs() <= 1e-12 * (1.0 + slow));
    }

    #[test]
    fn p_variation_decreases_in_p(f in prop::collection::vec(-5.0..5.0f64, 2..30), p in 1.0..3.0f64, dp in 0.0..3.0f64) {
        prop_assert!(p_variation(&f, p + dp).unwrap() <= p_variation(&f, p).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn lattice_ball_is_exact(k in 1usize..4, theta in 0.2..2.0f64, radius in 0.0..3.0f64) {
        let pts = lattice_ball(k, theta, radius, 1_000_000).unwrap();
        let b = (radius / theta).floor() as i64 + 1;
        let mut expected = 0usize;
        let mut idx = vec![-b; k];
        loop {
            let r = theta * (idx.iter().map(|z| (z * z) as f64).sum::<f64>()).sqrt();
            if r <= radius * (1.0 + 1e-12) {
                expected += 1;
            }
            let mut i = 0;
            while i < k && idx[i] == b {
                idx[i] = -b;
                i += 1;
            }
            if i == k {
                break;
            }
            idx[i] += 1;
        }
        // The enumeration keeps points within a 1e-9 slack of the sphere.
        prop_assert!(pts.len() >= expected);
        for z in &pts {
            let r = theta * (z.iter().map(|z| (z * z) as f64).sum::<f64>()).sqrt();
            prop_assert!(r <= radius + 1e-6);
        }
    }

    #[test]
    fn intensity_text_round_trip(v in values8()) {
        let s = intensity(v);
        let back = GridIntensity::read_text(Cursor::new(s.to_text())).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn catalan_recursion() {
    let mut c = vec![1u64];
    for n in 1..20usize {
        c.push((0..n).map(|i| c[i] * c[n - 1 - i]).sum());
    }
    for (j, v) in c.iter().enumerate() {
        assert_eq!(catalan_number(j as u32), *v);
    }
}
