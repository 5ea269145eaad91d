mod common;

use common::*;
use marginal_lab::bl_distance::{bl_lp_with, gaussian_sample, LpOptions};
use marginal_lab::rng::seeded;
use marginal_lab::{bl_empirical_gaussian, bl_lp, witness_lower_bound, EmpiricalMeasure};
use proptest::prelude::*;
use rand::Rng;

fn small_instance(rng: &mut impl Rng) -> (EmpiricalMeasure, EmpiricalMeasure) {
    let k = rng.gen_range(1..=2);
    let a = rng.gen_range(1..=3);
    let b = rng.gen_range(1..=4 - a);
    let spread = [0.3, 1.0, 3.0][rng.gen_range(0..3)];
    let mu = random_measure(k, a, spread, rng);
    let mut nu = random_measure(k, b, spread, rng);
    if rng.gen_bool(0.3) {
        // share a support point
        let mut pts = nu.coordinates().to_vec();
        pts[..k].copy_from_slice(mu.point(0));
        nu = EmpiricalMeasure::new(k, pts, nu.weights().to_vec()).unwrap();
    }
    (mu, nu)
}

#[test]
fn matches_vertex_enumeration() {
    let mut rng = seeded(11);
    for _ in 0..300 {
        let (mu, nu) = small_instance(&mut rng);
        let (pts, c) = merged_support(&mu, &nu);
        let exact = bl_vertex_enumeration(&pts, &c);
        let got = bl_lp(&mu, &nu).unwrap();
        assert!((got - exact).abs() < 1e-9, "lp {got} vs enumeration {exact}");
    }
}

#[test]
fn grid_search_spot_checks() {
    let mut rng = seeded(12);
    let h = 1e-3;
    let mut checked = 0;
    while checked < 12 {
        let (mu, nu) = small_instance(&mut rng);
        let (pts, c) = merged_support(&mu, &nu);
        if pts.len() > 3 {
            continue;
        }
        let grid = bl_grid_search(&pts, &c, h);
        let got = bl_lp(&mu, &nu).unwrap();
        let l1: f64 = c.iter().map(|x| x.abs()).sum();
        assert!(got >= grid - 1e-9, "grid {grid} beats lp {got}");
        assert!(got - grid <= l1 * h + 1e-9, "lp {got} vs grid {grid}");
        checked += 1;
    }
}

#[test]
fn two_diracs() {
    let zero = EmpiricalMeasure::dirac(&[0.0, 0.0]).unwrap();
    for r in [0.0, 1e-3, 0.7, 1.5, 2.0, 2.5, 40.0] {
        let x = EmpiricalMeasure::dirac(&[r * 0.6, r * 0.8]).unwrap();
        let got = bl_lp(&zero, &x).unwrap();
        assert!((got - r.min(2.0)).abs() < 1e-8, "{r}: {got}");
    }
}

#[test]
fn support_cap_is_enforced() {
    let mut rng = seeded(1);
    let a = gaussian_sample(1, 1.0, 30, &mut rng).unwrap();
    let b = gaussian_sample(1, 1.0, 20, &mut rng).unwrap();
    assert!(bl_lp_with(&a, &b, LpOptions { support_cap: 25 }).is_err());
    assert!(bl_lp_with(&a, &b, LpOptions { support_cap: 30 }).is_ok());
    let c = gaussian_sample(2, 1.0, 20, &mut rng).unwrap();
    assert!(bl_lp(&a, &c).is_err());
}

#[test]
fn dirac_against_discretised_normal() {
    let grid = gaussian_grid_measure(1.0, 1e-3);
    let zero = EmpiricalMeasure::dirac(&[0.0]).unwrap();
    let got = bl_lp_with(&zero, &grid, LpOptions { support_cap: 20_000 }).unwrap();
    // the grid measure is within W1 distance h/2 of N(0,1)
    assert!((got - dirac_vs_normal()).abs() < 1e-3, "{got}");
}

#[test]
fn point_mass_is_far_from_gaussian() {
    let mut rng = seeded(5);
    let sample = EmpiricalMeasure::uniform(1, vec![0.0; 500]).unwrap();
    let cmp = bl_empirical_gaussian(&sample, 1.0, 2000, &mut rng).unwrap();
    assert!(cmp.estimate > 0.5);
    assert!((cmp.estimate - dirac_vs_normal()).abs() < 0.1);
}

#[test]
fn gaussian_sample_matches_baseline() {
    let mut rng = seeded(6);
    let trials = 40;
    let diffs: Vec<f64> = (0..trials)
        .map(|_| {
            let s = gaussian_sample(2, 1.0, 300, &mut rng).unwrap();
            let cmp = bl_empirical_gaussian(&s, 1.0, 300, &mut rng).unwrap();
            cmp.estimate - cmp.baseline
        })
        .collect();
    let mean = diffs.iter().sum::<f64>() / trials as f64;
    let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt();
    assert!(mean.abs() < 4.0 * sd / (trials as f64).sqrt() + 1e-12, "mean {mean} sd {sd}");
}

#[test]
fn baseline_shrinks_with_reference_size() {
    let mut rng = seeded(7);
    let trials = 50;
    let mut diffs = Vec::new();
    for _ in 0..trials {
        let s = gaussian_sample(1, 1.0, 200, &mut rng).unwrap();
        let small = bl_empirical_gaussian(&s, 1.0, 200, &mut rng).unwrap().baseline;
        let large = bl_empirical_gaussian(&s, 1.0, 400, &mut rng).unwrap().baseline;
        diffs.push(large - small);
    }
    let mean = diffs.iter().sum::<f64>() / trials as f64;
    let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt();
    assert!(mean <= 3.0 * sd / (trials as f64).sqrt(), "mean {mean} sd {sd}");
}

#[test]
fn witness_of_origin_matches_closed_form() {
    // E (1 - |Z|)_+ = 2 Phi(1) - 1 - sqrt(2/pi) (1 - e^{-1/2})
    let hat = 2.0 * normal_cdf(1.0) - 1.0 - (2.0 / std::f64::consts::PI).sqrt() * (1.0 - (-0.5f64).exp());
    let oracle = 1.0 - hat;
    let mut rng = seeded(8);
    let w = witness_lower_bound(&[0.0], 1, 1.0, 200_000, &mut rng).unwrap();
    assert!((w.mean - hat).abs() < w.mc_error, "{} vs {hat}", w.mean);
    assert!(w.lower <= oracle + 1e-12);
    assert!(w.lower >= oracle - 2.0 * w.mc_error);
}

#[test]
fn witness_is_below_the_lp_distance() {
    let mut rng = seeded(9);
    for k in [1, 2, 3] {
        let pts: Vec<f64> = (0..6 * k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = EmpiricalMeasure::uniform(k, pts.clone()).unwrap();
        let w = witness_lower_bound(&pts, k, 1.0, 50_000, &mut rng).unwrap();
        let g = gaussian_sample(k, 1.0, 2000, &mut rng).unwrap();
        let lp = bl_lp(&s, &g).unwrap();
        assert!(w.lower <= lp + 0.05, "k={k}: witness {} lp {lp}", w.lower);
    }
}

fn measure_strategy(k: usize) -> impl Strategy<Value = EmpiricalMeasure> {
    (1usize..=10).prop_flat_map(move |n| {
        (
            proptest::collection::vec(-3.0f64..3.0, n * k),
            proptest::collection::vec(0.01f64..1.0, n),
        )
            .prop_map(move |(p, w)| EmpiricalMeasure::normalized(k, p, w).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms(
        (a, b, c) in (1usize..=3).prop_flat_map(|k| (measure_strategy(k), measure_strategy(k), measure_strategy(k)))
    ) {
        let ab = bl_lp(&a, &b).unwrap();
        let ba = bl_lp(&b, &a).unwrap();
        let ac = bl_lp(&a, &c).unwrap();
        let cb = bl_lp(&c, &b).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(bl_lp(&a, &a).unwrap() <= 1e-6);
        prop_assert!(ab <= ac + cb + 1e-5);
        prop_assert!((0.0..=2.0).contains(&ab));
    }
}
