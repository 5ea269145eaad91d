mod common;

use common::*;
use marginal_lab::bl_distance::{
    bl_certified_with, bl_lp_with, gaussian_integral_pl, gaussian_sample, CertifyOptions,
    ErrorModel, LpOptions,
};
use marginal_lab::rng::seeded;
use marginal_lab::triangulation::pl_approximate;
use marginal_lab::{bl_certified, build_lattice, EmpiricalMeasure, Error};
use std::f64::consts::PI;
use std::sync::Arc;

fn nominal_opts() -> CertifyOptions {
    CertifyOptions { model: ErrorModel::nominal(), ..Default::default() }
}

#[test]
fn hat_integral_matches_closed_form() {
    let oracle = 2.0 * (normal_cdf(1.0) - 0.5) - (2.0 / PI).sqrt() * (1.0 - (-0.5f64).exp());
    let lat = Arc::new(build_lattice(1, 0.01, 1.0).unwrap());
    let hat = pl_approximate(|x| (1.0 - x[0].abs()).max(0.0), 1.0, &lat);
    let mut rng = seeded(31);
    let g = gaussian_integral_pl(&hat, 1.0, 200_000, &mut rng).unwrap();
    assert!((g.estimate - oracle).abs() <= g.error, "{} vs {oracle} (+-{})", g.estimate, g.error);
    assert!(gaussian_integral_pl(&hat, 1.0, 10, &mut rng).is_err());
}

#[test]
fn dirac_bracket_contains_the_oracle() {
    let oracle = dirac_vs_normal();
    let grid = gaussian_grid_measure(1.0, 1e-3);
    let zero = EmpiricalMeasure::dirac(&[0.0]).unwrap();
    let lp_oracle = bl_lp_with(&zero, &grid, LpOptions { support_cap: 20_000 }).unwrap();
    assert!((lp_oracle - oracle).abs() < 1e-3);
    let mut rng = seeded(32);
    for opts in [CertifyOptions::default(), nominal_opts()] {
        for r in [2.0, 3.0, 4.0] {
            for eps in [0.25, 0.1, 0.05] {
                let c = bl_certified_with(&zero, 1.0, r, eps, None, 0, &mut rng, opts).unwrap();
                assert!(c.lower <= oracle + 1e-9 && oracle <= c.upper + 1e-9, "R={r} eps={eps}: {c:?}");
                assert!(0.0 <= c.lower && c.lower <= c.upper && c.upper <= 2.0);
            }
        }
    }
}

#[test]
fn dense_grid_oracle_is_bracketed_for_discrete_measures() {
    let grid = gaussian_grid_measure(1.0, 1e-3);
    let slack = 1e-3; // the grid measure is within W1 distance 5e-4 of N(0,1)
    let mut rng = seeded(33);
    for _ in 0..6 {
        let mu = random_measure(1, 3, 2.0, &mut rng);
        let oracle = bl_lp_with(&mu, &grid, LpOptions { support_cap: 20_000 }).unwrap();
        let c = bl_certified(&mu, 1.0, 3.0, 0.1, None, 0, &mut rng).unwrap();
        assert!(c.lower <= oracle + slack && oracle <= c.upper + slack, "{oracle} {c:?}");
    }
}

#[test]
fn planar_dirac_bracket() {
    // E min(|Z|, 2) for a standard planar Gaussian
    let oracle = (2.0 * PI).sqrt() * (normal_cdf(2.0) - 0.5);
    let zero = EmpiricalMeasure::dirac(&[0.0, 0.0]).unwrap();
    let mut rng = seeded(34);
    let c = bl_certified(&zero, 1.0, 2.0, 0.25, None, 100_000, &mut rng).unwrap();
    assert!(c.lower <= oracle && oracle <= c.upper, "{oracle} {c:?}");
    assert!(c.quadrature_error > 0.0);
}

#[test]
fn gaussian_sample_is_certified_close() {
    let mut rng = seeded(35);
    let sample = gaussian_sample(1, 1.0, 10_000, &mut rng).unwrap();
    let c = bl_certified(&sample, 1.0, 4.0, 0.1, None, 0, &mut rng).unwrap();
    assert!(c.upper <= 0.2, "{c:?}");
    assert_eq!(c.quadrature_error, 0.0);
}

#[test]
fn refining_the_lattice_shrinks_the_pl_term() {
    let mut rng = seeded(36);
    let mu = random_measure(1, 4, 1.5, &mut rng);
    let coarse = bl_certified_with(&mu, 1.0, 3.0, 0.2, None, 0, &mut rng, nominal_opts()).unwrap();
    let fine = bl_certified_with(&mu, 1.0, 3.0, 0.1, None, 0, &mut rng, nominal_opts()).unwrap();
    assert!((coarse.pl_error / fine.pl_error - 2.0).abs() < 1e-12);
    let coarse = bl_certified(&mu, 1.0, 3.0, 0.2, None, 0, &mut rng).unwrap();
    let fine = bl_certified(&mu, 1.0, 3.0, 0.1, None, 0, &mut rng).unwrap();
    assert!(fine.pl_error < coarse.pl_error);
    assert!(fine.upper - fine.lower <= coarse.upper - coarse.lower + 1e-9);
}

#[test]
fn nominal_model_truncation_term() {
    let mut rng = seeded(37);
    let mu = EmpiricalMeasure::uniform(1, vec![-1.0, 1.0]).unwrap();
    let c = bl_certified_with(&mu, 1.0, 2.0, 0.25, Some(1.5), 0, &mut rng, nominal_opts()).unwrap();
    // 2 k max(B, sigma^2) / R^2
    assert!((c.truncation_error - 2.0 * 1.5 / 4.0).abs() < 1e-12);
}

#[test]
fn invalid_inputs_are_rejected() {
    let mut rng = seeded(38);
    let four = EmpiricalMeasure::dirac(&[0.0; 4]).unwrap();
    assert!(matches!(
        bl_certified(&four, 1.0, 1.0, 0.5, None, 1000, &mut rng),
        Err(Error::DimensionLimit { .. })
    ));
    let two = EmpiricalMeasure::dirac(&[0.0, 0.0]).unwrap();
    assert!(bl_certified(&two, 1.0, 1.0, 0.5, None, 10, &mut rng).is_err());
    let one = EmpiricalMeasure::dirac(&[0.0]).unwrap();
    assert!(bl_certified(&one, 1.0, 1.0, 0.5, Some(-1.0), 0, &mut rng).is_err());
    assert!(bl_certified(&one, 0.0, 1.0, 0.5, None, 0, &mut rng).is_err());
}
