use marginal_lab::rng::seeded;
use marginal_lab::stiefel::{frame_distance, haar_sample, StiefelFrame, ORTHONORMAL_TOL};
use proptest::prelude::*;
use rand::Rng;

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn first_coordinate_second_moment_is_one_over_d() {
    let vals: Vec<f64> = (0..100_000u64)
        .map(|s| haar_sample(50, 1, &mut seeded(s)).unwrap().column(0)[0].powi(2))
        .collect();
    let (m, se) = mean_se(&vals);
    assert!((m - 0.02).abs() < 4.0 * se, "{m} +- {se}");
}

#[test]
fn fixed_direction_second_moment() {
    let d = 20;
    let xi: Vec<f64> = (0..d).map(|i| (i as f64 + 1.0).sqrt()).collect();
    let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut rng = seeded(4);
    let vals: Vec<f64> = (0..20_000)
        .map(|_| {
            let f = haar_sample(d, 3, &mut rng).unwrap();
            let p: f64 = f.column(1).iter().zip(&xi).map(|(a, b)| a * b).sum();
            (p / norm).powi(2)
        })
        .collect();
    let (m, se) = mean_se(&vals);
    assert!((m - 1.0 / d as f64).abs() < 4.0 * se);
}

#[test]
fn rotation_invariance_of_a_bounded_statistic() {
    // Statistic: |theta_1 . e_1| capped at 1 (it already is). Compare the
    // law of theta with that of R theta for a fixed rotation R.
    let d = 6;
    let mut rng = seeded(77);
    let q = haar_sample(d, d, &mut rng).unwrap();
    let rot = q.to_row_major();
    let n = 10_000;
    let mut plain = Vec::with_capacity(n);
    let mut rotated = Vec::with_capacity(n);
    for _ in 0..n {
        let f = haar_sample(d, 2, &mut rng).unwrap();
        plain.push(f.column(0)[0].abs());
        let g = haar_sample(d, 2, &mut rng).unwrap().rotated(&rot).unwrap();
        rotated.push(g.column(0)[0].abs());
    }
    let (m1, s1) = mean_se(&plain);
    let (m2, s2) = mean_se(&rotated);
    assert!((m1 - m2).abs() < 4.0 * (s1 * s1 + s2 * s2).sqrt());
}

#[test]
fn coordinate_frame_projection_example() {
    let f = StiefelFrame::coordinate(4, 2).unwrap();
    assert_eq!(f.project(&[3.0, -1.0, 7.0, 2.0]).unwrap(), vec![3.0, -1.0]);
    assert!(f.project(&[1.0, 2.0]).is_err());
}

#[test]
fn frame_distance_examples() {
    let a = StiefelFrame::coordinate(2, 1).unwrap();
    let b = StiefelFrame::from_columns(2, vec![vec![0.0, 1.0]]).unwrap();
    assert!((frame_distance(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(frame_distance(&a, &a).unwrap(), 0.0);
    let c = StiefelFrame::coordinate(3, 1).unwrap();
    assert!(frame_distance(&a, &c).is_err());
}

#[test]
fn binary_layout_is_row_major_little_endian() {
    let f = haar_sample(3, 2, &mut seeded(9)).unwrap();
    let bytes = f.to_le_bytes();
    assert_eq!(bytes.len(), 3 * 2 * 8);
    let second = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
    assert_eq!(second, f.column(1)[0]);
    let back = StiefelFrame::from_le_bytes(3, 2, &bytes).unwrap();
    assert_eq!(back, f);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_frames_are_orthonormal(d in 1usize..40, kfrac in 0.0f64..1.0, seed: u64) {
        let k = 1 + ((d - 1) as f64 * kfrac) as usize;
        let f = haar_sample(d, k, &mut seeded(seed)).unwrap();
        prop_assert!(f.orthonormality_defect() <= ORTHONORMAL_TOL);
        prop_assert_eq!(f.columns().count(), k);
    }

    #[test]
    fn projection_is_linear_and_contracting(d in 2usize..30, seed: u64, s in -3.0f64..3.0) {
        let mut rng = seeded(seed);
        let f = haar_sample(d, 1 + d / 2, &mut rng).unwrap();
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let px = f.project(&x).unwrap();
        let py = f.project(&y).unwrap();
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| s * a + b).collect();
        let pz = f.project(&z).unwrap();
        for i in 0..px.len() {
            prop_assert!((pz[i] - (s * px[i] + py[i])).abs() < 1e-10);
        }
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let npx = px.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(npx <= nx + 1e-10);
        prop_assert!(f.project(&vec![0.0; d]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn frame_distance_is_a_metric(d in 2usize..12, seed: u64) {
        let mut rng = seeded(seed);
        let k = 1 + d / 3;
        let a = haar_sample(d, k, &mut rng).unwrap();
        let b = haar_sample(d, k, &mut rng).unwrap();
        let c = haar_sample(d, k, &mut rng).unwrap();
        let ab = frame_distance(&a, &b).unwrap();
        prop_assert_eq!(ab, frame_distance(&b, &a).unwrap());
        prop_assert!(frame_distance(&a, &c).unwrap() <= ab + frame_distance(&b, &c).unwrap() + 1e-10);
    }
}
