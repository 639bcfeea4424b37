mod support;

use attrdiff::baselines::{fid_greedy_select, kcenter_select, lof_scores, lof_select, LofParams};
use attrdiff::ot::{frechet_gaussian, gaussian_summary, GaussianSummary};
use attrdiff::AttributeMatrix;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize, grid: bool) -> AttributeMatrix {
    let values = (0..n * d)
        .map(|_| {
            let v: f64 = rng.random_range(-3.0..3.0);
            // a coarse grid produces duplicate points and distance ties
            if grid {
                v.round()
            } else {
                v
            }
        })
        .collect();
    AttributeMatrix::new(n, d, values).unwrap()
}

#[test]
fn lof_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let d = rng.random_range(1..=4);
        let n_dev = rng.random_range(3..=50);
        let n_real = rng.random_range(1..=50);
        let k = rng.random_range(1..n_dev.min(21));
        let grid = case % 2 == 0;
        let dev = random_matrix(&mut rng, n_dev, d, grid);
        let real = random_matrix(&mut rng, n_real, d, grid);
        let got = lof_scores(&real, &dev, &LofParams { k_neighbors: k }).unwrap();
        let want = brute_lof(&rows(&real), &rows(&dev), k);
        for (g, w) in got.iter().zip(&want) {
            let rel = (g - w).abs() / w.abs().max(1.0);
            assert!(rel <= 1e-9, "case {case}: {g} vs {w}");
            worst = worst.max(rel);
        }
    }
    assert!(worst <= 1e-9);
}

#[test]
fn lof_select_takes_highest_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dev = random_matrix(&mut rng, 40, 2, false);
    let real = random_matrix(&mut rng, 30, 2, false);
    let scores = lof_scores(&real, &dev, &LofParams { k_neighbors: 5 }).unwrap();
    let sel = lof_select(&real, &dev, &LofParams { k_neighbors: 5 }, 4).unwrap();
    let mut order: Vec<usize> = (0..30).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    assert_eq!(sel.indices, order[..4]);
}

#[test]
fn kcenter_steps_match_exhaustive() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..30 {
        let d = rng.random_range(1..=8);
        let n_real = rng.random_range(10..=200);
        let n_dev = rng.random_range(1..=60);
        let real = random_matrix(&mut rng, n_real, d, case % 3 == 0);
        let dev = random_matrix(&mut rng, n_dev, d, case % 3 == 0);
        let sel = kcenter_select(&real, &dev, 10).unwrap();
        check_greedy(&sel.indices, &sel.values, 1e-12, true, |p| {
            kcenter_step_scores(&real, &dev, p)
        })
        .unwrap_or_else(|e| panic!("case {case}: {e}"));
    }
}

#[test]
fn fid_steps_match_exhaustive() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..12 {
        let d = rng.random_range(1..=8);
        let n_real = rng.random_range(20..=200);
        let n_dev = rng.random_range(d + 2..=60);
        let real = random_matrix(&mut rng, n_real, d, false);
        let dev = random_matrix(&mut rng, n_dev, d, false);
        let sel = fid_greedy_select(&real, &dev, 6).unwrap();
        check_greedy(&sel.indices, &sel.values, 1e-8, false, |p| {
            fid_step_scores(&real, &dev, p)
        })
        .unwrap_or_else(|e| panic!("case {case}: {e}"));
    }
}

fn gauss(mean: Vec<f64>, cov: DMatrix<f64>) -> GaussianSummary {
    GaussianSummary::new(DVector::from_vec(mean), cov).unwrap()
}

#[test]
fn frechet_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let (m1, m2): (f64, f64) = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let (s1, s2): (f64, f64) = (rng.random_range(0.01..10.0), rng.random_range(0.01..10.0));
        let g1 = gauss(vec![m1], DMatrix::from_element(1, 1, s1 * s1));
        let g2 = gauss(vec![m2], DMatrix::from_element(1, 1, s2 * s2));
        let want = (m1 - m2).powi(2) + (s1 - s2).powi(2);
        assert!((frechet_gaussian(&g1, &g2).unwrap() - want).abs() <= 1e-8);

        let d = rng.random_range(1..=6);
        let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let cov = &a * a.transpose() + DMatrix::identity(d, d) * 0.1;
        let mean: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
        let g = gauss(mean, cov);
        assert!(frechet_gaussian(&g, &g).unwrap().abs() <= 1e-8);
    }
    let m = AttributeMatrix::from_rows(&[[0.0, 1.0], [2.0, 3.0], [4.0, -1.0]]).unwrap();
    let g = gaussian_summary(&m).unwrap();
    assert!(frechet_gaussian(&g, &g).unwrap().abs() <= 1e-8);
}
