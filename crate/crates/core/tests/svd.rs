mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softmap::lsi::svd::{jacobi_svd, truncated_svd, JACOBI_LIMIT};
use softmap::matrix::Matrix;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn singular_values_match_eigen_oracle_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..60 {
        let m = rng.gen_range(1..=20);
        let n = rng.gen_range(1..=20);
        let rows = common::random_rows(&mut rng, m, n);
        let k = rng.gen_range(1..=m.min(n));
        let oracle = common::singular_values(&rows);
        let svd = truncated_svd(&Matrix::from_rows(&rows), k);
        assert_eq!(svd.singular_values.len(), k);
        for (i, (s, o)) in svd.singular_values.iter().zip(&oracle).enumerate() {
            assert!(close(*s, *o, 1e-8), "trial {trial} ({m}x{n}) sigma_{i}: {s} vs {o}");
        }
    }
}

/// Orthonormal columns from Gram-Schmidt on random vectors.
fn random_orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < cols {
        let mut v: Vec<f64> = (0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

#[test]
fn large_matrices_take_the_iterative_path_and_keep_accuracy() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (m, n) = (JACOBI_LIMIT + 100, 30);
    let u = random_orthonormal(&mut rng, m, n);
    let v = random_orthonormal(&mut rng, n, n);
    let sigma: Vec<f64> = (0..n).map(|i| 50.0 * 0.8f64.powi(i as i32)).collect();
    let mut a = Matrix::zeros(m, n);
    for r in 0..m {
        for c in 0..n {
            a[(r, c)] = (0..n).map(|i| u[i][r] * sigma[i] * v[i][c]).sum::<f64>();
        }
    }
    let k = 6;
    let svd = truncated_svd(&a, k);
    for i in 0..k {
        assert!(close(svd.singular_values[i], sigma[i], 1e-8), "{} vs {}", svd.singular_values[i], sigma[i]);
    }
    // left vectors orthonormal and A v_i = sigma_i u_i
    for i in 0..k {
        for j in 0..k {
            let d: f64 = (0..m).map(|r| svd.u[(r, i)] * svd.u[(r, j)]).sum();
            assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
        }
        let vi = svd.v.column(i);
        for r in 0..m {
            let av: f64 = a.row(r).iter().zip(&vi).map(|(x, y)| x * y).sum();
            assert!((av - svd.singular_values[i] * svd.u[(r, i)]).abs() < 1e-8);
        }
    }
}

#[test]
fn truncation_is_the_best_rank_k_approximation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (m, n, k) = (12, 9, 3);
    let rows = common::random_rows(&mut rng, m, n);
    let a = Matrix::from_rows(&rows);
    let oracle = common::singular_values(&rows);
    let approx = truncated_svd(&a, k).reconstruct();
    let residual = |b: &Matrix| -> f64 {
        a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    };
    let best = residual(&approx);
    let tail: f64 = oracle[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
    assert!((best - tail).abs() < 1e-9, "{best} vs {tail}");
    for _ in 0..200 {
        let x = Matrix::from_rows(&common::random_rows(&mut rng, m, k));
        let y = Matrix::from_rows(&common::random_rows(&mut rng, k, n));
        assert!(residual(&x.matmul(&y)) >= best);
    }
}

#[test]
fn full_decomposition_reconstructs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (m, n) in [(7, 4), (4, 7), (10, 10)] {
        let a = Matrix::from_rows(&common::random_rows(&mut rng, m, n));
        let back = jacobi_svd(&a).reconstruct();
        let err = a.as_slice().iter().zip(back.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{m}x{n}: {err}");
    }
}
