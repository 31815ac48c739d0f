//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use rand::Rng;

/// Eigenvalues of a symmetric matrix by the classical cyclic Jacobi method.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let total: f64 = a.iter().flatten().map(|x| x * x).sum();
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Singular values, descending, as the non-negative eigenvalues of `[[0, A], [A^T, 0]]`.
pub fn singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    let m = rows.len();
    let n = rows[0].len();
    let mut big = vec![vec![0.0; m + n]; m + n];
    for i in 0..m {
        for j in 0..n {
            big[i][m + j] = rows[i][j];
            big[m + j][i] = rows[i][j];
        }
    }
    let mut eig = symmetric_eigenvalues(big);
    eig.sort_by(|a, b| b.total_cmp(a));
    eig.truncate(m.min(n));
    eig.into_iter().map(|e| e.max(0.0)).collect()
}

pub fn random_rows(rng: &mut impl Rng, m: usize, n: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Upper-triangle pairwise distances, row by row.
pub fn pair_distances(points: &[[f64; 2]]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            out.push(distance(points[i], points[j]));
        }
    }
    out
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Stress-1 with the least-squares scale located from three samples of the
/// residual, which is exactly quadratic in the scale.
pub fn stress_by_search(layout: &[f64], dissimilarity: &[f64]) -> f64 {
    let raw = |b: f64| -> f64 { layout.iter().zip(dissimilarity).map(|(l, d)| (l - b * d).powi(2)).sum() };
    let (r0, r1, r2) = (raw(0.0), raw(1.0), raw(2.0));
    let b = 0.5 * (3.0 * r0 - 4.0 * r1 + r2) / (r0 - 2.0 * r1 + r2);
    let den: f64 = dissimilarity.iter().map(|d| (b * d).powi(2)).sum();
    (raw(b) / den).sqrt()
}

/// Mean silhouette of a labelled point set under Euclidean distance.
pub fn silhouette(points: &[[f64; 2]], labels: &[usize]) -> f64 {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut sum = vec![0.0; k];
        let mut count = vec![0usize; k];
        for j in 0..n {
            if i != j {
                sum[labels[j]] += distance(points[i], points[j]);
                count[labels[j]] += 1;
            }
        }
        if count[labels[i]] == 0 {
            continue;
        }
        let a = sum[labels[i]] / count[labels[i]] as f64;
        let b = (0..k)
            .filter(|&c| c != labels[i] && count[c] > 0)
            .map(|c| sum[c] / count[c] as f64)
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

/// Untruncated Gaussian sum at one pixel.
pub fn gaussian_height(pixel: [f64; 2], peaks: &[([f64; 2], f64)], sigma: f64) -> f64 {
    peaks
        .iter()
        .map(|(c, amp)| amp * (-((pixel[0] - c[0]).powi(2) + (pixel[1] - c[1]).powi(2)) / (2.0 * sigma * sigma)).exp())
        .sum()
}

/// Closed rectangles `[x0, y0, x1, y1]` overlap, touching included.
pub fn boxes_touch(a: [f64; 4], b: [f64; 4]) -> bool {
    a[0] <= b[2] && b[0] <= a[2] && a[1] <= b[3] && b[1] <= a[3]
}
