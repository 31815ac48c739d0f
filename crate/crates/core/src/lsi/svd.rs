//! Singular value decomposition: one-sided Jacobi for desk-scale matrices and
//! Golub-Kahan-Lanczos bidiagonalization above that.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::{dot, norm, Matrix};

/// Largest dimension still handled by the Jacobi path.
pub const JACOBI_LIMIT: usize = 500;
pub const LANCZOS_TOLERANCE: f64 = 1e-10;
pub const LANCZOS_SEED: u64 = 0x5eed_1a2c;

const JACOBI_EPS: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(s) V^T` with singular values in non-increasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    /// n x r
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    /// m x r
    pub v: Matrix,
}

impl Svd {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// Keeps the leading `k` triplets.
    pub fn truncate(self, k: usize) -> Svd {
        let k = k.min(self.rank());
        Svd {
            u: leading_columns(&self.u, k),
            singular_values: self.singular_values[..k].to_vec(),
            v: leading_columns(&self.v, k),
        }
    }

    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (j, s) in self.singular_values.iter().enumerate() {
                us[(i, j)] *= s;
            }
        }
        us.matmul(&self.v.transpose())
    }
}

fn leading_columns(m: &Matrix, k: usize) -> Matrix {
    let mut out = Matrix::zeros(m.rows(), k);
    for i in 0..m.rows() {
        out.row_mut(i).copy_from_slice(&m.row(i)[..k]);
    }
    out
}

/// Leading `k` singular triplets, choosing the algorithm by matrix size.
pub fn truncated_svd(a: &Matrix, k: usize) -> Svd {
    if a.rows() <= JACOBI_LIMIT && a.cols() <= JACOBI_LIMIT {
        jacobi_svd(a).truncate(k)
    } else {
        lanczos_svd(a, k, LANCZOS_SEED, LANCZOS_TOLERANCE)
    }
}

/// Full thin SVD by Hestenes one-sided Jacobi rotations.
pub fn jacobi_svd(a: &Matrix) -> Svd {
    let (n, m) = (a.rows(), a.cols());
    if m <= n {
        let (u, s, v) = orthogonalize_columns(a);
        finish(u, s, v)
    } else {
        let (v, s, u) = orthogonalize_columns(&a.transpose());
        finish(u, s, v)
    }
}

/// Rotates the columns of `a` until mutually orthogonal. Returns the normalized
/// columns, their norms, and the accumulated rotation (as column vectors).
fn orthogonalize_columns(a: &Matrix) -> (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>) {
    let c = a.cols();
    let mut w: Vec<Vec<f64>> = (0..c).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..c)
        .map(|j| {
            let mut e = vec![0.0; c];
            e[j] = 1.0;
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= JACOBI_EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut w, p, q, cs, sn);
                rotate(&mut v, p, q, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = w.iter().map(|col| norm(col)).collect();
    for (col, &s) in w.iter_mut().zip(&sigma) {
        if s > 0.0 {
            col.iter_mut().for_each(|x| *x /= s);
        }
    }
    (w, sigma, v)
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, cs: f64, sn: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = cs * xp - sn * xq;
        *y = sn * xp + cs * xq;
    }
}

/// Sorts triplets by decreasing singular value and fixes signs so that the
/// largest-magnitude entry of each left vector is non-negative.
fn finish(u_cols: Vec<Vec<f64>>, sigma: Vec<f64>, v_cols: Vec<Vec<f64>>) -> Svd {
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
    let r = order.len();
    let n = u_cols.first().map_or(0, Vec::len);
    let m = v_cols.first().map_or(0, Vec::len);
    let mut u = Matrix::zeros(n, r);
    let mut v = Matrix::zeros(m, r);
    let mut s = Vec::with_capacity(r);
    for (j, &src) in order.iter().enumerate() {
        let anchor = if sigma[src] > 0.0 { &u_cols[src] } else { &v_cols[src] };
        let flip = if largest_magnitude(anchor) < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            u[(i, j)] = flip * u_cols[src][i];
        }
        for i in 0..m {
            v[(i, j)] = flip * v_cols[src][i];
        }
        s.push(sigma[src]);
    }
    Svd {
        u,
        singular_values: s,
        v,
    }
}

/// Entry of largest magnitude; the first one wins ties.
fn largest_magnitude(x: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for &e in x {
        if e.abs() > best.abs() {
            best = e;
        }
    }
    best
}

/// Leading `k` singular triplets by Golub-Kahan-Lanczos bidiagonalization with
/// full reorthogonalization. The Krylov space grows until every wanted Ritz
/// triplet has residual at most `tol * sigma_1`, or the space is exhaustive.
pub fn lanczos_svd(a: &Matrix, k: usize, seed: u64, tol: f64) -> Svd {
    let (n, m) = (a.rows(), a.cols());
    let r = n.min(m);
    let k = k.min(r);
    if k == 0 {
        return Svd {
            u: Matrix::zeros(n, 0),
            singular_values: Vec::new(),
            v: Matrix::zeros(m, 0),
        };
    }
    let at = a.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let tiny = 1e-13 * scale;

    let mut us: Vec<Vec<f64>> = Vec::new();
    let mut vs: Vec<Vec<f64>> = vec![random_unit(&mut rng, m, &[])];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut check_at = (2 * k + 10).min(r);

    loop {
        let j = alphas.len();
        // u_j = A v_j - beta_{j-1} u_{j-1}
        let mut u = mat_vec(a, &vs[j]);
        if j > 0 {
            let b = betas[j - 1];
            u.iter_mut().zip(&us[j - 1]).for_each(|(x, y)| *x -= b * y);
        }
        reorthogonalize(&mut u, &us);
        let mut alpha = norm(&u);
        if alpha <= tiny {
            alpha = 0.0;
            u = random_unit(&mut rng, n, &us);
        } else {
            u.iter_mut().for_each(|x| *x /= alpha);
        }
        us.push(u);
        alphas.push(alpha);

        // v_{j+1} = A^T u_j - alpha_j v_j
        let mut v = mat_vec(&at, &us[j]);
        v.iter_mut().zip(&vs[j]).for_each(|(x, y)| *x -= alpha * y);
        reorthogonalize(&mut v, &vs);
        let mut beta = norm(&v);
        let p = alphas.len();
        if p < m {
            if beta <= tiny {
                beta = 0.0;
                v = random_unit(&mut rng, m, &vs);
            } else {
                v.iter_mut().for_each(|x| *x /= beta);
            }
            vs.push(v);
        } else {
            beta = 0.0;
        }
        betas.push(beta);

        if p < check_at && p < r {
            continue;
        }
        let bidiag = bidiagonal(&alphas, &betas[..p - 1]);
        let small = jacobi_svd(&bidiag);
        let sigma1 = small.singular_values[0].max(f64::MIN_POSITIVE);
        let residual_ok = (0..k.min(p)).all(|i| (beta * small.u[(p - 1, i)]).abs() <= tol * sigma1);
        if p >= r || (p >= k && residual_ok) {
            return ritz(&us[..p], &vs[..p], small, k);
        }
        check_at = (p + k.max(10)).min(r);
    }
}

fn bidiagonal(alphas: &[f64], betas: &[f64]) -> Matrix {
    let p = alphas.len();
    let mut b = Matrix::zeros(p, p);
    for i in 0..p {
        b[(i, i)] = alphas[i];
        if i + 1 < p {
            b[(i, i + 1)] = betas[i];
        }
    }
    b
}

fn ritz(us: &[Vec<f64>], vs: &[Vec<f64>], small: Svd, k: usize) -> Svd {
    let n = us[0].len();
    let m = vs[0].len();
    let p = us.len();
    let mut left = Vec::with_capacity(k);
    let mut right = Vec::with_capacity(k);
    for c in 0..k {
        let mut lu = vec![0.0; n];
        let mut rv = vec![0.0; m];
        for t in 0..p {
            let xu = small.u[(t, c)];
            let xv = small.v[(t, c)];
            lu.iter_mut().zip(&us[t]).for_each(|(d, s)| *d += xu * s);
            rv.iter_mut().zip(&vs[t]).for_each(|(d, s)| *d += xv * s);
        }
        left.push(lu);
        right.push(rv);
    }
    finish(left, small.singular_values[..k].to_vec(), right)
}

fn mat_vec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    (0..a.rows()).map(|i| dot(a.row(i), x)).collect()
}

/// Two passes of classical Gram-Schmidt against `basis`.
fn reorthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(x, b);
            x.iter_mut().zip(b).for_each(|(xi, bi)| *xi -= c * bi);
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng, len: usize, basis: &[Vec<f64>]) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        reorthogonalize(&mut x, basis);
        let nx = norm(&x);
        if nx > 1e-8 {
            x.iter_mut().for_each(|e| *e /= nx);
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeded(n: usize, m: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_row_major(n, m, (0..n * m).map(|_| rng.gen_range(-1.0..1.0)).collect())
    }

    #[test]
    fn diagonal_matrix() {
        let mut a = Matrix::zeros(3, 3);
        a[(0, 0)] = 1.0;
        a[(1, 1)] = 3.0;
        a[(2, 2)] = 2.0;
        let s = jacobi_svd(&a);
        assert_eq!(s.singular_values, [3.0, 2.0, 1.0]);
    }

    #[test]
    fn rank_one_matrix() {
        let x = [1.0, 2.0, 0.5, 3.0];
        let y = [0.2, 1.5, 4.0];
        let a = Matrix::from_row_major(4, 3, x.iter().flat_map(|xi| y.iter().map(move |yj| xi * yj)).collect());
        let s = truncated_svd(&a, 2);
        assert_eq!(s.rank(), 2);
        assert!(s.singular_values[1] <= 1e-10 * s.singular_values[0]);
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        for (n, m) in [(6, 4), (4, 6), (5, 5), (1, 7), (7, 1)] {
            let a = seeded(n, m, (n * 10 + m) as u64);
            let s = jacobi_svd(&a);
            let diff = s.reconstruct();
            for (x, y) in diff.as_slice().iter().zip(a.as_slice()) {
                assert!((x - y).abs() < 1e-12);
            }
            let utu = s.u.transpose().matmul(&s.u);
            let vtv = s.v.transpose().matmul(&s.v);
            for i in 0..s.rank() {
                for j in 0..s.rank() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((utu[(i, j)] - e).abs() < 1e-12);
                    assert!((vtv[(i, j)] - e).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sign_convention() {
        let a = seeded(8, 5, 3);
        let s = jacobi_svd(&a);
        for j in 0..s.rank() {
            assert!(largest_magnitude(&s.u.column(j)) >= 0.0);
        }
        let neg = Matrix::from_row_major(8, 5, a.as_slice().iter().map(|x| -x).collect());
        let t = jacobi_svd(&neg);
        // same left vectors, negated right vectors
        for (x, y) in s.u.as_slice().iter().zip(t.u.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn lanczos_matches_jacobi_on_tall_matrix() {
        let a = seeded(40, 12, 9);
        let full = jacobi_svd(&a);
        let lz = lanczos_svd(&a, 5, LANCZOS_SEED, LANCZOS_TOLERANCE);
        for i in 0..5 {
            let rel = (lz.singular_values[i] - full.singular_values[i]).abs() / full.singular_values[i];
            assert!(rel < 1e-9, "sigma_{i}: {rel}");
            let c = dot(&lz.u.column(i), &full.u.column(i)).abs();
            assert!((c - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn lanczos_handles_rank_deficiency() {
        let x: Vec<f64> = (0..30).map(|i| 1.0 + i as f64 * 0.1).collect();
        let y: Vec<f64> = (0..20).map(|j| 0.5 + (j % 3) as f64).collect();
        let a = Matrix::from_row_major(30, 20, x.iter().flat_map(|xi| y.iter().map(move |yj| xi * yj)).collect());
        let lz = lanczos_svd(&a, 3, 1, LANCZOS_TOLERANCE);
        let full = jacobi_svd(&a);
        assert!((lz.singular_values[0] - full.singular_values[0]).abs() < 1e-9 * full.singular_values[0]);
        assert!(lz.singular_values[1] < 1e-9 * lz.singular_values[0]);
    }
}
