mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softmap::lsi::{DissimilarityMatrix, Metric};
use softmap::matrix::Matrix;
use softmap::mds::{anchored_layout, mds_layout, stress, Layout, MdsParams};

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect()
}

fn dissimilarities(points: &[[f64; 2]]) -> DissimilarityMatrix {
    let n = points.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = common::distance(points[i], points[j]);
        }
    }
    DissimilarityMatrix::from_matrix(m, Metric::Cosine).unwrap()
}

fn upper(d: &DissimilarityMatrix) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..d.n {
        for j in i + 1..d.n {
            out.push(d.get(i, j));
        }
    }
    out
}

fn assert_monotone(layout: &Layout) {
    for w in layout.stress_trace.windows(2) {
        assert!(w[1] <= w[0], "stress rose from {} to {}", w[0], w[1]);
    }
}

#[test]
fn stress_agrees_with_scale_search_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let truth = random_points(&mut rng, 12);
        let d = dissimilarities(&truth);
        let guess = random_points(&mut rng, 12);
        let ours = stress(&guess, &d).unwrap();
        let oracle = common::stress_by_search(&common::pair_distances(&guess), &upper(&d));
        assert!((ours - oracle).abs() < 1e-9 * oracle.max(1.0), "{ours} vs {oracle}");
    }
}

#[test]
fn embeddable_inputs_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut good = 0;
    for trial in 0..30 {
        let truth = random_points(&mut rng, 20);
        let d = dissimilarities(&truth);
        let layout = mds_layout(&d, &MdsParams::with_seed(trial)).unwrap();
        assert_monotone(&layout);
        let r = common::pearson(&upper(&d), &common::pair_distances(&layout.positions));
        if r > 0.99 && layout.stress < 1e-3 {
            good += 1;
        }
    }
    assert!(good >= 28, "{good}/30 recovered");
}

#[test]
fn reported_stress_matches_positions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let truth = random_points(&mut rng, 15);
    let mut d = dissimilarities(&truth);
    // perturb so the optimum is not exact
    for i in 0..15 {
        for j in i + 1..15 {
            let v = d.get(i, j) * rng.gen_range(0.8..1.2);
            d.entries[(i, j)] = v;
            d.entries[(j, i)] = v;
        }
    }
    let layout = mds_layout(&d, &MdsParams::with_seed(4)).unwrap();
    assert_monotone(&layout);
    let oracle = common::stress_by_search(&common::pair_distances(&layout.positions), &upper(&d));
    assert!((layout.stress - oracle).abs() < 1e-9);
    assert_eq!(*layout.stress_trace.last().unwrap(), layout.stress);
}

#[test]
fn anchored_run_keeps_shared_points_near_prior() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut truth = random_points(&mut rng, 24);
    let d0 = dissimilarities(&truth[..20]);
    let prior = mds_layout(&d0, &MdsParams::with_seed(1)).unwrap();
    truth.truncate(24);
    let d1 = dissimilarities(&truth);
    let shared: Vec<(usize, usize)> = (0..20).map(|i| (i, i)).collect();
    let next = anchored_layout(&d1, &prior, &shared, &MdsParams::with_seed(1)).unwrap();
    assert_monotone(&next);
    let diagonal = prior.diagonal();
    let mut moves: Vec<f64> = (0..20).map(|i| common::distance(prior.positions[i], next.positions[i]) / diagonal).collect();
    moves.sort_by(f64::total_cmp);
    assert!(moves[10] < 0.05, "median displacement {}", moves[10]);
}
