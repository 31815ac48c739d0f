//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use softmap::config::RunConfig;
use softmap::fixture::{fresh_documents, planted_clusters, write_documents, DEFAULT_SEED};
use softmap::labeling::{measure_label, place_labels, LabelRequest};
use softmap::lsi::svd::truncated_svd;
use softmap::lsi::{DissimilarityMatrix, Metric};
use softmap::matrix::Matrix;
use softmap::mds::{mds_layout, Layout, MdsParams};
use softmap::pipeline::{run_evolution, run_map};
use softmap::relief::{build_dem, contours, hillshade, Dem, DemOptions, GridSpec, KernelCutoff, PeakScaling};

const SVD_MATRICES: usize = 200;
const SVD_MAX_DIM: usize = 20;
const SVD_REL_TOL: f64 = 1e-8;
const SVD_TIME_LIMIT: f64 = 10.0;

const MDS_TRIALS: u64 = 100;
const MDS_POINTS: usize = 20;
const MDS_MIN_CORRELATION: f64 = 0.99;
const MDS_MAX_STRESS: f64 = 1e-3;
const MDS_MIN_SUCCESSES: usize = 95;
const MDS_TIME_LIMIT: f64 = 30.0;

const DEM_TRUNCATED_REL_TOL: f64 = 1e-3;
const DEM_EXACT_REL_TOL: f64 = 1e-12;
const FLAT_SHADE_TOL: f64 = 1e-9;
const CONTOUR_GRID: usize = 256;
const CONTOUR_MAX_MEAN_ERROR_PX: f64 = 1.0;

const LABEL_INSTANCES: usize = 50;
const LABEL_MIN: usize = 10;
const LABEL_MAX: usize = 500;

const SILHOUETTE_MIN: f64 = 0.3;
const PLANTED_TIME_LIMIT: f64 = 5.0;

const NEW_ENTITY_FRACTION: f64 = 0.1;
const MEDIAN_DISPLACEMENT_MAX: f64 = 0.05;
const RENAME_DISPLACEMENT_MAX: f64 = 0.02;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn svd_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..SVD_MATRICES {
        let m = rng.gen_range(1..=SVD_MAX_DIM);
        let n = rng.gen_range(1..=SVD_MAX_DIM);
        let rows = common::random_rows(&mut rng, m, n);
        let k = rng.gen_range(1..=m.min(n));
        let oracle = common::singular_values(&rows);
        let svd = truncated_svd(&Matrix::from_rows(&rows), k);
        for (s, o) in svd.singular_values.iter().zip(&oracle) {
            worst = worst.max((s - o).abs() / o.abs().max(f64::MIN_POSITIVE));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= SVD_REL_TOL && secs < SVD_TIME_LIMIT,
        format!("{SVD_MATRICES} matrices, max relative error {worst:.2e} (limit {SVD_REL_TOL:e}), {secs:.2} s (limit {SVD_TIME_LIMIT} s)"),
    )
}

fn point_dissimilarities(points: &[[f64; 2]]) -> DissimilarityMatrix {
    let n = points.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = common::distance(points[i], points[j]);
        }
    }
    DissimilarityMatrix::from_matrix(m, Metric::Cosine).unwrap()
}

fn mds_recovery(traces: &mut Vec<Vec<f64>>) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut good = 0;
    for trial in 0..MDS_TRIALS {
        let points: Vec<[f64; 2]> = (0..MDS_POINTS).map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
        let layout = mds_layout(&point_dissimilarities(&points), &MdsParams::with_seed(trial)).unwrap();
        let r = common::pearson(&common::pair_distances(&points), &common::pair_distances(&layout.positions));
        if r > MDS_MIN_CORRELATION && layout.stress < MDS_MAX_STRESS {
            good += 1;
        }
        traces.push(layout.stress_trace);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        good >= MDS_MIN_SUCCESSES && secs < MDS_TIME_LIMIT,
        format!("{good}/{MDS_TRIALS} trials with r > {MDS_MIN_CORRELATION} and stress < {MDS_MAX_STRESS:e} (need {MDS_MIN_SUCCESSES}), {secs:.2} s (limit {MDS_TIME_LIMIT} s)"),
    )
}

fn monotone(traces: &[Vec<f64>]) -> Outcome {
    let bad = traces.iter().filter(|t| t.windows(2).any(|w| w[1] > w[0])).count();
    outcome(bad == 0, format!("{} stress traces checked, {bad} with an increase", traces.len()))
}

fn layout_of(points: Vec<[f64; 2]>) -> Layout {
    Layout {
        ids: (0..points.len()).map(|i| format!("e{i}")).collect(),
        positions: points,
        stress: 0.0,
        seed: 0,
        iterations_run: 0,
        converged: true,
        stress_trace: vec![0.0],
    }
}

fn terrain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let points: Vec<[f64; 2]> = (0..30).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let sizes: Vec<f64> = (0..30).map(|_| rng.gen_range(0.05..2.0)).collect();
    let layout = layout_of(points);
    let spec = GridSpec::fit(&layout.positions, 128, 96, 0.1).unwrap();
    let sigma = 7.0;
    let peaks: Vec<([f64; 2], f64)> = layout.positions.iter().map(|p| spec.to_pixel(*p)).zip(sizes.iter().copied()).collect();
    let oracle: Vec<f64> = (0..spec.height)
        .flat_map(|r| (0..spec.width).map(move |c| [c as f64, r as f64]))
        .map(|p| common::gaussian_height(p, &peaks, sigma))
        .collect();
    let max = oracle.iter().cloned().fold(0.0, f64::max);
    let truncated = build_dem(&layout, &sizes, &spec, sigma, DemOptions::default()).unwrap();
    let exact = build_dem(&layout, &sizes, &spec, sigma, DemOptions { cutoff: KernelCutoff::Exact, scaling: PeakScaling::Kloc }).unwrap();
    let trunc_err = truncated.heights.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / max;
    let exact_err = exact.heights.iter().zip(&oracle).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)).fold(0.0, f64::max);

    let flat = Dem { spec, heights: vec![1.7; spec.cells()] };
    let alt = 37.0f64;
    let shade = hillshade(&flat, 315.0, alt).unwrap();
    let flat_err = shade.values.iter().map(|v| (v - alt.to_radians().sin()).abs()).fold(0.0, f64::max);

    let (amp, s, c) = (5.0, 30.0, (CONTOUR_GRID as f64 - 1.0) / 2.0);
    let cspec = GridSpec::new(CONTOUR_GRID, CONTOUR_GRID, (0.0, 0.0, 1.0, 1.0), 0.0).unwrap();
    let mut heights = Vec::with_capacity(cspec.cells());
    for r in 0..CONTOUR_GRID {
        for col in 0..CONTOUR_GRID {
            let d2 = (col as f64 - c).powi(2) + (r as f64 - c).powi(2);
            heights.push(amp * (-d2 / (2.0 * s * s)).exp());
        }
    }
    let set = contours(&Dem { spec: cspec, heights }, 1.0).unwrap();
    let mut worst_contour = 0.0f64;
    for (level, lines) in set.levels.iter().zip(&set.polylines) {
        let radius = s * (2.0 * (amp / level).ln()).sqrt();
        let pts: Vec<&[f64; 2]> = lines.iter().flat_map(|l| &l.points).collect();
        let mean = pts.iter().map(|p| (common::distance(**p, [c, c]) - radius).abs()).sum::<f64>() / pts.len() as f64;
        worst_contour = worst_contour.max(mean);
    }
    outcome(
        trunc_err <= DEM_TRUNCATED_REL_TOL
            && exact_err <= DEM_EXACT_REL_TOL
            && flat_err <= FLAT_SHADE_TOL
            && !set.levels.is_empty()
            && worst_contour < CONTOUR_MAX_MEAN_ERROR_PX,
        format!(
            "DEM truncated {trunc_err:.2e} (limit {DEM_TRUNCATED_REL_TOL:e}), exact {exact_err:.2e} (limit {DEM_EXACT_REL_TOL:e}); flat shade {flat_err:.1e} (limit {FLAT_SHADE_TOL:e}); contour radius mean error {worst_contour:.3} px over {} levels (limit {CONTOUR_MAX_MEAN_ERROR_PX} px)",
            set.levels.len()
        ),
    )
}

fn labeling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut overlaps = 0;
    let mut ordering_violations = 0;
    let mut shown = 0;
    let mut total = 0;
    for _ in 0..LABEL_INSTANCES {
        let n = rng.gen_range(LABEL_MIN..=LABEL_MAX);
        let requests: Vec<LabelRequest> = (0..n)
            .map(|i| {
                let text: String = (0..rng.gen_range(2..16)).map(|_| rng.gen_range(b'a'..=b'z') as char).collect();
                LabelRequest {
                    entity_id: i.to_string(),
                    extent: measure_label(&text, rng.gen_range(6.0..12.0)).unwrap(),
                    text,
                    anchor: [rng.gen_range(0.0..800.0), rng.gen_range(0.0..600.0)],
                    priority: rng.gen_range(0.0..10.0),
                }
            })
            .collect();
        let placement = place_labels(&requests, None);
        let boxes: Vec<[f64; 4]> = placement
            .labels
            .iter()
            .filter(|l| l.visible)
            .map(|l| {
                let r = l.rect();
                [r.x0, r.y0, r.x1, r.y1]
            })
            .collect();
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if common::boxes_touch(boxes[i], boxes[j]) {
                    overlaps += 1;
                }
            }
        }
        if placement.visible_per_ordering.iter().any(|&c| c > placement.visible_count()) {
            ordering_violations += 1;
        }
        shown += boxes.len();
        total += n;
    }
    outcome(
        overlaps == 0 && ordering_violations == 0,
        format!("{LABEL_INSTANCES} instances, {shown}/{total} labels shown, {overlaps} overlapping pairs, {ordering_violations} instances where another ordering showed more"),
    )
}

fn planted_config(root: &Path, snapshots: &[&str], out: &str) -> RunConfig {
    let mut c = RunConfig { seed: Some(DEFAULT_SEED), out: root.join(out), ..RunConfig::default() };
    c.snapshots = snapshots.iter().map(|s| root.join(s)).collect();
    c
}

fn planted_clusters_separate(traces: &mut Vec<Vec<f64>>) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let planted = planted_clusters(DEFAULT_SEED);
    write_documents(&dir.path().join("v1"), &planted.documents).unwrap();
    let config = planted_config(dir.path(), &["v1"], "out");
    let start = Instant::now();
    let report = run_map(&config).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let layout = Layout::from_sidecar(&fs::read_to_string(config.out.join("layout.txt")).unwrap(), "layout").unwrap();
    let labels: Vec<usize> = layout
        .ids
        .iter()
        .map(|id| planted.labels[planted.documents.iter().position(|(d, _)| d == id).unwrap()])
        .collect();
    let s = common::silhouette(&layout.positions, &labels);
    traces.push(layout.stress_trace.clone());
    outcome(
        s > SILHOUETTE_MIN && secs < PLANTED_TIME_LIMIT,
        format!(
            "silhouette {s:.3} (limit {SILHOUETTE_MIN}), stress {}, full map run {secs:.2} s (limit {PLANTED_TIME_LIMIT} s)",
            report.get("stress").unwrap_or("?")
        ),
    )
}

fn stability(traces: &mut Vec<Vec<f64>>) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let planted = planted_clusters(DEFAULT_SEED);
    let added = (planted.documents.len() as f64 * NEW_ENTITY_FRACTION).round() as usize;
    write_documents(&dir.path().join("v1"), &planted.documents).unwrap();
    let mut grown = planted.documents.clone();
    grown.extend(fresh_documents(&planted, added, DEFAULT_SEED));
    write_documents(&dir.path().join("v2"), &grown).unwrap();
    let mut renamed = planted.documents.clone();
    let (old_id, text) = renamed.remove(0);
    renamed.push(("moved/Renamed.java".into(), text));
    write_documents(&dir.path().join("v3"), &renamed).unwrap();

    let grow = run_evolution(&planted_config(dir.path(), &["v1", "v2"], "grow")).unwrap();
    let median = grow.transitions[0].median_ratio();
    let rename = run_evolution(&planted_config(dir.path(), &["v1", "v3"], "rename")).unwrap();
    let (before, after) = (&rename.layouts[0], &rename.layouts[1]);
    for layout in grow.layouts.iter().chain(&rename.layouts) {
        traces.push(layout.stress_trace.clone());
    }
    let moved = common::distance(before.position_of(&old_id).unwrap(), after.position_of("moved/Renamed.java").unwrap()) / before.diagonal();
    outcome(
        median < MEDIAN_DISPLACEMENT_MAX && moved < RENAME_DISPLACEMENT_MAX,
        format!(
            "{added} new entities: median displacement {median:.4} of diagonal (limit {MEDIAN_DISPLACEMENT_MAX}); renamed entity moved {moved:.5} (limit {RENAME_DISPLACEMENT_MAX})"
        ),
    )
}

fn digest(path: &Path) -> String {
    Sha256::digest(fs::read(path).unwrap()).iter().map(|b| format!("{b:02x}")).collect()
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_softmap")).args(args).output().map(|o| o.status.success()).unwrap_or(false)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let planted = planted_clusters(DEFAULT_SEED);
    write_documents(&root.join("v1"), &planted.documents).unwrap();
    let mut grown = planted.documents.clone();
    grown.extend(fresh_documents(&planted, 3, DEFAULT_SEED));
    write_documents(&root.join("v2"), &grown).unwrap();
    fs::write(root.join("map.cfg"), "snapshot = v1\nseed = 21\ngrid = 256x256\nmarkers = true\n").unwrap();
    fs::write(root.join("evolve.cfg"), "snapshot = v1\nsnapshot = v2\nseed = 21\ngrid = 256x256\n").unwrap();

    let mut compared = 0;
    let mut differing = Vec::new();
    let mut failed_runs = 0;
    for (cmd, cfg, dirs) in [("map", "map.cfg", vec![String::new()]), ("evolve", "evolve.cfg", vec!["snapshot-01".to_string(), "snapshot-02".to_string()])] {
        let outs: Vec<_> = ["a", "b"].iter().map(|run| root.join(format!("{cmd}-{run}"))).collect();
        for out in &outs {
            if !run_cli(&[cmd, root.join(cfg).to_str().unwrap(), "--out", out.to_str().unwrap()]) {
                failed_runs += 1;
            }
        }
        for sub in &dirs {
            for name in ["map.svg", "map.png", "layout.txt", "report.txt"] {
                let (a, b) = (outs[0].join(sub).join(name), outs[1].join(sub).join(name));
                if !a.exists() || !b.exists() || digest(&a) != digest(&b) {
                    differing.push(format!("{cmd}/{sub}/{name}"));
                }
                compared += 1;
            }
        }
        if cmd == "evolve" {
            let (a, b) = (outs[0].join("stability.txt"), outs[1].join("stability.txt"));
            if !a.exists() || !b.exists() || digest(&a) != digest(&b) {
                differing.push("evolve/stability.txt".into());
            }
            compared += 1;
        }
    }
    outcome(
        failed_runs == 0 && differing.is_empty(),
        format!("{compared} file pairs from two CLI runs each of map and evolve, {} differ {differing:?}, {failed_runs} failed runs", differing.len()),
    )
}

fn main() {
    let mut traces = Vec::new();
    let mut results = vec![
        ("1", "SVD oracle equivalence", svd_oracle()),
        ("2", "MDS recovery", mds_recovery(&mut traces)),
    ];
    let terrain = terrain();
    let labels = labeling();
    let planted = planted_clusters_separate(&mut traces);
    let stable = stability(&mut traces);
    let determinism = determinism();
    results.push(("3", "stress monotonicity", monotone(&traces)));
    results.push(("4", "terrain correctness", terrain));
    results.push(("5", "labeling", labels));
    results.push(("6", "planted clusters", planted));
    results.push(("7", "layout stability", stable));
    results.push(("8", "determinism", determinism));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (id, name, o) in &results {
        println!("{} criterion {id} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} acceptance criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
