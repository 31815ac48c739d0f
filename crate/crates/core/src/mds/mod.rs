//! Metric multidimensional scaling into the plane.
//!
//! Positions start from a seeded uniform draw in the unit square (or from an
//! anchor layout) and move along the Guttman direction, which is the
//! preconditioned negative gradient of raw stress at the current optimal
//! dissimilarity scale. Each step is accepted only if normalized stress does
//! not increase; otherwise the step length is halved and retried.

pub mod procrustes;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lsi::DissimilarityMatrix;
use crate::sidecar::{content_lines, escape_field, fmt_sig9, unescape_field};

pub use procrustes::{align, Similarity};

const MAX_HALVINGS: usize = 40;
const MAX_STEP: f64 = 2.0;
const NEIGHBORS_FOR_NEW: usize = 3;
const JITTER_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub ids: Vec<String>,
    pub positions: Vec<[f64; 2]>,
    pub stress: f64,
    pub seed: u64,
    pub iterations_run: usize,
    pub converged: bool,
    /// Stress before the first step and after every accepted step.
    pub stress_trace: Vec<f64>,
}

impl Layout {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Replaces the index-based default ids.
    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Layout> {
        if ids.len() != self.positions.len() {
            return Err(Error::Dimension(format!(
                "{} ids for {} positions",
                ids.len(),
                self.positions.len()
            )));
        }
        self.ids = ids;
        Ok(self)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|i| i == id)
    }

    pub fn position_of(&self, id: &str) -> Option<[f64; 2]> {
        self.index_of(id).map(|i| self.positions[i])
    }

    /// `(xmin, ymin, xmax, ymax)` of the positions.
    pub fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        bounds_of(&self.positions)
    }

    /// Diagonal of the bounding box.
    pub fn diagonal(&self) -> f64 {
        self.bounds().map_or(0.0, |(x0, y0, x1, y1)| (x1 - x0).hypot(y1 - y0))
    }

    pub fn centroid(&self) -> [f64; 2] {
        centroid(&self.positions)
    }

    pub fn to_sidecar(&self) -> String {
        let mut out = format!("layout {} {} {}\n", self.len(), fmt_sig9(self.stress), self.seed);
        out.push_str(&format!("# iterations {} converged {}\n", self.iterations_run, self.converged));
        for (id, p) in self.ids.iter().zip(&self.positions) {
            out.push_str(&format!("{}\t{}\t{}\n", escape_field(id), fmt_sig9(p[0]), fmt_sig9(p[1])));
        }
        out
    }

    pub fn from_sidecar(text: &str, origin: &str) -> Result<Layout> {
        let bad = |ln: usize, msg: &str| Error::parse(origin, ln, msg);
        let mut iterations_run = 0;
        let mut converged = false;
        for line in text.lines() {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() == 5 && f[0] == "#" && f[1] == "iterations" {
                iterations_run = f[2].parse().unwrap_or(0);
                converged = f[4] == "true";
            }
        }
        let mut lines = content_lines(text);
        let (ln, header) = lines.next().ok_or_else(|| bad(1, "empty layout sidecar"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "layout" {
            return Err(bad(ln, "expected `layout <n> <stress> <seed>` header"));
        }
        let n: usize = h[1].parse().map_err(|_| bad(ln, "bad n"))?;
        let stress: f64 = h[2].parse().map_err(|_| bad(ln, "bad stress"))?;
        let seed: u64 = h[3].parse().map_err(|_| bad(ln, "bad seed"))?;
        let mut ids = Vec::with_capacity(n);
        let mut positions = Vec::with_capacity(n);
        for (ln, line) in lines {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(bad(ln, "expected `<id>\\t<x>\\t<y>`"));
            }
            ids.push(unescape_field(f[0]));
            positions.push([
                f[1].parse().map_err(|_| bad(ln, "bad x"))?,
                f[2].parse().map_err(|_| bad(ln, "bad y"))?,
            ]);
        }
        if positions.len() != n {
            return Err(bad(ln, "position count does not match header"));
        }
        Ok(Layout {
            ids,
            positions,
            stress,
            seed,
            iterations_run,
            converged,
            stress_trace: vec![stress],
        })
    }
}

pub(crate) fn bounds_of(points: &[[f64; 2]]) -> Option<(f64, f64, f64, f64)> {
    let first = points.first()?;
    Some(points.iter().fold((first[0], first[1], first[0], first[1]), |(x0, y0, x1, y1), p| {
        (x0.min(p[0]), y0.min(p[1]), x1.max(p[0]), y1.max(p[1]))
    }))
}

fn centroid(points: &[[f64; 2]]) -> [f64; 2] {
    let n = points.len().max(1) as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
    [sx / n, sy / n]
}

/// Prior layout plus `(current index, prior index)` pairs for shared entities.
#[derive(Debug, Clone, PartialEq)]
pub struct Anchor {
    pub prior: Layout,
    pub pairs: Vec<(usize, usize)>,
}

impl Anchor {
    /// Pairs current ids with equal ids in the prior layout.
    pub fn by_ids(prior: Layout, current_ids: &[String]) -> Anchor {
        let pairs = current_ids
            .iter()
            .enumerate()
            .filter_map(|(i, id)| prior.index_of(id).map(|p| (i, p)))
            .collect();
        Anchor { prior, pairs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdsParams {
    pub max_iterations: usize,
    pub stress_tolerance: f64,
    /// Growth factor of the step length after an accepted step.
    pub learning_rate: f64,
    pub seed: u64,
    /// Number of seeded random starts for unanchored runs; the lowest final stress wins.
    pub starts: usize,
    pub anchor: Option<Anchor>,
}

impl Default for MdsParams {
    fn default() -> Self {
        MdsParams {
            max_iterations: 2000,
            stress_tolerance: 1e-7,
            learning_rate: 0.1,
            seed: 1,
            starts: 4,
            anchor: None,
        }
    }
}

impl MdsParams {
    pub fn with_seed(seed: u64) -> Self {
        MdsParams {
            seed,
            ..MdsParams::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Validation("max_iterations must be at least 1".into()));
        }
        if self.starts < 1 {
            return Err(Error::Validation("starts must be at least 1".into()));
        }
        if !(self.stress_tolerance > 0.0) {
            return Err(Error::Validation("stress_tolerance must be positive".into()));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Validation("learning_rate must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Normalized stress-1 against optimally scaled dissimilarities:
/// `sqrt(sum (delta - b d)^2 / sum (b d)^2)` over pairs `i < j`, where `delta`
/// are layout distances and `b = sum delta d / sum d^2`.
///
/// Zero when all dissimilarities are zero. Infinite when the layout has no
/// extent along any pair with positive dissimilarity.
pub fn stress(positions: &[[f64; 2]], d: &DissimilarityMatrix) -> Result<f64> {
    if positions.len() != d.n {
        return Err(Error::Dimension(format!(
            "{} positions for a {}x{} dissimilarity matrix",
            positions.len(),
            d.n,
            d.n
        )));
    }
    Ok(stress_unchecked(positions, d))
}

fn stress_unchecked(x: &[[f64; 2]], d: &DissimilarityMatrix) -> f64 {
    let n = x.len();
    let (mut sdd, mut sdl) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let dij = d.get(i, j);
            sdd += dij * dij;
            sdl += dij * dist(x[i], x[j]);
        }
    }
    if sdd == 0.0 {
        return 0.0;
    }
    if sdl <= 0.0 {
        return f64::INFINITY;
    }
    let b = sdl / sdd;
    let mut num = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let r = dist(x[i], x[j]) - b * d.get(i, j);
            num += r * r;
        }
    }
    (num / (b * b * sdd)).sqrt()
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// One Guttman transform with dissimilarities scaled to the layout.
fn guttman(x: &[[f64; 2]], d: &DissimilarityMatrix) -> Vec<[f64; 2]> {
    let n = x.len();
    let (mut sdd, mut sdl) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let dij = d.get(i, j);
            sdd += dij * dij;
            sdl += dij * dist(x[i], x[j]);
        }
    }
    let b = if sdd > 0.0 { sdl / sdd } else { 0.0 };
    let mut out = vec![[0.0; 2]; n];
    for i in 0..n {
        let mut acc = [0.0; 2];
        for j in 0..n {
            if i == j {
                continue;
            }
            let delta = dist(x[i], x[j]);
            if delta > 0.0 {
                let w = b * d.get(i, j) / delta;
                acc[0] += w * (x[i][0] - x[j][0]);
                acc[1] += w * (x[i][1] - x[j][1]);
            }
        }
        out[i] = [acc[0] / n as f64, acc[1] / n as f64];
    }
    out
}

struct Optimized {
    positions: Vec<[f64; 2]>,
    stress: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn optimize(d: &DissimilarityMatrix, mut x: Vec<[f64; 2]>, params: &MdsParams) -> Optimized {
    let mut s = stress_unchecked(&x, d);
    let mut trace = vec![s];
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iterations {
        if s == 0.0 {
            converged = true;
            break;
        }
        let target = guttman(&x, d);
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand: Vec<[f64; 2]> = x
                .iter()
                .zip(&target)
                .map(|(p, g)| [p[0] + step * (g[0] - p[0]), p[1] + step * (g[1] - p[1])])
                .collect();
            let sc = stress_unchecked(&cand, d);
            if sc <= s {
                accepted = Some((cand, sc));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, sc)) = accepted else {
            converged = true;
            break;
        };
        if s - sc < params.stress_tolerance {
            converged = true;
            break;
        }
        x = cand;
        s = sc;
        trace.push(s);
        iterations += 1;
        step = (step * (1.0 + params.learning_rate)).min(MAX_STEP);
    }
    Optimized {
        positions: x,
        stress: s,
        iterations,
        converged,
        trace,
    }
}

fn validate_input(d: &DissimilarityMatrix) -> Result<()> {
    if d.n == 0 {
        return Err(Error::Validation("cannot lay out zero entities".into()));
    }
    if d.entries.rows() != d.n || d.entries.cols() != d.n {
        return Err(Error::Dimension("dissimilarity matrix is not n x n".into()));
    }
    if let Some(v) = d.entries.as_slice().iter().find(|v| !v.is_finite()) {
        return Err(Error::Validation(format!("non-finite dissimilarity {v}")));
    }
    Ok(())
}

fn default_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Lays out `d` in the plane. With an anchor in `params` this is [`anchored_layout`].
pub fn mds_layout(d: &DissimilarityMatrix, params: &MdsParams) -> Result<Layout> {
    params.validate()?;
    validate_input(d)?;
    if let Some(anchor) = &params.anchor {
        return anchored_layout(d, &anchor.prior, &anchor.pairs, params);
    }
    Ok(unanchored(d, params))
}

fn unanchored(d: &DissimilarityMatrix, params: &MdsParams) -> Layout {
    let n = d.n;
    // a single entity, or entities that are all indistinguishable, coincide at the origin
    if n == 1 || d.entries.is_all_zero() {
        return Layout {
            ids: default_ids(n),
            positions: vec![[0.0, 0.0]; n],
            stress: 0.0,
            seed: params.seed,
            iterations_run: 0,
            converged: true,
            stress_trace: vec![0.0],
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<Optimized> = None;
    for _ in 0..params.starts.max(1) {
        let init: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let opt = optimize(d, init, params);
        if best.as_ref().is_none_or(|b| opt.stress < b.stress) {
            best = Some(opt);
        }
    }
    let opt = best.expect("at least one start");
    let c = centroid(&opt.positions);
    Layout {
        ids: default_ids(n),
        positions: opt.positions.iter().map(|p| [p[0] - c[0], p[1] - c[1]]).collect(),
        stress: opt.stress,
        seed: params.seed,
        iterations_run: opt.iterations,
        converged: opt.converged,
        stress_trace: opt.trace,
    }
}

/// Lays out `d` starting from a prior layout.
///
/// `shared` holds `(current index, prior index)` pairs. Shared entities start
/// at their prior positions; every other entity starts at the centroid of its
/// three nearest shared entities (by dissimilarity) plus seeded jitter of 1% of
/// the prior layout's diagonal. After optimization the layout is mapped onto
/// the prior frame by the similarity transform that best aligns the shared
/// entities. The result therefore lives in the prior's coordinates rather
/// than being centered.
pub fn anchored_layout(
    d: &DissimilarityMatrix,
    prior: &Layout,
    shared: &[(usize, usize)],
    params: &MdsParams,
) -> Result<Layout> {
    params.validate()?;
    validate_input(d)?;
    let plain = MdsParams {
        anchor: None,
        ..params.clone()
    };
    if shared.is_empty() {
        warn!("empty correspondence with prior layout; running unanchored");
        return Ok(unanchored(d, &plain));
    }
    let n = d.n;
    for &(cur, pri) in shared {
        if cur >= n || pri >= prior.len() {
            return Err(Error::Validation(format!("correspondence ({cur}, {pri}) out of range")));
        }
    }

    let mut init: Vec<Option<[f64; 2]>> = vec![None; n];
    for &(cur, pri) in shared {
        init[cur] = Some(prior.positions[pri]);
    }
    let shared_current: Vec<usize> = shared.iter().map(|&(c, _)| c).collect();
    let diagonal = prior.diagonal();
    let jitter = if diagonal > 0.0 { JITTER_FRACTION * diagonal } else { JITTER_FRACTION };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut positions = Vec::with_capacity(n);
    for i in 0..n {
        if let Some(p) = init[i] {
            positions.push(p);
            continue;
        }
        let mut near: Vec<usize> = shared_current.clone();
        near.sort_by(|&a, &b| d.get(i, a).total_cmp(&d.get(i, b)).then(a.cmp(&b)));
        near.truncate(NEIGHBORS_FOR_NEW);
        let base = centroid(&near.iter().map(|&j| init[j].expect("shared")).collect::<Vec<_>>());
        positions.push([
            base[0] + rng.gen_range(-jitter..=jitter),
            base[1] + rng.gen_range(-jitter..=jitter),
        ]);
    }

    let opt = optimize(d, positions, &plain);
    let src: Vec<[f64; 2]> = shared.iter().map(|&(c, _)| opt.positions[c]).collect();
    let dst: Vec<[f64; 2]> = shared.iter().map(|&(_, p)| prior.positions[p]).collect();
    let t = align(&src, &dst);
    Ok(Layout {
        ids: default_ids(n),
        positions: opt.positions.iter().map(|&p| t.apply(p)).collect(),
        stress: opt.stress,
        seed: params.seed,
        iterations_run: opt.iterations,
        converged: opt.converged,
        stress_trace: opt.trace,
    })
}
