//! End-to-end runs: one snapshot to a map, or a sequence of snapshots to
//! consistent maps plus a stability report.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};

use crate::config::RunConfig;
use crate::corpus::{build_matrix, ingest, Corpus, IngestOptions, TermDocumentMatrix, Tokenizer};
use crate::error::{Error, Result};
use crate::labeling::{measure_label, place_labels, LabelRequest, Rect};
use crate::lsi::{default_rank, dissimilarity, dissimilarity_of, lsi_index, LsiSpace};
use crate::mds::{anchored_layout, mds_layout, Anchor, Layout, MdsParams};
use crate::relief::{
    build_dem, contours, default_interval, default_sigma, hillshade_scaled, DemOptions, GridSpec, KernelCutoff,
};
use crate::render::{compose, to_png, to_svg, Overlay, Palette};
use crate::sidecar::{content_lines, escape_field, fmt_sig9, unescape_field};
use crate::thematic::{edge_layer, glyph_layer, marker_layer, parse_edges, parse_rules};

/// Ordered `key<TAB>value` lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub entries: Vec<(String, String)>,
}

impl Report {
    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{}\t{}\n", escape_field(k), escape_field(v)))
            .collect()
    }

    pub fn parse(text: &str, origin: &str) -> Result<Report> {
        let mut report = Report::default();
        for (ln, line) in content_lines(text) {
            let (k, v) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, ln, "expected `key<TAB>value`"))?;
            report.push(unescape_field(k), unescape_field(v));
        }
        Ok(report)
    }
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))
}

fn snapshot_name(root: &Path, index: usize) -> String {
    root.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .filter(|n| !n.is_empty() && n != "." && n != "..")
        .unwrap_or_else(|| format!("snapshot-{}", index + 1))
}

fn tokenizer(config: &RunConfig) -> Tokenizer {
    Tokenizer {
        include_comments: !config.strip_comments,
        ..Tokenizer::default()
    }
}

fn load_corpus(config: &RunConfig, index: usize) -> Result<Corpus> {
    let root = &config.snapshots[index];
    let options = IngestOptions {
        include: config.include_patterns(),
        exclude: config.exclude.clone(),
        ..IngestOptions::default()
    };
    let corpus = ingest(root, &options, &snapshot_name(root, index))?;
    info!("snapshot {}: {} documents", corpus.snapshot, corpus.len());
    Ok(corpus)
}

fn mds_params(config: &RunConfig) -> MdsParams {
    MdsParams {
        max_iterations: config.max_iterations,
        stress_tolerance: config.stress_tolerance,
        learning_rate: config.learning_rate,
        seed: config.seed(),
        starts: config.starts,
        anchor: None,
    }
}

/// Matrix, latent space and unanchored layout of the first snapshot.
fn analyse(config: &RunConfig, corpus: &Corpus) -> Result<(TermDocumentMatrix, LsiSpace, Layout)> {
    let matrix = build_matrix(corpus, config.weighting, config.min_doc_freq, &tokenizer(config))?;
    let k = config.k.unwrap_or_else(|| default_rank(matrix.n_documents(), matrix.n_terms()));
    let space = lsi_index(&matrix, k)?;
    let d = dissimilarity(&space, config.metric);
    let layout = mds_layout(&d, &mds_params(config))?.with_ids(corpus.ids())?;
    info!("layout of {} entities, stress {:.4}", layout.len(), layout.stress);
    Ok((matrix, space, layout))
}

struct Rendered {
    svg: Option<String>,
    png: Option<Vec<u8>>,
    summary: Report,
}

fn render(config: &RunConfig, corpus: &Corpus, layout: &Layout, spec: &GridSpec) -> Result<Rendered> {
    let mut summary = Report::default();
    let sigma = config.sigma.unwrap_or_else(|| default_sigma(spec));
    let sizes: Vec<f64> = corpus.documents.iter().map(|d| d.kloc).collect();
    let options = DemOptions {
        cutoff: KernelCutoff::Truncated,
        scaling: config.peak,
    };
    let dem = build_dem(layout, &sizes, spec, sigma, options)?;
    let max = dem.max_height();
    let z_factor = if max > 0.0 {
        config.relief * spec.width.min(spec.height) as f64 / max
    } else {
        1.0
    };
    let shading = hillshade_scaled(&dem, config.azimuth, config.altitude, z_factor)?;
    let interval = config.contour_interval.or_else(|| default_interval(max));
    let contour_set = match interval {
        Some(step) => contours(&dem, step)?,
        None => Default::default(),
    };

    let requests: Vec<LabelRequest> = corpus
        .documents
        .iter()
        .zip(&layout.positions)
        .filter_map(|(doc, p)| {
            measure_label(&doc.display_name, config.font_size).map(|extent| LabelRequest {
                entity_id: doc.id.clone(),
                text: doc.display_name.clone(),
                anchor: spec.to_pixel(*p),
                extent,
                priority: doc.kloc,
            })
        })
        .collect();
    let canvas = Rect {
        x0: -0.5,
        y0: -0.5,
        x1: spec.width as f64 - 0.5,
        y1: spec.height as f64 - 0.5,
    };
    let placement = place_labels(&requests, Some(canvas));
    let visible = placement.visible_count();

    let mut overlays = Vec::new();
    if let Some(path) = &config.overlay_edges {
        let text = read_input(path)?;
        let layer = edge_layer(layout, &parse_edges(&text, &path.display().to_string())?);
        summary.push("edges", layer.edges.len());
        summary.push("edges_skipped", layer.skipped.len());
        overlays.push(Overlay::Edges(layer));
    }
    if let Some(path) = &config.overlay_glyphs {
        let text = read_input(path)?;
        let layer = glyph_layer(corpus, &parse_rules(&text, &path.display().to_string())?)?;
        summary.push("glyphs", layer.assignments.len());
        overlays.push(Overlay::Glyphs(layer));
    }
    if config.markers {
        overlays.push(Overlay::Markers(marker_layer(corpus)));
    }

    let scene = compose(&dem, &shading, &contour_set, placement.labels, overlays, Palette::for_dem(&dem), layout)?;
    summary.push("grid", format!("{}x{}", spec.width, spec.height));
    summary.push("sigma", fmt_sig9(sigma));
    summary.push("max_height", fmt_sig9(max));
    summary.push("contour_interval", interval.map(fmt_sig9).unwrap_or_else(|| "none".into()));
    summary.push("contour_levels", contour_set.levels.len());
    summary.push("labels_total", requests.len());
    summary.push("labels_visible", visible);
    let ratio = if requests.is_empty() { 1.0 } else { visible as f64 / requests.len() as f64 };
    summary.push("label_visibility_ratio", fmt_sig9(ratio));
    Ok(Rendered {
        svg: if config.format.svg() { Some(to_svg(&scene)?) } else { None },
        png: if config.format.png() { Some(to_png(&scene, config.png_scale)?) } else { None },
        summary,
    })
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))
}

fn layout_report(report: &mut Report, corpus: &Corpus, layout: &Layout) {
    report.push("snapshot", &corpus.snapshot);
    report.push("entities", corpus.len());
    report.push("corpus_fingerprint", corpus.fingerprint());
    report.push("stress", fmt_sig9(layout.stress));
    report.push("iterations", layout.iterations_run);
    report.push("converged", layout.converged);
}

fn space_report(report: &mut Report, config: &RunConfig, space: &LsiSpace) {
    report.push("vocabulary", space.terms.len());
    report.push("k", space.rank);
    report.push("weighting", space.weighting);
    report.push("metric", config.metric.as_str());
    report.push("seed", config.seed());
    report.push("space_digest", &space.source_digest);
}

fn write_outputs(dir: &Path, rendered: Rendered, report: &mut Report) -> Result<()> {
    report.entries.extend(rendered.summary.entries);
    if let Some(svg) = rendered.svg {
        write(dir, "map.svg", svg.as_bytes())?;
    }
    if let Some(png) = rendered.png {
        write(dir, "map.png", &png)?;
    }
    write(dir, "report.txt", report.to_text().as_bytes())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Single snapshot to `map.svg`/`map.png`, sidecars and `report.txt` in the output directory.
pub fn run_map(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    if config.snapshots.len() != 1 {
        return Err(Error::Validation(format!(
            "map takes exactly one snapshot, config names {}",
            config.snapshots.len()
        )));
    }
    let corpus = load_corpus(config, 0)?;
    let (matrix, space, layout) = analyse(config, &corpus)?;
    let spec = GridSpec::fit(&layout.positions, config.grid.0, config.grid.1, config.margin)?;
    let rendered = render(config, &corpus, &layout, &spec)?;

    let dir = &config.out;
    create_dir(dir)?;
    write(dir, "corpus.txt", corpus.to_sidecar().as_bytes())?;
    write(dir, "matrix.txt", matrix.to_sidecar().as_bytes())?;
    write(dir, "space.txt", space.to_sidecar().as_bytes())?;
    write(dir, "layout.txt", layout.to_sidecar().as_bytes())?;
    let mut report = Report::default();
    layout_report(&mut report, &corpus, &layout);
    space_report(&mut report, config, &space);
    write_outputs(dir, rendered, &mut report)?;
    Ok(report)
}

/// Where the per-snapshot outputs of an evolution run go.
pub fn snapshot_dir(out: &Path, index: usize) -> PathBuf {
    out.join(format!("snapshot-{:02}", index + 1))
}

/// Displacement of shared entities between two consecutive layouts.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub from: String,
    pub to: String,
    pub anchored: bool,
    pub shared: usize,
    pub added: usize,
    pub removed: usize,
    pub vocabulary_disjoint: usize,
    /// Bounding-box diagonal of the earlier layout.
    pub diagonal: f64,
    /// `(id, displacement)` in the later layout's order.
    pub displacements: Vec<(String, f64)>,
}

impl Transition {
    pub fn median_displacement(&self) -> f64 {
        median(self.displacements.iter().map(|(_, d)| *d).collect())
    }

    pub fn median_ratio(&self) -> f64 {
        ratio(self.median_displacement(), self.diagonal)
    }
}

fn ratio(x: f64, diagonal: f64) -> f64 {
    if diagonal > 0.0 {
        x / diagonal
    } else {
        0.0
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

pub fn transition(prev: &Layout, next: &Layout, vocabulary_disjoint: usize) -> Transition {
    let displacements: Vec<(String, f64)> = next
        .ids
        .iter()
        .zip(&next.positions)
        .filter_map(|(id, p)| prev.position_of(id).map(|q| (id.clone(), (p[0] - q[0]).hypot(p[1] - q[1]))))
        .collect();
    let shared = displacements.len();
    Transition {
        from: String::new(),
        to: String::new(),
        anchored: shared > 0,
        shared,
        added: next.len() - shared,
        removed: prev.len() - shared,
        vocabulary_disjoint,
        diagonal: prev.diagonal(),
        displacements,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub layouts: Vec<Layout>,
    pub transitions: Vec<Transition>,
    pub reports: Vec<Report>,
    pub stability: Report,
}

/// Every snapshot folded into the first snapshot's latent space, each layout
/// anchored on the previous one, all maps drawn in one common frame.
pub fn run_evolution(config: &RunConfig) -> Result<Evolution> {
    config.validate()?;
    if config.snapshots.len() < 2 {
        return Err(Error::Validation("evolve needs at least two snapshots".into()));
    }
    let tok = tokenizer(config);
    let params = mds_params(config);
    let first = load_corpus(config, 0)?;
    let (matrix, space, first_layout) = analyse(config, &first)?;
    let mut corpora = vec![first];
    let mut layouts = vec![first_layout];
    let mut transitions = Vec::new();

    for s in 1..config.snapshots.len() {
        let corpus = load_corpus(config, s)?;
        if corpus.is_empty() {
            return Err(Error::Validation(format!("snapshot {} has no documents", corpus.snapshot)));
        }
        let mut vectors = Vec::with_capacity(corpus.len());
        let mut disjoint = 0;
        for doc in &corpus.documents {
            let fold = space.fold_in(&space.term_vector(&tok.terms(&doc.text)))?;
            if fold.vocabulary_disjoint {
                disjoint += 1;
            }
            vectors.push(fold.vector);
        }
        if disjoint > 0 {
            warn!("{disjoint} documents of {} share no term with the first snapshot", corpus.snapshot);
        }
        let d = dissimilarity_of(&vectors, config.metric);
        let prev = layouts.last().expect("first layout");
        let ids = corpus.ids();
        let anchor = Anchor::by_ids(prev.clone(), &ids);
        let layout = if anchor.pairs.is_empty() {
            warn!("snapshot {} shares no entity with its predecessor; laying out unanchored", corpus.snapshot);
            mds_layout(&d, &params)?
        } else {
            anchored_layout(&d, prev, &anchor.pairs, &params)?
        }
        .with_ids(ids)?;
        let mut t = transition(prev, &layout, disjoint);
        t.from = corpora[s - 1].snapshot.clone();
        t.to = corpus.snapshot.clone();
        transitions.push(t);
        corpora.push(corpus);
        layouts.push(layout);
    }

    let all: Vec<[f64; 2]> = layouts.iter().flat_map(|l| l.positions.iter().copied()).collect();
    let spec = GridSpec::fit(&all, config.grid.0, config.grid.1, config.margin)?;
    let mut reports = Vec::new();
    for (s, (corpus, layout)) in corpora.iter().zip(&layouts).enumerate() {
        let dir = snapshot_dir(&config.out, s);
        create_dir(&dir)?;
        write(&dir, "corpus.txt", corpus.to_sidecar().as_bytes())?;
        write(&dir, "layout.txt", layout.to_sidecar().as_bytes())?;
        if s == 0 {
            write(&dir, "matrix.txt", matrix.to_sidecar().as_bytes())?;
            write(&dir, "space.txt", space.to_sidecar().as_bytes())?;
        }
        let mut report = Report::default();
        layout_report(&mut report, corpus, layout);
        space_report(&mut report, config, &space);
        if s > 0 {
            let t = &transitions[s - 1];
            report.push("anchored", t.anchored);
            report.push("vocabulary_disjoint", t.vocabulary_disjoint);
        }
        let rendered = render(config, corpus, layout, &spec)?;
        write_outputs(&dir, rendered, &mut report)?;
        reports.push(report);
    }

    let stability = stability_report(&layouts, &transitions);
    write(&config.out, "stability.txt", stability.to_text().as_bytes())?;
    Ok(Evolution {
        layouts,
        transitions,
        reports,
        stability,
    })
}

fn stability_report(layouts: &[Layout], transitions: &[Transition]) -> Report {
    let mut r = Report::default();
    r.push("snapshots", layouts.len());
    r.push("vocabulary_strategy", "fold-in");
    r.push(
        "vocabulary_note",
        "later snapshots are projected into the first snapshot's latent space; terms it lacks are ignored",
    );
    r.push("diagonal_reference", "bounding-box diagonal of the earlier layout");
    for (i, t) in transitions.iter().enumerate() {
        let p = format!("transition.{}", i + 1);
        r.push(format!("{p}.from"), &t.from);
        r.push(format!("{p}.to"), &t.to);
        r.push(format!("{p}.anchored"), t.anchored);
        r.push(format!("{p}.zero_overlap"), !t.anchored);
        r.push(format!("{p}.shared"), t.shared);
        r.push(format!("{p}.added"), t.added);
        r.push(format!("{p}.removed"), t.removed);
        r.push(format!("{p}.vocabulary_disjoint"), t.vocabulary_disjoint);
        r.push(format!("{p}.diagonal"), fmt_sig9(t.diagonal));
        r.push(format!("{p}.median_displacement"), fmt_sig9(t.median_displacement()));
        r.push(format!("{p}.median_displacement_ratio"), fmt_sig9(t.median_ratio()));
        for (id, d) in &t.displacements {
            r.push(format!("{p}.displacement.{id}"), format!("{} {}", fmt_sig9(*d), fmt_sig9(ratio(*d, t.diagonal))));
        }
    }
    r
}

/// Human-readable summary of any sidecar or report file.
pub fn inspect(text: &str, origin: &str) -> Result<String> {
    let head = content_lines(text).next().map(|(_, l)| l).unwrap_or("");
    let tag = head.split(['\t', ' ']).next().unwrap_or("");
    Ok(match tag {
        "corpus" => {
            let c = crate::corpus::parse_corpus_sidecar(text, origin)?;
            let kloc: f64 = c.documents.iter().map(|d| d.2).sum();
            format!(
                "corpus {}: {} documents, {:.3} kloc, {} files ({} skipped)\n",
                c.snapshot,
                c.documents.len(),
                kloc,
                c.files,
                c.skipped
            )
        }
        "tdm" => {
            let m = TermDocumentMatrix::from_sidecar(text, origin)?;
            let nnz = m.entries.as_slice().iter().filter(|v| **v != 0.0).count();
            format!(
                "term-document matrix: {} documents x {} terms, {} weighting, {} non-zero\n",
                m.n_documents(),
                m.n_terms(),
                m.weighting,
                nnz
            )
        }
        "lsi" => {
            let s = LsiSpace::from_sidecar(text, origin)?;
            let sv: Vec<String> = s.singular_values.iter().map(|v| format!("{v:.4}")).collect();
            format!(
                "latent space: {} entities, {} terms, k = {}, {} weighting\nsingular values: {}\n",
                s.n_entities(),
                s.terms.len(),
                s.rank,
                s.weighting,
                sv.join(" ")
            )
        }
        "layout" => {
            let l = Layout::from_sidecar(text, origin)?;
            let (x0, y0, x1, y1) = l.bounds().unwrap_or_default();
            format!(
                "layout: {} entities, stress {:.6}, seed {}, {} iterations (converged: {})\nbounds: [{x0:.4}, {x1:.4}] x [{y0:.4}, {y1:.4}], diagonal {:.4}\n",
                l.len(),
                l.stress,
                l.seed,
                l.iterations_run,
                l.converged,
                l.diagonal()
            )
        }
        _ => {
            let r = Report::parse(text, origin)?;
            let width = r.entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            r.entries.iter().map(|(k, v)| format!("{k:width$}  {v}\n")).collect()
        }
    })
}
