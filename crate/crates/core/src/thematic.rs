//! Overlay layers drawn on top of the base map.

use std::fmt;
use std::str::FromStr;

use log::warn;
use regex::Regex;

use crate::corpus::{Corpus, DocKind};
use crate::error::{Error, Result};
use crate::mds::Layout;
use crate::sidecar::content_lines;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GlyphTag {
    TestTube,
    Factory,
    Recycle,
    Puzzle,
}

impl GlyphTag {
    pub const ALL: [GlyphTag; 4] = [GlyphTag::TestTube, GlyphTag::Factory, GlyphTag::Recycle, GlyphTag::Puzzle];

    pub fn as_str(self) -> &'static str {
        match self {
            GlyphTag::TestTube => "test-tube",
            GlyphTag::Factory => "factory",
            GlyphTag::Recycle => "recycle",
            GlyphTag::Puzzle => "puzzle",
        }
    }

    /// Outline in a unit box centred on the anchor (`[-1, 1]` on both axes, y down).
    pub fn shape(self) -> GlyphShape {
        const TEST_TUBE: &[&[[f64; 2]]] = &[&[
            [-0.35, -1.0], [0.35, -1.0], [0.35, 0.55], [0.25, 0.8], [0.0, 0.9], [-0.25, 0.8], [-0.35, 0.55],
        ]];
        const FACTORY: &[&[[f64; 2]]] = &[&[
            [-1.0, 1.0], [-1.0, -0.2], [-0.4, 0.2], [-0.4, -0.2], [0.2, 0.2], [0.2, -1.0], [0.6, -1.0],
            [0.6, -0.2], [1.0, -0.2], [1.0, 1.0],
        ]];
        const RECYCLE: &[&[[f64; 2]]] = &[
            &[[-0.9, 0.6], [-0.15, -0.7], [0.1, -0.25], [-0.35, 0.6]],
            &[[0.0, -0.9], [0.9, 0.6], [0.4, 0.6], [-0.05, -0.2]],
            &[[-0.5, 0.9], [0.8, 0.9], [0.8, 0.75], [-0.5, 0.75]],
        ];
        const PUZZLE: &[&[[f64; 2]]] = &[&[
            [-0.8, -0.8], [-0.2, -0.8], [-0.2, -1.0], [0.2, -1.0], [0.2, -0.8], [0.8, -0.8], [0.8, -0.2],
            [1.0, -0.2], [1.0, 0.2], [0.8, 0.2], [0.8, 0.8], [-0.8, 0.8],
        ]];
        let polygons = match self {
            GlyphTag::TestTube => TEST_TUBE,
            GlyphTag::Factory => FACTORY,
            GlyphTag::Recycle => RECYCLE,
            GlyphTag::Puzzle => PUZZLE,
        };
        GlyphShape { polygons, size: 8.0 }
    }
}

impl fmt::Display for GlyphTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GlyphTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GlyphTag::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown glyph `{s}` (test-tube | factory | recycle | puzzle)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlyphShape {
    /// Closed polygons in unit-box coordinates.
    pub polygons: &'static [&'static [[f64; 2]]],
    /// Half-size in pixels of the unit box when drawn.
    pub size: f64,
}

#[derive(Debug, Clone)]
pub enum Matcher {
    /// Substring of the display name.
    Substring(String),
    /// Regular expression over the full id.
    Pattern(Regex),
    /// Exactly this id; must exist in the corpus.
    Id(String),
}

impl Matcher {
    fn matches(&self, id: &str, display_name: &str) -> bool {
        match self {
            Matcher::Substring(s) => display_name.contains(s.as_str()),
            Matcher::Pattern(re) => re.is_match(id),
            Matcher::Id(exact) => id == exact,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GlyphRule {
    pub glyph: GlyphTag,
    pub matcher: Matcher,
}

impl GlyphRule {
    pub fn substring(glyph: GlyphTag, needle: &str) -> Self {
        GlyphRule {
            glyph,
            matcher: Matcher::Substring(needle.to_string()),
        }
    }
}

/// Parses a rule file: one `glyph_tag <space> pattern` per line, `#` comments.
/// A pattern written `/.../` is a regular expression over the id, `=id` names
/// one entity, anything else is a substring of the display name.
pub fn parse_rules(text: &str, origin: &str) -> Result<Vec<GlyphRule>> {
    content_lines(text)
        .map(|(ln, line)| {
            let (tag, pattern) = line
                .trim()
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::parse(origin, ln, "expected `<glyph> <pattern>`"))?;
            let glyph: GlyphTag = tag.parse().map_err(|e: Error| Error::parse(origin, ln, e.to_string()))?;
            let pattern = pattern.trim();
            let matcher = if let Some(id) = pattern.strip_prefix('=') {
                Matcher::Id(id.to_string())
            } else if pattern.len() >= 2 && pattern.starts_with('/') && pattern.ends_with('/') {
                let re = Regex::new(&pattern[1..pattern.len() - 1])
                    .map_err(|e| Error::parse(origin, ln, format!("bad regex: {e}")))?;
                Matcher::Pattern(re)
            } else {
                Matcher::Substring(pattern.to_string())
            };
            Ok(GlyphRule { glyph, matcher })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GlyphLayer {
    /// `(entity id, glyph)` in corpus order; entities without a glyph are absent.
    pub assignments: Vec<(String, GlyphTag)>,
}

/// Assigns each document the glyph of the first matching rule.
pub fn glyph_layer(corpus: &Corpus, rules: &[GlyphRule]) -> Result<GlyphLayer> {
    for rule in rules {
        if let Matcher::Id(id) = &rule.matcher {
            if corpus.index_of(id).is_none() {
                return Err(Error::Validation(format!("glyph rule references unknown entity `{id}`")));
            }
        }
    }
    let assignments = corpus
        .documents
        .iter()
        .filter_map(|d| {
            rules
                .iter()
                .find(|r| r.matcher.matches(&d.id, &d.display_name))
                .map(|r| (d.id.clone(), r.glyph))
        })
        .collect();
    Ok(GlyphLayer { assignments })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

/// Parses `from_id to_id [weight]` lines; weight defaults to 1.
pub fn parse_edges(text: &str, origin: &str) -> Result<Vec<Edge>> {
    content_lines(text)
        .map(|(ln, line)| {
            let f: Vec<&str> = line.split_whitespace().collect();
            let weight = match f.len() {
                2 => 1.0,
                3 => f[2]
                    .parse::<f64>()
                    .ok()
                    .filter(|w| *w >= 0.0 && w.is_finite())
                    .ok_or_else(|| Error::parse(origin, ln, "weight must be a non-negative number"))?,
                _ => return Err(Error::parse(origin, ln, "expected `from to [weight]`")),
            };
            Ok(Edge {
                from: f[0].to_string(),
                to: f[1].to_string(),
                weight,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedEdge {
    pub from: String,
    pub to: String,
    pub weight: f64,
    /// Euclidean distance between the endpoints in layout coordinates.
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeStyle {
    /// Perpendicular offset of the quadratic control point, as a fraction of the chord.
    pub bend: f64,
    pub base_width: f64,
    pub width_per_log_weight: f64,
}

impl Default for EdgeStyle {
    fn default() -> Self {
        EdgeStyle {
            bend: 0.2,
            base_width: 0.5,
            width_per_log_weight: 1.0,
        }
    }
}

impl EdgeStyle {
    pub fn stroke_width(&self, weight: f64) -> f64 {
        self.base_width + self.width_per_log_weight * weight.ln_1p()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeLayer {
    pub edges: Vec<AnnotatedEdge>,
    pub style: EdgeStyle,
    /// Edges dropped because an endpoint is not in the layout.
    pub skipped: Vec<Edge>,
}

impl EdgeLayer {
    /// Edges longer than `threshold`, longest first.
    pub fn longer_than(&self, threshold: f64) -> Vec<&AnnotatedEdge> {
        let mut long: Vec<&AnnotatedEdge> = self.edges.iter().filter(|e| e.length > threshold).collect();
        long.sort_by(|a, b| b.length.total_cmp(&a.length));
        long
    }
}

pub fn edge_layer(layout: &Layout, edges: &[Edge]) -> EdgeLayer {
    let mut layer = EdgeLayer::default();
    for e in edges {
        match (layout.position_of(&e.from), layout.position_of(&e.to)) {
            (Some(a), Some(b)) => layer.edges.push(AnnotatedEdge {
                from: e.from.clone(),
                to: e.to.clone(),
                weight: e.weight,
                length: (a[0] - b[0]).hypot(a[1] - b[1]),
            }),
            _ => {
                warn!("skipping edge {} -> {}: endpoint not in layout", e.from, e.to);
                layer.skipped.push(e.clone());
            }
        }
    }
    layer
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarkerShape {
    Cross,
    Square,
    Triangle,
    Circle,
    Dot,
}

pub fn marker_for(kind: DocKind) -> MarkerShape {
    match kind {
        DocKind::Source => MarkerShape::Cross,
        DocKind::Markup => MarkerShape::Square,
        DocKind::Config => MarkerShape::Triangle,
        DocKind::Property => MarkerShape::Circle,
        DocKind::Other => MarkerShape::Dot,
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarkerLayer {
    /// `(entity id, marker)` in corpus order.
    pub markers: Vec<(String, MarkerShape)>,
}

pub fn marker_layer(corpus: &Corpus) -> MarkerLayer {
    MarkerLayer {
        markers: corpus.documents.iter().map(|d| (d.id.clone(), marker_for(d.kind))).collect(),
    }
}
