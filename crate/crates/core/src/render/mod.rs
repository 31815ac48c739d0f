//! Scene composition and deterministic SVG/PNG output.

mod raster;
mod svg;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::labeling::LabelBox;
use crate::mds::Layout;
use crate::relief::{ContourSet, Dem, GridSpec, Shading};
use crate::thematic::{EdgeLayer, GlyphLayer, MarkerLayer};

pub use raster::{terrain_png, to_png};
pub use svg::to_svg;

/// Fraction of the maximum height below which a cell is drawn as sea.
pub const SEA_LEVEL_FRACTION: f64 = 0.01;

const OCEAN: [f64; 3] = [198.0, 224.0, 240.0];
const LAND_RAMP: [(f64, [f64; 3]); 4] = [
    (0.0, [186.0, 219.0, 150.0]),
    (0.35, [214.0, 200.0, 130.0]),
    (0.7, [168.0, 128.0, 86.0]),
    (1.0, [250.0, 250.0, 250.0]),
];

/// Height and illumination to colour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Palette {
    pub sea_level: f64,
    pub max_height: f64,
}

impl Palette {
    pub fn for_dem(dem: &Dem) -> Palette {
        let max_height = dem.max_height();
        Palette {
            sea_level: SEA_LEVEL_FRACTION * max_height,
            max_height,
        }
    }

    pub fn color(&self, height: f64, illumination: f64) -> [u8; 3] {
        if !(height >= self.sea_level) || self.max_height <= 0.0 || height <= 0.0 {
            return OCEAN.map(|c| c as u8);
        }
        let span = (self.max_height - self.sea_level).max(f64::MIN_POSITIVE);
        let t = ((height - self.sea_level) / span).clamp(0.0, 1.0);
        let mut base = LAND_RAMP[LAND_RAMP.len() - 1].1;
        for pair in LAND_RAMP.windows(2) {
            let ((t0, c0), (t1, c1)) = (pair[0], pair[1]);
            if t <= t1 {
                let f = (t - t0) / (t1 - t0);
                base = [0, 1, 2].map(|i| c0[i] + f * (c1[i] - c0[i]));
                break;
            }
        }
        let shade = (0.25 + illumination.clamp(0.0, 1.0)).min(1.0);
        base.map(|c| (c * shade).round().clamp(0.0, 255.0) as u8)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Overlay {
    Edges(EdgeLayer),
    Glyphs(GlyphLayer),
    Markers(MarkerLayer),
}

impl Overlay {
    fn z_rank(&self) -> u8 {
        match self {
            Overlay::Edges(_) => 0,
            Overlay::Glyphs(_) | Overlay::Markers(_) => 1,
        }
    }

    fn entity_ids(&self) -> Vec<&str> {
        match self {
            Overlay::Edges(l) => l.edges.iter().flat_map(|e| [e.from.as_str(), e.to.as_str()]).collect(),
            Overlay::Glyphs(l) => l.assignments.iter().map(|(id, _)| id.as_str()).collect(),
            Overlay::Markers(l) => l.markers.iter().map(|(id, _)| id.as_str()).collect(),
        }
    }
}

/// Everything needed to draw one map. Drawing order is fixed:
/// terrain, contours, edge overlays, glyph and marker overlays, labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MapScene {
    pub spec: GridSpec,
    pub heights: Vec<f64>,
    pub shading: Shading,
    pub contours: ContourSet,
    pub labels: Vec<LabelBox>,
    pub overlays: Vec<Overlay>,
    pub palette: Palette,
    /// Pixel position of every entity, through the grid's single world-to-pixel transform.
    pub anchors: BTreeMap<String, [f64; 2]>,
}

impl MapScene {
    pub fn terrain_color(&self, col: usize, row: usize) -> [u8; 3] {
        let i = row * self.spec.width + col;
        self.palette.color(self.heights[i], self.shading.values[i])
    }
}

pub fn compose(
    dem: &Dem,
    shading: &Shading,
    contours: &ContourSet,
    labels: Vec<LabelBox>,
    mut overlays: Vec<Overlay>,
    palette: Palette,
    layout: &Layout,
) -> Result<MapScene> {
    let spec = dem.spec;
    if shading.width != spec.width || shading.height != spec.height || shading.values.len() != spec.cells() {
        return Err(Error::Dimension(format!(
            "shading is {}x{}, elevation grid is {}x{}",
            shading.width, shading.height, spec.width, spec.height
        )));
    }
    if dem.heights.len() != spec.cells() {
        return Err(Error::Dimension("elevation grid has the wrong number of cells".into()));
    }
    if contours.levels.len() != contours.polylines.len() {
        return Err(Error::Dimension("contour levels and polylines differ in count".into()));
    }
    if layout.ids.len() != layout.positions.len() {
        return Err(Error::Dimension("layout ids and positions differ in count".into()));
    }
    let anchors: BTreeMap<String, [f64; 2]> = layout
        .ids
        .iter()
        .zip(&layout.positions)
        .map(|(id, p)| (id.clone(), spec.to_pixel(*p)))
        .collect();
    for overlay in &overlays {
        if let Some(id) = overlay.entity_ids().into_iter().find(|id| !anchors.contains_key(*id)) {
            return Err(Error::Validation(format!("overlay references entity `{id}` missing from the layout")));
        }
    }
    if let Some(l) = labels.iter().find(|l| !anchors.contains_key(&l.entity_id)) {
        return Err(Error::Validation(format!("label for unknown entity `{}`", l.entity_id)));
    }
    overlays.sort_by_key(Overlay::z_rank);
    Ok(MapScene {
        spec,
        heights: dem.heights.clone(),
        shading: shading.clone(),
        contours: contours.clone(),
        labels,
        overlays,
        palette,
        anchors,
    })
}

/// Quadratic control point bending the chord `a -> b` to its left by `bend * |ab|`.
pub(crate) fn control_point(a: [f64; 2], b: [f64; 2], bend: f64) -> [f64; 2] {
    let (mx, my) = ((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0);
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    [mx - bend * dy, my + bend * dx]
}
