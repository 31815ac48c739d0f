//! Digital elevation model, hill-shading and contour extraction.

mod contour;

use crate::error::{Error, Result};
use crate::mds::Layout;

pub use contour::{contours, default_interval, ContourSet, Polyline};

pub const MIN_GRID_SIZE: usize = 16;
pub const DEFAULT_MARGIN: f64 = 0.1;
/// Kernel radius of the truncated production path, in units of sigma.
pub const CUTOFF_SIGMAS: f64 = 4.0;

/// Raster frame: pixel size plus the world rectangle it shows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    /// `(xmin, ymin, xmax, ymax)` in layout coordinates.
    pub world_bounds: (f64, f64, f64, f64),
    pub margin_fraction: f64,
}

impl GridSpec {
    pub fn new(width: usize, height: usize, world_bounds: (f64, f64, f64, f64), margin_fraction: f64) -> Result<Self> {
        if width < MIN_GRID_SIZE || height < MIN_GRID_SIZE {
            return Err(Error::Validation(format!("grid must be at least {MIN_GRID_SIZE}x{MIN_GRID_SIZE}")));
        }
        let (x0, y0, x1, y1) = world_bounds;
        if !(x0 < x1 && y0 < y1) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::Validation("world bounds must be finite and strictly ordered".into()));
        }
        if !(0.0..0.5).contains(&margin_fraction) {
            return Err(Error::Validation("margin_fraction must lie in [0, 0.5)".into()));
        }
        Ok(GridSpec {
            width,
            height,
            world_bounds,
            margin_fraction,
        })
    }

    /// Frame around `points` whose bounding box fills the central `1 - 2 * margin`
    /// of the shorter relative side, with equal world units per pixel on both axes.
    pub fn fit(points: &[[f64; 2]], width: usize, height: usize, margin_fraction: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&margin_fraction) {
            return Err(Error::Validation("margin_fraction must lie in [0, 0.5)".into()));
        }
        let (x0, y0, x1, y1) = crate::mds::bounds_of(points).unwrap_or((0.0, 0.0, 0.0, 0.0));
        let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
        let mut ex = x1 - x0;
        let mut ey = y1 - y0;
        if ex <= 0.0 && ey <= 0.0 {
            ex = 1.0;
            ey = 1.0;
        }
        let grow = 1.0 / (1.0 - 2.0 * margin_fraction);
        let w_px = (width.max(2) - 1) as f64;
        let h_px = (height.max(2) - 1) as f64;
        let unit = (ex * grow / w_px).max(ey * grow / h_px);
        let half_w = unit * w_px / 2.0;
        let half_h = unit * h_px / 2.0;
        GridSpec::new(width, height, (cx - half_w, cy - half_h, cx + half_w, cy + half_h), margin_fraction)
    }

    /// Smallest frame of this pixel size containing both `self` and `other`'s world rectangles.
    pub fn union(&self, other: &GridSpec) -> Result<GridSpec> {
        let (a0, b0, a1, b1) = self.world_bounds;
        let (c0, d0, c1, d1) = other.world_bounds;
        let corners = [[a0.min(c0), b0.min(d0)], [a1.max(c1), b1.max(d1)]];
        GridSpec::fit(&corners, self.width, self.height, 0.0).map(|g| GridSpec {
            margin_fraction: self.margin_fraction,
            ..g
        })
    }

    /// World to pixel coordinates; pixel `(0, 0)` is the centre of the top-left cell.
    pub fn to_pixel(&self, p: [f64; 2]) -> [f64; 2] {
        let (x0, y0, x1, y1) = self.world_bounds;
        [
            (p[0] - x0) / (x1 - x0) * (self.width - 1) as f64,
            (y1 - p[1]) / (y1 - y0) * (self.height - 1) as f64,
        ]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let (x0, y0, x1, y1) = self.world_bounds;
        let tol = 1e-9 * ((x1 - x0) + (y1 - y0));
        p[0] >= x0 - tol && p[0] <= x1 + tol && p[1] >= y0 - tol && p[1] <= y1 + tol
    }

    pub fn cells(&self) -> usize {
        self.width * self.height
    }
}

/// Default Gaussian sigma in pixels: 4% of the shorter grid side.
pub fn default_sigma(spec: &GridSpec) -> f64 {
    0.04 * spec.width.min(spec.height) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelCutoff {
    /// Skip cells farther than four sigma from an entity.
    #[default]
    Truncated,
    /// Sum every entity into every cell.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeakScaling {
    #[default]
    Kloc,
    SqrtKloc,
}

impl PeakScaling {
    fn amplitude(self, kloc: f64) -> f64 {
        match self {
            PeakScaling::Kloc => kloc,
            PeakScaling::SqrtKloc => kloc.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DemOptions {
    pub cutoff: KernelCutoff,
    pub scaling: PeakScaling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dem {
    pub spec: GridSpec,
    /// Row-major, `height` rows of `width` cells.
    pub heights: Vec<f64>,
}

impl Dem {
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.heights[row * self.spec.width + col]
    }

    pub fn max_height(&self) -> f64 {
        self.heights.iter().copied().fold(0.0, f64::max)
    }

    /// Bilinear interpolation at a pixel-space point inside the grid.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let w = self.spec.width;
        let h = self.spec.height;
        let x = x.clamp(0.0, (w - 1) as f64);
        let y = y.clamp(0.0, (h - 1) as f64);
        let c0 = (x.floor() as usize).min(w - 2);
        let r0 = (y.floor() as usize).min(h - 2);
        let (fx, fy) = (x - c0 as f64, y - r0 as f64);
        let top = self.get(c0, r0) * (1.0 - fx) + self.get(c0 + 1, r0) * fx;
        let bottom = self.get(c0, r0 + 1) * (1.0 - fx) + self.get(c0 + 1, r0 + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    /// ASCII portable graymap, heights scaled so the maximum maps to 65535.
    pub fn to_pgm(&self) -> String {
        let max = self.max_height();
        let mut out = format!("P2\n{} {}\n65535\n", self.spec.width, self.spec.height);
        for row in self.heights.chunks(self.spec.width) {
            let vals: Vec<String> = row
                .iter()
                .map(|h| {
                    let v = if max > 0.0 { (h / max * 65535.0).round() } else { 0.0 };
                    (v as u32).to_string()
                })
                .collect();
            out.push_str(&vals.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Sums one Gaussian bump per entity: `kloc * exp(-r^2 / (2 sigma^2))` with `r`
/// the pixel distance to the entity's mapped position.
pub fn build_dem(layout: &Layout, sizes: &[f64], spec: &GridSpec, sigma: f64, options: DemOptions) -> Result<Dem> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Validation("sigma must be positive".into()));
    }
    if sizes.len() != layout.len() {
        return Err(Error::Dimension(format!("{} sizes for {} entities", sizes.len(), layout.len())));
    }
    if let Some(s) = sizes.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
        return Err(Error::Validation(format!("entity size {s} is not a non-negative number")));
    }
    let mut pixels = Vec::with_capacity(layout.len());
    for (i, p) in layout.positions.iter().enumerate() {
        if !spec.contains(*p) {
            let id = layout.ids.get(i).cloned().unwrap_or_else(|| i.to_string());
            return Err(Error::OutOfBounds { id, x: p[0], y: p[1] });
        }
        pixels.push(spec.to_pixel(*p));
    }

    let (w, h) = (spec.width, spec.height);
    let mut heights = vec![0.0; w * h];
    let two_s2 = 2.0 * sigma * sigma;
    let radius = CUTOFF_SIGMAS * sigma;
    for (p, &kloc) in pixels.iter().zip(sizes) {
        let amp = options.scaling.amplitude(kloc);
        if amp == 0.0 {
            continue;
        }
        let (c0, c1, r0, r1) = match options.cutoff {
            KernelCutoff::Exact => (0, w - 1, 0, h - 1),
            KernelCutoff::Truncated => (
                (p[0] - radius).floor().max(0.0) as usize,
                ((p[0] + radius).ceil().max(0.0) as usize).min(w - 1),
                (p[1] - radius).floor().max(0.0) as usize,
                ((p[1] + radius).ceil().max(0.0) as usize).min(h - 1),
            ),
        };
        for r in r0..=r1 {
            let dy = r as f64 - p[1];
            for c in c0..=c1 {
                let dx = c as f64 - p[0];
                let d2 = dx * dx + dy * dy;
                if options.cutoff == KernelCutoff::Truncated && d2 > radius * radius {
                    continue;
                }
                heights[r * w + c] += amp * (-d2 / two_s2).exp();
            }
        }
    }
    Ok(Dem { spec: *spec, heights })
}

/// Per-cell illumination in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shading {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl Shading {
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.width + col]
    }
}

pub const DEFAULT_AZIMUTH: f64 = 315.0;
pub const DEFAULT_ALTITUDE: f64 = 45.0;

/// Lambertian hill-shading with heights in pixel units.
pub fn hillshade(dem: &Dem, azimuth_deg: f64, altitude_deg: f64) -> Result<Shading> {
    hillshade_scaled(dem, azimuth_deg, altitude_deg, 1.0)
}

/// Hill-shading with heights multiplied by `z_factor` before differentiation.
///
/// Gradients use Horn's 3x3 weighted stencil; at the border the stencil index
/// is clamped and the difference divided by the actual span. Azimuth is
/// clockwise from north (up), altitude above the horizon.
pub fn hillshade_scaled(dem: &Dem, azimuth_deg: f64, altitude_deg: f64, z_factor: f64) -> Result<Shading> {
    if !(altitude_deg > 0.0 && altitude_deg <= 90.0) {
        return Err(Error::Validation("light altitude must lie in (0, 90] degrees".into()));
    }
    let (az, alt) = (azimuth_deg.to_radians(), altitude_deg.to_radians());
    let light = [az.sin() * alt.cos(), az.cos() * alt.cos(), alt.sin()];
    let (w, h) = (dem.spec.width, dem.spec.height);
    let z = |c: usize, r: usize| dem.get(c, r) * z_factor;
    let mut values = Vec::with_capacity(w * h);
    for r in 0..h {
        let (ru, rd) = (r.saturating_sub(1), (r + 1).min(h - 1));
        for c in 0..w {
            let (cl, cr) = (c.saturating_sub(1), (c + 1).min(w - 1));
            let east = (z(cr, ru) + 2.0 * z(cr, r) + z(cr, rd)) - (z(cl, ru) + 2.0 * z(cl, r) + z(cl, rd));
            let south = (z(cl, rd) + 2.0 * z(c, rd) + z(cr, rd)) - (z(cl, ru) + 2.0 * z(c, ru) + z(cr, ru));
            let dzdx = east / (4.0 * (cr - cl) as f64);
            let dzdy = -south / (4.0 * (rd - ru) as f64);
            let lit = (-dzdx * light[0] - dzdy * light[1] + light[2]) / (1.0 + dzdx * dzdx + dzdy * dzdy).sqrt();
            values.push(lit.clamp(0.0, 1.0));
        }
    }
    Ok(Shading { width: w, height: h, values })
}
