use font8x8::legacy::BASIC_LEGACY;

use super::{control_point, MapScene, Overlay};
use crate::error::{Error, Result};
use crate::labeling::{ADVANCE_PER_EM, LINE_HEIGHT_PER_EM};
use crate::thematic::MarkerShape;

struct Canvas {
    width: usize,
    height: usize,
    scale: f64,
    rgb: Vec<u8>,
}

impl Canvas {
    fn blend(&mut self, x: i64, y: i64, color: [u8; 3], alpha: f64) {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return;
        }
        let i = (y as usize * self.width + x as usize) * 3;
        for c in 0..3 {
            let old = self.rgb[i + c] as f64;
            self.rgb[i + c] = (old + alpha * (color[c] as f64 - old)).round() as u8;
        }
    }

    /// Canvas pixel of a map-space point (cell centres at integers).
    fn map(&self, p: [f64; 2]) -> [f64; 2] {
        [(p[0] + 0.5) * self.scale, (p[1] + 0.5) * self.scale]
    }

    fn line(&mut self, a: [f64; 2], b: [f64; 2], width: f64, color: [u8; 3], alpha: f64) {
        let (a, b) = (self.map(a), self.map(b));
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let steps = (len * 2.0).ceil().max(1.0) as usize;
        let half = (width * self.scale / 2.0).max(0.5);
        let r = half.ceil() as i64;
        let mut last = None;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let (x, y) = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]));
            let (cx, cy) = (x.floor() as i64, y.floor() as i64);
            if last == Some((cx, cy)) {
                continue;
            }
            last = Some((cx, cy));
            for dy in -r + 1..r {
                for dx in -r + 1..r {
                    self.blend(cx + dx, cy + dy, color, alpha);
                }
            }
            if r <= 1 {
                self.blend(cx, cy, color, alpha);
            }
        }
    }

    /// Even-odd scanline fill of polygons given in map space.
    fn fill(&mut self, polygons: &[Vec<[f64; 2]>], color: [u8; 3], alpha: f64) {
        let mapped: Vec<Vec<[f64; 2]>> = polygons.iter().map(|p| p.iter().map(|q| self.map(*q)).collect()).collect();
        let (mut y0, mut y1) = (f64::MAX, f64::MIN);
        for p in mapped.iter().flatten() {
            y0 = y0.min(p[1]);
            y1 = y1.max(p[1]);
        }
        if y0 > y1 {
            return;
        }
        for y in y0.floor().max(0.0) as i64..=(y1.ceil() as i64).min(self.height as i64 - 1) {
            let sy = y as f64 + 0.5;
            let mut xs = Vec::new();
            for poly in &mapped {
                for i in 0..poly.len() {
                    let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
                    if (p[1] <= sy) != (q[1] <= sy) {
                        xs.push(p[0] + (sy - p[1]) / (q[1] - p[1]) * (q[0] - p[0]));
                    }
                }
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks(2) {
                if let [xa, xb] = pair {
                    for x in (xa - 0.5).ceil() as i64..=(xb - 0.5).floor() as i64 {
                        self.blend(x, y, color, alpha);
                    }
                }
            }
        }
    }

    fn outline(&mut self, poly: &[[f64; 2]], width: f64, color: [u8; 3]) {
        for i in 0..poly.len() {
            self.line(poly[i], poly[(i + 1) % poly.len()], width, color, 1.0);
        }
    }

    fn disc(&mut self, c: [f64; 2], r: f64, color: [u8; 3], alpha: f64) {
        let poly: Vec<[f64; 2]> = (0..24)
            .map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 24.0;
                [c[0] + r * a.cos(), c[1] + r * a.sin()]
            })
            .collect();
        self.fill(&[poly], color, alpha);
    }

    fn text(&mut self, origin: [f64; 2], size: f64, text: &str, color: [u8; 3]) {
        let o = self.map(origin);
        let advance = ADVANCE_PER_EM * size * self.scale;
        let glyph_h = size * self.scale;
        for (k, ch) in text.chars().enumerate() {
            let code = ch as usize;
            let bitmap = if code < 128 { BASIC_LEGACY[code] } else { BASIC_LEGACY[b'?' as usize] };
            let left = o[0] + k as f64 * advance;
            for py in o[1].floor() as i64..(o[1] + glyph_h).ceil() as i64 {
                let gy = ((py as f64 + 0.5 - o[1]) / glyph_h * 8.0).floor();
                if !(0.0..8.0).contains(&gy) {
                    continue;
                }
                for px in left.floor() as i64..(left + advance).ceil() as i64 {
                    let gx = ((px as f64 + 0.5 - left) / advance * 8.0).floor();
                    if !(0.0..8.0).contains(&gx) {
                        continue;
                    }
                    if bitmap[gy as usize] >> (gx as u32) & 1 == 1 {
                        self.blend(px, py, color, 1.0);
                    }
                }
            }
        }
    }
}

fn encode(width: usize, height: usize, rgb: &[u8]) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut bytes, width as u32, height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        enc.set_compression(png::Compression::Default);
        enc.set_filter(png::FilterType::Sub);
        enc.set_adaptive_filter(png::AdaptiveFilterType::NonAdaptive);
        let mut writer = enc.write_header().map_err(|e| Error::Encode(e.to_string()))?;
        writer.write_image_data(rgb).map_err(|e| Error::Encode(e.to_string()))?;
    }
    Ok(bytes)
}

fn terrain_rgb(scene: &MapScene, scale: usize) -> Vec<u8> {
    let (w, h) = (scene.spec.width, scene.spec.height);
    let mut rgb = vec![0u8; w * scale * h * scale * 3];
    for r in 0..h {
        for c in 0..w {
            let color = scene.terrain_color(c, r);
            for dy in 0..scale {
                let row = r * scale + dy;
                for dx in 0..scale {
                    let i = (row * w * scale + c * scale + dx) * 3;
                    rgb[i..i + 3].copy_from_slice(&color);
                }
            }
        }
    }
    rgb
}

/// The shaded terrain alone, one pixel per cell.
pub fn terrain_png(scene: &MapScene) -> Result<Vec<u8>> {
    encode(scene.spec.width, scene.spec.height, &terrain_rgb(scene, 1))
}

/// Truecolor PNG of the full composition, each grid cell drawn as `scale x scale` pixels.
pub fn to_png(scene: &MapScene, scale: usize) -> Result<Vec<u8>> {
    if scale < 1 {
        return Err(Error::Validation("PNG scale must be at least 1".into()));
    }
    let mut canvas = Canvas {
        width: scene.spec.width * scale,
        height: scene.spec.height * scale,
        scale: scale as f64,
        rgb: terrain_rgb(scene, scale),
    };

    for lines in &scene.contours.polylines {
        for line in lines {
            for seg in line.points.windows(2) {
                canvas.line(seg[0], seg[1], 0.6 / scale as f64, [90, 70, 50], 0.55);
            }
        }
    }

    for overlay in &scene.overlays {
        match overlay {
            Overlay::Edges(layer) => {
                for e in layer.edges.iter().filter(|e| e.from != e.to) {
                    let (a, b) = (scene.anchors[&e.from], scene.anchors[&e.to]);
                    let c = control_point(a, b, layer.style.bend);
                    let width = layer.style.stroke_width(e.weight);
                    let mut prev = a;
                    for s in 1..=32 {
                        let t = s as f64 / 32.0;
                        let u = 1.0 - t;
                        let p = [
                            u * u * a[0] + 2.0 * u * t * c[0] + t * t * b[0],
                            u * u * a[1] + 2.0 * u * t * c[1] + t * t * b[1],
                        ];
                        canvas.line(prev, p, width, [176, 58, 46], 0.8);
                        prev = p;
                    }
                }
            }
            Overlay::Glyphs(layer) => {
                for (id, tag) in &layer.assignments {
                    let a = scene.anchors[id];
                    let shape = tag.shape();
                    let polys: Vec<Vec<[f64; 2]>> = shape
                        .polygons
                        .iter()
                        .map(|p| p.iter().map(|q| [a[0] + q[0] * shape.size, a[1] + q[1] * shape.size]).collect())
                        .collect();
                    canvas.fill(&polys, [255, 255, 255], 1.0);
                    for p in &polys {
                        canvas.outline(p, 0.8, [32, 32, 32]);
                    }
                }
            }
            Overlay::Markers(layer) => {
                let ink = [26, 26, 26];
                for (id, shape) in &layer.markers {
                    let a = scene.anchors[id];
                    let s = 3.0;
                    match shape {
                        MarkerShape::Cross => {
                            canvas.line([a[0] - s, a[1] - s], [a[0] + s, a[1] + s], 1.0, ink, 1.0);
                            canvas.line([a[0] - s, a[1] + s], [a[0] + s, a[1] - s], 1.0, ink, 1.0);
                        }
                        MarkerShape::Square => canvas.outline(
                            &[[a[0] - s, a[1] - s], [a[0] + s, a[1] - s], [a[0] + s, a[1] + s], [a[0] - s, a[1] + s]],
                            1.0,
                            ink,
                        ),
                        MarkerShape::Triangle => {
                            canvas.outline(&[[a[0], a[1] - s], [a[0] + s, a[1] + s], [a[0] - s, a[1] + s]], 1.0, ink)
                        }
                        MarkerShape::Circle => {
                            let ring: Vec<[f64; 2]> = (0..24)
                                .map(|i| {
                                    let t = i as f64 * std::f64::consts::TAU / 24.0;
                                    [a[0] + s * t.cos(), a[1] + s * t.sin()]
                                })
                                .collect();
                            canvas.outline(&ring, 1.0, ink);
                        }
                        MarkerShape::Dot => canvas.disc(a, 1.2, ink, 1.0),
                    }
                }
            }
        }
    }

    for label in scene.labels.iter().filter(|l| l.visible) {
        let r = label.rect();
        let size = label.extent.height / LINE_HEIGHT_PER_EM;
        canvas.text([r.x0, r.y0 + 0.1 * size], size, &label.text, [17, 17, 17]);
    }
    encode(canvas.width, canvas.height, &canvas.rgb)
}
