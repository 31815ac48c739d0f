use std::fmt::Write;

use base64::Engine;

use super::{control_point, raster::terrain_png, MapScene, Overlay};
use crate::error::Result;
use crate::thematic::MarkerShape;

/// Three-decimal number formatting without negative zero.
fn n(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && c != '\t' => out.push('?'),
            c => out.push(c),
        }
    }
    out
}

/// SVG 1.1 document: the terrain as an embedded PNG, vectors for everything else.
pub fn to_svg(scene: &MapScene) -> Result<String> {
    let (w, h) = (scene.spec.width, scene.spec.height);
    let png = terrain_png(scene)?;
    let data = base64::engine::general_purpose::STANDARD.encode(png);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"-0.5 -0.5 {w} {h}\">"
    );
    let _ = writeln!(
        out,
        "<image id=\"terrain\" x=\"-0.5\" y=\"-0.5\" width=\"{w}\" height=\"{h}\" image-rendering=\"pixelated\" xlink:href=\"data:image/png;base64,{data}\"/>"
    );

    out.push_str("<g id=\"contours\" fill=\"none\" stroke=\"#5a4632\" stroke-opacity=\"0.55\" stroke-width=\"0.6\">\n");
    for (level, lines) in scene.contours.levels.iter().zip(&scene.contours.polylines) {
        for line in lines {
            let mut d = String::new();
            for (i, p) in line.points.iter().enumerate() {
                let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { " L" }, n(p[0]), n(p[1]));
            }
            if line.closed {
                d.push_str(" Z");
            }
            let _ = writeln!(out, "<path data-level=\"{}\" d=\"{d}\"/>", n(*level));
        }
    }
    out.push_str("</g>\n");

    for overlay in &scene.overlays {
        match overlay {
            Overlay::Edges(layer) => {
                out.push_str("<g class=\"edges\" fill=\"none\" stroke=\"#b03a2e\" stroke-opacity=\"0.8\">\n");
                for e in &layer.edges {
                    if e.from == e.to {
                        continue;
                    }
                    let (a, b) = (scene.anchors[&e.from], scene.anchors[&e.to]);
                    let c = control_point(a, b, layer.style.bend);
                    let _ = writeln!(
                        out,
                        "<path d=\"M{} {} Q{} {} {} {}\" stroke-width=\"{}\"/>",
                        n(a[0]), n(a[1]), n(c[0]), n(c[1]), n(b[0]), n(b[1]),
                        n(layer.style.stroke_width(e.weight))
                    );
                }
                out.push_str("</g>\n");
            }
            Overlay::Glyphs(layer) => {
                out.push_str("<g class=\"glyphs\" fill=\"#ffffff\" stroke=\"#202020\" stroke-width=\"0.8\">\n");
                for (id, tag) in &layer.assignments {
                    let a = scene.anchors[id];
                    let shape = tag.shape();
                    let mut d = String::new();
                    for poly in shape.polygons {
                        for (i, p) in poly.iter().enumerate() {
                            let x = a[0] + p[0] * shape.size;
                            let y = a[1] + p[1] * shape.size;
                            let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { " L" }, n(x), n(y));
                        }
                        d.push_str(" Z ");
                    }
                    let _ = writeln!(out, "<path data-glyph=\"{tag}\" d=\"{}\"/>", d.trim_end());
                }
                out.push_str("</g>\n");
            }
            Overlay::Markers(layer) => {
                out.push_str("<g class=\"markers\" fill=\"none\" stroke=\"#1a1a1a\" stroke-width=\"1\">\n");
                for (id, shape) in &layer.markers {
                    let a = scene.anchors[id];
                    let s = 3.0;
                    let _ = match shape {
                        MarkerShape::Cross => writeln!(
                            out,
                            "<path d=\"M{} {} L{} {} M{} {} L{} {}\"/>",
                            n(a[0] - s), n(a[1] - s), n(a[0] + s), n(a[1] + s),
                            n(a[0] - s), n(a[1] + s), n(a[0] + s), n(a[1] - s)
                        ),
                        MarkerShape::Square => writeln!(
                            out,
                            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>",
                            n(a[0] - s), n(a[1] - s), n(2.0 * s), n(2.0 * s)
                        ),
                        MarkerShape::Triangle => writeln!(
                            out,
                            "<path d=\"M{} {} L{} {} L{} {} Z\"/>",
                            n(a[0]), n(a[1] - s), n(a[0] + s), n(a[1] + s), n(a[0] - s), n(a[1] + s)
                        ),
                        MarkerShape::Circle => writeln!(out, "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>", n(a[0]), n(a[1]), n(s)),
                        MarkerShape::Dot => writeln!(
                            out,
                            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#1a1a1a\"/>",
                            n(a[0]), n(a[1]), n(1.2)
                        ),
                    };
                }
                out.push_str("</g>\n");
            }
        }
    }

    out.push_str("<g id=\"labels\" font-family=\"monospace\" fill=\"#111111\">\n");
    for label in scene.labels.iter().filter(|l| l.visible) {
        let r = label.rect();
        let size = label.extent.height / crate::labeling::LINE_HEIGHT_PER_EM;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"{}\">{}</text>",
            n(r.x0),
            n(r.y0 + size),
            n(size),
            escape_xml(&label.text)
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
