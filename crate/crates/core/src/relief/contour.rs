//! Marching-squares iso-lines over a DEM.

use std::collections::BTreeMap;

use super::Dem;
use crate::error::{Error, Result};

const MAX_LEVELS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    /// Pixel-space points `(column, row)`; a closed line repeats its first point at the end.
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContourSet {
    pub levels: Vec<f64>,
    /// One list of polylines per level.
    pub polylines: Vec<Vec<Polyline>>,
}

impl ContourSet {
    pub fn is_empty(&self) -> bool {
        self.polylines.iter().all(Vec::is_empty)
    }
}

/// `max_height / 8` rounded to one significant digit; `None` for a flat zero DEM.
pub fn default_interval(max_height: f64) -> Option<f64> {
    let raw = max_height / 8.0;
    if !(raw > 0.0) || !raw.is_finite() {
        return None;
    }
    let mag = 10f64.powf(raw.log10().floor());
    Some(((raw / mag).round() * mag).max(mag))
}

/// Edge of the cell lattice between two adjacent pixel centres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EdgeKey {
    /// Between `(col, row)` and `(col + 1, row)`.
    Horizontal(usize, usize),
    /// Between `(col, row)` and `(col, row + 1)`.
    Vertical(usize, usize),
}

/// Iso-lines at `interval`, `2 * interval`, ... below the maximum height.
/// Saddle cells are disambiguated by the average of their four corners.
pub fn contours(dem: &Dem, interval: f64) -> Result<ContourSet> {
    if !(interval > 0.0) || !interval.is_finite() {
        return Err(Error::Validation("contour interval must be positive".into()));
    }
    let max = dem.max_height();
    if max / interval > MAX_LEVELS as f64 {
        return Err(Error::Validation(format!("contour interval {interval} yields too many levels")));
    }
    let mut set = ContourSet::default();
    let mut k = 1;
    loop {
        let level = interval * k as f64;
        if level >= max {
            break;
        }
        set.levels.push(level);
        set.polylines.push(trace_level(dem, level));
        k += 1;
    }
    Ok(set)
}

fn trace_level(dem: &Dem, level: f64) -> Vec<Polyline> {
    let (w, h) = (dem.spec.width, dem.spec.height);
    let above = |c: usize, r: usize| dem.get(c, r) > level;
    let crossing = |key: EdgeKey| -> [f64; 2] {
        let (c0, r0, c1, r1) = match key {
            EdgeKey::Horizontal(c, r) => (c, r, c + 1, r),
            EdgeKey::Vertical(c, r) => (c, r, c, r + 1),
        };
        let (z0, z1) = (dem.get(c0, r0), dem.get(c1, r1));
        let t = ((level - z0) / (z1 - z0)).clamp(0.0, 1.0);
        [c0 as f64 + t * (c1 - c0) as f64, r0 as f64 + t * (r1 - r0) as f64]
    };

    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for r in 0..h - 1 {
        for c in 0..w - 1 {
            let case = (above(c, r) as u8) << 3
                | (above(c + 1, r) as u8) << 2
                | (above(c + 1, r + 1) as u8) << 1
                | above(c, r + 1) as u8;
            if case == 0 || case == 15 {
                continue;
            }
            let top = EdgeKey::Horizontal(c, r);
            let bottom = EdgeKey::Horizontal(c, r + 1);
            let left = EdgeKey::Vertical(c, r);
            let right = EdgeKey::Vertical(c + 1, r);
            let centre_above = || (dem.get(c, r) + dem.get(c + 1, r) + dem.get(c + 1, r + 1) + dem.get(c, r + 1)) / 4.0 > level;
            match case {
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((top, right)),
                6 | 9 => segments.push((top, bottom)),
                7 | 8 => segments.push((left, top)),
                5 => {
                    if centre_above() {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    } else {
                        segments.push((left, bottom));
                        segments.push((top, right));
                    }
                }
                10 => {
                    if centre_above() {
                        segments.push((top, right));
                        segments.push((left, bottom));
                    } else {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    chain(&segments, crossing)
}

/// Joins segments sharing an edge crossing into maximal polylines: open ones
/// (starting at a boundary crossing) first, then closed loops.
fn chain(segments: &[(EdgeKey, EdgeKey)], point: impl Fn(EdgeKey) -> [f64; 2]) -> Vec<Polyline> {
    let mut incident: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (i, (a, b)) in segments.iter().enumerate() {
        incident.entry(*a).or_default().push(i);
        incident.entry(*b).or_default().push(i);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();

    let walk = |start: EdgeKey, first: usize, used: &mut Vec<bool>| -> Polyline {
        let mut points = vec![point(start)];
        let mut key = start;
        let mut seg = first;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            key = if a == key { b } else { a };
            points.push(point(key));
            match incident[&key].iter().find(|&&s| !used[s]) {
                Some(&next) => seg = next,
                None => break,
            }
        }
        Polyline { closed: key == start && points.len() > 2, points }
    };

    let starts: Vec<(EdgeKey, usize)> = incident
        .iter()
        .filter(|(_, segs)| segs.len() == 1)
        .map(|(k, segs)| (*k, segs[0]))
        .collect();
    for (key, seg) in starts {
        if !used[seg] {
            lines.push(walk(key, seg, &mut used));
        }
    }
    for seg in 0..segments.len() {
        if !used[seg] {
            lines.push(walk(segments[seg].0, seg, &mut used));
        }
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relief::GridSpec;

    fn dem_from(w: usize, h: usize, f: impl Fn(f64, f64) -> f64) -> Dem {
        let spec = GridSpec::new(w, h, (0.0, 0.0, 1.0, 1.0), 0.0).unwrap();
        let mut heights = Vec::with_capacity(w * h);
        for r in 0..h {
            for c in 0..w {
                heights.push(f(c as f64, r as f64));
            }
        }
        Dem { spec, heights }
    }

    #[test]
    fn interval_rounding() {
        assert_eq!(default_interval(0.3), Some(0.04));
        assert_eq!(default_interval(8.0), Some(1.0));
        assert_eq!(default_interval(0.0), None);
        let i = default_interval(123.0).unwrap();
        assert!((i - 20.0).abs() < 1e-9);
    }

    #[test]
    fn flat_zero_dem_is_empty() {
        let set = contours(&dem_from(16, 16, |_, _| 0.0), 0.5).unwrap();
        assert!(set.is_empty() && set.levels.is_empty());
        assert!(contours(&dem_from(16, 16, |_, _| 0.0), 0.0).is_err());
    }

    #[test]
    fn cone_gives_one_closed_ring_per_level() {
        let dem = dem_from(33, 33, |x, y| 20.0 - ((x - 16.0).powi(2) + (y - 16.0).powi(2)).sqrt());
        let set = contours(&dem, 5.0).unwrap();
        assert_eq!(set.levels, [5.0, 10.0, 15.0]);
        for lines in &set.polylines {
            assert_eq!(lines.len(), 1);
            assert!(lines[0].closed);
            assert_eq!(lines[0].points.first(), lines[0].points.last());
        }
    }

    #[test]
    fn ramp_gives_open_lines_touching_border() {
        let dem = dem_from(20, 16, |x, _| x);
        let set = contours(&dem, 4.5).unwrap();
        for lines in &set.polylines {
            assert_eq!(lines.len(), 1);
            let l = &lines[0];
            assert!(!l.closed);
            for p in [l.points[0], *l.points.last().unwrap()] {
                assert!(p[1] == 0.0 || p[1] == 15.0);
            }
        }
    }

    #[test]
    fn saddle_resolved_by_centre() {
        // checkerboard 2x2 with high centre average connects the high corners
        let mut dem = dem_from(16, 16, |_, _| 0.0);
        dem.heights[0] = 1.0;
        dem.heights[17] = 1.0;
        dem.heights[1] = 0.4;
        dem.heights[16] = 0.4;
        let set = contours(&dem, 0.5).unwrap();
        assert_eq!(set.polylines[0].len(), 1);
        // low centre average keeps the two peaks apart
        dem.heights[1] = 0.0;
        dem.heights[16] = 0.0;
        let set = contours(&dem, 0.5).unwrap();
        assert_eq!(set.polylines[0].len(), 2);
    }
}
