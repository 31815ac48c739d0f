//! Greedy collision-free placement of entity name labels.

/// Width and height of a label, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extent {
    pub width: f64,
    pub height: f64,
}

pub const ADVANCE_PER_EM: f64 = 0.6;
pub const LINE_HEIGHT_PER_EM: f64 = 1.2;

/// Fixed-advance text metrics. Empty text has no extent and is not labelled.
pub fn measure_label(text: &str, font_size: f64) -> Option<Extent> {
    let chars = text.chars().count();
    if chars == 0 || !(font_size > 0.0) {
        return None;
    }
    Some(Extent {
        width: ADVANCE_PER_EM * font_size * chars as f64,
        height: LINE_HEIGHT_PER_EM * font_size,
    })
}

/// Side of the anchor the label box extends towards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Corner {
    TopRight,
    TopLeft,
    BottomRight,
    BottomLeft,
}

/// Preference order of the first placement pass; later passes rotate it.
pub const CORNER_ORDER: [Corner; 4] = [Corner::TopRight, Corner::TopLeft, Corner::BottomRight, Corner::BottomLeft];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    /// Closed-rectangle test: boxes that share an edge or a corner intersect.
    pub fn intersects(&self, other: &Rect) -> bool {
        self.x0 <= other.x1 && other.x0 <= self.x1 && self.y0 <= other.y1 && other.y0 <= self.y1
    }

    pub fn inside(&self, outer: &Rect) -> bool {
        self.x0 >= outer.x0 && self.x1 <= outer.x1 && self.y0 >= outer.y0 && self.y1 <= outer.y1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelRequest {
    pub entity_id: String,
    pub text: String,
    /// Pixel coordinates, y growing downwards.
    pub anchor: [f64; 2],
    pub extent: Extent,
    pub priority: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelBox {
    pub entity_id: String,
    pub text: String,
    pub anchor: [f64; 2],
    pub corner: Corner,
    pub extent: Extent,
    pub priority: f64,
    pub visible: bool,
}

impl LabelBox {
    /// The box touches the anchor with the vertex opposite to its named corner.
    pub fn rect(&self) -> Rect {
        box_at(self.anchor, self.extent, self.corner)
    }
}

fn box_at(a: [f64; 2], e: Extent, corner: Corner) -> Rect {
    let (x0, x1) = match corner {
        Corner::TopRight | Corner::BottomRight => (a[0], a[0] + e.width),
        Corner::TopLeft | Corner::BottomLeft => (a[0] - e.width, a[0]),
    };
    let (y0, y1) = match corner {
        Corner::TopRight | Corner::TopLeft => (a[1] - e.height, a[1]),
        Corner::BottomRight | Corner::BottomLeft => (a[1], a[1] + e.height),
    };
    Rect { x0, y0, x1, y1 }
}

/// Result of one greedy pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub labels: Vec<LabelBox>,
    /// Visible count of every tried corner ordering, in rotation order.
    pub visible_per_ordering: Vec<usize>,
    pub chosen_ordering: usize,
}

impl Placement {
    pub fn visible_count(&self) -> usize {
        self.labels.iter().filter(|l| l.visible).count()
    }
}

/// Places labels greedily in descending priority. Each label takes the first
/// corner of the preference order whose box hits no earlier visible box (and
/// stays inside `canvas`, when given); otherwise it is hidden. The pass is
/// repeated for the four rotations of the preference order and the rotation
/// with most visible labels wins, ties going to the earlier rotation.
///
/// Output labels are in priority order (ties by input order).
pub fn place_labels(requests: &[LabelRequest], canvas: Option<Rect>) -> Placement {
    let mut order: Vec<usize> = (0..requests.len()).collect();
    order.sort_by(|&a, &b| requests[b].priority.total_cmp(&requests[a].priority).then(a.cmp(&b)));

    let mut best: Option<(usize, Vec<LabelBox>)> = None;
    let mut counts = Vec::with_capacity(4);
    for rotation in 0..CORNER_ORDER.len() {
        let prefs: Vec<Corner> = (0..4).map(|i| CORNER_ORDER[(i + rotation) % 4]).collect();
        let labels = greedy_pass(requests, &order, &prefs, canvas);
        let visible = labels.iter().filter(|l| l.visible).count();
        counts.push(visible);
        if best.as_ref().is_none_or(|(v, _)| visible > *v) {
            best = Some((visible, labels));
        }
    }
    let best_count = best.as_ref().map_or(0, |(v, _)| *v);
    Placement {
        labels: best.map(|(_, l)| l).unwrap_or_default(),
        chosen_ordering: counts.iter().position(|&c| c == best_count).unwrap_or(0),
        visible_per_ordering: counts,
    }
}

fn greedy_pass(requests: &[LabelRequest], order: &[usize], prefs: &[Corner], canvas: Option<Rect>) -> Vec<LabelBox> {
    let mut placed: Vec<Rect> = Vec::new();
    let mut out = Vec::with_capacity(order.len());
    for &i in order {
        let req = &requests[i];
        let usable = req.extent.width > 0.0 && req.extent.height > 0.0;
        let choice = prefs.iter().copied().find(|&corner| {
            let r = box_at(req.anchor, req.extent, corner);
            usable && canvas.is_none_or(|c| r.inside(&c)) && !placed.iter().any(|p| p.intersects(&r))
        });
        if let Some(corner) = choice {
            placed.push(box_at(req.anchor, req.extent, corner));
        }
        out.push(LabelBox {
            entity_id: req.entity_id.clone(),
            text: req.text.clone(),
            anchor: req.anchor,
            corner: choice.unwrap_or(prefs[0]),
            extent: req.extent,
            priority: req.priority,
            visible: choice.is_some(),
        });
    }
    out
}
