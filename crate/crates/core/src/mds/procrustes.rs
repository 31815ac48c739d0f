//! Least-squares similarity alignment of planar point sets.

/// `x -> scale * R * (F x - src_mean) + dst_mean`, with `F` an optional reflection of y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub reflect: bool,
    pub cos: f64,
    pub sin: f64,
    pub scale: f64,
    pub src_mean: [f64; 2],
    pub dst_mean: [f64; 2],
}

impl Similarity {
    pub fn identity() -> Self {
        Similarity {
            reflect: false,
            cos: 1.0,
            sin: 0.0,
            scale: 1.0,
            src_mean: [0.0, 0.0],
            dst_mean: [0.0, 0.0],
        }
    }

    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let y = if self.reflect { -p[1] } else { p[1] };
        let (x, y) = (p[0] - self.src_mean[0], y - self.src_mean[1]);
        [
            self.scale * (self.cos * x - self.sin * y) + self.dst_mean[0],
            self.scale * (self.sin * x + self.cos * y) + self.dst_mean[1],
        ]
    }
}

fn mean(points: &[[f64; 2]]) -> [f64; 2] {
    let n = points.len().max(1) as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
    [sx / n, sy / n]
}

/// Rotation (or reflection), uniform scale and translation minimizing
/// `sum |T(src_i) - dst_i|^2`. With fewer than two distinct source points only
/// the translation is determined.
pub fn align(src: &[[f64; 2]], dst: &[[f64; 2]]) -> Similarity {
    assert_eq!(src.len(), dst.len(), "point sets differ in length");
    if src.is_empty() {
        return Similarity::identity();
    }
    let best = [false, true]
        .into_iter()
        .map(|reflect| {
            let flipped: Vec<[f64; 2]> = src
                .iter()
                .map(|p| if reflect { [p[0], -p[1]] } else { *p })
                .collect();
            let sm = mean(&flipped);
            let dm = mean(dst);
            let (mut a, mut b, mut ss) = (0.0, 0.0, 0.0);
            for (p, q) in flipped.iter().zip(dst) {
                let (px, py) = (p[0] - sm[0], p[1] - sm[1]);
                let (qx, qy) = (q[0] - dm[0], q[1] - dm[1]);
                a += px * qx + py * qy;
                b += px * qy - py * qx;
                ss += px * px + py * py;
            }
            (reflect, a, b, ss, sm, dm)
        })
        .fold(None, |acc: Option<(bool, f64, f64, f64, [f64; 2], [f64; 2])>, cand| match acc {
            Some(best) if best.1.hypot(best.2) >= cand.1.hypot(cand.2) => Some(best),
            _ => Some(cand),
        })
        .expect("two candidates");
    let (reflect, a, b, ss, sm, dm) = best;
    let r = a.hypot(b);
    if ss <= 0.0 || r <= 0.0 {
        return Similarity {
            src_mean: mean(src),
            dst_mean: mean(dst),
            ..Similarity::identity()
        };
    }
    Similarity {
        reflect,
        cos: a / r,
        sin: b / r,
        scale: r / ss,
        src_mean: sm,
        dst_mean: dm,
    }
}
