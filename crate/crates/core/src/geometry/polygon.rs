//! Planar polygon utilities on `[f64; 2]` vertex lists.

pub type P2 = [f64; 2];

#[inline]
pub fn cross(o: P2, a: P2, b: P2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

#[inline]
pub fn dist(a: P2, b: P2) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Signed shoelace area (positive for counter-clockwise vertex order).
pub fn signed_area(poly: &[P2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

pub fn area(poly: &[P2]) -> f64 {
    signed_area(poly).abs()
}

pub fn perimeter(poly: &[P2]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| dist(poly[i], poly[(i + 1) % n])).sum()
}

pub fn bbox(poly: &[P2]) -> (P2, P2) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in poly {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

pub fn unit_square() -> Vec<P2> {
    vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
}

pub fn translate(poly: &[P2], by: P2) -> Vec<P2> {
    poly.iter().map(|p| [p[0] + by[0], p[1] + by[1]]).collect()
}

/// Sutherland–Hodgman step: keeps `{p : a·p ≤ b}`. The subject may be non-convex; the
/// result then may contain zero-width bridges, which do not affect the area.
pub fn clip_halfplane(poly: &[P2], a: P2, b: f64) -> Vec<P2> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    if n == 0 {
        return out;
    }
    let f = |p: P2| a[0] * p[0] + a[1] * p[1] - b;
    let mut prev = poly[n - 1];
    let mut fp = f(prev);
    for &cur in poly {
        let fc = f(cur);
        if fc <= 0.0 {
            if fp > 0.0 {
                out.push(intersect(prev, cur, fp, fc));
            }
            out.push(cur);
        } else if fp <= 0.0 {
            out.push(intersect(prev, cur, fp, fc));
        }
        prev = cur;
        fp = fc;
    }
    out
}

#[inline]
fn intersect(p: P2, q: P2, fp: f64, fq: f64) -> P2 {
    let s = fp / (fp - fq);
    [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]
}

/// Clips `subject` by every edge of the convex counter-clockwise polygon `clip`.
pub fn clip_by_convex(subject: &[P2], clip: &[P2]) -> Vec<P2> {
    let mut out = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let p = clip[i];
        let q = clip[(i + 1) % n];
        // Inside is to the left of p→q: cross(p, q, x) ≥ 0.
        let a = [q[1] - p[1], -(q[0] - p[0])];
        let b = a[0] * p[0] + a[1] * p[1];
        out = clip_halfplane(&out, a, b);
    }
    out
}

/// A vertex together with the label of the edge that starts at it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Labelled<L> {
    pub p: P2,
    pub label: L,
}

/// Clips a convex labelled polygon by `{a·p ≤ b}`; the new edge along the clip line gets
/// `label`.
pub fn clip_labelled<L: Copy>(poly: &[Labelled<L>], a: P2, b: f64, label: L) -> Vec<Labelled<L>> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    if n == 0 {
        return out;
    }
    let f = |p: P2| a[0] * p[0] + a[1] * p[1] - b;
    let vals: Vec<f64> = poly.iter().map(|v| f(v.p)).collect();
    if vals.iter().all(|&v| v <= 0.0) {
        return poly.to_vec();
    }
    for i in 0..n {
        let cur = poly[i];
        let next = poly[(i + 1) % n];
        let (fc, fnx) = (vals[i], vals[(i + 1) % n]);
        if fc <= 0.0 {
            out.push(cur);
            if fnx > 0.0 {
                // Leaving: the clip edge starts at the exit point.
                out.push(Labelled {
                    p: intersect(cur.p, next.p, fc, fnx),
                    label,
                });
            }
        } else if fnx <= 0.0 {
            // Entering: the remainder of the original edge keeps its label.
            let p = intersect(cur.p, next.p, fc, fnx);
            if fnx < 0.0 {
                out.push(Labelled { p, label: cur.label });
            }
        }
    }
    dedup_labelled(out)
}

/// Removes consecutive vertices closer than 1e-15 (keeping the later vertex's label on
/// the surviving edge).
fn dedup_labelled<L: Copy>(mut v: Vec<Labelled<L>>) -> Vec<Labelled<L>> {
    let mut i = 0;
    while v.len() > 1 && i < v.len() {
        let j = (i + 1) % v.len();
        if dist(v[i].p, v[j].p) < 1e-15 {
            let label = v[j].label;
            v[i].label = label;
            v.remove(j);
            if j < i {
                i -= 1;
            }
        } else {
            i += 1;
        }
    }
    v
}

/// Even-odd point-in-polygon test.
pub fn contains(poly: &[P2], q: P2) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > q[1]) != (b[1] > q[1]) {
            let x = a[0] + (q[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if q[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `q` to the segment `[a, b]`.
pub fn segment_distance(q: P2, a: P2, b: P2) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let l2 = ab[0] * ab[0] + ab[1] * ab[1];
    let s = if l2 > 0.0 {
        (((q[0] - a[0]) * ab[0] + (q[1] - a[1]) * ab[1]) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(q, [a[0] + s * ab[0], a[1] + s * ab[1]])
}

/// Diameter of a point set by brute force over pairs (inputs are small).
pub fn diameter(pts: &[P2]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(dist(pts[i], pts[j]));
        }
    }
    d
}
