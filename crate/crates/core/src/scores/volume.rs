//! Volume scores `ν⁻`, `ν⁺` and the Voronoi volume estimator.

use super::Context;
use crate::error::Result;
use crate::geometry::polygon::{self, P2};
use crate::geometry::{Point, Region};
use crate::voronoi::BoundaryMode;

/// `A`'s polygonization with a bucket grid over its boundary segments, used to reject
/// cells that cannot meet `∂A`.
#[derive(Clone, Debug)]
pub struct RegionPolygon {
    pub poly: Vec<P2>,
    pub area: f64,
    pub mode: BoundaryMode,
    segs: Vec<(P2, P2)>,
    grid: Vec<Vec<u32>>,
    g: usize,
    margin: f64,
    lo: P2,
    hi: P2,
}

fn on_side(a: P2, b: P2) -> Option<(usize, f64)> {
    (0..2).find_map(|k| {
        [0.0, 1.0]
            .into_iter()
            .find(|&s| a[k] == s && b[k] == s)
            .map(|s| (k, s))
    })
}

impl RegionPolygon {
    pub fn new(region: &Region, chord_tol: f64, mode: BoundaryMode) -> Result<RegionPolygon> {
        let poly = region.polygon_2d(chord_tol)?;
        let area = polygon::area(&poly);
        let (lo, hi) = polygon::bbox(&poly);
        let m = poly.len();
        let mut segs = Vec::new();
        for k in 0..m {
            let (a, b) = (poly[k], poly[(k + 1) % m]);
            if a == b {
                continue;
            }
            if let Some((axis, s)) = on_side(a, b) {
                // On the square's edge: never a boundary when clipping; on the torus it is
                // one only if the glued side is outside A.
                if mode == BoundaryMode::Clip {
                    continue;
                }
                let mut q = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
                q[axis] = if s == 0.0 { 1.0 - 1e-9 } else { 1e-9 };
                if polygon::contains(&poly, q) {
                    continue;
                }
            }
            segs.push((a, b));
        }
        let g = ((segs.len() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let mut grid = vec![Vec::new(); g * g];
        let cell_of = |v: f64| ((v * g as f64).floor().max(0.0) as usize).min(g - 1);
        for (idx, &(a, b)) in segs.iter().enumerate() {
            let (x0, x1) = (cell_of(a[0].min(b[0])), cell_of(a[0].max(b[0])));
            let (y0, y1) = (cell_of(a[1].min(b[1])), cell_of(a[1].max(b[1])));
            for gx in x0..=x1 {
                for gy in y0..=y1 {
                    grid[gy * g + gx].push(idx as u32);
                }
            }
        }
        Ok(RegionPolygon {
            poly,
            area,
            mode,
            segs,
            grid,
            g,
            margin: 2.0 * chord_tol,
            lo,
            hi,
        })
    }

    /// Whether a boundary segment meets the convex `cell` shifted by `by`, expanded by
    /// the margin.
    fn hits(&self, cell: &[P2], by: P2) -> bool {
        let (lo, hi) = polygon::bbox(cell);
        let lo = [lo[0] + by[0] - self.margin, lo[1] + by[1] - self.margin];
        let hi = [hi[0] + by[0] + self.margin, hi[1] + by[1] + self.margin];
        if hi[0] < 0.0 || hi[1] < 0.0 || lo[0] > 1.0 || lo[1] > 1.0 {
            return false;
        }
        let g = self.g as f64;
        let c = |v: f64| ((v * g).floor().max(0.0) as usize).min(self.g - 1);
        for gx in c(lo[0])..=c(hi[0]) {
            for gy in c(lo[1])..=c(hi[1]) {
                for &s in &self.grid[gy * self.g + gx] {
                    let (a, b) = self.segs[s as usize];
                    let a = [a[0] - by[0], a[1] - by[1]];
                    let b = [b[0] - by[0], b[1] - by[1]];
                    if segment_meets_convex(a, b, cell, self.margin) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn shifts(&self) -> &'static [P2] {
        const ALL: [P2; 9] = [
            [0.0, 0.0],
            [-1.0, 0.0],
            [1.0, 0.0],
            [0.0, -1.0],
            [0.0, 1.0],
            [-1.0, -1.0],
            [-1.0, 1.0],
            [1.0, -1.0],
            [1.0, 1.0],
        ];
        match self.mode {
            BoundaryMode::Clip => &ALL[..1],
            BoundaryMode::Torus => &ALL,
        }
    }

    /// Whether the cell polygon may meet `∂A` (possibly through a torus translate).
    pub fn may_cross(&self, cell: &[P2]) -> bool {
        self.shifts().iter().any(|s| self.hits(cell, *s))
    }

    /// `Vol(cell ∩ A_poly)`, summing torus translates.
    pub fn intersection_area(&self, cell: &[P2]) -> f64 {
        let (lo, hi) = polygon::bbox(cell);
        self.shifts()
            .iter()
            .filter(|s| {
                self.lo[0] + s[0] <= hi[0]
                    && self.hi[0] + s[0] >= lo[0]
                    && self.lo[1] + s[1] <= hi[1]
                    && self.hi[1] + s[1] >= lo[1]
            })
            .map(|s| {
                let moved = polygon::translate(&self.poly, *s);
                polygon::signed_area(&polygon::clip_by_convex(&moved, cell))
            })
            .sum::<f64>()
            .max(0.0)
    }
}

/// Liang–Barsky test of segment `ab` against the counter-clockwise convex polygon
/// `cell` with every edge pushed out by `margin`.
fn segment_meets_convex(a: P2, b: P2, cell: &[P2], margin: f64) -> bool {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let d = [b[0] - a[0], b[1] - a[1]];
    let m = cell.len();
    for k in 0..m {
        let (p, q) = (cell[k], cell[(k + 1) % m]);
        let e = [q[0] - p[0], q[1] - p[1]];
        let len = (e[0] * e[0] + e[1] * e[1]).sqrt();
        if len == 0.0 {
            continue;
        }
        // Outward normal of a counter-clockwise edge.
        let nrm = [e[1] / len, -e[0] / len];
        let off = nrm[0] * (a[0] - p[0]) + nrm[1] * (a[1] - p[1]) - margin;
        let rate = nrm[0] * d[0] + nrm[1] * d[1];
        if rate == 0.0 {
            if off > 0.0 {
                return false;
            }
        } else {
            let t = -off / rate;
            if rate > 0.0 {
                t1 = t1.min(t);
            } else {
                t0 = t0.max(t);
            }
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Which of the two volume scores.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Minus,
    Plus,
}

/// Unscaled `ν±(x)` (a volume at unit scale) for site `i`.
pub fn nu_unscaled(ctx: &Context, i: usize, sign: Sign) -> f64 {
    let inside = ctx.inside[i];
    let v = if let Some(pp) = &ctx.probes {
        if inside {
            pp.volume_outside(i)
        } else {
            -pp.volume_inside(i)
        }
    } else {
        let d = ctx.voronoi.as_ref().expect("volume context");
        let rp = ctx.polygon.as_ref().expect("volume context");
        let cell = d.cell_polygon(i);
        if cell.is_empty() || !rp.may_cross(&cell) {
            return 0.0;
        }
        let a_in = rp.intersection_area(&cell);
        if inside {
            (polygon::area(&cell) - a_in).max(0.0)
        } else {
            -a_in
        }
    };
    match sign {
        Sign::Minus => v,
        Sign::Plus => v.abs(),
    }
}

/// `ν±` of site `i` against an arbitrary half-plane (the flat variant), computed by
/// clipping its cell. Planar diagrams only.
pub fn nu_halfplane(ctx: &Context, i: usize, n: P2, c: f64, sign: Sign) -> f64 {
    let d = ctx.voronoi.as_ref().expect("volume context");
    let cell = d.cell_polygon(i);
    let s = d.sites[i];
    let inside = n[0] * s[0] + n[1] * s[1] <= c;
    let a_in = polygon::area(&polygon::clip_halfplane(&cell, n, c));
    let v = if inside {
        (polygon::area(&cell) - a_in).max(0.0)
    } else {
        -a_in
    };
    match sign {
        Sign::Minus => v,
        Sign::Plus => v.abs(),
    }
}

/// Output of [`volume_estimator`].
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct VolumeEstimate {
    /// `Vol(A_λ)`, the union of cells with centres in `A`.
    pub vol_alambda: f64,
    /// `Vol(A △ A_λ)`.
    pub sym_diff: f64,
    /// Reference volume the identity is checked against (the polygonized `A` in d = 2,
    /// the probe estimate in d = 3).
    pub vol_reference: f64,
    /// `Σν⁻/λ − (Vol(A_λ) − vol_reference)`.
    pub identity_residual: f64,
    pub points_inside: usize,
    /// No sample point fell in `A`.
    pub empty_intersection: bool,
}

/// Voronoi reconstruction `A_λ` of `A` and its symmetric difference with `A`.
pub fn volume_estimator(ctx: &Context) -> Result<VolumeEstimate> {
    let n = ctx.points.len();
    let points_inside = ctx.inside.iter().filter(|&&b| b).count();
    let mut vol = 0.0;
    let mut minus = 0.0;
    let mut plus = 0.0;
    for i in 0..n {
        let cell_vol = match (&ctx.probes, &ctx.voronoi) {
            (Some(pp), _) => pp.volume(i),
            (None, Some(d)) => d.cell_volume(i),
            _ => unreachable!("volume context"),
        };
        if ctx.inside[i] {
            vol += cell_vol;
        }
        let m = nu_unscaled(ctx, i, Sign::Minus);
        minus += m;
        plus += m.abs();
    }
    let vol_reference = match (&ctx.probes, &ctx.polygon) {
        (Some(pp), _) => pp.inside.iter().map(|&c| c as f64).sum::<f64>() / pp.probes as f64,
        (None, Some(rp)) => rp.area,
        _ => unreachable!("volume context"),
    };
    Ok(VolumeEstimate {
        vol_alambda: vol,
        sym_diff: plus,
        vol_reference,
        identity_residual: minus - (vol - vol_reference),
        points_inside,
        empty_intersection: points_inside == 0,
    })
}

/// Membership flags of all points.
pub(crate) fn membership(points: &[Point], region: &Region) -> Vec<bool> {
    points.iter().map(|p| region.contains(p)).collect()
}
