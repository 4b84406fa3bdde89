use super::graph::{Domain, GraphSurface};
use super::polygon::{self, P2};
use super::surface::{circle_segments, ImplicitSurface, Surface};
use super::{Degeneracy, Hyperplane, Point};
use crate::error::{Error, Result};
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub enum RegionKind {
    /// The whole cube `[0, side]^d`; its boundary is clipped away.
    Cube,
    Ball { center: Point, radius: f64 },
    /// `{x : (x − p)·n ≤ 0}`.
    HalfSpace(Hyperplane),
    /// `{(v, w) : v ∈ D, w ≤ F(v)}`.
    UnderGraph(GraphSurface),
    /// Counter-clockwise simple polygon (d = 2).
    Polygon(Vec<Point>),
    /// `{g ≤ 0}`.
    Implicit(ImplicitSurface),
}

/// A body `A ⊂ [0, side]^d` with its boundary surface (the part of `∂A` interior to the
/// cube).
#[derive(Clone, Debug)]
pub struct Region {
    pub kind: RegionKind,
    pub dim: usize,
    /// Side of the carrier cube; 1 unless the region was dilated.
    pub side: f64,
    pub boundary: Surface,
    pub volume_hint: Option<f64>,
    pub inside_reference: Point,
}

impl Region {
    pub fn cube(dim: usize) -> Region {
        Region {
            kind: RegionKind::Cube,
            dim,
            side: 1.0,
            boundary: Surface::empty(dim),
            volume_hint: Some(1.0),
            inside_reference: Point::splat(dim, 0.5),
        }
    }

    pub fn ball(center: Point, radius: f64) -> Result<Region> {
        let boundary = Surface::sphere(center, radius)?;
        if (0..center.dim()).any(|k| center[k] - radius < 0.0 || center[k] + radius > 1.0) {
            return Err(Error::invalid("ball must lie inside the unit cube"));
        }
        let vol = if center.dim() == 2 {
            PI * radius * radius
        } else {
            4.0 / 3.0 * PI * radius.powi(3)
        };
        Ok(Region {
            kind: RegionKind::Ball { center, radius },
            dim: center.dim(),
            side: 1.0,
            boundary,
            volume_hint: Some(vol),
            inside_reference: center,
        })
    }

    pub fn half_space(plane: Hyperplane) -> Result<Region> {
        let dim = plane.point.dim();
        let mut r = Region {
            kind: RegionKind::HalfSpace(plane),
            dim,
            side: 1.0,
            boundary: Surface::plane(plane),
            volume_hint: None,
            inside_reference: plane.point.axpy(-1e-3, &plane.normal),
        };
        r.volume_hint = Some(r.compute_volume()?);
        Ok(r)
    }

    pub fn under_graph(g: GraphSurface) -> Result<Region> {
        let dim = g.dim();
        let q = g.domain.quadrature(1, g.scale);
        let v = q[q.len() / 2].0;
        let w = 0.5 * g.value(v.coords()).clamp(0.0, 1.0);
        let mut r = Region {
            kind: RegionKind::UnderGraph(g.clone()),
            dim,
            side: 1.0,
            boundary: Surface::graph(g),
            volume_hint: None,
            inside_reference: v.extend(w),
        };
        if !r.contains(&r.inside_reference) {
            return Err(Error::invalid("graph region has no interior near the domain center"));
        }
        r.volume_hint = Some(r.compute_volume()?);
        Ok(r)
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Region> {
        let p2: Vec<P2> = vertices.iter().map(|p| p.xy_array()).collect();
        if vertices.len() < 3 || polygon::signed_area(&p2) <= 0.0 {
            return Err(Error::invalid("polygon regions need ≥ 3 vertices in CCW order"));
        }
        let c = p2.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
        let mut inside = Point::xy(c[0] / p2.len() as f64, c[1] / p2.len() as f64);
        if !polygon::contains(&p2, inside.xy_array()) {
            // Midpoint of a short diagonal-ish chord near the first vertex.
            let a = p2[0];
            let b = p2[1];
            let z = p2[p2.len() - 1];
            inside = Point::xy(
                a[0] + 1e-3 * ((b[0] - a[0]) + (z[0] - a[0])),
                a[1] + 1e-3 * ((b[1] - a[1]) + (z[1] - a[1])),
            );
        }
        Ok(Region {
            boundary: Surface::chain(vertices.clone(), true)?,
            kind: RegionKind::Polygon(vertices),
            dim: 2,
            side: 1.0,
            volume_hint: Some(polygon::area(&p2)),
            inside_reference: inside,
        })
    }

    pub fn implicit(s: ImplicitSurface, inside_reference: Point, volume_hint: Option<f64>) -> Region {
        let dim = s.level_set.dim();
        Region {
            kind: RegionKind::Implicit(s.clone()),
            dim,
            side: 1.0,
            boundary: Surface::implicit(s),
            volume_hint,
            inside_reference,
        }
    }

    /// Membership `x ∈ A` (points are assumed to lie in the carrier cube).
    pub fn contains(&self, x: &Point) -> bool {
        match &self.kind {
            RegionKind::Cube => true,
            RegionKind::Ball { center, radius } => x.dist2(center) <= radius * radius,
            RegionKind::HalfSpace(h) => h.signed_distance(x) <= 0.0,
            RegionKind::UnderGraph(g) => {
                let v = x.truncate();
                g.domain.contains(v.coords(), g.scale) && x.last() <= g.value(v.coords())
            }
            RegionKind::Polygon(vs) => {
                let p2: Vec<P2> = vs.iter().map(|p| p.xy_array()).collect();
                polygon::contains(&p2, x.xy_array())
            }
            RegionKind::Implicit(s) => s.value(x) <= 0.0,
        }
    }

    /// Signed distance to the boundary surface, negative inside.
    pub fn signed_distance(&self, x: &Point) -> Result<f64> {
        let d = match &self.kind {
            RegionKind::Ball { center, radius } => return Ok(x.dist(center) - radius),
            RegionKind::HalfSpace(h) => return Ok(h.signed_distance(x)),
            RegionKind::Cube => f64::INFINITY,
            _ => self.boundary.distance(x)?,
        };
        Ok(if self.contains(x) { -d } else { d })
    }

    pub fn volume(&self) -> Result<f64> {
        match self.volume_hint {
            Some(v) => Ok(v),
            None => self.compute_volume(),
        }
    }

    fn compute_volume(&self) -> Result<f64> {
        let s = self.side;
        match &self.kind {
            RegionKind::Cube => Ok(s.powi(self.dim as i32)),
            RegionKind::Ball { radius, .. } => Ok(if self.dim == 2 {
                PI * radius * radius
            } else {
                4.0 / 3.0 * PI * radius.powi(3)
            }),
            RegionKind::HalfSpace(h) => {
                // {x ∈ [0,s]^d : n·x ≤ n·p}, via the unit cube.
                let c = h.normal.dot(&h.point) / s;
                Ok(cube_halfspace_volume(h.normal.coords(), c) * s.powi(self.dim as i32))
            }
            RegionKind::UnderGraph(g) => {
                let panels = 512;
                let q = g.domain.quadrature(panels, g.scale);
                Ok(q.iter()
                    .map(|(v, w)| w * g.value(v.coords()).clamp(0.0, s))
                    .sum())
            }
            RegionKind::Polygon(vs) => {
                let p2: Vec<P2> = vs.iter().map(|p| p.xy_array()).collect();
                Ok(polygon::area(&p2))
            }
            RegionKind::Implicit(_) => {
                // Midpoint-grid estimate; exact values should come through the hint.
                let n: usize = if self.dim == 2 { 1024 } else { 128 };
                let h = s / n as f64;
                let mut count = 0usize;
                let total = n.pow(self.dim as u32);
                for idx in 0..total {
                    let mut p = Point::zeros(self.dim);
                    let mut r = idx;
                    for k in 0..self.dim {
                        p.coords_mut()[k] = ((r % n) as f64 + 0.5) * h;
                        r /= n;
                    }
                    count += self.contains(&p) as usize;
                }
                Ok(count as f64 / total as f64 * s.powi(self.dim as i32))
            }
        }
    }

    /// A counter-clockwise polygon approximating `A ∩ [0, side]²` with chord error at
    /// most `chord_tol`.
    pub fn polygon_2d(&self, chord_tol: f64) -> Result<Vec<P2>> {
        if self.dim != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: self.dim,
            });
        }
        let s = self.side;
        let square = vec![[0.0, 0.0], [s, 0.0], [s, s], [0.0, s]];
        match &self.kind {
            RegionKind::Cube => Ok(square),
            RegionKind::Ball { center, radius } => {
                let n = circle_segments(*radius, chord_tol);
                let poly: Vec<P2> = (0..n)
                    .map(|k| {
                        let a = 2.0 * PI * k as f64 / n as f64;
                        [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
                    })
                    .collect();
                Ok(polygon::clip_by_convex(&poly, &square))
            }
            RegionKind::HalfSpace(h) => Ok(polygon::clip_halfplane(
                &square,
                h.normal.xy_array(),
                h.normal.dot(&h.point),
            )),
            RegionKind::UnderGraph(g) => {
                let line = self.boundary.polyline(chord_tol)?;
                let (lo, hi) = match g.domain {
                    Domain::Interval { lo, hi } => (lo * g.scale, hi * g.scale),
                    _ => unreachable!("planar graphs live on intervals"),
                };
                let mut poly = vec![[lo, 0.0], [hi, 0.0]];
                poly.extend(line.iter().rev().map(|p| [p[0], p[1].clamp(0.0, s)]));
                Ok(poly)
            }
            RegionKind::Polygon(vs) => {
                let p2: Vec<P2> = vs.iter().map(|p| p.xy_array()).collect();
                Ok(polygon::clip_by_convex(&p2, &square))
            }
            RegionKind::Implicit(_) => Err(Error::Unsupported(
                "polygonization of implicit regions".into(),
            )),
        }
    }

    /// The dilated region `s·A ⊂ [0, s·side]^d`.
    pub fn scaled(&self, f: f64) -> Region {
        let kind = match &self.kind {
            RegionKind::Cube => RegionKind::Cube,
            RegionKind::Ball { center, radius } => RegionKind::Ball {
                center: center.scale(f),
                radius: radius * f,
            },
            RegionKind::HalfSpace(h) => RegionKind::HalfSpace(Hyperplane {
                point: h.point.scale(f),
                normal: h.normal,
            }),
            RegionKind::UnderGraph(g) => RegionKind::UnderGraph(g.scaled(f)),
            RegionKind::Polygon(vs) => RegionKind::Polygon(vs.iter().map(|p| p.scale(f)).collect()),
            RegionKind::Implicit(_) => self.kind.clone(),
        };
        let boundary = match &kind {
            RegionKind::UnderGraph(g) => Surface::graph(g.clone()),
            _ => self.boundary.scaled(f),
        };
        let kind = match (kind, &boundary.kind) {
            (RegionKind::Implicit(_), super::SurfaceKind::Implicit(s)) => RegionKind::Implicit(s.clone()),
            (k, _) => k,
        };
        Region {
            kind,
            dim: self.dim,
            side: self.side * f,
            boundary,
            volume_hint: self.volume_hint.map(|v| v * f.powi(self.dim as i32)),
            inside_reference: self.inside_reference.scale(f),
        }
    }

    /// Spot-checks indicator/boundary consistency on a regular grid: every grid point with
    /// `|signed distance| > tol` must have the matching membership. Returns the number of
    /// grid points checked.
    pub fn self_check(&self, per_axis: usize, tol: f64) -> Result<usize> {
        if !self.contains(&self.inside_reference) {
            return Err(Error::invalid("inside reference point is not inside the region"));
        }
        if self.boundary.is_empty() {
            return Ok(0);
        }
        let n = per_axis.max(2);
        let total = n.pow(self.dim as u32);
        let mut checked = 0;
        for idx in 0..total {
            let mut p = Point::zeros(self.dim);
            let mut r = idx;
            for k in 0..self.dim {
                p.coords_mut()[k] = ((r % n) as f64 + 0.5) / n as f64 * self.side;
                r /= n;
            }
            let chart = match &self.kind {
                RegionKind::UnderGraph(_) | RegionKind::Polygon(_) | RegionKind::Implicit(_) => {
                    Some(self.boundary.closest_point_param(&p)?)
                }
                _ => None,
            };
            if chart.is_some_and(|c| c.degeneracy != Degeneracy::None) {
                continue;
            }
            let sd = match chart {
                Some(c) => c.t,
                None => self.signed_distance(&p)?,
            };
            if sd.abs() > tol {
                checked += 1;
                if (sd < 0.0) != self.contains(&p) {
                    return Err(Error::invalid(format!(
                        "indicator and boundary disagree at {:?} (signed distance {sd:e})",
                        p.coords()
                    )));
                }
            }
        }
        Ok(checked)
    }
}

/// `Vol{x ∈ [0,1]^d : n·x ≤ c}` by inclusion–exclusion over cube vertices.
pub fn cube_halfspace_volume(n: &[f64], c: f64) -> f64 {
    let mut pos = Vec::with_capacity(n.len());
    let mut c = c;
    for &a in n {
        if a.abs() < 1e-12 {
            continue;
        }
        if a < 0.0 {
            // x ↦ 1 − x flips the sign of the coefficient.
            c -= a;
            pos.push(-a);
        } else {
            pos.push(a);
        }
    }
    let d = pos.len();
    if d == 0 {
        return if c >= 0.0 { 1.0 } else { 0.0 };
    }
    let total: f64 = pos.iter().sum();
    if c <= 0.0 {
        return 0.0;
    }
    if c >= total {
        return 1.0;
    }
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    let prod: f64 = pos.iter().product();
    let mut s = 0.0;
    for mask in 0u32..(1 << d) {
        let nv: f64 = (0..d).filter(|k| mask >> k & 1 == 1).map(|k| pos[k]).sum();
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * (c - nv).max(0.0).powi(d as i32);
    }
    (s / (fact * prod)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::super::GraphFn;
    use super::*;

    fn triangle() -> Region {
        Region::under_graph(GraphSurface::over_unit(GraphFn::Linear(vec![1.0, -1.0]), 2).unwrap())
            .unwrap()
    }

    #[test]
    fn volumes() {
        assert!((triangle().volume().unwrap() - 0.5).abs() < 1e-12);
        let disk = Region::ball(Point::xy(0.5, 0.5), 0.25).unwrap();
        assert!((disk.volume().unwrap() - PI / 16.0).abs() < 1e-15);
        let half = Region::half_space(
            Hyperplane::new(Point::xy(0.5, 0.5), Point::xy(0.0, -1.0)).unwrap(),
        )
        .unwrap();
        assert!((half.volume().unwrap() - 0.5).abs() < 1e-15);
        assert!(half.contains(&Point::xy(0.2, 0.9)));
        assert!(!half.contains(&Point::xy(0.2, 0.1)));
        let corner = cube_halfspace_volume(&[1.0, 1.0, 1.0], 1.0);
        assert!((corner - 1.0 / 6.0).abs() < 1e-15);
        let simplex = Region::under_graph(
            GraphSurface::new(GraphFn::Linear(vec![1.0, -1.0, -1.0]), Domain::Simplex).unwrap(),
        )
        .unwrap();
        assert!((simplex.volume().unwrap() - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn polygonization_areas() {
        let disk = Region::ball(Point::xy(0.5, 0.5), 0.25).unwrap();
        let poly = disk.polygon_2d(1e-5).unwrap();
        let a = polygon::area(&poly);
        // Inscribed polygon: the area deficit is at most sagitta × perimeter.
        assert!(a < PI / 16.0 && PI / 16.0 - a < 1e-5 * 2.0 * PI * 0.25);
        let tri = triangle().polygon_2d(1e-5).unwrap();
        assert!((polygon::signed_area(&tri) - 0.5).abs() < 1e-15);
        let sine = Region::under_graph(
            GraphSurface::over_unit(GraphFn::Sine(vec![0.5, 0.1, 1.0, 0.0]), 2).unwrap(),
        )
        .unwrap();
        let p = sine.polygon_2d(1e-6).unwrap();
        assert!((polygon::signed_area(&p) - 0.5).abs() < 1e-5);
    }

    #[test]
    fn self_checks_pass() {
        for r in [
            triangle(),
            Region::ball(Point::xy(0.5, 0.5), 0.3).unwrap(),
            Region::ball(Point::xyz(0.5, 0.5, 0.5), 0.3).unwrap(),
        ] {
            assert!(r.self_check(16, 1e-9).unwrap() > 0);
        }
    }

    #[test]
    fn scaling() {
        let t = triangle().scaled(10.0);
        assert!((t.volume().unwrap() - 50.0).abs() < 1e-9);
        assert!(t.contains(&Point::xy(4.0, 5.0)));
        assert!(!t.contains(&Point::xy(5.0, 5.1)));
        let sd = t.signed_distance(&Point::xy(5.0, 6.0)).unwrap();
        assert!((sd - 1.0 / 2f64.sqrt()).abs() < 1e-9);
    }
}
