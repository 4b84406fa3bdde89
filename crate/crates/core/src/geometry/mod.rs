//! Dimension-generic points, surfaces and regions.
//!
//! Every score and limit integral relies on the closest-point chart: almost every `x`
//! near a surface `M` is written `x = y + t·u_y` with `y ∈ M` the nearest point, `t` the
//! signed distance and `u_y` the unit normal. [`Surface::closest_point_param`] computes it.

mod graph;
pub mod polygon;
mod region;
pub mod scene;
mod surface;

pub use graph::{Domain, GraphFn, GraphSurface};
pub use region::{Region, RegionKind};
pub use surface::{Chain, ImplicitSurface, Sphere, Surface, SurfaceKind};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::Index;

/// Default tolerance for surface projections.
pub const EPS_SURF: f64 = 1e-9;
/// Default iteration cap for projections.
pub const MAX_ITER: usize = 64;

/// A point of ℝ^d with d ∈ {1, 2, 3}. Parameter-space points of surfaces use d = 1, 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point {
    xs: [f64; 3],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Point> {
        if coords.is_empty() || coords.len() > 3 {
            return Err(Error::invalid(format!(
                "points must have 1 to 3 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        let mut xs = [0.0; 3];
        xs[..coords.len()].copy_from_slice(coords);
        Ok(Point {
            xs,
            dim: coords.len() as u8,
        })
    }

    /// Construction from trusted finite coordinates.
    #[inline]
    pub fn from_slice(coords: &[f64]) -> Point {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        let mut xs = [0.0; 3];
        xs[..coords.len()].copy_from_slice(coords);
        Point {
            xs,
            dim: coords.len() as u8,
        }
    }

    #[inline]
    pub fn xy(x: f64, y: f64) -> Point {
        Point {
            xs: [x, y, 0.0],
            dim: 2,
        }
    }

    #[inline]
    pub fn xyz(x: f64, y: f64, z: f64) -> Point {
        Point {
            xs: [x, y, z],
            dim: 3,
        }
    }

    pub fn zeros(dim: usize) -> Point {
        Point {
            xs: [0.0; 3],
            dim: dim as u8,
        }
    }

    /// The unit vector along axis `axis`.
    pub fn basis(dim: usize, axis: usize) -> Point {
        let mut p = Point::zeros(dim);
        p.xs[axis] = 1.0;
        p
    }

    pub fn splat(dim: usize, v: f64) -> Point {
        let mut p = Point::zeros(dim);
        for k in 0..dim {
            p.xs[k] = v;
        }
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.xs[..self.dim as usize]
    }

    #[inline]
    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.xs[..self.dim as usize]
    }

    #[inline]
    pub fn xy_array(&self) -> [f64; 2] {
        [self.xs[0], self.xs[1]]
    }

    #[inline]
    pub fn last(&self) -> f64 {
        self.xs[self.dim as usize - 1]
    }

    #[inline]
    pub fn dot(&self, o: &Point) -> f64 {
        self.xs[0] * o.xs[0] + self.xs[1] * o.xs[1] + self.xs[2] * o.xs[2]
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn dist2(&self, o: &Point) -> f64 {
        let a = self.xs[0] - o.xs[0];
        let b = self.xs[1] - o.xs[1];
        let c = self.xs[2] - o.xs[2];
        a * a + b * b + c * c
    }

    #[inline]
    pub fn dist(&self, o: &Point) -> f64 {
        self.dist2(o).sqrt()
    }

    #[inline]
    pub fn sub(&self, o: &Point) -> Point {
        Point {
            xs: [
                self.xs[0] - o.xs[0],
                self.xs[1] - o.xs[1],
                self.xs[2] - o.xs[2],
            ],
            dim: self.dim,
        }
    }

    #[inline]
    pub fn add(&self, o: &Point) -> Point {
        Point {
            xs: [
                self.xs[0] + o.xs[0],
                self.xs[1] + o.xs[1],
                self.xs[2] + o.xs[2],
            ],
            dim: self.dim,
        }
    }

    #[inline]
    pub fn scale(&self, a: f64) -> Point {
        Point {
            xs: [self.xs[0] * a, self.xs[1] * a, self.xs[2] * a],
            dim: self.dim,
        }
    }

    /// `self + a·o`
    #[inline]
    pub fn axpy(&self, a: f64, o: &Point) -> Point {
        Point {
            xs: [
                self.xs[0] + a * o.xs[0],
                self.xs[1] + a * o.xs[1],
                self.xs[2] + a * o.xs[2],
            ],
            dim: self.dim,
        }
    }

    pub fn normalized(&self) -> Option<Point> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    /// Appends a coordinate: `(v, w)` for parameter point `v`.
    pub fn extend(&self, w: f64) -> Point {
        let mut p = *self;
        p.xs[self.dim as usize] = w;
        p.dim += 1;
        p
    }

    /// Drops the last coordinate.
    pub fn truncate(&self) -> Point {
        let mut p = *self;
        p.dim -= 1;
        p.xs[p.dim as usize] = 0.0;
        p
    }

    /// Lexicographic comparison, used to break projection ties.
    pub fn lex_cmp(&self, o: &Point) -> std::cmp::Ordering {
        for k in 0..self.dim() {
            match self.xs[k].total_cmp(&o.xs[k]) {
                std::cmp::Ordering::Equal => continue,
                c => return c,
            }
        }
        std::cmp::Ordering::Equal
    }
}

impl Index<usize> for Point {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        debug_assert!(i < self.dim as usize);
        &self.xs[i]
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Point> {
        Point::new(&v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.coords().to_vec()
    }
}

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub lo: Point,
    pub hi: Point,
}

impl Aabb {
    pub fn new(lo: Point, hi: Point) -> Result<Aabb> {
        if lo.dim() != hi.dim() {
            return Err(Error::Dimension {
                expected: lo.dim(),
                got: hi.dim(),
            });
        }
        if (0..lo.dim()).any(|k| !(hi[k] > lo[k])) {
            return Err(Error::invalid("box must have positive extent on every axis"));
        }
        Ok(Aabb { lo, hi })
    }

    pub fn unit(dim: usize) -> Aabb {
        Aabb {
            lo: Point::zeros(dim),
            hi: Point::splat(dim, 1.0),
        }
    }

    pub fn cube(dim: usize, side: f64) -> Aabb {
        Aabb {
            lo: Point::zeros(dim),
            hi: Point::splat(dim, side),
        }
    }

    /// The box `[-h, h]^d`.
    pub fn centered(dim: usize, half_width: f64) -> Aabb {
        Aabb {
            lo: Point::splat(dim, -half_width),
            hi: Point::splat(dim, half_width),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.hi[k] - self.lo[k]).product()
    }

    pub fn side(&self, k: usize) -> f64 {
        self.hi[k] - self.lo[k]
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim()).all(|k| p[k] >= self.lo[k] && p[k] <= self.hi[k])
    }

    pub fn diameter(&self) -> f64 {
        self.lo.dist(&self.hi)
    }

    pub fn scaled(&self, s: f64) -> Aabb {
        Aabb {
            lo: self.lo.scale(s),
            hi: self.hi.scale(s),
        }
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for k in 0..self.dim() {
            lo.coords_mut()[k] = lo[k].min(o.lo[k]);
            hi.coords_mut()[k] = hi[k].max(o.hi[k]);
        }
        Aabb { lo, hi }
    }

    pub fn intersects(&self, o: &Aabb) -> bool {
        (0..self.dim()).all(|k| self.lo[k] <= o.hi[k] && o.lo[k] <= self.hi[k])
    }
}

/// A hyperplane through `point` with unit `normal`; the positive side is the side the
/// normal points to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub point: Point,
    pub normal: Point,
}

impl Hyperplane {
    pub fn new(point: Point, normal: Point) -> Result<Hyperplane> {
        if point.dim() != normal.dim() {
            return Err(Error::Dimension {
                expected: point.dim(),
                got: normal.dim(),
            });
        }
        let normal = normal
            .normalized()
            .ok_or_else(|| Error::invalid("hyperplane normal must be nonzero"))?;
        Ok(Hyperplane { point, normal })
    }

    #[inline]
    pub fn signed_distance(&self, x: &Point) -> f64 {
        x.sub(&self.point).dot(&self.normal)
    }

    pub fn project(&self, x: &Point) -> Point {
        x.axpy(-self.signed_distance(x), &self.normal)
    }
}

/// Why a closest-point query is not a clean `(y, t)` chart point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Degeneracy {
    None,
    /// Two surface candidates lie within `ε_surf` of equal distance.
    NonUnique,
    /// The nearest point sits on the edge of a surface with boundary, so `x - y` is not
    /// normal to the surface.
    BoundaryFoot,
}

/// Result of the closest-point parameterization `x = y + t·u_y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceParamPoint {
    pub y: Point,
    pub t: f64,
    pub normal: Point,
    pub degeneracy: Degeneracy,
}

impl SurfaceParamPoint {
    pub fn is_degenerate(&self) -> bool {
        self.degeneracy != Degeneracy::None
    }

    pub fn reconstruct(&self) -> Point {
        self.y.axpy(self.t, &self.normal)
    }

    pub fn tangent_hyperplane(&self) -> Hyperplane {
        Hyperplane {
            point: self.y,
            normal: self.normal,
        }
    }
}

/// An orthonormal basis of the hyperplane orthogonal to unit vector `n` (d = 2, 3).
pub fn tangent_basis(n: &Point) -> Vec<Point> {
    match n.dim() {
        1 => vec![],
        2 => vec![Point::xy(-n[1], n[0])],
        _ => {
            // Pick the axis least aligned with n, then Gram-Schmidt.
            let axis = (0..3)
                .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
                .unwrap_or(0);
            let e = Point::basis(3, axis);
            let t1 = e.axpy(-e.dot(n), n).normalized().unwrap_or(Point::basis(3, 0));
            let t2 = Point::xyz(
                n[1] * t1[2] - n[2] * t1[1],
                n[2] * t1[0] - n[0] * t1[2],
                n[0] * t1[1] - n[1] * t1[0],
            );
            vec![t1, t2]
        }
    }
}
