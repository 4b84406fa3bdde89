use super::graph::{gauss_legendre_composite, GraphSurface};
use super::polygon;
use super::{tangent_basis, Degeneracy, Hyperplane, Point, SurfaceParamPoint, EPS_SURF, MAX_ITER};
use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

/// A level-set function `g` with gradient; the surface is `{g = 0}` and the normal is
/// `∇g/|∇g|`.
pub trait LevelSet: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Point) -> f64;
    fn grad(&self, x: &Point) -> Point;
}

/// Axis-aligned ellipsoid `Σ ((x_i − c_i)/a_i)² − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ellipsoid {
    pub center: Point,
    pub semi_axes: Point,
}

impl LevelSet for Ellipsoid {
    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn value(&self, x: &Point) -> f64 {
        (0..self.dim())
            .map(|k| ((x[k] - self.center[k]) / self.semi_axes[k]).powi(2))
            .sum::<f64>()
            - 1.0
    }

    fn grad(&self, x: &Point) -> Point {
        let mut g = Point::zeros(self.dim());
        for k in 0..self.dim() {
            g.coords_mut()[k] = 2.0 * (x[k] - self.center[k]) / self.semi_axes[k].powi(2);
        }
        g
    }
}

/// `{x : g(x/scale) = 0}` with a cloud of seed points on the surface.
#[derive(Clone, Debug)]
pub struct ImplicitSurface {
    pub level_set: Arc<dyn LevelSet>,
    pub scale: f64,
    seeds: Vec<Point>,
}

impl ImplicitSurface {
    /// Seeds are found by projecting a regular grid over `[lo, hi]^d` onto the surface.
    pub fn new(level_set: Arc<dyn LevelSet>, lo: f64, hi: f64) -> Result<ImplicitSurface> {
        let mut s = ImplicitSurface {
            level_set,
            scale: 1.0,
            seeds: Vec::new(),
        };
        let d = s.level_set.dim();
        let per_axis = if d == 2 { 64 } else { 16 };
        let mut grid = vec![Point::zeros(d)];
        for k in 0..d {
            let mut next = Vec::with_capacity(grid.len() * per_axis);
            for p in &grid {
                for i in 0..per_axis {
                    let mut q = *p;
                    q.coords_mut()[k] = lo + (hi - lo) * (i as f64 + 0.5) / per_axis as f64;
                    next.push(q);
                }
            }
            grid = next;
        }
        s.seeds = grid
            .iter()
            .filter_map(|p| s.newton_onto(*p))
            .collect();
        if s.seeds.is_empty() {
            return Err(Error::invalid("level set has no zero in the seeding box"));
        }
        Ok(s)
    }

    pub fn value(&self, x: &Point) -> f64 {
        self.level_set.value(&x.scale(1.0 / self.scale))
    }

    pub fn grad(&self, x: &Point) -> Point {
        self.level_set.grad(&x.scale(1.0 / self.scale)).scale(1.0 / self.scale)
    }

    pub fn normal_at(&self, y: &Point) -> Option<Point> {
        self.grad(y).normalized()
    }

    fn newton_onto(&self, mut z: Point) -> Option<Point> {
        for _ in 0..MAX_ITER {
            let g = self.value(&z);
            let dg = self.grad(&z);
            let n2 = dg.dot(&dg);
            if !(n2 > 0.0) {
                return None;
            }
            let step = g / n2;
            z = z.axpy(-step, &dg);
            if (step * n2.sqrt()).abs() < 1e-14 * (1.0 + self.scale) {
                return Some(z);
            }
        }
        (self.value(&z).abs() / self.grad(&z).norm() < EPS_SURF).then_some(z)
    }

    /// Foot-point iteration: a few damped steps that project `x` onto the tangent plane
    /// at `y` and back onto the level set, then Newton on the optimality system
    /// `y − x + μ∇g(y) = 0`, `g(y) = 0` with a finite-difference Hessian.
    fn foot(&self, x: &Point) -> Result<Point> {
        let fail = || Error::NoConvergence {
            iterations: MAX_ITER,
        };
        let mut y = *self
            .seeds
            .iter()
            .min_by(|a, b| x.dist2(a).total_cmp(&x.dist2(b)))
            .expect("seeds are nonempty");
        for _ in 0..16 {
            let n = self.normal_at(&y).ok_or(Error::NoConvergence { iterations: 16 })?;
            let d = x.sub(&y);
            let tangential = d.axpy(-d.dot(&n), &n);
            if tangential.norm() < 1e-13 * (1.0 + d.norm()) {
                return Ok(y);
            }
            let mut step = 1.0;
            let current = d.norm();
            loop {
                match self.newton_onto(y.axpy(step, &tangential)) {
                    Some(c) if x.dist(&c) <= current => {
                        y = c;
                        break;
                    }
                    _ if step > 1e-6 => step *= 0.5,
                    _ => break,
                }
            }
        }
        let dim = x.dim();
        let g0 = self.grad(&y);
        let mut mu = x.sub(&y).dot(&g0) / g0.dot(&g0);
        for _ in 0..MAX_ITER {
            let g = self.grad(&y);
            let mut rhs = [0.0; 4];
            for k in 0..dim {
                rhs[k] = -(y[k] - x[k] + mu * g[k]);
            }
            rhs[dim] = -self.value(&y);
            let res = rhs[..=dim].iter().map(|r| r.abs()).fold(0.0, f64::max);
            let n = g.normalized().ok_or(Error::NoConvergence { iterations: 0 })?;
            let d = x.sub(&y);
            if res < 1e-14 * (1.0 + self.scale) || d.axpy(-d.dot(&n), &n).norm() < 1e-14 * (1.0 + d.norm()) && self.value(&y).abs() < 1e-15 {
                return Ok(y);
            }
            let h = 1e-6 * self.scale;
            let mut a = [[0.0; 5]; 4];
            for j in 0..dim {
                let e = Point::basis(dim, j).scale(h);
                let gp = self.grad(&y.add(&e));
                let gm = self.grad(&y.sub(&e));
                for k in 0..dim {
                    a[k][j] = if k == j { 1.0 } else { 0.0 } + mu * (gp[k] - gm[k]) / (2.0 * h);
                }
                a[j][dim] = g[j];
                a[dim][j] = g[j];
            }
            for k in 0..=dim {
                a[k][dim + 1] = rhs[k];
            }
            let sol = solve_dense(&mut a, dim + 1).ok_or_else(fail)?;
            for k in 0..dim {
                y.coords_mut()[k] += sol[k];
            }
            mu += sol[dim];
            if sol[..dim].iter().map(|s| s.abs()).fold(0.0, f64::max) < 1e-15 * (1.0 + self.scale) {
                return Ok(y);
            }
        }
        let n = self.normal_at(&y).ok_or_else(fail)?;
        let d = x.sub(&y);
        if d.axpy(-d.dot(&n), &n).norm() < EPS_SURF && self.value(&y).abs() < EPS_SURF {
            Ok(y)
        } else {
            Err(fail())
        }
    }

    fn scaled(&self, s: f64) -> ImplicitSurface {
        ImplicitSurface {
            level_set: self.level_set.clone(),
            scale: self.scale * s,
            seeds: self.seeds.iter().map(|p| p.scale(s)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sphere {
    pub center: Point,
    pub radius: f64,
}

/// A polyline in the plane. For closed counter-clockwise chains the normal points
/// outward (to the right of the direction of travel).
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub vertices: Vec<Point>,
    pub closed: bool,
}

impl Chain {
    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        let m = if self.closed { n } else { n.saturating_sub(1) };
        (0..m).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

#[derive(Clone, Debug)]
pub enum SurfaceKind {
    Graph(GraphSurface),
    Implicit(ImplicitSurface),
    Sphere(Sphere),
    Chain(Chain),
    /// A hyperplane; measures and quadrature use its intersection with the unit cube
    /// (scaled by `cube_side`).
    Plane { plane: Hyperplane, cube_side: f64 },
    /// No boundary inside the cube (e.g. `A = [0,1]^d`).
    Empty { dim: usize },
}

/// A hypersurface `M` of ℝ^d, d ∈ {2, 3}.
#[derive(Clone, Debug)]
pub struct Surface {
    pub kind: SurfaceKind,
    pub measure_hint: Option<f64>,
}

/// A quadrature node on a surface.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceNode {
    pub y: Point,
    pub normal: Point,
    pub weight: f64,
}

impl Surface {
    pub fn new(kind: SurfaceKind) -> Surface {
        Surface {
            kind,
            measure_hint: None,
        }
    }

    pub fn graph(g: GraphSurface) -> Surface {
        Surface::new(SurfaceKind::Graph(g))
    }

    pub fn sphere(center: Point, radius: f64) -> Result<Surface> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("sphere radius must be positive"));
        }
        if center.dim() < 2 {
            return Err(Error::invalid("sphere needs d >= 2"));
        }
        Ok(Surface::new(SurfaceKind::Sphere(Sphere { center, radius })))
    }

    pub fn chain(vertices: Vec<Point>, closed: bool) -> Result<Surface> {
        if vertices.len() < 2 || vertices.iter().any(|p| p.dim() != 2) {
            return Err(Error::invalid("chains need at least two planar vertices"));
        }
        Ok(Surface::new(SurfaceKind::Chain(Chain { vertices, closed })))
    }

    pub fn plane(plane: Hyperplane) -> Surface {
        Surface::new(SurfaceKind::Plane {
            plane,
            cube_side: 1.0,
        })
    }

    pub fn implicit(s: ImplicitSurface) -> Surface {
        Surface::new(SurfaceKind::Implicit(s))
    }

    pub fn empty(dim: usize) -> Surface {
        Surface::new(SurfaceKind::Empty { dim })
    }

    pub fn with_measure_hint(mut self, m: f64) -> Surface {
        self.measure_hint = Some(m);
        self
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SurfaceKind::Graph(g) => g.dim(),
            SurfaceKind::Implicit(s) => s.level_set.dim(),
            SurfaceKind::Sphere(s) => s.center.dim(),
            SurfaceKind::Chain(_) => 2,
            SurfaceKind::Plane { plane, .. } => plane.point.dim(),
            SurfaceKind::Empty { dim } => *dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.kind, SurfaceKind::Empty { .. })
    }

    /// The closest-point chart `x = y + t·u_y`.
    pub fn closest_point_param(&self, x: &Point) -> Result<SurfaceParamPoint> {
        if x.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        match &self.kind {
            SurfaceKind::Graph(g) => {
                let mut g = std::borrow::Cow::Borrowed(g);
                if g.seeds_missing() {
                    g.to_mut().ensure_seeds();
                }
                let cands = g.closest(x)?;
                let (mut v, mut y, dist, boundary) = cands[0];
                let mut degeneracy = if boundary {
                    Degeneracy::BoundaryFoot
                } else {
                    Degeneracy::None
                };
                if let Some(&(v2, y2, d2, _)) = cands.get(1) {
                    if (d2 - dist).abs() <= EPS_SURF && y2.dist(&y) > 1e3 * EPS_SURF {
                        degeneracy = Degeneracy::NonUnique;
                        if y2.lex_cmp(&y).is_lt() {
                            v = v2;
                            y = y2;
                        }
                    }
                }
                let normal = g.normal_at(&v);
                Ok(chart(x, y, normal, degeneracy))
            }
            SurfaceKind::Implicit(s) => {
                let y = s.foot(x)?;
                let normal = s.normal_at(&y).ok_or(Error::NoConvergence {
                    iterations: MAX_ITER,
                })?;
                Ok(chart(x, y, normal, Degeneracy::None))
            }
            SurfaceKind::Sphere(s) => {
                let d = x.sub(&s.center);
                match d.normalized() {
                    Some(n) if d.norm() > EPS_SURF => {
                        Ok(chart(x, s.center.axpy(s.radius, &n), n, Degeneracy::None))
                    }
                    _ => {
                        let n = Point::basis(x.dim(), 0);
                        Ok(chart(x, s.center.axpy(s.radius, &n), n, Degeneracy::NonUnique))
                    }
                }
            }
            SurfaceKind::Chain(c) => chain_closest(c, x),
            SurfaceKind::Plane { plane, .. } => {
                Ok(chart(x, plane.project(x), plane.normal, Degeneracy::None))
            }
            SurfaceKind::Empty { .. } => {
                Err(Error::Unsupported("closest point on an empty surface".into()))
            }
        }
    }

    /// Distance from `x` to the surface (`∞` for the empty surface).
    pub fn distance(&self, x: &Point) -> Result<f64> {
        match &self.kind {
            SurfaceKind::Empty { .. } => Ok(f64::INFINITY),
            SurfaceKind::Sphere(s) => Ok((x.dist(&s.center) - s.radius).abs()),
            SurfaceKind::Plane { plane, .. } => Ok(plane.signed_distance(x).abs()),
            _ => {
                let p = self.closest_point_param(x)?;
                Ok(x.dist(&p.y))
            }
        }
    }

    pub fn tangent_hyperplane(&self, y: &Point) -> Result<Hyperplane> {
        let p = self.closest_point_param(y)?;
        let d = y.dist(&p.y);
        if d > EPS_SURF {
            return Err(Error::NotOnSurface { distance: d });
        }
        Ok(Hyperplane {
            point: *y,
            normal: p.normal,
        })
    }

    /// `H^{d−1}(M)` by parametric quadrature with about `resolution` nodes.
    pub fn surface_measure(&self, resolution: usize) -> Result<f64> {
        if let Some(m) = self.measure_hint {
            return Ok(m);
        }
        match &self.kind {
            SurfaceKind::Implicit(_) => Err(Error::Unsupported(
                "surface measure of an implicit surface needs a measure hint".into(),
            )),
            SurfaceKind::Sphere(s) if s.center.dim() == 2 => Ok(2.0 * PI * s.radius),
            SurfaceKind::Sphere(s) => Ok(4.0 * PI * s.radius * s.radius),
            SurfaceKind::Chain(c) => Ok(c.segments().map(|(a, b)| a.dist(&b)).sum()),
            SurfaceKind::Empty { .. } => Ok(0.0),
            _ => Ok(self.quadrature(resolution)?.iter().map(|n| n.weight).sum()),
        }
    }

    /// Quadrature nodes `(y, u_y, w)` with `Σ w f(y) ≈ ∫_M f dH^{d−1}`.
    pub fn quadrature(&self, resolution: usize) -> Result<Vec<SurfaceNode>> {
        let res = resolution.max(4);
        match &self.kind {
            SurfaceKind::Graph(g) => {
                let panels = if g.param_dim() == 1 {
                    res / 4
                } else {
                    ((res as f64).sqrt() / 4.0).ceil() as usize
                };
                Ok(g.domain
                    .quadrature(panels.max(1), g.scale)
                    .into_iter()
                    .map(|(v, w)| SurfaceNode {
                        y: g.point_at(&v),
                        normal: g.normal_at(&v),
                        weight: w * g.jacobian(&v),
                    })
                    .collect())
            }
            SurfaceKind::Sphere(s) if s.center.dim() == 2 => Ok((0..res)
                .map(|k| {
                    let a = 2.0 * PI * (k as f64 + 0.5) / res as f64;
                    let n = Point::xy(a.cos(), a.sin());
                    SurfaceNode {
                        y: s.center.axpy(s.radius, &n),
                        normal: n,
                        weight: 2.0 * PI * s.radius / res as f64,
                    }
                })
                .collect()),
            SurfaceKind::Sphere(s) => {
                let m = ((res as f64 / 2.0).sqrt() / 4.0).ceil().max(1.0) as usize;
                let zs = gauss_legendre_composite(m);
                let nphi = 8 * m;
                let mut out = Vec::with_capacity(zs.len() * nphi);
                for &(z01, wz) in &zs {
                    let z = 2.0 * z01 - 1.0;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    for k in 0..nphi {
                        let phi = 2.0 * PI * (k as f64 + 0.5) / nphi as f64;
                        let n = Point::xyz(rho * phi.cos(), rho * phi.sin(), z);
                        out.push(SurfaceNode {
                            y: s.center.axpy(s.radius, &n),
                            normal: n,
                            weight: s.radius * s.radius * 2.0 * wz * 2.0 * PI / nphi as f64,
                        });
                    }
                }
                Ok(out)
            }
            SurfaceKind::Chain(c) => {
                let nseg = c.segments().count().max(1);
                let panels = (res / (4 * nseg)).max(1);
                let rule = gauss_legendre_composite(panels);
                let mut out = Vec::new();
                for (a, b) in c.segments() {
                    let len = a.dist(&b);
                    if len == 0.0 {
                        continue;
                    }
                    let dir = b.sub(&a).scale(1.0 / len);
                    let normal = Point::xy(dir[1], -dir[0]);
                    for &(s, w) in &rule {
                        out.push(SurfaceNode {
                            y: a.axpy(s * len, &dir),
                            normal,
                            weight: w * len,
                        });
                    }
                }
                Ok(out)
            }
            SurfaceKind::Plane { plane, cube_side } => {
                plane_quadrature(plane, *cube_side, res)
            }
            SurfaceKind::Implicit(_) => Err(Error::Unsupported(
                "quadrature on an implicit surface".into(),
            )),
            SurfaceKind::Empty { .. } => Ok(Vec::new()),
        }
    }

    /// A polyline approximating the surface within `chord_tol` (d = 2 only).
    pub fn polyline(&self, chord_tol: f64) -> Result<Vec<Point>> {
        match &self.kind {
            SurfaceKind::Graph(g) if g.param_dim() == 1 => {
                let (lo, hi) = match g.domain {
                    super::Domain::Interval { lo, hi } => (lo * g.scale, hi * g.scale),
                    _ => unreachable!(),
                };
                let kmax = g.function.curvature_bound() / g.scale;
                let h = if kmax > 0.0 {
                    (8.0 * chord_tol / kmax).sqrt()
                } else {
                    hi - lo
                };
                let n = (((hi - lo) / h).ceil() as usize).clamp(1, 1 << 22);
                Ok((0..=n)
                    .map(|k| {
                        let v = lo + (hi - lo) * k as f64 / n as f64;
                        g.point_at(&Point::from_slice(&[v]))
                    })
                    .collect())
            }
            SurfaceKind::Sphere(s) if s.center.dim() == 2 => {
                let n = circle_segments(s.radius, chord_tol);
                let mut pts: Vec<Point> = (0..n)
                    .map(|k| {
                        let a = 2.0 * PI * k as f64 / n as f64;
                        Point::xy(
                            s.center[0] + s.radius * a.cos(),
                            s.center[1] + s.radius * a.sin(),
                        )
                    })
                    .collect();
                pts.push(pts[0]);
                Ok(pts)
            }
            SurfaceKind::Chain(c) => {
                let mut pts = c.vertices.clone();
                if c.closed {
                    pts.push(pts[0]);
                }
                Ok(pts)
            }
            SurfaceKind::Plane { plane, cube_side } if plane.point.dim() == 2 => {
                let (a, b) = plane_segment(plane, *cube_side)
                    .ok_or_else(|| Error::DegenerateInput("line misses the square".into()))?;
                Ok(vec![a, b])
            }
            _ => Err(Error::Unsupported(
                "polylines exist only for planar graph, circle, chain and line surfaces".into(),
            )),
        }
    }

    /// The dilated surface `s·M`.
    pub fn scaled(&self, s: f64) -> Surface {
        let kind = match &self.kind {
            SurfaceKind::Graph(g) => SurfaceKind::Graph(g.scaled(s)),
            SurfaceKind::Implicit(i) => SurfaceKind::Implicit(i.scaled(s)),
            SurfaceKind::Sphere(sp) => SurfaceKind::Sphere(Sphere {
                center: sp.center.scale(s),
                radius: sp.radius * s,
            }),
            SurfaceKind::Chain(c) => SurfaceKind::Chain(Chain {
                vertices: c.vertices.iter().map(|p| p.scale(s)).collect(),
                closed: c.closed,
            }),
            SurfaceKind::Plane { plane, cube_side } => SurfaceKind::Plane {
                plane: Hyperplane {
                    point: plane.point.scale(s),
                    normal: plane.normal,
                },
                cube_side: cube_side * s,
            },
            SurfaceKind::Empty { dim } => SurfaceKind::Empty { dim: *dim },
        };
        let d = self.dim() as i32;
        Surface {
            kind,
            measure_hint: self.measure_hint.map(|m| m * s.powi(d - 1)),
        }
    }
}

/// Gaussian elimination with partial pivoting on an augmented `n × (n+1)` system.
fn solve_dense(a: &mut [[f64; 5]; 4], n: usize) -> Option<[f64; 4]> {
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..=n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = [0.0; 4];
    for r in (0..n).rev() {
        let mut s = a[r][n];
        for c in r + 1..n {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

fn chart(x: &Point, y: Point, normal: Point, degeneracy: Degeneracy) -> SurfaceParamPoint {
    let d = x.sub(&y);
    let t = match degeneracy {
        Degeneracy::BoundaryFoot => d.norm().copysign(d.dot(&normal)),
        _ => d.dot(&normal),
    };
    SurfaceParamPoint {
        y,
        t,
        normal,
        degeneracy,
    }
}

fn chain_closest(c: &Chain, x: &Point) -> Result<SurfaceParamPoint> {
    let mut best: Option<(f64, Point, Point, bool)> = None;
    let mut second: Option<(f64, Point)> = None;
    let nseg = c.segments().count();
    for (k, (a, b)) in c.segments().enumerate() {
        let ab = b.sub(&a);
        let len2 = ab.dot(&ab);
        if len2 == 0.0 {
            continue;
        }
        let s = (x.sub(&a).dot(&ab) / len2).clamp(0.0, 1.0);
        let y = a.axpy(s, &ab);
        let d = x.dist(&y);
        let n = Point::xy(ab[1], -ab[0]).scale(1.0 / len2.sqrt());
        let end = !c.closed && ((k == 0 && s == 0.0) || (k + 1 == nseg && s == 1.0));
        match best {
            Some((bd, by, _, _)) if d >= bd => {
                if y.dist(&by) > 1e3 * EPS_SURF && second.is_none_or(|(sd, _)| d < sd) {
                    second = Some((d, y));
                }
            }
            _ => {
                if let Some((bd, by, _, _)) = best {
                    if y.dist(&by) > 1e3 * EPS_SURF {
                        second = Some((bd, by));
                    }
                }
                best = Some((d, y, n, end));
            }
        }
    }
    let (d, mut y, mut n, end) = best.ok_or_else(|| Error::DegenerateInput("empty chain".into()))?;
    // At a vertex the chart normal is the direction to x, oriented like the edges.
    if d > 0.0 {
        let dir = x.sub(&y).scale(1.0 / d);
        if dir.dot(&n).abs() < 1.0 - 1e-12 {
            n = if dir.dot(&n) >= 0.0 { dir } else { dir.scale(-1.0) };
        }
    }
    let mut degeneracy = if end {
        Degeneracy::BoundaryFoot
    } else {
        Degeneracy::None
    };
    if let Some((d2, y2)) = second {
        if (d2 - d).abs() <= EPS_SURF {
            degeneracy = Degeneracy::NonUnique;
            if y2.lex_cmp(&y).is_lt() {
                y = y2;
            }
        }
    }
    Ok(chart(x, y, n, degeneracy))
}

/// Number of chords of an inscribed regular polygon with sagitta at most `tol`.
pub(crate) fn circle_segments(r: f64, tol: f64) -> usize {
    let c = (1.0 - (tol / r).min(1.0)).acos();
    ((PI / c).ceil() as usize).max(8)
}

/// The segment `plane ∩ [0, side]²`.
pub(crate) fn plane_segment(plane: &Hyperplane, side: f64) -> Option<(Point, Point)> {
    let t = Point::xy(-plane.normal[1], plane.normal[0]);
    let big = 4.0 * side + plane.point.norm();
    let base = plane.point;
    let (mut lo, mut hi) = (-big, big);
    for k in 0..2 {
        // 0 ≤ base_k + s·t_k ≤ side
        if t[k].abs() < 1e-300 {
            if base[k] < 0.0 || base[k] > side {
                return None;
            }
            continue;
        }
        let a = (0.0 - base[k]) / t[k];
        let b = (side - base[k]) / t[k];
        lo = lo.max(a.min(b));
        hi = hi.min(a.max(b));
    }
    (hi > lo).then(|| (base.axpy(lo, &t), base.axpy(hi, &t)))
}

/// The convex polygon `plane ∩ [0, side]³` in tangent coordinates, with the map back to
/// ℝ³.
fn plane_patch(plane: &Hyperplane, side: f64) -> (Vec<[f64; 2]>, [Point; 2], Point) {
    let basis = tangent_basis(&plane.normal);
    let (t1, t2) = (basis[0], basis[1]);
    let base = plane.point;
    let big = 4.0 * side + base.norm();
    let mut poly = vec![[-big, -big], [big, -big], [big, big], [-big, big]];
    for k in 0..3 {
        // base_k + a t1_k + b t2_k ≥ 0 and ≤ side
        poly = polygon::clip_halfplane(&poly, [-t1[k], -t2[k]], base[k]);
        poly = polygon::clip_halfplane(&poly, [t1[k], t2[k]], side - base[k]);
    }
    (poly, [t1, t2], base)
}

fn plane_quadrature(plane: &Hyperplane, side: f64, res: usize) -> Result<Vec<SurfaceNode>> {
    if plane.point.dim() == 2 {
        let Some((a, b)) = plane_segment(plane, side) else {
            return Ok(Vec::new());
        };
        let len = a.dist(&b);
        return Ok(gauss_legendre_composite((res / 4).max(1))
            .into_iter()
            .map(|(s, w)| SurfaceNode {
                y: a.axpy(s, &b.sub(&a)),
                normal: plane.normal,
                weight: w * len,
            })
            .collect());
    }
    let (poly, [t1, t2], base) = plane_patch(plane, side);
    if poly.len() < 3 {
        return Ok(Vec::new());
    }
    let panels = (((res as f64) / (poly.len() - 2) as f64).sqrt() / 4.0).ceil().max(1.0) as usize;
    let rule = gauss_legendre_composite(panels);
    let mut out = Vec::new();
    let p0 = poly[0];
    for w in poly[1..].windows(2) {
        let (p1, p2) = (w[0], w[1]);
        let area2 = ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])).abs();
        for &(x, wx) in &rule {
            for &(y, wy) in &rule {
                // Collapsed map of the unit square onto the triangle (p0, p1, p2).
                let (b1, b2) = (x * (1.0 - y), x * y);
                let a = p0[0] + b1 * (p1[0] - p0[0]) + b2 * (p2[0] - p0[0]);
                let b = p0[1] + b1 * (p1[1] - p0[1]) + b2 * (p2[1] - p0[1]);
                out.push(SurfaceNode {
                    y: base.axpy(a, &t1).axpy(b, &t2),
                    normal: plane.normal,
                    weight: wx * wy * x * area2,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{Domain, GraphFn};
    use super::*;

    fn line(c: Vec<f64>) -> Surface {
        Surface::graph(GraphSurface::over_unit(GraphFn::Linear(c), 2).unwrap())
    }

    #[test]
    fn flat_line_projection() {
        let m = line(vec![0.5, 0.0]);
        let p = m.closest_point_param(&Point::xy(0.5, 0.7)).unwrap();
        assert!(p.y.dist(&Point::xy(0.5, 0.5)) < 1e-12);
        assert!((p.t - 0.2).abs() < 1e-12);
        assert!(p.normal.dist(&Point::xy(0.0, 1.0)) < 1e-12);
        assert!(!p.is_degenerate());
    }

    #[test]
    fn sphere_radial_projection() {
        let c = Point::xyz(0.5, 0.5, 0.5);
        let m = Surface::sphere(c, 0.3).unwrap();
        let p = m.closest_point_param(&c.axpy(0.35, &Point::basis(3, 0))).unwrap();
        assert!(p.y.dist(&c.axpy(0.3, &Point::basis(3, 0))) < 1e-12);
        assert!((p.t - 0.05).abs() < 1e-12);
        let h = m.tangent_hyperplane(&p.y).unwrap();
        assert!(h.normal.dist(&Point::basis(3, 0)) < 1e-12);
    }

    #[test]
    fn projection_matches_brute_force_grid() {
        let m = line(vec![1.0, -1.0]);
        let x = Point::xy(0.3, 0.9);
        let p = m.closest_point_param(&x).unwrap();
        assert!(p.reconstruct().dist(&x) < EPS_SURF);
        let n = 1_000_000;
        let brute = (0..=n)
            .map(|k| {
                let v = k as f64 / n as f64;
                x.dist(&Point::xy(v, 1.0 - v))
            })
            .fold(f64::INFINITY, f64::min);
        assert!(x.dist(&p.y) <= brute + EPS_SURF);
        assert!((x.dist(&p.y) - (0.2f64 / 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn tangent_normals() {
        let s = 1.0 / 2f64.sqrt();
        let m = line(vec![1.0, -1.0]);
        let h = m.tangent_hyperplane(&Point::xy(0.5, 0.5)).unwrap();
        assert!(h.normal.dist(&Point::xy(s, s)) < 1e-12);
        let q = Surface::graph(
            GraphSurface::over_unit(GraphFn::Quadratic(vec![1.0, 0.0, -1.0]), 2).unwrap(),
        );
        let h = q.tangent_hyperplane(&Point::xy(0.5, 0.75)).unwrap();
        assert!(h.normal.dist(&Point::xy(s, s)) < 1e-8);
        // Finite-difference oracle for the slope.
        let f = |v: f64| 1.0 - v * v;
        let fd = (f(0.5 + 1e-6) - f(0.5 - 1e-6)) / 2e-6;
        let n_fd = Point::xy(-fd, 1.0).normalized().unwrap();
        assert!(h.normal.dist(&n_fd) < 1e-8);
        assert!(matches!(
            q.tangent_hyperplane(&Point::xy(0.5, 0.8)),
            Err(Error::NotOnSurface { .. })
        ));
    }

    #[test]
    fn surface_measures() {
        let c = Surface::sphere(Point::xy(0.5, 0.5), 0.25).unwrap();
        assert!((c.surface_measure(10_000).unwrap() - 2.0 * PI * 0.25).abs() < 1e-12);
        let l = line(vec![1.0, -1.0]);
        assert!((l.surface_measure(10_000).unwrap() - 2f64.sqrt()).abs() < 1e-12);

        // Richardson-extrapolated trapezoid oracle on the sine arc length.
        let g = |v: f64| (1.0 + (0.2 * PI * (2.0 * PI * v).cos()).powi(2)).sqrt();
        let trap = |n: usize| {
            let h = 1.0 / n as f64;
            h * ((1..n).map(|k| g(k as f64 * h)).sum::<f64>() + 0.5 * (g(0.0) + g(1.0)))
        };
        let oracle = (4.0 * trap(20_000) - trap(10_000)) / 3.0;
        let s = Surface::graph(
            GraphSurface::over_unit(GraphFn::Sine(vec![0.5, 0.1, 1.0, 0.0]), 2).unwrap(),
        );
        let m = s.surface_measure(10_000).unwrap();
        assert!(((m - oracle) / oracle).abs() < 1e-4);
        let coarse = s.surface_measure(16).unwrap();
        let mid = s.surface_measure(64).unwrap();
        assert!((mid - m).abs() <= (coarse - m).abs());

        assert!(matches!(
            Surface::implicit(
                ImplicitSurface::new(
                    Arc::new(Ellipsoid {
                        center: Point::xy(0.5, 0.5),
                        semi_axes: Point::xy(0.3, 0.2)
                    }),
                    0.0,
                    1.0
                )
                .unwrap()
            )
            .surface_measure(100),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn sphere_and_plane_quadrature_in_3d() {
        let s = Surface::sphere(Point::xyz(0.5, 0.5, 0.5), 0.3).unwrap();
        let q: f64 = s.quadrature(10_000).unwrap().iter().map(|n| n.weight).sum();
        assert!((q - 4.0 * PI * 0.09).abs() < 1e-10);
        let p = Surface::plane(
            Hyperplane::new(Point::xyz(0.5, 0.5, 0.5), Point::xyz(0.0, 0.0, 1.0)).unwrap(),
        );
        assert!((p.surface_measure(1000).unwrap() - 1.0).abs() < 1e-12);
        let diag = Surface::plane(
            Hyperplane::new(Point::xyz(0.5, 0.5, 0.5), Point::xyz(1.0, 1.0, 1.0)).unwrap(),
        );
        // Regular hexagon with side √2/2.
        let hex = 3.0 * 3f64.sqrt() / 2.0 * 0.5;
        assert!((diag.surface_measure(1000).unwrap() - hex).abs() < 1e-12);
        let simplex = Surface::graph(
            GraphSurface::new(GraphFn::Linear(vec![1.0, -1.0, -1.0]), Domain::Simplex).unwrap(),
        );
        assert!((simplex.surface_measure(1000).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn implicit_foot_point() {
        let e = ImplicitSurface::new(
            Arc::new(Ellipsoid {
                center: Point::xy(0.5, 0.5),
                semi_axes: Point::xy(0.25, 0.25),
            }),
            0.0,
            1.0,
        )
        .unwrap();
        let m = Surface::implicit(e);
        let p = m.closest_point_param(&Point::xy(0.9, 0.5)).unwrap();
        assert!(p.y.dist(&Point::xy(0.75, 0.5)) < 1e-9);
        assert!((p.t - 0.15).abs() < 1e-9);
    }

    #[test]
    fn chain_projection_and_scaling() {
        let sq = Surface::chain(
            vec![
                Point::xy(0.25, 0.25),
                Point::xy(0.75, 0.25),
                Point::xy(0.75, 0.75),
                Point::xy(0.25, 0.75),
            ],
            true,
        )
        .unwrap();
        let p = sq.closest_point_param(&Point::xy(0.5, 0.1)).unwrap();
        assert!(p.y.dist(&Point::xy(0.5, 0.25)) < 1e-15);
        assert!((p.t - 0.15).abs() < 1e-15);
        let inside = sq.closest_point_param(&Point::xy(0.5, 0.3)).unwrap();
        assert!(inside.t < 0.0);
        assert!((sq.scaled(2.0).surface_measure(0).unwrap() - 4.0).abs() < 1e-12);
        let center = sq.closest_point_param(&Point::xy(0.5, 0.5)).unwrap();
        assert_eq!(center.degeneracy, Degeneracy::NonUnique);
    }
}
