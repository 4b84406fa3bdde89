use super::{Point, EPS_SURF, MAX_ITER};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Built-in graph functions `F: D → ℝ`, with analytic first and second derivatives.
///
/// Coefficient layouts (parameter dimension `m = d - 1`):
/// * `linear`: `[c0, c1, .., cm]`, `F(v) = c0 + Σ c_i v_i`
/// * `quadratic`: `[c0, c1, .., cm, q1, .., qm]`, `F(v) = c0 + Σ c_i v_i + Σ q_i v_i²`
/// * `sine`: `[offset, amplitude, frequency, phase]`,
///   `F(v) = offset + amplitude·sin(2π·frequency·v_1 + phase)`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "coefficients", rename_all = "lowercase")]
pub enum GraphFn {
    Linear(Vec<f64>),
    Quadratic(Vec<f64>),
    Sine(Vec<f64>),
}

impl GraphFn {
    pub fn validate(&self, m: usize) -> Result<()> {
        let (len, name) = match self {
            GraphFn::Linear(c) => (c.len() == m + 1, "linear"),
            GraphFn::Quadratic(c) => (c.len() == 2 * m + 1, "quadratic"),
            GraphFn::Sine(c) => (c.len() == 4, "sine"),
        };
        if !len {
            return Err(Error::invalid(format!(
                "wrong number of coefficients for {name} graph in parameter dimension {m}"
            )));
        }
        let coeffs = match self {
            GraphFn::Linear(c) | GraphFn::Quadratic(c) | GraphFn::Sine(c) => c,
        };
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("graph coefficients must be finite"));
        }
        Ok(())
    }

    pub fn value(&self, v: &[f64]) -> f64 {
        match self {
            GraphFn::Linear(c) => c[0] + v.iter().zip(&c[1..]).map(|(a, b)| a * b).sum::<f64>(),
            GraphFn::Quadratic(c) => {
                let m = v.len();
                let mut f = c[0];
                for i in 0..m {
                    f += c[1 + i] * v[i] + c[1 + m + i] * v[i] * v[i];
                }
                f
            }
            GraphFn::Sine(c) => c[0] + c[1] * (2.0 * PI * c[2] * v[0] + c[3]).sin(),
        }
    }

    pub fn grad(&self, v: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        match self {
            GraphFn::Linear(c) => {
                for i in 0..v.len() {
                    g[i] = c[1 + i];
                }
            }
            GraphFn::Quadratic(c) => {
                let m = v.len();
                for i in 0..m {
                    g[i] = c[1 + i] + 2.0 * c[1 + m + i] * v[i];
                }
            }
            GraphFn::Sine(c) => {
                let w = 2.0 * PI * c[2];
                g[0] = c[1] * w * (w * v[0] + c[3]).cos();
            }
        }
        g
    }

    pub fn hess(&self, v: &[f64]) -> [[f64; 2]; 2] {
        let mut h = [[0.0; 2]; 2];
        match self {
            GraphFn::Linear(_) => {}
            GraphFn::Quadratic(c) => {
                let m = v.len();
                for i in 0..m {
                    h[i][i] = 2.0 * c[1 + m + i];
                }
            }
            GraphFn::Sine(c) => {
                let w = 2.0 * PI * c[2];
                h[0][0] = -c[1] * w * w * (w * v[0] + c[3]).sin();
            }
        }
        h
    }

    /// Upper bound on `|∇²F|` over `[0,1]^m`, used for chord-error polygonization.
    pub fn curvature_bound(&self) -> f64 {
        match self {
            GraphFn::Linear(_) => 0.0,
            GraphFn::Quadratic(c) => {
                let m = (c.len() - 1) / 2;
                c[1 + m..].iter().map(|q| 2.0 * q.abs()).fold(0.0, f64::max)
            }
            GraphFn::Sine(c) => {
                let w = 2.0 * PI * c[2];
                c[1].abs() * w * w
            }
        }
    }
}

/// Parameter domain `D ⊂ [0,1]^{d-1}` of a graph surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    Interval { lo: f64, hi: f64 },
    Rect { lo: [f64; 2], hi: [f64; 2] },
    /// `{v ∈ [0,∞)^2 : v_1 + v_2 ≤ 1}` (scaled by the surface scale).
    Simplex,
}

impl Domain {
    pub fn param_dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn contains(&self, v: &[f64], scale: f64) -> bool {
        match self {
            Domain::Interval { lo, hi } => v[0] >= lo * scale && v[0] <= hi * scale,
            Domain::Rect { lo, hi } => (0..2).all(|k| v[k] >= lo[k] * scale && v[k] <= hi[k] * scale),
            Domain::Simplex => v[0] >= 0.0 && v[1] >= 0.0 && v[0] + v[1] <= scale,
        }
    }

    /// Euclidean projection onto the domain; returns whether the point moved.
    pub fn project(&self, v: &mut [f64], scale: f64) -> bool {
        let before = [v[0], v.get(1).copied().unwrap_or(0.0)];
        match self {
            Domain::Interval { lo, hi } => v[0] = v[0].clamp(lo * scale, hi * scale),
            Domain::Rect { lo, hi } => {
                for k in 0..2 {
                    v[k] = v[k].clamp(lo[k] * scale, hi[k] * scale);
                }
            }
            Domain::Simplex => {
                // Projection onto {v ≥ 0, v1 + v2 ≤ s}.
                let s = scale;
                let (a, b) = (v[0], v[1]);
                if a >= 0.0 && b >= 0.0 && a + b <= s {
                } else if a + b > s && (a - b).abs() <= s {
                    let shift = (a + b - s) / 2.0;
                    v[0] = a - shift;
                    v[1] = b - shift;
                } else {
                    v[0] = a.clamp(0.0, s);
                    v[1] = b.clamp(0.0, s);
                    if v[0] + v[1] > s {
                        if a > b {
                            v[1] = 0.0;
                            v[0] = s;
                        } else {
                            v[0] = 0.0;
                            v[1] = s;
                        }
                    }
                }
            }
        }
        before[0] != v[0] || (v.len() > 1 && before[1] != v[1])
    }

    pub fn measure(&self, scale: f64) -> f64 {
        match self {
            Domain::Interval { lo, hi } => (hi - lo) * scale,
            Domain::Rect { lo, hi } => (hi[0] - lo[0]) * (hi[1] - lo[1]) * scale * scale,
            Domain::Simplex => 0.5 * scale * scale,
        }
    }

    /// Tensor-product Gauss–Legendre nodes `(v, weight)` on the domain, `panels` composite
    /// panels per axis with 4 points each. The simplex uses the collapsed (Duffy) map.
    pub fn quadrature(&self, panels: usize, scale: f64) -> Vec<(Point, f64)> {
        let rule = gauss_legendre_composite(panels);
        match self {
            Domain::Interval { lo, hi } => {
                let (a, b) = (lo * scale, hi * scale);
                rule.iter()
                    .map(|&(x, w)| (Point::from_slice(&[a + (b - a) * x]), w * (b - a)))
                    .collect()
            }
            Domain::Rect { lo, hi } => {
                let mut out = Vec::with_capacity(rule.len() * rule.len());
                let (a0, b0) = (lo[0] * scale, hi[0] * scale);
                let (a1, b1) = (lo[1] * scale, hi[1] * scale);
                for &(x, wx) in &rule {
                    for &(y, wy) in &rule {
                        out.push((
                            Point::xy(a0 + (b0 - a0) * x, a1 + (b1 - a1) * y),
                            wx * wy * (b0 - a0) * (b1 - a1),
                        ));
                    }
                }
                out
            }
            Domain::Simplex => {
                let mut out = Vec::with_capacity(rule.len() * rule.len());
                for &(x, wx) in &rule {
                    for &(y, wy) in &rule {
                        // (x, y) ∈ [0,1]² ↦ (x, (1-x) y), Jacobian (1-x)
                        out.push((
                            Point::xy(x * scale, (1.0 - x) * y * scale),
                            wx * wy * (1.0 - x) * scale * scale,
                        ));
                    }
                }
                out
            }
        }
    }

    /// Regular sample grid of the domain (for projection seeding).
    pub fn sample_grid(&self, per_axis: usize, scale: f64) -> Vec<Point> {
        let n = per_axis.max(2);
        let f = |k: usize| k as f64 / (n - 1) as f64;
        match self {
            Domain::Interval { lo, hi } => (0..n)
                .map(|k| Point::from_slice(&[(lo + (hi - lo) * f(k)) * scale]))
                .collect(),
            Domain::Rect { lo, hi } => {
                let mut out = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        out.push(Point::xy(
                            (lo[0] + (hi[0] - lo[0]) * f(i)) * scale,
                            (lo[1] + (hi[1] - lo[1]) * f(j)) * scale,
                        ));
                    }
                }
                out
            }
            Domain::Simplex => {
                let mut out = Vec::new();
                for i in 0..n {
                    for j in 0..n - i {
                        out.push(Point::xy(f(i) * scale, f(j) * scale));
                    }
                }
                out
            }
        }
    }
}

/// Composite 4-point Gauss–Legendre rule on `[0,1]` with `panels` panels.
pub fn gauss_legendre_composite(panels: usize) -> Vec<(f64, f64)> {
    const X: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const W: [f64; 4] = [
        0.347_854_845_137_453_9,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_9,
    ];
    let panels = panels.max(1);
    let h = 1.0 / panels as f64;
    let mut out = Vec::with_capacity(4 * panels);
    for p in 0..panels {
        let a = p as f64 * h;
        for k in 0..4 {
            out.push((a + h * (X[k] + 1.0) / 2.0, W[k] * h / 2.0));
        }
    }
    out
}

/// The surface `{(v, F(v)) : v ∈ D}` with outward normal `(−∇F, 1)/√(1+|∇F|²)`.
///
/// `scale` dilates the whole graph: the surface is `{(s·v, s·F(v))}` for `v` in the unit
/// domain, which is how rescaled inputs `λ^{1/d} M` are represented.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSurface {
    pub function: GraphFn,
    pub domain: Domain,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(skip)]
    seeds: Vec<(Point, Point)>,
}

fn one() -> f64 {
    1.0
}

impl GraphSurface {
    pub fn new(function: GraphFn, domain: Domain) -> Result<GraphSurface> {
        function.validate(domain.param_dim())?;
        let mut g = GraphSurface {
            function,
            domain,
            scale: 1.0,
            seeds: Vec::new(),
        };
        g.build_seeds();
        Ok(g)
    }

    /// Graph over `[0,1]^{d-1}`.
    pub fn over_unit(function: GraphFn, dim: usize) -> Result<GraphSurface> {
        let domain = if dim == 2 {
            Domain::Interval { lo: 0.0, hi: 1.0 }
        } else {
            Domain::Rect {
                lo: [0.0, 0.0],
                hi: [1.0, 1.0],
            }
        };
        GraphSurface::new(function, domain)
    }

    pub(crate) fn seeds_missing(&self) -> bool {
        self.seeds.is_empty()
    }

    pub(crate) fn ensure_seeds(&mut self) {
        if self.seeds.is_empty() {
            self.build_seeds();
        }
    }

    fn build_seeds(&mut self) {
        let per_axis = if self.param_dim() == 1 { 4096 } else { 64 };
        self.seeds = self
            .domain
            .sample_grid(per_axis, self.scale)
            .into_iter()
            .map(|v| {
                let y = self.point_at(&v);
                (v, y)
            })
            .collect();
    }

    pub fn scaled(&self, s: f64) -> GraphSurface {
        let mut g = GraphSurface {
            function: self.function.clone(),
            domain: self.domain.clone(),
            scale: self.scale * s,
            seeds: Vec::new(),
        };
        g.build_seeds();
        g
    }

    pub fn param_dim(&self) -> usize {
        self.domain.param_dim()
    }

    pub fn dim(&self) -> usize {
        self.param_dim() + 1
    }

    pub fn value(&self, v: &[f64]) -> f64 {
        let s = self.scale;
        let u = [v[0] / s, v.get(1).copied().unwrap_or(0.0) / s];
        s * self.function.value(&u[..self.param_dim()])
    }

    pub fn grad(&self, v: &[f64]) -> [f64; 2] {
        let s = self.scale;
        let u = [v[0] / s, v.get(1).copied().unwrap_or(0.0) / s];
        self.function.grad(&u[..self.param_dim()])
    }

    pub fn hess(&self, v: &[f64]) -> [[f64; 2]; 2] {
        let s = self.scale;
        let u = [v[0] / s, v.get(1).copied().unwrap_or(0.0) / s];
        let h = self.function.hess(&u[..self.param_dim()]);
        [[h[0][0] / s, h[0][1] / s], [h[1][0] / s, h[1][1] / s]]
    }

    pub fn point_at(&self, v: &Point) -> Point {
        v.extend(self.value(v.coords()))
    }

    pub fn normal_at(&self, v: &Point) -> Point {
        let g = self.grad(v.coords());
        let m = self.param_dim();
        let mut n = Point::zeros(m + 1);
        for i in 0..m {
            n.coords_mut()[i] = -g[i];
        }
        n.coords_mut()[m] = 1.0;
        n.normalized().expect("normal of a graph is never zero")
    }

    /// Area element `√(1+|∇F|²)`.
    pub fn jacobian(&self, v: &Point) -> f64 {
        let g = self.grad(v.coords());
        (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt()
    }

    /// Minimizes `½|x − (v, F(v))|²` over `v ∈ D` by projected damped Newton from `v0`.
    fn refine(&self, x: &Point, v0: Point) -> Result<(Point, f64, bool)> {
        let m = self.param_dim();
        let xw = x[m];
        let phi = |v: &Point| 0.5 * x.dist2(&self.point_at(v));
        let mut v = v0;
        let mut f = phi(&v);
        let mut on_boundary = false;
        for _ in 0..MAX_ITER {
            let fv = self.value(v.coords());
            let g = self.grad(v.coords());
            let h = self.hess(v.coords());
            let r = xw - fv;
            let mut grad = [0.0; 2];
            for i in 0..m {
                grad[i] = -(x[i] - v[i]) - r * g[i];
            }
            // Newton matrix, falling back to Gauss-Newton when indefinite.
            let mut a = [[0.0; 2]; 2];
            for i in 0..m {
                for j in 0..m {
                    a[i][j] = if i == j { 1.0 } else { 0.0 } + g[i] * g[j] - r * h[i][j];
                }
            }
            let solve = |a: &[[f64; 2]; 2]| -> Option<[f64; 2]> {
                if m == 1 {
                    (a[0][0] > 0.0).then(|| [-grad[0] / a[0][0], 0.0])
                } else {
                    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
                    (det > 0.0 && a[0][0] > 0.0).then(|| {
                        [
                            -(a[1][1] * grad[0] - a[0][1] * grad[1]) / det,
                            -(-a[1][0] * grad[0] + a[0][0] * grad[1]) / det,
                        ]
                    })
                }
            };
            let step = solve(&a).unwrap_or_else(|| {
                for i in 0..m {
                    for j in 0..m {
                        a[i][j] = if i == j { 1.0 } else { 0.0 } + g[i] * g[j];
                    }
                }
                solve(&a).unwrap_or([-grad[0], -grad[1]])
            });
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let mut cand = v;
                for i in 0..m {
                    cand.coords_mut()[i] += alpha * step[i];
                }
                let moved = self.domain.project(cand.coords_mut(), self.scale);
                let fc = phi(&cand);
                if fc <= f {
                    accepted = Some((cand, fc, moved));
                    break;
                }
                alpha *= 0.5;
            }
            let Some((cand, fc, moved)) = accepted else {
                // No descent possible: v is a (projected) stationary point.
                return Ok((v, f, on_boundary));
            };
            let dv = (0..m).map(|i| (cand[i] - v[i]).abs()).fold(0.0, f64::max);
            v = cand;
            f = fc;
            on_boundary = moved;
            if dv <= 1e-15 * (1.0 + self.scale) {
                return Ok((v, f, on_boundary));
            }
        }
        // Converged in value even if the step test was not met.
        let gnorm = {
            let fv = self.value(v.coords());
            let g = self.grad(v.coords());
            (0..m)
                .map(|i| (-(x[i] - v[i]) - (xw - fv) * g[i]).abs())
                .fold(0.0, f64::max)
        };
        if gnorm < EPS_SURF || on_boundary {
            Ok((v, f, on_boundary))
        } else {
            Err(Error::NoConvergence {
                iterations: MAX_ITER,
            })
        }
    }

    /// Closest point `(v, y)` with a flag for boundary feet and a list of competing
    /// candidates for the uniqueness test.
    pub(crate) fn closest(&self, x: &Point) -> Result<Vec<(Point, Point, f64, bool)>> {
        let m = self.param_dim();
        let mut scored: Vec<(f64, usize)> = self
            .seeds
            .iter()
            .enumerate()
            .map(|(k, (_, y))| (x.dist2(y), k))
            .collect();
        let take = scored.len().min(64);
        scored.select_nth_unstable_by(take - 1, |a, b| a.0.total_cmp(&b.0));
        scored.truncate(take);
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        // The best seed plus the best seed far from it in parameter space.
        let best = self.seeds[scored[0].1].0;
        let spacing = self.domain.measure(self.scale).powf(1.0 / m as f64)
            / (self.seeds.len() as f64).powf(1.0 / m as f64);
        let mut starts = vec![best];
        if let Some(&(_, k)) = scored
            .iter()
            .find(|(_, k)| self.seeds[*k].0.dist(&best) > 8.0 * spacing)
        {
            starts.push(self.seeds[k].0);
        }
        let mut out = Vec::new();
        for s in starts {
            let (v, f, b) = self.refine(x, s)?;
            out.push((v, self.point_at(&v), (2.0 * f).sqrt(), b));
        }
        out.sort_by(|a, b| a.2.total_cmp(&b.2));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_validation() {
        assert!(GraphFn::Linear(vec![1.0, -1.0]).validate(1).is_ok());
        assert!(GraphFn::Linear(vec![1.0]).validate(1).is_err());
        assert!(GraphFn::Quadratic(vec![1.0, 0.0, -1.0]).validate(1).is_ok());
        assert!(GraphFn::Quadratic(vec![1.0, 0.0, 0.0, -1.0, -1.0]).validate(2).is_ok());
        assert!(GraphFn::Sine(vec![0.5, 0.1, 1.0]).validate(1).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let fs = [
            GraphFn::Quadratic(vec![1.0, 0.2, -1.0]),
            GraphFn::Sine(vec![0.5, 0.1, 1.0, 0.3]),
        ];
        for f in &fs {
            for &v in &[0.1, 0.37, 0.8] {
                let h = 1e-6;
                let fd = (f.value(&[v + h]) - f.value(&[v - h])) / (2.0 * h);
                assert!((fd - f.grad(&[v])[0]).abs() < 1e-8);
                let fd2 = (f.grad(&[v + h])[0] - f.grad(&[v - h])[0]) / (2.0 * h);
                assert!((fd2 - f.hess(&[v])[0][0]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn simplex_projection() {
        let d = Domain::Simplex;
        let mut v = [0.8, 0.6];
        d.project(&mut v, 1.0);
        assert!((v[0] - 0.6).abs() < 1e-15 && (v[1] - 0.4).abs() < 1e-15);
        let mut v = [-0.5, 0.3];
        d.project(&mut v, 1.0);
        assert_eq!(v, [0.0, 0.3]);
        let mut v = [2.0, -1.0];
        d.project(&mut v, 1.0);
        assert_eq!(v, [1.0, 0.0]);
    }

    #[test]
    fn quadrature_integrates_polynomials() {
        let rule = gauss_legendre_composite(3);
        let s: f64 = rule.iter().map(|(x, w)| w * x.powi(7)).sum();
        assert!((s - 1.0 / 8.0).abs() < 1e-14);
        let simplex: f64 = Domain::Simplex.quadrature(4, 1.0).iter().map(|(_, w)| w).sum();
        assert!((simplex - 0.5).abs() < 1e-14);
        let xy: f64 = Domain::Simplex
            .quadrature(4, 1.0)
            .iter()
            .map(|(v, w)| w * v[0] * v[1])
            .sum();
        assert!((xy - 1.0 / 24.0).abs() < 1e-14);
    }
}
