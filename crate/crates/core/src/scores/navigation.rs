//! Navigation along a planar curve through the Voronoi cells it visits.

use super::{Context, Needs, ScoreFunction};
use crate::error::{Error, Result};
use crate::geometry::polygon::{dist, P2};
use crate::voronoi::VoronoiDiagram;
use std::fmt;
use std::sync::Arc;

/// A curve `r : [0,1] → [0,1]²`.
#[derive(Clone)]
pub enum Curve {
    Segment { a: P2, b: P2 },
    Polyline(Vec<P2>),
    Circle { center: P2, radius: f64 },
    Custom(Arc<dyn Fn(f64) -> P2 + Send + Sync>),
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Curve::Segment { a, b } => write!(f, "Segment({a:?}, {b:?})"),
            Curve::Polyline(p) => write!(f, "Polyline({} vertices)", p.len()),
            Curve::Circle { center, radius } => write!(f, "Circle({center:?}, {radius})"),
            Curve::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Curve {
    pub const NAMES: &'static str = "diagonal, segment:x0,y0,x1,y1, circle:cx,cy,r";

    /// `diagonal`, `segment:x0,y0,x1,y1` or `circle:cx,cy,r`.
    pub fn parse(s: &str) -> Result<Curve> {
        let (head, arg) = s.split_once(':').unwrap_or((s, ""));
        let nums = || -> Result<Vec<f64>> {
            arg.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad curve {s:?}"))))
                .collect()
        };
        match head {
            "diagonal" if arg.is_empty() => Ok(Curve::Segment {
                a: [0.0, 0.0],
                b: [1.0, 1.0],
            }),
            "segment" => match nums()?.as_slice() {
                &[x0, y0, x1, y1] => Ok(Curve::Segment {
                    a: [x0, y0],
                    b: [x1, y1],
                }),
                _ => Err(Error::invalid("segment takes x0,y0,x1,y1")),
            },
            "circle" => match nums()?.as_slice() {
                &[cx, cy, r] if r > 0.0 => Ok(Curve::Circle {
                    center: [cx, cy],
                    radius: r,
                }),
                _ => Err(Error::invalid("circle takes cx,cy,r with r > 0")),
            },
            _ => Err(Error::UnknownName {
                kind: "curve",
                name: s.into(),
                available: Self::NAMES.into(),
            }),
        }
    }

    pub fn at(&self, t: f64) -> P2 {
        match self {
            Curve::Segment { a, b } => [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])],
            Curve::Polyline(v) => {
                let m = v.len() - 1;
                if m == 0 {
                    return v[0];
                }
                let s = (t * m as f64).clamp(0.0, m as f64);
                let k = (s.floor() as usize).min(m - 1);
                let f = s - k as f64;
                [v[k][0] + f * (v[k + 1][0] - v[k][0]), v[k][1] + f * (v[k + 1][1] - v[k][1])]
            }
            Curve::Circle { center, radius } => {
                let a = 2.0 * std::f64::consts::PI * t;
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            }
            Curve::Custom(f) => f(t),
        }
    }

    /// Chord-length estimate of the curve length.
    pub fn approx_length(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|k| {
                dist(
                    self.at(k as f64 / samples as f64),
                    self.at((k + 1) as f64 / samples as f64),
                )
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct NavigationPath {
    /// Sites in order of first entry of the curve into their cells.
    pub nodes: Vec<usize>,
    /// Every cell change along the curve, starting with the first cell.
    pub crossings: Vec<usize>,
    /// Curve parameter at which each crossing was resolved.
    pub crossing_times: Vec<f64>,
    /// Length of the path joining `nodes` (unit scale).
    pub length: f64,
    /// Length of the path along the crossing sequence.
    pub crossing_length: f64,
    /// Per-site `ρ`: half the lengths of incident path edges (unit scale).
    pub rho: Vec<f64>,
    /// Per-site `ρ̃` on the crossing path.
    pub rho_tilde: Vec<f64>,
    /// Consecutive crossings that are not Delaunay neighbours (unresolved corner passes).
    pub non_adjacent_steps: usize,
}

/// Follows `curve` through the cells of `diagram`, resolving each cell change by
/// bisection to width `tol` in `t`.
pub fn navigation_path(diagram: &VoronoiDiagram, curve: &Curve, tol: f64) -> Result<NavigationPath> {
    if diagram.is_empty() {
        return Err(Error::DegenerateInput("no sites".into()));
    }
    let n = diagram.len();
    let len = curve.approx_length(256);
    let samples = ((32.0 * (n as f64).sqrt() * len).ceil() as usize).max(1024);
    let at = |t: f64| -> Result<P2> {
        let p = curve.at(t);
        let ok = (-1e-12..=1.0 + 1e-12).contains(&p[0]) && (-1e-12..=1.0 + 1e-12).contains(&p[1]);
        if ok {
            Ok(p)
        } else {
            Err(Error::CurveEscapes(t))
        }
    };
    let mut crossings = vec![diagram.locate(at(0.0)?, 0)];
    let mut times = vec![0.0];
    let mut prev = (0.0, crossings[0]);
    for k in 1..=samples {
        let t = k as f64 / samples as f64;
        let c = diagram.locate(at(t)?, prev.1);
        if c != prev.1 {
            refine(diagram, &at, prev, (t, c), tol, &mut crossings, &mut times)?;
        }
        prev = (t, c);
    }
    let mut seen = vec![false; n];
    let mut nodes = Vec::new();
    for &c in &crossings {
        if !seen[c] {
            seen[c] = true;
            nodes.push(c);
        }
    }
    let site = |i: usize| diagram.sites[i];
    let (length, rho) = path_scores(&nodes, n, site);
    let (crossing_length, rho_tilde) = path_scores(&crossings, n, site);
    let non_adjacent_steps = crossings
        .windows(2)
        .filter(|w| diagram.neighbors[w[0]].binary_search(&(w[1] as u32)).is_err())
        .count();
    Ok(NavigationPath {
        nodes,
        crossings,
        crossing_times: times,
        length,
        crossing_length,
        rho,
        rho_tilde,
        non_adjacent_steps,
    })
}

fn refine(
    d: &VoronoiDiagram,
    at: &dyn Fn(f64) -> Result<P2>,
    a: (f64, usize),
    b: (f64, usize),
    tol: f64,
    out: &mut Vec<usize>,
    times: &mut Vec<f64>,
) -> Result<()> {
    if b.0 - a.0 <= tol {
        out.push(b.1);
        times.push(b.0);
        return Ok(());
    }
    let tm = 0.5 * (a.0 + b.0);
    let cm = d.locate(at(tm)?, a.1);
    if cm != a.1 {
        refine(d, at, a, (tm, cm), tol, out, times)?;
    }
    if cm != b.1 {
        refine(d, at, (tm, cm), b, tol, out, times)?;
    }
    Ok(())
}

fn path_scores(seq: &[usize], n: usize, site: impl Fn(usize) -> P2) -> (f64, Vec<f64>) {
    let mut rho = vec![0.0; n];
    let mut length = 0.0;
    for w in seq.windows(2) {
        let l = dist(site(w[0]), site(w[1]));
        length += l;
        rho[w[0]] += 0.5 * l;
        rho[w[1]] += 0.5 * l;
    }
    (length, rho)
}

/// `ρ_λ` (or `ρ̃_λ`) as a score function.
#[derive(Clone, Debug)]
pub struct Navigation {
    pub curve: Curve,
    /// Score the crossing-sequence path instead of the first-entry path.
    pub crossing_path: bool,
}

impl ScoreFunction for Navigation {
    fn name(&self) -> String {
        if self.crossing_path { "rho-tilde" } else { "rho" }.into()
    }

    fn needs(&self) -> Needs {
        Needs {
            voronoi: true,
            ..Needs::default()
        }
    }

    fn homogeneity_gamma(&self, _dim: usize) -> Option<f64> {
        Some(1.0)
    }

    fn evaluate(&self, ctx: &Context, i: usize) -> f64 {
        self.evaluate_all(ctx).map(|v| v[i]).unwrap_or(f64::NAN)
    }

    fn evaluate_all(&self, ctx: &Context) -> Result<Vec<f64>> {
        let Some(d) = &ctx.voronoi else {
            return Ok(vec![0.0; ctx.points.len()]);
        };
        let p = navigation_path(d, &self.curve, 1e-9)?;
        let s = ctx.scale();
        let r = if self.crossing_path { p.rho_tilde } else { p.rho };
        Ok(r.into_iter().map(|v| s * v).collect())
    }
}
