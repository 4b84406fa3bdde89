//! Homogeneous Poisson input on all of `ℝ^d` and scores against a flat boundary.
//!
//! Points are generated lazily per lattice cell, each cell keyed by its integer
//! coordinates, so one seed describes an unbounded configuration and repeated queries
//! see the same points.

use crate::error::{Error, Result};
use crate::geometry::polygon::{self, clip_labelled, Labelled, P2};
use crate::geometry::Point;
use crate::rng::{poisson, purpose, uniform, SeedRecord};
use serde::{Deserialize, Serialize};

/// Axis-aligned box query over a point configuration.
pub trait PointSource: Sync {
    fn dim(&self) -> usize;
    /// Appends all points in `[lo, hi]`.
    fn collect(&self, lo: &Point, hi: &Point, out: &mut Vec<Point>);
}

/// `H_τ` on `ℝ^d`, realised cell by cell on a lattice of side `side`.
#[derive(Clone, Debug)]
pub struct LatticePoisson {
    pub tau: f64,
    pub dim: usize,
    pub side: f64,
    pub seed: SeedRecord,
}

fn zigzag(k: i64) -> u64 {
    ((k << 1) ^ (k >> 63)) as u64
}

impl LatticePoisson {
    /// About four points per lattice cell.
    pub fn new(tau: f64, dim: usize, seed: SeedRecord) -> Result<LatticePoisson> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid(format!("intensity must be positive, got {tau}")));
        }
        if !(2..=3).contains(&dim) {
            return Err(Error::invalid("dimension must be 2 or 3"));
        }
        Ok(LatticePoisson {
            tau,
            dim,
            side: (4.0 / tau).powf(1.0 / dim as f64),
            seed,
        })
    }

    fn cell_points(&self, k: &[i64], out: &mut Vec<Point>, lo: &Point, hi: &Point) {
        let path: Vec<u64> = k.iter().map(|&c| zigzag(c)).collect();
        let s = self.seed.child(&path);
        let mut rng = s.rng(purpose::LATTICE);
        let n = poisson(&mut rng, self.tau * self.side.powi(self.dim as i32));
        for _ in 0..n {
            let mut p = Point::zeros(self.dim);
            for a in 0..self.dim {
                p.coords_mut()[a] = (k[a] as f64 + uniform(&mut rng)) * self.side;
            }
            if (0..self.dim).all(|a| p[a] >= lo[a] && p[a] <= hi[a]) {
                out.push(p);
            }
        }
    }
}

impl PointSource for LatticePoisson {
    fn dim(&self) -> usize {
        self.dim
    }

    fn collect(&self, lo: &Point, hi: &Point, out: &mut Vec<Point>) {
        let d = self.dim;
        let a: Vec<i64> = (0..d).map(|k| (lo[k] / self.side).floor() as i64).collect();
        let b: Vec<i64> = (0..d).map(|k| (hi[k] / self.side).floor() as i64).collect();
        let mut k = a.clone();
        loop {
            self.cell_points(&k, out, lo, hi);
            let mut axis = 0;
            loop {
                if axis == d {
                    return;
                }
                k[axis] += 1;
                if k[axis] <= b[axis] {
                    break;
                }
                k[axis] = a[axis];
                axis += 1;
            }
        }
    }
}

/// `first` on `{w : (w − mid)·dir ≤ 0}` and `second` elsewhere.
pub struct Spliced<'a> {
    pub first: &'a dyn PointSource,
    pub second: &'a dyn PointSource,
    pub mid: Point,
    pub dir: Point,
}

impl PointSource for Spliced<'_> {
    fn dim(&self) -> usize {
        self.first.dim()
    }

    fn collect(&self, lo: &Point, hi: &Point, out: &mut Vec<Point>) {
        let side = |p: &Point| p.sub(&self.mid).dot(&self.dir) <= 0.0;
        let start = out.len();
        self.first.collect(lo, hi, out);
        let mut keep: Vec<Point> = out.drain(start..).filter(|p| side(p)).collect();
        self.second.collect(lo, hi, out);
        keep.extend(out.drain(start..).filter(|p| !side(p)));
        out.extend(keep);
    }
}

/// A finite explicit configuration.
pub struct Explicit(pub Vec<Point>);

impl PointSource for Explicit {
    fn dim(&self) -> usize {
        self.0.first().map_or(2, |p| p.dim())
    }

    fn collect(&self, lo: &Point, hi: &Point, out: &mut Vec<Point>) {
        out.extend(
            self.0
                .iter()
                .filter(|p| (0..p.dim()).all(|a| p[a] >= lo[a] && p[a] <= hi[a])),
        );
    }
}

/// The Voronoi cell of `x` among `src ∪ extra`, each edge labelled by the index of the
/// neighbouring point in the returned list. Also returns the final search radius.
pub fn local_cell(x: P2, src: &dyn PointSource, extra: &[Point], r0: f64) -> (Vec<Labelled<u32>>, Vec<P2>, f64) {
    let mut r = r0;
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let lo = Point::xy(x[0] - r, x[1] - r);
        let hi = Point::xy(x[0] + r, x[1] + r);
        src.collect(&lo, &hi, &mut buf);
        let mut pts: Vec<P2> = buf.iter().map(|p| p.xy_array()).collect();
        pts.extend(extra.iter().map(|p| p.xy_array()));
        pts.retain(|p| *p != x);
        let d2 = |p: &P2| (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2);
        pts.sort_by(|a, b| d2(a).total_cmp(&d2(b)));
        let mut cell: Vec<Labelled<u32>> = [[-r, -r], [r, -r], [r, r], [-r, r]]
            .into_iter()
            .map(|o| Labelled {
                p: [x[0] + o[0], x[1] + o[1]],
                label: u32::MAX,
            })
            .collect();
        let reach2 = |c: &[Labelled<u32>]| c.iter().map(|v| d2(&v.p)).fold(0.0, f64::max);
        let mut rho2 = reach2(&cell);
        for (k, p) in pts.iter().enumerate() {
            // Points beyond twice the current reach cannot cut the cell.
            if d2(p) > 4.0 * rho2 {
                break;
            }
            let a = [p[0] - x[0], p[1] - x[1]];
            let m = [(p[0] + x[0]) / 2.0, (p[1] + x[1]) / 2.0];
            cell = clip_labelled(&cell, a, a[0] * m[0] + a[1] * m[1], k as u32);
            rho2 = reach2(&cell);
        }
        // Finite explicit inputs may leave the cell unbounded.
        if 4.0 * rho2 <= r * r || r > 1e3 * r0 {
            return (cell, pts, r);
        }
        r *= 2.0;
    }
}

/// Scores of a point against the flat boundary `{w·n = 0}`, with `A = {w·n ≤ 0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HalfSpaceScore {
    NuMinus,
    NuPlus,
    Alpha,
    Zeta,
    /// `1{|x·n| ≤ half_width}`, independent of the configuration.
    Slab { half_width: f64 },
    /// The square of another score.
    Squared { inner: Box<HalfSpaceScore> },
}

impl HalfSpaceScore {
    pub const NAMES: &'static str = "nu-minus, nu-plus, alpha, zeta, slab[:w], and any of these with a ^2 suffix";

    pub fn parse(s: &str) -> Result<HalfSpaceScore> {
        if let Some(base) = s.strip_suffix("^2") {
            return Ok(HalfSpaceScore::Squared {
                inner: Box::new(Self::parse(base)?),
            });
        }
        match crate::scores::Score::parse(s) {
            Ok(crate::scores::Score::NuMinus) => Ok(HalfSpaceScore::NuMinus),
            Ok(crate::scores::Score::NuPlus) => Ok(HalfSpaceScore::NuPlus),
            Ok(crate::scores::Score::Alpha) => Ok(HalfSpaceScore::Alpha),
            Ok(crate::scores::Score::Zeta) => Ok(HalfSpaceScore::Zeta),
            Ok(crate::scores::Score::Slab { half_width }) => Ok(HalfSpaceScore::Slab { half_width }),
            _ => Err(Error::UnknownName {
                kind: "half-space score",
                name: s.into(),
                available: Self::NAMES.into(),
            }),
        }
    }

    pub fn name(&self) -> String {
        match self {
            HalfSpaceScore::NuMinus => "nu-minus".into(),
            HalfSpaceScore::NuPlus => "nu-plus".into(),
            HalfSpaceScore::Alpha => "alpha".into(),
            HalfSpaceScore::Zeta => "zeta".into(),
            HalfSpaceScore::Slab { half_width } => format!("slab:{half_width}"),
            HalfSpaceScore::Squared { inner } => format!("{}^2", inner.name()),
        }
    }

    fn base(&self) -> &HalfSpaceScore {
        match self {
            HalfSpaceScore::Squared { inner } => inner.base(),
            s => s,
        }
    }

    /// Order of homogeneity in dimension `d`.
    pub fn gamma(&self, d: usize) -> f64 {
        match self {
            HalfSpaceScore::NuMinus | HalfSpaceScore::NuPlus => d as f64,
            HalfSpaceScore::Alpha => d as f64 - 1.0,
            HalfSpaceScore::Zeta | HalfSpaceScore::Slab { .. } => 0.0,
            HalfSpaceScore::Squared { inner } => 2.0 * inner.gamma(d),
        }
    }

    /// Whether the score ignores the orientation of the hyperplane.
    pub fn rotation_invariant(&self) -> bool {
        !matches!(self.base(), HalfSpaceScore::Zeta)
    }

    /// Whether the score is a deterministic function of the position.
    pub fn deterministic(&self) -> bool {
        matches!(self.base(), HalfSpaceScore::Slab { .. })
    }

    /// Checks the score can be evaluated in dimension `d` against normal `n`.
    pub fn validate(&self, d: usize, n: &Point) -> Result<()> {
        match self.base() {
            HalfSpaceScore::NuMinus | HalfSpaceScore::NuPlus | HalfSpaceScore::Alpha if d != 2 => Err(
                Error::Unsupported(format!("half-space {} in d = {d}", self.name())),
            ),
            HalfSpaceScore::Zeta if n.coords().iter().any(|&c| c <= 0.0) => Err(Error::HypothesisViolation(
                "maximal-point scores need an outward normal with positive components".into(),
            )),
            _ => Ok(()),
        }
    }

    /// `ξ(x, src ∪ extra, {w·n = 0})` together with the radius the evaluation looked at.
    pub fn eval(&self, x: &Point, n: &Point, tau: f64, src: &dyn PointSource, extra: &[Point]) -> (f64, f64) {
        let d = x.dim();
        let inside = |w: &Point| w.dot(n) <= 0.0;
        match self {
            HalfSpaceScore::Squared { inner } => {
                let (v, r) = inner.eval(x, n, tau, src, extra);
                (v * v, r)
            }
            HalfSpaceScore::Slab { half_width } => (((x.dot(n)).abs() <= *half_width) as u8 as f64, 0.0),
            HalfSpaceScore::Zeta => {
                if !inside(x) {
                    return (0.0, 0.0);
                }
                let depth = -x.dot(n);
                let mut hi = *x;
                for k in 0..d {
                    hi.coords_mut()[k] += depth / n[k];
                }
                let mut buf = Vec::new();
                src.collect(x, &hi, &mut buf);
                buf.extend(
                    extra
                        .iter()
                        .filter(|p| (0..d).all(|k| p[k] >= x[k] && p[k] <= hi[k])),
                );
                let dominated = buf
                    .iter()
                    .any(|p| p != x && inside(p) && (0..d).all(|k| p[k] >= x[k]));
                (!dominated as u8 as f64, hi.dist(x))
            }
            HalfSpaceScore::NuMinus | HalfSpaceScore::NuPlus | HalfSpaceScore::Alpha => {
                let xv = x.xy_array();
                let (cell, pts, r) = local_cell(xv, src, extra, 3.5 / tau.sqrt());
                let nv = n.xy_array();
                let x_in = inside(x);
                let v = match self {
                    HalfSpaceScore::Alpha => {
                        if !x_in {
                            0.0
                        } else {
                            let m = cell.len();
                            (0..m)
                                .filter(|&k| cell[k].label != u32::MAX)
                                .filter(|&k| {
                                    let q = pts[cell[k].label as usize];
                                    nv[0] * q[0] + nv[1] * q[1] > 0.0
                                })
                                .map(|k| polygon::dist(cell[k].p, cell[(k + 1) % m].p))
                                .sum()
                        }
                    }
                    _ => {
                        let poly: Vec<P2> = cell.iter().map(|v| v.p).collect();
                        let a_in = polygon::area(&polygon::clip_halfplane(&poly, nv, 0.0));
                        let v = if x_in {
                            (polygon::area(&poly) - a_in).max(0.0)
                        } else {
                            -a_in
                        };
                        if *self == HalfSpaceScore::NuPlus {
                            v.abs()
                        } else {
                            v
                        }
                    }
                };
                (v, r)
            }
        }
    }
}

/// A unit tangent vector orthogonal to `n` (d = 2), or a tangent frame (d = 3).
pub fn tangent_frame(n: &Point) -> Vec<Point> {
    crate::geometry::tangent_basis(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voronoi::{BoundaryMode, VoronoiDiagram};

    #[test]
    fn lattice_is_consistent_across_queries() {
        let h = LatticePoisson::new(3.0, 2, SeedRecord::new(5, &[])).unwrap();
        let mut a = Vec::new();
        h.collect(&Point::xy(-2.0, -2.0), &Point::xy(2.0, 2.0), &mut a);
        let mut b = Vec::new();
        h.collect(&Point::xy(-1.0, 0.0), &Point::xy(1.5, 1.0), &mut b);
        let inner: Vec<Point> = a
            .iter()
            .copied()
            .filter(|p| p[0] >= -1.0 && p[0] <= 1.5 && p[1] >= 0.0 && p[1] <= 1.0)
            .collect();
        let mut x = inner.clone();
        let mut y = b.clone();
        x.sort_by(|p, q| p.lex_cmp(q));
        y.sort_by(|p, q| p.lex_cmp(q));
        assert_eq!(x, y);
        // Intensity: mean count in a 20 × 20 window is 1200.
        let mut big = Vec::new();
        h.collect(&Point::xy(-10.0, -10.0), &Point::xy(10.0, 10.0), &mut big);
        assert!((big.len() as f64 - 1200.0).abs() < 4.0 * 1200f64.sqrt());
    }

    #[test]
    fn local_cell_matches_full_diagram() {
        // Map a window of H_1 into the unit square and compare the central cell.
        let h = LatticePoisson::new(1.0, 2, SeedRecord::new(9, &[])).unwrap();
        let mut pts = Vec::new();
        h.collect(&Point::xy(-15.0, -15.0), &Point::xy(15.0, 15.0), &mut pts);
        let x = Point::xy(0.1, -0.3);
        let (cell, _, _) = local_cell(x.xy_array(), &h, &[], 1.0);
        let mut sites: Vec<P2> = pts.iter().map(|p| [(p[0] + 15.0) / 30.0, (p[1] + 15.0) / 30.0]).collect();
        sites.push([(x[0] + 15.0) / 30.0, (x[1] + 15.0) / 30.0]);
        let d = VoronoiDiagram::build(&sites, BoundaryMode::Clip).unwrap();
        let full = d.cell_volume(sites.len() - 1) * 900.0;
        let poly: Vec<P2> = cell.iter().map(|v| v.p).collect();
        assert!((polygon::area(&poly) - full).abs() < 1e-9, "{} vs {full}", polygon::area(&poly));
    }

    #[test]
    fn spliced_source_takes_each_side() {
        let a = Explicit(vec![Point::xy(-1.0, 0.0), Point::xy(1.0, 0.0)]);
        let b = Explicit(vec![Point::xy(-2.0, 0.0), Point::xy(2.0, 0.0)]);
        let s = Spliced {
            first: &a,
            second: &b,
            mid: Point::xy(0.0, 0.0),
            dir: Point::xy(1.0, 0.0),
        };
        let mut out = Vec::new();
        s.collect(&Point::xy(-5.0, -1.0), &Point::xy(5.0, 1.0), &mut out);
        out.sort_by(|p, q| p.lex_cmp(q));
        assert_eq!(out, vec![Point::xy(-1.0, 0.0), Point::xy(2.0, 0.0)]);
    }

    #[test]
    fn flat_scores_on_small_configurations() {
        let n = Point::xy(0.0, 1.0);
        // Two points mirrored across the line: the bisector is the boundary itself.
        let x = Point::xy(0.0, -0.5);
        let src = Explicit(vec![Point::xy(0.0, 0.5)]);
        let (alpha, _) = HalfSpaceScore::Alpha.eval(&x, &n, 1.0, &src, &[]);
        // The cell is the box clipped to y ≤ 0; its top edge has the search box width.
        assert!(alpha > 0.0);
        let (nu, _) = HalfSpaceScore::NuMinus.eval(&x, &n, 1.0, &src, &[]);
        assert_eq!(nu, 0.0);
        let z = HalfSpaceScore::Zeta;
        let diag = Point::xy(1.0, 1.0).normalized().unwrap();
        let (v, _) = z.eval(&Point::xy(-0.5, -0.5), &diag, 1.0, &Explicit(vec![]), &[]);
        assert_eq!(v, 1.0);
        let (v, _) = z.eval(&Point::xy(-0.5, -0.5), &diag, 1.0, &Explicit(vec![]), &[Point::xy(-0.2, -0.4)]);
        assert_eq!(v, 0.0);
        assert!(z.validate(2, &n).is_err());
        assert_eq!(HalfSpaceScore::parse("alpha^2").unwrap().name(), "alpha^2");
    }
}
