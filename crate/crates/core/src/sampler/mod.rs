//! Poisson, binomial and homogeneous point processes.
//!
//! `P_λ` has intensity `λκ` on `[0,1]^d` and is realised by thinning a homogeneous
//! proposal of intensity `λ·sup κ`. Binomial input `X_n` uses rejection sampling, and
//! homogeneous `H_τ` lives on an arbitrary box. All draws come from [`SeedRecord`] streams,
//! so a `(seed, parameters)` pair determines the output bit for bit.

mod io;

pub use io::{read_binary, read_csv, write_binary, write_csv};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point, Region};
use crate::rng::{poisson, purpose, uniform, SeedRecord, StreamRng};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
pub enum DensityKind {
    Constant(f64),
    /// `value · 1_A`.
    Indicator { region: Arc<Region>, value: f64 },
    /// `c0 + g·x`.
    Affine { c0: f64, grad: Point },
    Custom(Arc<dyn Fn(&Point) -> f64 + Send + Sync>),
}

impl fmt::Debug for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityKind::Constant(c) => write!(f, "Constant({c})"),
            DensityKind::Indicator { value, .. } => write!(f, "Indicator({value})"),
            DensityKind::Affine { c0, grad } => write!(f, "Affine({c0}, {:?})", grad.coords()),
            DensityKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A bounded density `κ` on `[0,1]^d`.
#[derive(Clone, Debug)]
pub struct Density {
    pub kind: DensityKind,
    pub dim: usize,
    pub sup_bound: f64,
    /// Whether `∫κ = 1`, required for binomial input.
    pub normalized: bool,
}

impl Density {
    pub fn uniform(dim: usize) -> Density {
        Density {
            kind: DensityKind::Constant(1.0),
            dim,
            sup_bound: 1.0,
            normalized: true,
        }
    }

    pub fn constant(dim: usize, c: f64) -> Result<Density> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidDensity(format!("constant {c} is not a valid density")));
        }
        Ok(Density {
            kind: DensityKind::Constant(c),
            dim,
            sup_bound: c,
            normalized: (c - 1.0).abs() < 1e-12,
        })
    }

    /// `value · 1_A`; normalized when `value · Vol(A) = 1`.
    pub fn indicator(region: Arc<Region>, value: f64) -> Result<Density> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidDensity(format!("indicator weight {value}")));
        }
        let vol = region.volume()?;
        Ok(Density {
            dim: region.dim,
            kind: DensityKind::Indicator { region, value },
            sup_bound: value,
            normalized: (value * vol - 1.0).abs() < 1e-9,
        })
    }

    pub fn affine(c0: f64, grad: Point) -> Result<Density> {
        let dim = grad.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for mask in 0..(1u32 << dim) {
            let v: f64 = c0 + (0..dim).filter(|k| mask >> k & 1 == 1).map(|k| grad[k]).sum::<f64>();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo < 0.0 || !hi.is_finite() {
            return Err(Error::InvalidDensity("affine density is negative on the cube".into()));
        }
        let integral = c0 + 0.5 * (0..dim).map(|k| grad[k]).sum::<f64>();
        Ok(Density {
            kind: DensityKind::Affine { c0, grad },
            dim,
            sup_bound: hi,
            normalized: (integral - 1.0).abs() < 1e-12,
        })
    }

    pub fn custom(
        dim: usize,
        sup_bound: f64,
        normalized: bool,
        f: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
    ) -> Density {
        Density {
            kind: DensityKind::Custom(f),
            dim,
            sup_bound,
            normalized,
        }
    }

    #[inline]
    pub fn kappa(&self, x: &Point) -> f64 {
        match &self.kind {
            DensityKind::Constant(c) => *c,
            DensityKind::Indicator { region, value } => {
                if region.contains(x) {
                    *value
                } else {
                    0.0
                }
            }
            DensityKind::Affine { c0, grad } => c0 + grad.dot(x),
            DensityKind::Custom(f) => f(x),
        }
    }

    /// `∫_{[0,1]^d} κ` where known in closed form.
    pub fn integral(&self) -> Option<f64> {
        match &self.kind {
            DensityKind::Constant(c) => Some(*c),
            DensityKind::Indicator { region, value } => region.volume().ok().map(|v| v * value),
            DensityKind::Affine { c0, grad } => {
                Some(c0 + 0.5 * (0..self.dim).map(|k| grad[k]).sum::<f64>())
            }
            DensityKind::Custom(_) => self.normalized.then_some(1.0),
        }
    }

    /// Whether `κ` is bounded away from zero on the cube, as the volume results require.
    pub fn bounded_away_from_zero(&self) -> bool {
        match &self.kind {
            DensityKind::Constant(c) => *c > 0.0,
            DensityKind::Indicator { region, value } => {
                *value > 0.0 && matches!(region.kind, crate::geometry::RegionKind::Cube)
            }
            DensityKind::Affine { c0, grad } => {
                (0..1u32 << self.dim).all(|mask| {
                    c0 + (0..self.dim)
                        .filter(|k| mask >> k & 1 == 1)
                        .map(|k| grad[k])
                        .sum::<f64>()
                        > 0.0
                })
            }
            DensityKind::Custom(_) => false,
        }
    }

    /// Whether `κ` is constant on the cube.
    pub fn is_constant(&self) -> bool {
        matches!(self.kind, DensityKind::Constant(_))
    }

    fn checked(&self, x: &Point) -> Result<f64> {
        let k = self.kappa(x);
        if !(k >= 0.0) || k > self.sup_bound * (1.0 + 1e-12) {
            return Err(Error::InvalidDensity(format!(
                "kappa({:?}) = {k} is outside [0, {}]",
                x.coords(),
                self.sup_bound
            )));
        }
        Ok(k)
    }
}

/// Which process produced a point set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "lowercase")]
pub enum Provenance {
    Poisson { lambda: f64 },
    Binomial { n: u64 },
    Homogeneous { tau: f64, lo: Vec<f64>, hi: Vec<f64> },
    Explicit,
}

/// A finite configuration of points in a carrier box.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    pub dim: usize,
    pub points: Vec<Point>,
    pub provenance: Provenance,
    pub seed: SeedRecord,
}

impl PointSet {
    pub fn explicit(dim: usize, points: Vec<Point>) -> Result<PointSet> {
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: p.dim(),
            });
        }
        Ok(PointSet {
            dim,
            points,
            provenance: Provenance::Explicit,
            seed: SeedRecord::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn carrier(&self) -> Aabb {
        match &self.provenance {
            Provenance::Homogeneous { lo, hi, .. } => Aabb {
                lo: Point::from_slice(lo),
                hi: Point::from_slice(hi),
            },
            _ => Aabb::unit(self.dim),
        }
    }

    /// The intensity parameter (`λ`, `n` or `τ`) used to rescale scores.
    pub fn intensity(&self) -> Option<f64> {
        match &self.provenance {
            Provenance::Poisson { lambda } => Some(*lambda),
            Provenance::Binomial { n } => Some(*n as f64),
            Provenance::Homogeneous { tau, .. } => Some(*tau),
            Provenance::Explicit => None,
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 2 || d == 3 {
        Ok(())
    } else {
        Err(Error::invalid(format!("dimension must be 2 or 3, got {d}")))
    }
}

fn uniform_point(rng: &mut StreamRng, lo: &Point, hi: &Point) -> Point {
    let mut p = *lo;
    for k in 0..lo.dim() {
        p.coords_mut()[k] = lo[k] + (hi[k] - lo[k]) * uniform(rng);
    }
    p
}

/// `P_{λκ}` on `[0,1]^d` by thinning.
pub fn sample_poisson(lambda: f64, kappa: &Density, seed: &SeedRecord) -> Result<PointSet> {
    check_dim(kappa.dim)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda must be positive and finite"));
    }
    if !(kappa.sup_bound >= 0.0 && kappa.sup_bound.is_finite()) {
        return Err(Error::InvalidDensity("sup bound must be finite".into()));
    }
    let d = kappa.dim;
    let n = poisson(&mut seed.rng(purpose::COUNT), lambda * kappa.sup_bound);
    let mut prng = seed.rng(purpose::POINTS);
    let mut trng = seed.rng(purpose::THINNING);
    let (lo, hi) = (Point::zeros(d), Point::splat(d, 1.0));
    let constant = matches!(kappa.kind, DensityKind::Constant(_));
    let mut points = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let p = uniform_point(&mut prng, &lo, &hi);
        let u = uniform(&mut trng);
        if constant {
            points.push(p);
            continue;
        }
        let k = kappa.checked(&p)?;
        if u * kappa.sup_bound < k {
            points.push(p);
        }
    }
    Ok(PointSet {
        dim: d,
        points,
        provenance: Provenance::Poisson { lambda },
        seed: seed.clone(),
    })
}

/// Draws `count` i.i.d. points with density `κ` from the given streams.
fn iid_points(count: u64, kappa: &Density, seed: &SeedRecord) -> Result<Vec<Point>> {
    let d = kappa.dim;
    let (lo, hi) = (Point::zeros(d), Point::splat(d, 1.0));
    let mut prng = seed.rng(purpose::POINTS);
    let mut trng = seed.rng(purpose::THINNING);
    let constant = matches!(kappa.kind, DensityKind::Constant(_));
    let cap = 1_000_000u64.saturating_mul(count.max(1));
    let mut proposals = 0u64;
    let mut points = Vec::with_capacity(count as usize);
    while (points.len() as u64) < count {
        if proposals >= cap {
            return Err(Error::RejectionCap(cap));
        }
        proposals += 1;
        let p = uniform_point(&mut prng, &lo, &hi);
        let u = uniform(&mut trng);
        if constant || u * kappa.sup_bound < kappa.checked(&p)? {
            points.push(p);
        }
    }
    Ok(points)
}

/// `X_n`: exactly `n` i.i.d. points with density `κ`.
pub fn sample_binomial(n: u64, kappa: &Density, seed: &SeedRecord) -> Result<PointSet> {
    check_dim(kappa.dim)?;
    if !kappa.normalized {
        return Err(Error::InvalidDensity("binomial input needs a normalized density".into()));
    }
    Ok(PointSet {
        dim: kappa.dim,
        points: iid_points(n, kappa, seed)?,
        provenance: Provenance::Binomial { n },
        seed: seed.clone(),
    })
}

/// `H_τ` restricted to `bx`.
pub fn sample_homogeneous(tau: f64, bx: &Aabb, seed: &SeedRecord) -> Result<PointSet> {
    let d = bx.dim();
    check_dim(d)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid("tau must be positive and finite"));
    }
    let bx = Aabb::new(bx.lo, bx.hi)?;
    let n = poisson(&mut seed.rng(purpose::COUNT), tau * bx.volume());
    let mut rng = seed.rng(purpose::POINTS);
    let points = (0..n).map(|_| uniform_point(&mut rng, &bx.lo, &bx.hi)).collect();
    Ok(PointSet {
        dim: d,
        points,
        provenance: Provenance::Homogeneous {
            tau,
            lo: bx.lo.coords().to_vec(),
            hi: bx.hi.coords().to_vec(),
        },
        seed: seed.clone(),
    })
}

/// `(X_n, X_{N(n)})` with `N(n) ~ Poisson(n)` and both sets prefixes of one i.i.d. stream.
pub fn couple_poissonized(n: u64, kappa: &Density, seed: &SeedRecord) -> Result<(PointSet, PointSet)> {
    let m = poisson(&mut seed.rng(purpose::COUNT), n as f64);
    couple_with_count(n, m, kappa, seed)
}

/// The coupling with a prescribed Poisson count `m`.
pub fn couple_with_count(
    n: u64,
    m: u64,
    kappa: &Density,
    seed: &SeedRecord,
) -> Result<(PointSet, PointSet)> {
    check_dim(kappa.dim)?;
    if !kappa.normalized {
        return Err(Error::InvalidDensity("binomial input needs a normalized density".into()));
    }
    let all = iid_points(n.max(m), kappa, seed)?;
    let bin = PointSet {
        dim: kappa.dim,
        points: all[..n as usize].to_vec(),
        provenance: Provenance::Binomial { n },
        seed: seed.clone(),
    };
    let poi = PointSet {
        dim: kappa.dim,
        points: all[..m as usize].to_vec(),
        provenance: Provenance::Poisson { lambda: n as f64 },
        seed: seed.clone(),
    };
    Ok((bin, poi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GraphFn, GraphSurface};

    fn triangle_density() -> Density {
        let r = Region::under_graph(
            GraphSurface::over_unit(GraphFn::Linear(vec![1.0, -1.0]), 2).unwrap(),
        )
        .unwrap();
        Density::indicator(Arc::new(r), 2.0).unwrap()
    }

    #[test]
    fn poisson_mean_count() {
        let k = Density::uniform(2);
        let reps = 500;
        let total: usize = (0..reps)
            .map(|r| sample_poisson(1000.0, &k, &SeedRecord::new(3, &[r])).unwrap().len())
            .sum();
        let mean = total as f64 / reps as f64;
        assert!((mean - 1000.0).abs() < 4.0 * (1000.0f64 / reps as f64).sqrt());
    }

    #[test]
    fn thinning_respects_support_and_mass() {
        let k = triangle_density();
        let s = sample_poisson(1e4, &k, &SeedRecord::new(11, &[])).unwrap();
        assert!(s.points.iter().all(|p| p[0] + p[1] <= 1.0));
        // ∫_{x+y ≤ 0.5} κ = 2·(1/8) = 1/4, so the fraction is 1/4 of total mass 1.
        let inner = s.points.iter().filter(|p| p[0] + p[1] <= 0.5).count() as f64;
        let frac = inner / s.len() as f64;
        let se = (0.25f64 * 0.75 / s.len() as f64).sqrt();
        assert!((frac - 0.25).abs() < 4.0 * se, "fraction {frac}");
    }

    #[test]
    fn binomial_cases() {
        let u = Density::uniform(2);
        assert!(sample_binomial(0, &u, &SeedRecord::new(1, &[])).unwrap().is_empty());
        let s = sample_binomial(100_000, &u, &SeedRecord::new(1, &[])).unwrap();
        assert_eq!(s.len(), 100_000);
        let mut xs: Vec<f64> = s.points.iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| ((i + 1) as f64 / n - x).abs().max((x - i as f64 / n).abs()))
            .fold(0.0, f64::max);
        assert!(ks < 0.01);
        let t = sample_binomial(100_000, &triangle_density(), &SeedRecord::new(2, &[])).unwrap();
        assert!(t.points.iter().all(|p| p[0] + p[1] <= 1.0));
        assert!(sample_binomial(10, &Density::constant(2, 2.0).unwrap(), &SeedRecord::new(1, &[]))
            .is_err());
    }

    #[test]
    fn invalid_density_detected() {
        let bad = Density::custom(2, 1.0, true, Arc::new(|p: &Point| 2.0 * p[0]));
        let r = sample_poisson(1000.0, &bad, &SeedRecord::new(1, &[]));
        assert!(matches!(r, Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn homogeneous_counts() {
        let bx = Aabb::cube(2, 10.0);
        let reps = 400;
        let mean = (0..reps)
            .map(|r| sample_homogeneous(1.0, &bx, &SeedRecord::new(5, &[r])).unwrap().len())
            .sum::<usize>() as f64
            / reps as f64;
        assert!((mean - 100.0).abs() < 4.0 * (100.0f64 / reps as f64).sqrt());
        let s = sample_homogeneous(2.0, &Aabb::unit(3), &SeedRecord::new(5, &[])).unwrap();
        assert!(s.points.iter().all(|p| Aabb::unit(3).contains(p)));
        let degenerate = Aabb {
            lo: Point::xy(0.0, 0.0),
            hi: Point::xy(1.0, 0.0),
        };
        assert!(sample_homogeneous(1.0, &degenerate, &SeedRecord::new(5, &[])).is_err());
    }

    #[test]
    fn coupling_prefixes() {
        let u = Density::uniform(2);
        let seed = SeedRecord::new(9, &[1]);
        let (b, p) = couple_with_count(100, 100, &u, &seed).unwrap();
        assert_eq!(b.points, p.points);
        let (b, p) = couple_with_count(100, 120, &u, &seed).unwrap();
        assert_eq!(&p.points[..100], &b.points[..]);
        assert_eq!(p.len(), 120);
        let reps = 10_000u64;
        let mean_abs = (0..reps)
            .map(|r| {
                let m = poisson(&mut SeedRecord::new(4, &[r]).rng(purpose::COUNT), 1000.0);
                (m as f64 - 1000.0).abs()
            })
            .sum::<f64>()
            / reps as f64;
        // Folded normal: E|N − n| ≈ √(2n/π).
        let target = (2000.0 / std::f64::consts::PI).sqrt();
        assert!((mean_abs - target).abs() < 0.6, "{mean_abs} vs {target}");
    }

    #[test]
    fn reproducible() {
        let k = triangle_density();
        let a = sample_poisson(5000.0, &k, &SeedRecord::new(77, &[2, 3])).unwrap();
        let b = sample_poisson(5000.0, &k, &SeedRecord::new(77, &[2, 3])).unwrap();
        assert_eq!(a, b);
        let c = sample_poisson(5000.0, &k, &SeedRecord::new(77, &[2, 4])).unwrap();
        assert_ne!(a.points, c.points);
    }
}
