//! Empirical checks of the stabilization and moment hypotheses: tails of a
//! stabilization-radius proxy, moment envelopes in the boundary distance, and the gap
//! between a score and its tangent half-space counterpart.

use super::maximal::Buckets;
use super::volume::{nu_halfplane, Sign};
use super::{Context, Score, ScoreFunction, ScoreOptions};
use crate::error::{Error, Result};
use crate::geometry::{Point, Region};
use crate::rng::SeedRecord;
use crate::sampler::{sample_poisson, Density};
use crate::stats::{ols, summarize};
use serde::Serialize;

/// Points farther than this many `λ^{−1/d}` from `∂A` are not sampled for Voronoi radii.
const BAND: f64 = 2.0;

/// `D(x)`: length of the vector of axis extents `sup{s : x + s·e_k ∈ A}`.
fn axis_extent(region: &Region, x: &Point) -> f64 {
    let mut sum = 0.0;
    for k in 0..x.dim() {
        let room = region.side - x[k];
        let mut probe = *x;
        let mut inside = |s: f64| {
            probe.coords_mut()[k] = x[k] + s;
            region.contains(&probe)
        };
        let (mut lo, mut hi) = (0.0, room);
        if inside(room) {
            lo = room;
        } else {
            for _ in 0..50 {
                let m = 0.5 * (lo + hi);
                if inside(m) {
                    lo = m;
                } else {
                    hi = m;
                }
            }
        }
        sum += lo * lo;
    }
    sum.sqrt()
}

/// Stabilization radius proxies `λ^{1/d}·R(x)` with the points they belong to.
pub fn stabilization_radii(score: &Score, ctx: &Context) -> Result<Vec<(usize, f64)>> {
    let s = ctx.scale();
    let pts = &ctx.points.points;
    match score {
        Score::Zeta => {
            let b = Buckets::new(pts, (0..pts.len()).filter(|&i| ctx.inside[i]));
            Ok((0..pts.len())
                .filter(|&i| ctx.inside[i])
                .map(|i| {
                    let r = b
                        .nearest_dominator(i)
                        .unwrap_or_else(|| axis_extent(ctx.region, &pts[i]));
                    (i, s * r)
                })
                .collect())
        }
        Score::NuMinus | Score::NuPlus | Score::Alpha => {
            let d = ctx
                .voronoi
                .as_ref()
                .ok_or_else(|| Error::Unsupported("radius proxies need planar cells".into()))?;
            let mut out = Vec::new();
            for (i, p) in pts.iter().enumerate() {
                if ctx.region.signed_distance(p)?.abs() * s <= BAND {
                    out.push((i, s * d.stabilization_diagnostic(i)));
                }
            }
            Ok(out)
        }
        _ => Err(Error::Unsupported(format!("no radius proxy for {}", score.name()))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailCurve {
    pub t: Vec<f64>,
    /// `τ̂(t)`, the fraction of sampled radii exceeding `t`.
    pub tau: Vec<f64>,
    pub samples: usize,
    /// Slope of `log τ̂` against `t` over grid points with at least 5 exceedances.
    pub slope: Option<f64>,
    pub slope_std_error: Option<f64>,
}

/// Fits the exponential tail `τ̂(t) ≈ C·e^{slope·t}` of `radii` on `t_grid`.
pub fn tail_curve(radii: &[f64], t_grid: &[f64]) -> TailCurve {
    let n = radii.len();
    let exceed: Vec<usize> = t_grid
        .iter()
        .map(|&t| radii.iter().filter(|&&r| r > t).count())
        .collect();
    let tau: Vec<f64> = exceed.iter().map(|&c| c as f64 / n.max(1) as f64).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = t_grid
        .iter()
        .zip(&exceed)
        .filter(|(_, &c)| c >= 5)
        .map(|(&t, &c)| (t, (c as f64 / n as f64).ln()))
        .unzip();
    let fit = (x.len() >= 3).then(|| ols(&x, &y));
    TailCurve {
        t: t_grid.to_vec(),
        tau,
        samples: n,
        slope: fit.map(|f| f.slope),
        slope_std_error: fit.map(|f| f.slope_std_error),
    }
}

/// Empirical tail of the stabilization radius of `score` over `replicates` samples of
/// `P_λ` in `region`.
#[allow(clippy::too_many_arguments)]
pub fn stabilization_tail(
    score: &Score,
    region: &Region,
    density: &Density,
    lambda: f64,
    t_grid: &[f64],
    replicates: usize,
    seed: &SeedRecord,
    opts: &ScoreOptions,
) -> Result<TailCurve> {
    let mut radii = Vec::new();
    for r in 0..replicates {
        let pts = sample_poisson(lambda, density, &seed.child(&[r as u64]))?;
        let mut needs = score.needs();
        needs.volume = false;
        needs.dominance = false;
        needs.voronoi |= !matches!(score, Score::Zeta);
        let ctx = Context::new(&pts, region, lambda, needs, opts.clone())?;
        radii.extend(stabilization_radii(score, &ctx)?.into_iter().map(|(_, r)| r));
    }
    Ok(tail_curve(&radii, t_grid))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentCurve {
    /// Bin centres in `|u| = λ^{1/d}·|t|`.
    pub u: Vec<f64>,
    /// Mean of `|ξ_λ|^p` over points in the bin.
    pub moment: Vec<f64>,
    pub count: Vec<usize>,
    /// Slope of `log moment` against `|u|` over bins with a positive moment.
    pub slope: Option<f64>,
}

/// `Ê|ξ_λ((y, λ^{−1/d}u))|^p` binned by `|u|`, from replicate samples of `P_λ`.
#[allow(clippy::too_many_arguments)]
pub fn moment_envelope(
    score: &Score,
    region: &Region,
    density: &Density,
    lambda: f64,
    p: f64,
    bin_width: f64,
    bins: usize,
    replicates: usize,
    seed: &SeedRecord,
    opts: &ScoreOptions,
) -> Result<MomentCurve> {
    let mut sum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for r in 0..replicates {
        let pts = sample_poisson(lambda, density, &seed.child(&[r as u64]))?;
        let ctx = Context::new(&pts, region, lambda, score.needs(), opts.clone())?;
        let s = ctx.scale();
        let xi = score.evaluate_all(&ctx)?;
        for (x, v) in pts.points.iter().zip(&xi) {
            let u = region.signed_distance(x)?.abs() * s;
            let b = (u / bin_width) as usize;
            if b < bins {
                sum[b] += v.abs().powf(p);
                count[b] += 1;
            }
        }
    }
    let u: Vec<f64> = (0..bins).map(|b| (b as f64 + 0.5) * bin_width).collect();
    let moment: Vec<f64> = sum
        .iter()
        .zip(&count)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = u
        .iter()
        .zip(&moment)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&u, &m)| (u, m.ln()))
        .unzip();
    Ok(MomentCurve {
        slope: (x.len() >= 3).then(|| ols(&x, &y).slope),
        u,
        moment,
        count,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinGapPoint {
    pub lambda: f64,
    /// Mean of `|ξ(x; ∂A) − ξ(x; H_y)|` over points within `u_max·λ^{−1/d}` of `∂A`.
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

/// Score of site `i` when `∂A` is replaced by the half-plane `{w : (w − y)·n ≤ 0}`.
fn halfplane_score(score: &Score, ctx: &Context, buckets: &Buckets, i: usize, y: &Point, n: &Point) -> f64 {
    let c = n.dot(y);
    let nv = n.xy_array();
    let inside = |w: &Point| n.dot(w) <= c;
    match score {
        Score::NuMinus => ctx.lambda * nu_halfplane(ctx, i, nv, c, Sign::Minus),
        Score::NuPlus => ctx.lambda * nu_halfplane(ctx, i, nv, c, Sign::Plus),
        Score::Alpha => {
            let pts = &ctx.points.points;
            if !inside(&pts[i]) {
                return 0.0;
            }
            let d = ctx.voronoi.as_ref().expect("voronoi context");
            ctx.scale()
                * d.faces(i)
                    .filter(|f| !inside(&pts[f.neighbor as usize]))
                    .map(|f| f.length())
                    .sum::<f64>()
        }
        Score::Zeta => {
            let x = &ctx.points.points[i];
            (inside(x) && !buckets.dominated_by(x, Some(i), &inside)) as u8 as f64
        }
        _ => 0.0,
    }
}

/// The linearization gap curve over `lambdas` (planar scores only; no pass/fail claim).
#[allow(clippy::too_many_arguments)]
pub fn lin_gap(
    score: &Score,
    region: &Region,
    density: &Density,
    lambdas: &[f64],
    u_max: f64,
    replicates: usize,
    seed: &SeedRecord,
    opts: &ScoreOptions,
) -> Result<Vec<LinGapPoint>> {
    if region.dim != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: region.dim,
        });
    }
    let mut out = Vec::new();
    for (li, &lambda) in lambdas.iter().enumerate() {
        let mut gaps = Vec::new();
        for r in 0..replicates {
            let pts = sample_poisson(lambda, density, &seed.child(&[li as u64, r as u64]))?;
            let mut needs = score.needs();
            needs.voronoi |= !matches!(score, Score::Zeta);
            let ctx = Context::new(&pts, region, lambda, needs, opts.clone())?;
            let xi = score.evaluate_all(&ctx)?;
            let buckets = Buckets::new(&pts.points, 0..pts.len());
            for (i, x) in pts.points.iter().enumerate() {
                let sp = match region.boundary.closest_point_param(x) {
                    Ok(sp) if !sp.is_degenerate() => sp,
                    _ => continue,
                };
                if sp.t.abs() * ctx.scale() > u_max {
                    continue;
                }
                let h = halfplane_score(score, &ctx, &buckets, i, &sp.y, &sp.normal);
                gaps.push((xi[i] - h).abs());
            }
        }
        let s = summarize(&gaps);
        out.push(LinGapPoint {
            lambda,
            mean: s.mean,
            std_error: s.std_error,
            count: s.count,
        });
    }
    Ok(out)
}
