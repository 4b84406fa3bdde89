//! Score functions `ξ` and the rescaled statistic `H^ξ(P_λ, M) = Σ ξ_λ(x, P_λ, M)`.
//!
//! Scores are evaluated on the unit scale and returned already rescaled, so a volume
//! score is `λ·Vol`, a surface score `λ^{(d−1)/d}·length` and a navigation score
//! `λ^{1/d}·length`. A [`Context`] holds the geometry shared by all points and is built
//! once per point set.

pub mod diagnostics;
pub mod maximal;
pub mod navigation;
pub mod surface;
pub mod volume;

pub use maximal::{maximal_layer, maximal_layer_brute, zeta_direct, MaximalLayer};
pub use navigation::{navigation_path, Curve, NavigationPath};
pub use surface::{alpha_unscaled, surface_estimator, weighted_surface_integral};
pub use volume::{volume_estimator, RegionPolygon, Sign, VolumeEstimate};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Workers};
use crate::geometry::Region;
use crate::rng::SeedRecord;
use crate::sampler::PointSet;
use crate::voronoi::{BoundaryMode, NNIndex, ProbePartition, VoronoiDiagram};
use serde::Serialize;
use std::io::Write;

/// Geometry a score needs prebuilt.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Needs {
    /// Planar Voronoi cells.
    pub voronoi: bool,
    /// Cell ∩ A volumes (polygon clipping in d = 2, probes otherwise).
    pub volume: bool,
    /// Maximal points of `P ∩ A`.
    pub dominance: bool,
}

#[derive(Clone, Debug)]
pub struct ScoreOptions {
    pub mode: BoundaryMode,
    /// Chord error of the polygonized boundary.
    pub chord_tol: f64,
    /// Monte Carlo probes per site for volumes that cannot be clipped exactly.
    pub probes_per_site: usize,
    pub probe_seed: SeedRecord,
    pub workers: Workers,
    /// Keep per-point scores in the returned [`StatisticValue`].
    pub keep_scores: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            mode: BoundaryMode::Clip,
            chord_tol: 1e-5,
            probes_per_site: 256,
            probe_seed: SeedRecord::new(0, &[]),
            workers: Workers::default(),
            keep_scores: false,
        }
    }
}

/// Read-only geometry shared by all per-point evaluations.
pub struct Context<'a> {
    pub points: &'a PointSet,
    pub region: &'a Region,
    pub lambda: f64,
    pub opts: ScoreOptions,
    /// `x ∈ A` for every point.
    pub inside: Vec<bool>,
    pub voronoi: Option<VoronoiDiagram>,
    pub polygon: Option<RegionPolygon>,
    pub nn: Option<NNIndex>,
    pub probes: Option<ProbePartition>,
    /// Maximal points of `P ∩ A`.
    pub maximal: Option<Vec<bool>>,
}

impl<'a> Context<'a> {
    pub fn new(
        points: &'a PointSet,
        region: &'a Region,
        lambda: f64,
        needs: Needs,
        opts: ScoreOptions,
    ) -> Result<Context<'a>> {
        if points.dim != region.dim {
            return Err(Error::Dimension {
                expected: region.dim,
                got: points.dim,
            });
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
        }
        let d = points.dim;
        let inside = volume::membership(&points.points, region);
        let mut ctx = Context {
            points,
            region,
            lambda,
            opts,
            inside,
            voronoi: None,
            polygon: None,
            nn: None,
            probes: None,
            maximal: None,
        };
        if points.is_empty() {
            return Ok(ctx);
        }
        if needs.voronoi || (needs.volume && d == 2) {
            if d != 2 {
                return Err(Error::Unsupported(format!("explicit Voronoi cells in d = {d}")));
            }
            ctx.voronoi = Some(crate::voronoi::build_voronoi_2d(points, ctx.opts.mode)?);
        }
        if needs.volume {
            let poly = if d == 2 {
                match RegionPolygon::new(region, ctx.opts.chord_tol, ctx.opts.mode) {
                    Ok(p) => Some(p),
                    Err(Error::Unsupported(_)) => None,
                    Err(e) => return Err(e),
                }
            } else {
                None
            };
            match poly {
                Some(p) => ctx.polygon = Some(p),
                None => {
                    let nn = NNIndex::new(&points.points, ctx.opts.mode);
                    let probes = ctx.opts.probes_per_site.max(1) * points.len();
                    ctx.probes = Some(ProbePartition::new(&nn, region, probes, &ctx.opts.probe_seed));
                    ctx.nn = Some(nn);
                }
            }
        }
        if needs.dominance {
            let mut flags = vec![false; points.len()];
            let idx: Vec<usize> = (0..points.len()).filter(|&i| ctx.inside[i]).collect();
            let sub: Vec<_> = idx.iter().map(|&i| points.points[i]).collect();
            for k in maximal_layer(&sub)?.indices {
                flags[idx[k]] = true;
            }
            ctx.maximal = Some(flags);
        }
        Ok(ctx)
    }

    pub fn dim(&self) -> usize {
        self.points.dim
    }

    /// `λ^{1/d}`.
    pub fn scale(&self) -> f64 {
        self.lambda.powf(1.0 / self.dim() as f64)
    }
}

/// A score `ξ_λ(x, P_λ, M)` over a prebuilt [`Context`].
pub trait ScoreFunction: Send + Sync {
    fn name(&self) -> String;
    fn needs(&self) -> Needs;
    /// Order `γ` of homogeneity, when the score is homogeneous.
    fn homogeneity_gamma(&self, _dim: usize) -> Option<f64> {
        None
    }
    /// `ξ_λ` at point `i`.
    fn evaluate(&self, ctx: &Context, i: usize) -> f64;
    /// All scores, in point order.
    fn evaluate_all(&self, ctx: &Context) -> Result<Vec<f64>> {
        Ok(map_indexed(ctx.points.len(), ctx.opts.workers, |i| self.evaluate(ctx, i)))
    }
}

/// The built-in scores.
#[derive(Clone, Debug, PartialEq)]
pub enum Score {
    NuMinus,
    NuPlus,
    Alpha,
    Zeta,
    /// `1` for points within `half_width·λ^{−1/d}` of `M`.
    Slab { half_width: f64 },
    Zero,
}

impl Score {
    pub const NAMES: &'static str = "nu-minus, nu-plus, alpha, zeta, slab[:w], zero";

    pub fn parse(s: &str) -> Result<Score> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let score = match head {
            "nu-minus" | "nu_minus" => Score::NuMinus,
            "nu-plus" | "nu_plus" => Score::NuPlus,
            "alpha" => Score::Alpha,
            "zeta" => Score::Zeta,
            "zero" => Score::Zero,
            "slab" => {
                let half_width = match arg {
                    Some(a) => a
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad slab width {a:?}")))?,
                    None => 1.0,
                };
                return Ok(Score::Slab { half_width });
            }
            _ => {
                return Err(Error::UnknownName {
                    kind: "score",
                    name: s.into(),
                    available: Self::NAMES.into(),
                })
            }
        };
        if arg.is_some() {
            return Err(Error::invalid(format!("score {head} takes no argument")));
        }
        Ok(score)
    }
}

impl ScoreFunction for Score {
    fn name(&self) -> String {
        match self {
            Score::NuMinus => "nu-minus".into(),
            Score::NuPlus => "nu-plus".into(),
            Score::Alpha => "alpha".into(),
            Score::Zeta => "zeta".into(),
            Score::Slab { half_width } => format!("slab:{half_width}"),
            Score::Zero => "zero".into(),
        }
    }

    fn needs(&self) -> Needs {
        match self {
            Score::NuMinus | Score::NuPlus => Needs {
                volume: true,
                ..Needs::default()
            },
            Score::Alpha => Needs {
                voronoi: true,
                ..Needs::default()
            },
            Score::Zeta => Needs {
                dominance: true,
                ..Needs::default()
            },
            Score::Slab { .. } | Score::Zero => Needs::default(),
        }
    }

    fn homogeneity_gamma(&self, dim: usize) -> Option<f64> {
        match self {
            Score::NuMinus | Score::NuPlus => Some(dim as f64),
            Score::Alpha => Some(dim as f64 - 1.0),
            Score::Zeta | Score::Slab { .. } | Score::Zero => Some(0.0),
        }
    }

    fn evaluate(&self, ctx: &Context, i: usize) -> f64 {
        match self {
            Score::NuMinus => ctx.lambda * volume::nu_unscaled(ctx, i, Sign::Minus),
            Score::NuPlus => ctx.lambda * volume::nu_unscaled(ctx, i, Sign::Plus),
            Score::Alpha => ctx.scale() * alpha_unscaled(ctx, i),
            Score::Zeta => ctx.maximal.as_ref().expect("dominance context")[i] as u8 as f64,
            Score::Slab { half_width } => {
                let x = &ctx.points.points[i];
                let r = half_width / ctx.scale();
                match ctx.region.signed_distance(x) {
                    Ok(d) => (d.abs() <= r) as u8 as f64,
                    Err(_) => 0.0,
                }
            }
            Score::Zero => 0.0,
        }
    }

    fn evaluate_all(&self, ctx: &Context) -> Result<Vec<f64>> {
        if *self == Score::Alpha && ctx.dim() != 2 && !ctx.points.is_empty() {
            return Err(Error::Unsupported("the surface score needs planar cells".into()));
        }
        Ok(map_indexed(ctx.points.len(), ctx.opts.workers, |i| self.evaluate(ctx, i)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatisticValue {
    /// `H^ξ`.
    pub raw_sum: f64,
    /// `λ^{−(d−1)/d}·H^ξ`.
    pub rescaled: f64,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_point_scores: Option<Vec<f64>>,
}

impl StatisticValue {
    pub fn new(raw_sum: f64, lambda: f64, dim: usize, per_point_scores: Option<Vec<f64>>) -> Self {
        StatisticValue {
            raw_sum,
            rescaled: raw_sum * lambda.powf(-(dim as f64 - 1.0) / dim as f64),
            lambda,
            per_point_scores,
        }
    }
}

/// Sums precomputed scores in index order.
pub fn sum_scores(scores: &[f64]) -> f64 {
    scores.iter().sum()
}

/// Evaluates `H^ξ(P, ∂A)` over the context's points.
pub fn eval_in_context(xi: &dyn ScoreFunction, ctx: &Context) -> Result<StatisticValue> {
    let scores = xi.evaluate_all(ctx)?;
    let raw = sum_scores(&scores);
    let keep = ctx.opts.keep_scores.then_some(scores);
    Ok(StatisticValue::new(raw, ctx.lambda, ctx.dim(), keep))
}

/// Builds the geometry `xi` needs and evaluates `H^ξ(points, ∂A)` at intensity `lambda`.
pub fn eval_statistic(
    xi: &dyn ScoreFunction,
    points: &PointSet,
    region: &Region,
    lambda: f64,
    opts: ScoreOptions,
) -> Result<StatisticValue> {
    let ctx = Context::new(points, region, lambda, xi.needs(), opts)?;
    eval_in_context(xi, &ctx)
}

/// Writes per-point scores as CSV: index, coordinates, score, signed distance `t` and foot
/// point `y` on `M` (NaN where `M` is empty).
pub fn write_scores_csv<W: Write>(mut w: W, points: &PointSet, region: &Region, scores: &[f64]) -> Result<()> {
    let d = points.dim;
    let axes = ["x", "y", "z"];
    let mut header = vec!["index".to_string()];
    header.extend(axes[..d].iter().map(|a| a.to_string()));
    header.push("score".into());
    header.push("t".into());
    header.extend(axes[..d].iter().map(|a| format!("foot_{a}")));
    writeln!(w, "{}", header.join(","))?;
    for (i, (p, s)) in points.points.iter().zip(scores).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(p.coords().iter().map(|c| format!("{c:?}")));
        row.push(format!("{s:?}"));
        match region.boundary.closest_point_param(p) {
            Ok(sp) => {
                row.push(format!("{:?}", sp.t));
                row.extend(sp.y.coords().iter().map(|c| format!("{c:?}")));
            }
            Err(_) => row.extend(std::iter::repeat_n("NaN".to_string(), d + 1)),
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
