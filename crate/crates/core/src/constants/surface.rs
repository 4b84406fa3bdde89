//! Surface integrals `μ(ξ, M)` and `σ²(ξ, M)` of half-space constants.

use super::halfspace::HalfSpaceScore;
use super::universal::{mu_universal, nu_universal, HalfSpaceConfig};
use super::{LimitConstant, Method, TruncationReport};
use crate::error::Result;
use crate::exec::Workers;
use crate::geometry::Region;
use crate::sampler::Density;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceConfig {
    pub half_space: HalfSpaceConfig,
    /// Quadrature resolution over `M`.
    pub resolution: usize,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig {
            half_space: HalfSpaceConfig::default(),
            resolution: 64,
        }
    }
}

/// Quadrature nodes over `∂A` grouped by (normal, κ); `κ` is read just inside `A`.
struct Groups {
    /// (normal, κ, Σ weights).
    keys: Vec<(Vec<f64>, f64, f64)>,
}

fn groups(region: &Region, density: &Density, resolution: usize) -> Result<Groups> {
    let mut keys: Vec<(Vec<f64>, f64, f64)> = Vec::new();
    for node in region.boundary.quadrature(resolution)? {
        let kappa = density.kappa(&node.y.axpy(-1e-9, &node.normal));
        let q = |v: f64| (v * 1e9).round() / 1e9;
        let n: Vec<f64> = node.normal.coords().iter().map(|&c| q(c)).collect();
        let k = q(kappa);
        match keys.iter_mut().find(|e| e.0 == n && e.1 == k) {
            Some(e) => e.2 += node.weight,
            None => keys.push((n, k, node.weight)),
        }
    }
    Ok(Groups { keys })
}

/// `∫_M ∫ E ξ((0_y, u), H_{κ(y)}, H_y) κ(y) du dy`.
///
/// Rotation-invariant scores use one universal constant and `∫_M κ^{(d−γ−1)/d}`; other
/// scores run one half-space experiment per distinct (normal, κ) pair.
pub fn mu_surface(score: &HalfSpaceScore, region: &Region, density: &Density, cfg: &SurfaceConfig, workers: Workers) -> Result<LimitConstant> {
    integrate(score, region, density, cfg, workers, false)
}

/// `σ²(ξ, M) = μ(ξ², M) + ∫_M κ(y)² ∫∫∫ c^ξ du ds dz dy`.
pub fn sigma2_surface(score: &HalfSpaceScore, region: &Region, density: &Density, cfg: &SurfaceConfig, workers: Workers) -> Result<LimitConstant> {
    let sq = HalfSpaceScore::Squared {
        inner: Box::new(score.clone()),
    };
    let first = match score {
        // ζ² = ζ: reuse the same experiment.
        HalfSpaceScore::Zeta => integrate(score, region, density, cfg, workers, false)?,
        _ => integrate(&sq, region, density, cfg, workers, false)?,
    };
    let second = integrate(score, region, density, cfg, workers, true)?;
    Ok(LimitConstant {
        name: format!("sigma2({})", score.name()),
        value: first.value + second.value,
        std_error: (first.std_error.powi(2) + second.std_error.powi(2)).sqrt(),
        method: Method::HalfSpaceMc,
        truncation_report: combine(first.truncation_report, second.truncation_report.as_ref(), 1.0),
        seed: first.seed,
        samples: first.samples + second.samples,
    })
}

fn integrate(score: &HalfSpaceScore, region: &Region, density: &Density, cfg: &SurfaceConfig, workers: Workers, pair: bool) -> Result<LimitConstant> {
    let d = region.dim;
    let df = d as f64;
    let g = groups(region, density, cfg.resolution)?;
    let gamma = score.gamma(d);
    let run = |hs: &HalfSpaceConfig| {
        if pair {
            nu_universal(score, d, hs, workers)
        } else {
            mu_universal(score, d, hs, workers)
        }
    };
    let (value, se, report, samples) = if score.rotation_invariant() {
        let c = run(&HalfSpaceConfig {
            tau: 1.0,
            normal: None,
            ..cfg.half_space.clone()
        })?;
        let e = if pair { (df - 2.0 * gamma - 1.0) / df } else { (df - gamma - 1.0) / df };
        let w: f64 = g
            .keys
            .iter()
            .filter(|k| k.1 > 0.0)
            .map(|k| k.2 * k.1.powf(e))
            .sum();
        (c.value * w, c.std_error * w, combine(None, c.truncation_report.as_ref(), w), c.samples)
    } else {
        let (mut v, mut var, mut report, mut samples) = (0.0, 0.0, None, 0);
        for (i, (n, kappa, w)) in g.keys.iter().enumerate() {
            if *kappa <= 0.0 {
                continue;
            }
            let c = run(&HalfSpaceConfig {
                tau: *kappa,
                normal: Some(n.clone()),
                seed: cfg.half_space.seed.wrapping_add(i as u64),
                ..cfg.half_space.clone()
            })?;
            let f = if pair { kappa * kappa * w } else { kappa * w };
            v += f * c.value;
            var += (f * c.std_error).powi(2);
            samples += c.samples;
            report = combine(report, c.truncation_report.as_ref(), f);
        }
        (v, var.sqrt(), report, samples)
    };
    Ok(LimitConstant {
        name: format!("{}({},M)", if pair { "nu" } else { "mu" }, score.name()),
        value,
        std_error: se,
        method: Method::HalfSpaceMc,
        truncation_report: report,
        seed: Some(cfg.half_space.seed),
        samples,
    })
}

/// `acc + f·r`, adding values and combining standard errors in quadrature.
fn combine(acc: Option<TruncationReport>, r: Option<&TruncationReport>, f: f64) -> Option<TruncationReport> {
    let Some(r) = r else { return acc };
    let scaled = TruncationReport {
        u_max: r.u_max,
        z_max: r.z_max,
        tail_mass: f * r.tail_mass,
        inner_value: f * r.inner_value,
        inner_std_error: f * r.inner_std_error,
        difference_std_error: f * r.difference_std_error,
        max_radius: r.max_radius,
    };
    Some(match acc {
        None => scaled,
        Some(a) => TruncationReport {
            u_max: a.u_max.max(scaled.u_max),
            z_max: match (a.z_max, scaled.z_max) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
            tail_mass: a.tail_mass + scaled.tail_mass,
            inner_value: a.inner_value + scaled.inner_value,
            inner_std_error: a.inner_std_error.hypot(scaled.inner_std_error),
            difference_std_error: a.difference_std_error.hypot(scaled.difference_std_error),
            max_radius: a.max_radius.max(scaled.max_radius),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn cfg() -> SurfaceConfig {
        SurfaceConfig {
            half_space: HalfSpaceConfig {
                replicates: 2000,
                pairs: 20_000,
                seed: 3,
                ..HalfSpaceConfig::default()
            },
            resolution: 16,
        }
    }

    #[test]
    fn slab_on_circle() {
        let disk = Region::ball(Point::xy(0.5, 0.5), 0.3).unwrap();
        let c = mu_surface(&HalfSpaceScore::Slab { half_width: 1.0 }, &disk, &Density::uniform(2), &cfg(), Workers::default()).unwrap();
        let u = mu_universal(&HalfSpaceScore::Slab { half_width: 1.0 }, 2, &cfg().half_space, Workers::SEQUENTIAL).unwrap();
        let target = u.value * 2.0 * std::f64::consts::PI * 0.3;
        assert!((c.value - target).abs() < 1e-6 * target, "{} vs {target}", c.value);
        let s = sigma2_surface(&HalfSpaceScore::Slab { half_width: 1.0 }, &disk, &Density::uniform(2), &cfg(), Workers::default()).unwrap();
        assert!((s.value - c.value).abs() < 1e-9);
    }

    #[test]
    fn zeta_surface_mean_on_triangle() {
        let scene = crate::catalog::scene("triangle-pareto").unwrap();
        let c = mu_surface(&HalfSpaceScore::Zeta, &scene.region, &scene.density, &cfg(), Workers::default()).unwrap();
        let root_pi = std::f64::consts::PI.sqrt();
        assert!((c.value - root_pi).abs() < 3.0 * c.std_error, "{} ± {}", c.value, c.std_error);
    }

    #[test]
    fn rotation_invariant_reduction() {
        // κ ≡ 1: μ(ξ, M) = μ(ξ, d−1)·H¹(M).
        let disk = Region::ball(Point::xy(0.5, 0.5), 0.3).unwrap();
        let c = mu_surface(&HalfSpaceScore::NuPlus, &disk, &Density::uniform(2), &cfg(), Workers::default()).unwrap();
        let u = mu_universal(&HalfSpaceScore::NuPlus, 2, &cfg().half_space, Workers::default()).unwrap();
        let per = 2.0 * std::f64::consts::PI * 0.3;
        assert!((c.value - u.value * per).abs() < 1e-3 * c.value);
    }
}
