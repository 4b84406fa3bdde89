//! The universal constants `μ(ξ, d−1)` and `ν(ξ, d−1)` by half-space Monte Carlo.

use super::halfspace::{tangent_frame, HalfSpaceScore, LatticePoisson, Spliced};
use super::{LimitConstant, Method, TruncationReport};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Workers};
use crate::geometry::Point;
use crate::rng::{purpose, uniform, SeedRecord};
use crate::stats::{mean, ols, variance};
use serde::{Deserialize, Serialize};

/// Budget and window of a half-space experiment. Lengths are in units of `τ^{−1/d}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HalfSpaceConfig {
    pub tau: f64,
    /// Outward unit normal of the hyperplane; `e_d` when absent.
    pub normal: Option<Vec<f64>>,
    /// Inner truncation of the normal coordinate; integrals run to twice this.
    pub u_max: f64,
    /// Geometric bins per side on `[0, u_max]`.
    pub u_bins: usize,
    /// Width of the bin next to the hyperplane.
    pub first_width: f64,
    /// Replicate configurations for `μ`.
    pub replicates: usize,
    /// Inner truncation of the tangential offset for `ν`.
    pub z_max: f64,
    /// Strata per axis for `ν` (a multiple of 4).
    pub strata: usize,
    /// Minimum first-round samples per stratum.
    pub pilot: usize,
    /// Total pair budget for `ν`.
    pub pairs: usize,
    pub seed: u64,
}

impl Default for HalfSpaceConfig {
    fn default() -> Self {
        HalfSpaceConfig {
            tau: 1.0,
            normal: None,
            u_max: 3.0,
            u_bins: 24,
            first_width: 0.02,
            replicates: 20_000,
            z_max: 3.0,
            strata: 8,
            pilot: 16,
            pairs: 100_000,
            seed: 0,
        }
    }
}

impl HalfSpaceConfig {
    fn normal(&self, d: usize) -> Result<Point> {
        match &self.normal {
            None => Ok(Point::basis(d, d - 1)),
            Some(n) => {
                let p = Point::new(n)?;
                if p.dim() != d {
                    return Err(Error::Dimension {
                        expected: d,
                        got: p.dim(),
                    });
                }
                p.normalized().ok_or_else(|| Error::invalid("normal must be nonzero"))
            }
        }
    }

    fn check(&self, d: usize) -> Result<()> {
        if !(2..=3).contains(&d) {
            return Err(Error::invalid(format!("ambient dimension must be 2 or 3, got {d}")));
        }
        if !(self.tau > 0.0 && self.u_max > 0.0 && self.first_width > 0.0 && self.z_max > 0.0) {
            return Err(Error::invalid("tau, u_max, first_width and z_max must be positive"));
        }
        if self.first_width * self.u_bins as f64 >= self.u_max {
            return Err(Error::invalid("first_width × u_bins must be below u_max"));
        }
        if self.strata == 0 || self.strata % 4 != 0 {
            return Err(Error::invalid("strata must be a positive multiple of 4"));
        }
        if self.replicates < 2 || self.pilot < 2 {
            return Err(Error::invalid("need at least 2 replicates and 2 pilot samples"));
        }
        Ok(())
    }
}

/// Bin edges on `[0, 2·u_max]`: `bins` geometric bins up to `u_max` starting at width
/// `h0`, then `bins / 2` equal bins.
fn bin_edges(u_max: f64, bins: usize, h0: f64) -> Vec<f64> {
    // Ratio q with h0·(q^bins − 1)/(q − 1) = u_max.
    let total = |q: f64| h0 * (q.powi(bins as i32) - 1.0) / (q - 1.0);
    let (mut lo, mut hi) = (1.0 + 1e-12, 2.0);
    while total(hi) < u_max {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if total(m) < u_max {
            lo = m;
        } else {
            hi = m;
        }
    }
    let q = 0.5 * (lo + hi);
    let mut edges = vec![0.0];
    let mut w = h0;
    for _ in 0..bins {
        let e = edges.last().unwrap() + w;
        edges.push(e);
        w *= q;
    }
    *edges.last_mut().unwrap() = u_max;
    let outer = (bins / 2).max(1);
    for k in 1..=outer {
        edges.push(u_max * (1.0 + k as f64 / outer as f64));
    }
    edges
}

/// `(E ξ(x, H_τ ∪ x), std_error)` from `replicates` configurations.
pub fn expected_score(
    score: &HalfSpaceScore,
    x: &Point,
    normal: &Point,
    tau: f64,
    replicates: usize,
    seed: u64,
    workers: Workers,
) -> Result<(f64, f64)> {
    score.validate(x.dim(), normal)?;
    let vals = map_indexed(replicates, workers, |r| {
        let src = LatticePoisson::new(tau, x.dim(), SeedRecord::new(seed, &[r as u64])).expect("validated");
        score.eval(x, normal, tau, &src, &[]).0
    });
    Ok((mean(&vals), (variance(&vals) / replicates as f64).sqrt()))
}

/// Fitted mass of `|m(u)|` beyond the last node on one side, from an exponential fit
/// to the outer half of the nodes.
fn tail_side(u: &[f64], m: &[f64], end: f64) -> f64 {
    let k0 = u.len() / 2;
    let (x, y): (Vec<f64>, Vec<f64>) = u[k0..]
        .iter()
        .zip(&m[k0..])
        .filter(|(_, v)| v.abs() > 0.0)
        .map(|(&a, v)| (a, v.abs().ln()))
        .unzip();
    if x.len() < 3 {
        return 0.0;
    }
    let f = ols(&x, &y);
    if f.slope >= 0.0 {
        return f64::INFINITY;
    }
    (f.intercept + f.slope * end).exp() / -f.slope
}

/// `μ(ξ, d−1) = ∫ E ξ((0, u), H_τ, ℝ^{d−1}) du` over `|u| ≤ 2·u_max` by a midpoint
/// rule on geometric bins, with common configurations across all heights.
pub fn mu_universal(score: &HalfSpaceScore, d: usize, cfg: &HalfSpaceConfig, workers: Workers) -> Result<LimitConstant> {
    cfg.check(d)?;
    let n = cfg.normal(d)?;
    score.validate(d, &n)?;
    let s = cfg.tau.powf(-1.0 / d as f64);
    let edges: Vec<f64> = bin_edges(cfg.u_max, cfg.u_bins, cfg.first_width)
        .into_iter()
        .map(|e| e * s)
        .collect();
    let inner_end = cfg.u_bins;
    // Nodes (u, width, inner) on both sides of the hyperplane.
    let mut nodes = Vec::new();
    for k in 0..edges.len() - 1 {
        let (a, b) = (edges[k], edges[k + 1]);
        let mid = 0.5 * (a + b);
        for sign in [-1.0, 1.0] {
            nodes.push((sign * mid, b - a, k < inner_end));
        }
    }
    let reps = if score.deterministic() { 2 } else { cfg.replicates };
    let rows: Vec<(Vec<f64>, f64)> = map_indexed(reps, workers, |r| {
        let src = LatticePoisson::new(cfg.tau, d, SeedRecord::new(cfg.seed, &[r as u64])).expect("validated");
        let mut radius: f64 = 0.0;
        let vals = nodes
            .iter()
            .map(|&(u, _, _)| {
                let (v, rad) = score.eval(&n.scale(u), &n, cfg.tau, &src, &[]);
                radius = radius.max(rad);
                v
            })
            .collect();
        (vals, radius)
    });
    let full: Vec<f64> = rows
        .iter()
        .map(|(v, _)| nodes.iter().zip(v).map(|(nd, x)| nd.1 * x).sum())
        .collect();
    let inner: Vec<f64> = rows
        .iter()
        .map(|(v, _)| nodes.iter().zip(v).filter(|(nd, _)| nd.2).map(|(nd, x)| nd.1 * x).sum())
        .collect();
    let diff: Vec<f64> = full.iter().zip(&inner).map(|(a, b)| a - b).collect();
    let se = |v: &[f64]| (variance(v) / v.len() as f64).sqrt();
    let node_mean: Vec<f64> = (0..nodes.len())
        .map(|k| rows.iter().map(|(v, _)| v[k]).sum::<f64>() / reps as f64)
        .collect();
    let end = *edges.last().unwrap();
    let mut tail = 0.0;
    let mut abs_integral = 0.0;
    for side in [-1.0, 1.0] {
        let (u, m): (Vec<f64>, Vec<f64>) = nodes
            .iter()
            .zip(&node_mean)
            .filter(|(nd, _)| nd.0 * side > 0.0)
            .map(|(nd, &m)| (nd.0.abs(), m))
            .unzip();
        tail += tail_side(&u, &m, end);
        abs_integral += nodes
            .iter()
            .zip(&node_mean)
            .filter(|(nd, _)| nd.0 * side > 0.0)
            .map(|(nd, m)| nd.1 * m.abs())
            .sum::<f64>();
    }
    let value = mean(&full);
    if tail > 0.01 * abs_integral {
        return Err(Error::TruncationTooTight {
            tail,
            integral: abs_integral,
        });
    }
    let std_error = if score.deterministic() { 0.0 } else { se(&full) };
    Ok(LimitConstant {
        name: format!("mu({},{})", score.name(), d - 1),
        value,
        std_error,
        method: Method::HalfSpaceMc,
        truncation_report: Some(TruncationReport {
            u_max: end,
            z_max: None,
            tail_mass: tail,
            inner_value: mean(&inner),
            inner_std_error: if score.deterministic() { 0.0 } else { se(&inner) },
            difference_std_error: if score.deterministic() { 0.0 } else { se(&diff) },
            max_radius: rows.iter().map(|r| r.1).fold(0.0, f64::max),
        }),
        seed: Some(cfg.seed),
        samples: reps,
    })
}

/// Per-stratum running totals.
#[derive(Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum2: f64,
    radius: f64,
}

impl Moments {
    fn add(&mut self, v: f64, r: f64) {
        self.n += 1;
        self.sum += v;
        self.sum2 += v * v;
        self.radius = self.radius.max(r);
    }
    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }
    fn var(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        ((self.sum2 - self.sum * self.sum / self.n as f64) / (self.n - 1) as f64).max(0.0)
    }
}

/// `ν(ξ, d−1) = ∫∫∫ c^ξ((0,u), (z,s); H_τ, ℝ^{d−1}) du ds dz` by stratified sampling over
/// `|u|, |s| ≤ 2·u_max`, `|z_i| ≤ 2·z_max` with Neyman allocation after a pilot pass.
///
/// Each sample pairs `ξ(x, H ∪ x′)ξ(x′, H ∪ x)` with `ξ(x, H̃)ξ(x′, H̃′)`, where `H̃` and
/// `H̃′` splice `H` with an independent copy across the bisector of `x` and `x′`. The two
/// spliced processes are independent, so the second product has mean
/// `Eξ(x)·Eξ(x′)`, and it tracks the first product closely when the points are far apart.
pub fn nu_universal(score: &HalfSpaceScore, d: usize, cfg: &HalfSpaceConfig, workers: Workers) -> Result<LimitConstant> {
    cfg.check(d)?;
    let n = cfg.normal(d)?;
    score.validate(d, &n)?;
    let scale = cfg.tau.powf(-1.0 / d as f64);
    let frame = tangent_frame(&n);
    let axes = d + 1; // u, s and d − 1 tangential offsets
    let sa = cfg.strata;
    let strata = sa.pow(axes as u32);
    let half: Vec<f64> = (0..axes)
        .map(|a| 2.0 * scale * if a < 2 { cfg.u_max } else { cfg.z_max })
        .collect();
    let width: Vec<f64> = half.iter().map(|h| 2.0 * h / sa as f64).collect();
    let vol: f64 = width.iter().product();
    let index = |h: usize| -> Vec<usize> {
        let mut r = h;
        (0..axes)
            .map(|_| {
                let i = r % sa;
                r /= sa;
                i
            })
            .collect()
    };
    let inner_axis = |i: usize| i >= sa / 4 && i < 3 * sa / 4;
    let sample = |h: usize, i: usize| -> (f64, f64) {
        let idx = index(h);
        let mut rng = SeedRecord::new(cfg.seed, &[h as u64, i as u64]).rng(purpose::STRATUM);
        let c: Vec<f64> = (0..axes)
            .map(|a| -half[a] + (idx[a] as f64 + uniform(&mut rng)) * width[a])
            .collect();
        let x = n.scale(c[0]);
        let mut xp = n.scale(c[1]);
        for (j, t) in frame.iter().enumerate() {
            xp = xp.axpy(c[2 + j], t);
        }
        let base = SeedRecord::new(cfg.seed, &[h as u64, i as u64]);
        let h1 = LatticePoisson::new(cfg.tau, d, base.child(&[0])).expect("validated");
        let h2 = LatticePoisson::new(cfg.tau, d, base.child(&[purpose::HALFSPACE_INDEPENDENT])).expect("validated");
        let (a, ra) = score.eval(&x, &n, cfg.tau, &h1, &[xp]);
        let (b, rb) = score.eval(&xp, &n, cfg.tau, &h1, &[x]);
        let mid = x.add(&xp).scale(0.5);
        let dir = xp.sub(&x);
        let near_x = Spliced {
            first: &h1,
            second: &h2,
            mid,
            dir,
        };
        let near_xp = Spliced {
            first: &h2,
            second: &h1,
            mid,
            dir,
        };
        let (a2, rc) = score.eval(&x, &n, cfg.tau, &near_x, &[]);
        let (b2, rd) = score.eval(&xp, &n, cfg.tau, &near_xp, &[]);
        (a * b - a2 * b2, ra.max(rb).max(rc).max(rd))
    };
    let run = |h: usize, from: usize, to: usize| {
        let mut m = Moments::default();
        for i in from..to {
            let (v, r) = sample(h, i);
            m.add(v, r);
        }
        m
    };
    if score.deterministic() {
        return Ok(zero_nu(score, d, cfg));
    }
    // Round one spreads a quarter of the budget evenly; round two allocates the rest by
    // Neyman's rule from round one. Each round alone is unbiased, and fixed weights keep
    // the combination unbiased.
    let first = (cfg.pairs / (4 * strata)).max(cfg.pilot);
    let round1 = map_indexed(strata, workers, |h| run(h, 0, first));
    let spread: Vec<f64> = round1.iter().map(|m| m.var().sqrt()).collect();
    let total: f64 = spread.iter().sum();
    let budget2 = cfg.pairs.saturating_sub(first * strata);
    let alloc: Vec<usize> = spread
        .iter()
        .map(|s| {
            let share = if total > 0.0 { s / total } else { 1.0 / strata as f64 };
            ((budget2 as f64 * share).floor() as usize).max(2)
        })
        .collect();
    let round2 = map_indexed(strata, workers, |h| run(h, first, first + alloc[h]));
    let used2: usize = alloc.iter().sum();
    let w1 = (first * strata) as f64 / (first * strata + used2) as f64;
    let w2 = 1.0 - w1;
    let (mut value, mut var, mut inner, mut inner_var, mut outer_var) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for h in 0..strata {
        let (m1, m2) = (&round1[h], &round2[h]);
        let v = vol * (w1 * m1.mean() + w2 * m2.mean());
        let e = vol * vol * (w1 * w1 * m1.var() / m1.n as f64 + w2 * w2 * m2.var() / m2.n as f64);
        value += v;
        var += e;
        if index(h).into_iter().all(inner_axis) {
            inner += v;
            inner_var += e;
        } else {
            outer_var += e;
        }
    }
    let all = || round1.iter().chain(&round2);
    Ok(LimitConstant {
        name: format!("nu({},{})", score.name(), d - 1),
        value,
        std_error: var.sqrt(),
        method: Method::HalfSpaceMc,
        truncation_report: Some(TruncationReport {
            u_max: half[0],
            z_max: Some(half[2]),
            tail_mass: 0.0,
            inner_value: inner,
            inner_std_error: inner_var.sqrt(),
            difference_std_error: outer_var.sqrt(),
            max_radius: all().map(|m| m.radius).fold(0.0, f64::max),
        }),
        seed: Some(cfg.seed),
        samples: all().map(|m| m.n).sum(),
    })
}

fn zero_nu(score: &HalfSpaceScore, d: usize, cfg: &HalfSpaceConfig) -> LimitConstant {
    LimitConstant {
        name: format!("nu({},{})", score.name(), d - 1),
        value: 0.0,
        std_error: 0.0,
        method: Method::HalfSpaceMc,
        truncation_report: Some(TruncationReport {
            u_max: 2.0 * cfg.u_max,
            z_max: Some(2.0 * cfg.z_max),
            tail_mass: 0.0,
            inner_value: 0.0,
            inner_std_error: 0.0,
            difference_std_error: 0.0,
            max_radius: 0.0,
        }),
        seed: Some(cfg.seed),
        samples: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::super::closed::{zeta_expectation, zeta_pair_correlation_2d};
    use super::*;

    fn small(seed: u64) -> HalfSpaceConfig {
        HalfSpaceConfig {
            replicates: 2000,
            pairs: 20_000,
            seed,
            ..HalfSpaceConfig::default()
        }
    }

    #[test]
    fn bins_cover_the_window() {
        let e = bin_edges(3.0, 24, 0.02);
        assert_eq!(e.len(), 24 + 12 + 1);
        assert!((e[1] - 0.02).abs() < 1e-12 && e[24] == 3.0 && (e[36] - 6.0).abs() < 1e-12);
        assert!(e.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn slab_integrates_to_twice_width() {
        let c = mu_universal(&HalfSpaceScore::Slab { half_width: 1.0 }, 2, &small(1), Workers::SEQUENTIAL).unwrap();
        // The midpoint rule is exact except on the two bins straddling |u| = 1.
        let e = bin_edges(3.0, 24, 0.02);
        let k = e.iter().position(|&x| x > 1.0).unwrap();
        assert!((c.value - 2.0).abs() <= 2.0 * (e[k] - e[k - 1]), "{}", c.value);
        let nu = nu_universal(&HalfSpaceScore::Slab { half_width: 1.0 }, 2, &small(1), Workers::SEQUENTIAL).unwrap();
        assert_eq!(nu.value, 0.0);
    }

    #[test]
    fn zeta_mu_matches_closed_integrand() {
        // Slope −1 at intensity 2: ∫ exp(−2u²) over u < 0 is √(π/2)/2.
        let cfg = HalfSpaceConfig {
            tau: 2.0,
            normal: Some(vec![1.0, 1.0]),
            ..small(3)
        };
        let c = mu_universal(&HalfSpaceScore::Zeta, 2, &cfg, Workers::default()).unwrap();
        let exact = (std::f64::consts::PI / 2.0).sqrt() / 2.0;
        assert!((c.value - exact).abs() < 4.0 * c.std_error, "{} ± {} vs {exact}", c.value, c.std_error);
        // Node level: one height against the closed-form expectation.
        let n = Point::xy(1.0, 1.0).normalized().unwrap();
        let (m, se) = expected_score(&HalfSpaceScore::Zeta, &n.scale(-0.6), &n, 2.0, 4000, 5, Workers::default()).unwrap();
        assert!((m - zeta_expectation(-0.6, &[-1.0], 2.0)).abs() < 4.0 * se);
    }

    #[test]
    fn zeta_nu_matches_exact_correlation() {
        let cfg = HalfSpaceConfig {
            tau: 2.0,
            normal: Some(vec![1.0, 1.0]),
            pairs: 400_000,
            ..small(4)
        };
        let c = nu_universal(&HalfSpaceScore::Zeta, 2, &cfg, Workers::default()).unwrap();
        // Oracle: plain Monte Carlo of the exact correlation over the same window.
        let nv = [std::f64::consts::FRAC_1_SQRT_2; 2];
        let t = [nv[1], -nv[0]];
        let s = 2f64.powf(-0.5);
        let (hu, hz) = (2.0 * 3.0 * s, 2.0 * 3.0 * s);
        let mut rng = SeedRecord::new(77, &[]).rng(purpose::POINTS);
        let m = 1_000_000;
        let mut acc = Vec::with_capacity(m);
        for _ in 0..m {
            let u = (2.0 * uniform(&mut rng) - 1.0) * hu;
            let sv = (2.0 * uniform(&mut rng) - 1.0) * hu;
            let z = (2.0 * uniform(&mut rng) - 1.0) * hz;
            let x = [u * nv[0], u * nv[1]];
            let xp = [sv * nv[0] + z * t[0], sv * nv[1] + z * t[1]];
            acc.push(zeta_pair_correlation_2d(x, xp, nv, 2.0) * 8.0 * hu * hu * hz);
        }
        let (om, ose) = (mean(&acc), (variance(&acc) / m as f64).sqrt());
        assert!(c.agrees_with(om, ose, 4.0), "{} ± {} vs {om} ± {ose}", c.value, c.std_error);
    }

    #[test]
    fn alpha_constant_is_stable_under_truncation() {
        let c = mu_universal(&HalfSpaceScore::Alpha, 2, &small(6), Workers::default()).unwrap();
        let t = c.truncation_report.as_ref().unwrap();
        assert!((c.value - t.inner_value).abs() <= 2.0 * t.difference_std_error.max(1e-12));
        assert!(c.value > 0.0 && c.std_error > 0.0);
        let minus = mu_universal(&HalfSpaceScore::NuMinus, 2, &small(6), Workers::default()).unwrap();
        assert!(minus.value.abs() < 4.0 * minus.std_error);
    }

    #[test]
    fn intensity_rescaling() {
        let n = Point::xy(1.0, 1.0).normalized().unwrap();
        for tau in [0.5, 2.0] {
            let u = -0.5;
            let (a, sa) = expected_score(&HalfSpaceScore::Zeta, &n.scale(u), &n, tau, 4000, 8, Workers::default()).unwrap();
            let (b, sb) = expected_score(&HalfSpaceScore::Zeta, &n.scale(u * tau.sqrt()), &n, 1.0, 4000, 9, Workers::default()).unwrap();
            assert!((a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt(), "{a} vs {b}");
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let a = mu_universal(&HalfSpaceScore::NuPlus, 2, &small(2), Workers::SEQUENTIAL).unwrap();
        let b = mu_universal(&HalfSpaceScore::NuPlus, 2, &small(2), Workers(4)).unwrap();
        assert_eq!(a, b);
    }
}
