//! Replicated experiments: raw replicate tables, scaling regressions, normality checks
//! and Poisson/binomial comparisons.

use crate::catalog;
use crate::constants;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Workers};
use crate::geometry::scene::Scene;
use crate::rng::{derive_key, SeedRecord};
use crate::sampler::{couple_poissonized, couple_with_count, sample_binomial, sample_poisson, PointSet};
use crate::scores::{volume_estimator, weighted_surface_integral, Context, Needs, Score, ScoreFunction, ScoreOptions};
use crate::stats::{bootstrap, ks_normal, mean, ols, percentile_interval, variance, variance_std_error};
use crate::voronoi::BoundaryMode;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// What a replicate records.
#[derive(Clone, Debug, PartialEq)]
pub enum Statistic {
    /// `Σ_x ξ_λ(x)` for a built-in score.
    Score(Score),
    /// `Vol(A_λ)`.
    Volume,
    /// `Vol(A △ A_λ)`.
    SymDiff,
    /// Corrected perimeter of `A_λ`, using the frozen `μ(α, 1)`.
    Perimeter,
    /// Corrected `∫_{∂A} x₁ dH¹` estimate.
    PerimeterX1,
}

impl Statistic {
    pub const NAMES: &'static str = "volume, symdiff, perimeter, perimeter-x1, maximal, or any score";

    pub fn parse(s: &str) -> Result<Statistic> {
        Ok(match s {
            "volume" => Statistic::Volume,
            "symdiff" => Statistic::SymDiff,
            "perimeter" => Statistic::Perimeter,
            "perimeter-x1" => Statistic::PerimeterX1,
            "maximal" => Statistic::Score(Score::Zeta),
            _ => Statistic::Score(Score::parse(s).map_err(|_| Error::UnknownName {
                kind: "statistic",
                name: s.into(),
                available: format!("{}; scores: {}", Self::NAMES, Score::NAMES),
            })?),
        })
    }

    fn needs(&self) -> Needs {
        match self {
            Statistic::Score(s) => s.needs(),
            Statistic::Volume | Statistic::SymDiff => Needs {
                voronoi: false,
                volume: true,
                dominance: false,
            },
            Statistic::Perimeter | Statistic::PerimeterX1 => Needs {
                voronoi: true,
                volume: false,
                dominance: false,
            },
        }
    }

    /// Auxiliary columns recorded next to the value.
    pub fn aux_names(&self) -> Vec<&'static str> {
        match self {
            Statistic::Volume | Statistic::SymDiff => vec!["points", "identity_residual"],
            _ => vec!["points"],
        }
    }

    /// True for statistics of volume order `λ^{−(d+1)/d}` in variance.
    pub fn is_volume(&self) -> bool {
        matches!(self, Statistic::Volume | Statistic::SymDiff)
    }

    /// Exponents `(mean, variance)` of the surface-order scaling in `λ`.
    pub fn exponents(&self, d: usize) -> (Option<f64>, f64) {
        let df = d as f64;
        match self {
            Statistic::Volume => (Some(0.0), -(df + 1.0) / df),
            Statistic::SymDiff => (Some(-1.0 / df), -(df + 1.0) / df),
            Statistic::Perimeter | Statistic::PerimeterX1 => (Some(0.0), (df - 3.0) / df),
            Statistic::Score(_) => (Some((df - 1.0) / df), (df - 1.0) / df),
        }
    }
}

fn default_reps() -> usize {
    100
}

/// Which input process a replicate draws.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Input {
    #[default]
    Poisson,
    Binomial,
}

/// A replicated experiment, as read from a JSON config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Catalog scene name, e.g. `disk:0.25`.
    pub scene: String,
    pub statistic: String,
    /// Intensities `λ`, or sample sizes `n` for binomial input.
    pub levels: Vec<f64>,
    #[serde(default = "default_reps")]
    pub replicates: usize,
    pub seed: u64,
    #[serde(default)]
    pub boundary: BoundaryMode,
    #[serde(default)]
    pub input: Input,
    #[serde(default)]
    pub probes_per_site: Option<usize>,
    /// Output directory for tables and reports.
    #[serde(default)]
    pub out: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<ExperimentConfig> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::invalid("at least one level is required"));
        }
        if self.levels.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::invalid("levels must be positive and finite"));
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("levels must be strictly increasing"));
        }
        if self.input == Input::Binomial && self.levels.iter().any(|l| l.fract() != 0.0) {
            return Err(Error::invalid("binomial levels must be integers"));
        }
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be positive"));
        }
        Statistic::parse(&self.statistic)?;
        catalog::scene_spec(&self.scene)?;
        Ok(())
    }
}

/// One replicate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub level: f64,
    pub replicate: usize,
    /// Stream key of the replicate.
    pub seed: u64,
    pub value: f64,
    pub aux: Vec<f64>,
}

/// Replicates of one experiment, in (level, replicate) order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawTable {
    pub statistic: String,
    pub scene: String,
    pub dim: usize,
    pub aux_names: Vec<String>,
    pub rows: Vec<Row>,
    /// `(level, failed replicates)`.
    pub failures: Vec<(f64, usize)>,
}

impl RawTable {
    pub fn levels(&self) -> Vec<f64> {
        let mut v: Vec<f64> = Vec::new();
        for r in &self.rows {
            if v.last() != Some(&r.level) {
                v.push(r.level);
            }
        }
        v
    }

    pub fn values(&self, level: f64) -> Vec<f64> {
        self.rows.iter().filter(|r| r.level == level).map(|r| r.value).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "level,replicate,seed,value")?;
        for a in &self.aux_names {
            write!(w, ",{a}")?;
        }
        writeln!(w)?;
        for r in &self.rows {
            write!(w, "{},{},{},{}", r.level, r.replicate, r.seed, r.value)?;
            for a in &r.aux {
                write!(w, ",{a}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Evaluates `stat` on one point set at intensity `lambda`. Returns `(value, aux)`.
pub fn evaluate(
    stat: &Statistic,
    points: &PointSet,
    scene: &Scene,
    lambda: f64,
    opts: ScoreOptions,
) -> Result<(f64, Vec<f64>)> {
    let ctx = Context::new(points, &scene.region, lambda, stat.needs(), opts)?;
    let n = points.len() as f64;
    Ok(match stat {
        Statistic::Score(s) => {
            let v = s.evaluate_all(&ctx)?;
            (crate::scores::sum_scores(&v), vec![n])
        }
        Statistic::Volume | Statistic::SymDiff => {
            if points.is_empty() {
                return Err(Error::DegenerateInput("empty sample".into()));
            }
            let e = volume_estimator(&ctx)?;
            let v = if *stat == Statistic::Volume { e.vol_alambda } else { e.sym_diff };
            (v, vec![n, e.identity_residual])
        }
        Statistic::Perimeter | Statistic::PerimeterX1 => {
            let c = constants::fixture("mu(alpha,1)")?.value;
            let f: &dyn Fn(&crate::geometry::Point) -> f64 = match stat {
                Statistic::PerimeterX1 => &|p| p[0],
                _ => &|_| 1.0,
            };
            (weighted_surface_integral(&ctx, c, f)?, vec![n])
        }
    })
}

fn draw(cfg: &ExperimentConfig, scene: &Scene, level: f64, seed: &SeedRecord) -> Result<PointSet> {
    match cfg.input {
        Input::Poisson => sample_poisson(level, &scene.density, seed),
        Input::Binomial => sample_binomial(level as u64, &scene.density, seed),
    }
}

fn options(cfg: &ExperimentConfig, seed: &SeedRecord) -> ScoreOptions {
    let mut o = ScoreOptions {
        mode: cfg.boundary,
        probe_seed: seed.child(&[1]),
        workers: Workers::SEQUENTIAL,
        ..ScoreOptions::default()
    };
    if let Some(p) = cfg.probes_per_site {
        o.probes_per_site = p;
    }
    o
}

/// Runs every (level, replicate) pair. Replicate `r` at level index `k` uses the stream
/// `(seed, [k, r])`, so tables do not depend on `workers`.
///
/// Failed replicates are dropped and counted; more than 0.1% failures is an error, and
/// so is any input-validation failure.
pub fn run_experiment(cfg: &ExperimentConfig, workers: Workers) -> Result<RawTable> {
    cfg.validate()?;
    let stat = Statistic::parse(&cfg.statistic)?;
    let scene = catalog::scene(&cfg.scene)?;
    let reps = cfg.replicates;
    let jobs = cfg.levels.len() * reps;
    let results = map_indexed(jobs, workers, |j| {
        let (k, r) = (j / reps, j % reps);
        let path = [k as u64, r as u64];
        let seed = SeedRecord::new(cfg.seed, &path);
        let level = cfg.levels[k];
        let out = draw(cfg, &scene, level, &seed).and_then(|p| evaluate(&stat, &p, &scene, level, options(cfg, &seed)));
        (k, r, derive_key(cfg.seed, &path), out)
    });
    let mut rows = Vec::with_capacity(jobs);
    let mut failures = vec![0usize; cfg.levels.len()];
    for (k, r, seed, out) in results {
        match out {
            Ok((value, aux)) => rows.push(Row {
                level: cfg.levels[k],
                replicate: r,
                seed,
                value,
                aux,
            }),
            Err(e) if e.is_validation() => return Err(e),
            Err(_) => failures[k] += 1,
        }
    }
    let failed: usize = failures.iter().sum();
    if failed as f64 > 0.001 * jobs as f64 {
        return Err(Error::ReplicateFailures { failed, total: jobs });
    }
    Ok(RawTable {
        statistic: cfg.statistic.clone(),
        scene: cfg.scene.clone(),
        dim: scene.dim(),
        aux_names: stat.aux_names().into_iter().map(String::from).collect(),
        rows,
        failures: cfg.levels.iter().copied().zip(failures).collect(),
    })
}

/// Moments of one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: f64,
    pub count: usize,
    pub mean: f64,
    pub mean_std_error: f64,
    pub variance: f64,
    pub variance_std_error: f64,
    /// 95% bootstrap interval of the variance.
    pub variance_ci: (f64, f64),
}

/// A log-log slope with its bootstrap interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% replicate-bootstrap interval; absent with fewer than 3 levels.
    pub ci: Option<(f64, f64)>,
    pub target: Option<f64>,
    pub tolerance: f64,
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub statistic: String,
    pub levels: Vec<LevelSummary>,
    /// Slope of `log mean`; absent when some mean is not positive.
    pub mean_slope: Option<SlopeFit>,
    pub variance_slope: SlopeFit,
    pub resamples: usize,
}

/// Targets and budget of [`scaling_regression`].
#[derive(Clone, Debug)]
pub struct ScalingOptions {
    pub mean_target: Option<f64>,
    pub variance_target: Option<f64>,
    pub tolerance: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            mean_target: None,
            variance_target: None,
            tolerance: 0.1,
            resamples: 1000,
            seed: 0,
        }
    }
}

fn level_summary(level: f64, xs: &[f64], resamples: usize, seed: &SeedRecord) -> LevelSummary {
    let n = xs.len();
    let mut boot = bootstrap(xs, resamples, seed, variance);
    LevelSummary {
        level,
        count: n,
        mean: mean(xs),
        mean_std_error: (variance(xs) / n as f64).sqrt(),
        variance: variance(xs),
        variance_std_error: variance_std_error(xs),
        variance_ci: percentile_interval(&mut boot, 0.05),
    }
}

fn fit(x: &[f64], ys: &[f64], boots: Option<Vec<f64>>, target: Option<f64>, tol: f64) -> SlopeFit {
    let f = ols(x, ys);
    let ci = boots.map(|mut b| percentile_interval(&mut b, 0.05));
    SlopeFit {
        slope: f.slope,
        intercept: f.intercept,
        ci,
        target,
        tolerance: tol,
        pass: target.map(|t| (f.slope - t).abs() <= tol),
    }
}

/// OLS fits of `log mean` and `log variance` against `log λ`, with replicate-bootstrap
/// intervals (each level resampled independently).
pub fn scaling_regression(table: &RawTable, opts: &ScalingOptions) -> Result<ScalingReport> {
    if opts.resamples < 1000 {
        return Err(Error::invalid("slope intervals need at least 1000 bootstrap resamples"));
    }
    let levels = table.levels();
    if levels.len() < 2 {
        return Err(Error::invalid("a scaling regression needs at least 2 levels"));
    }
    let values: Vec<Vec<f64>> = levels.iter().map(|&l| table.values(l)).collect();
    if let Some(k) = values.iter().position(|v| v.len() < 2) {
        return Err(Error::DegenerateVariance(levels[k]));
    }
    let root = SeedRecord::new(opts.seed, &[]);
    let summaries: Vec<LevelSummary> = levels
        .iter()
        .zip(&values)
        .enumerate()
        .map(|(k, (&l, v))| level_summary(l, v, opts.resamples, &root.child(&[0, k as u64])))
        .collect();
    if let Some(s) = summaries.iter().find(|s| !(s.variance > 0.0)) {
        return Err(Error::DegenerateVariance(s.level));
    }
    let x: Vec<f64> = levels.iter().map(|l| l.ln()).collect();
    let with_ci = levels.len() >= 3;
    // Per-level bootstrap replicates of the mean and the variance share resamples.
    let per_level: Vec<Vec<(f64, f64)>> = values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let seed = root.child(&[1, k as u64]);
            let means = bootstrap(v, opts.resamples, &seed, mean);
            let vars = bootstrap(v, opts.resamples, &seed, variance);
            means.into_iter().zip(vars).collect()
        })
        .collect();
    let slope_of = |pick: &dyn Fn(&(f64, f64)) -> f64| -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(opts.resamples);
        for b in 0..opts.resamples {
            let y: Option<Vec<f64>> = per_level
                .iter()
                .map(|l| {
                    let v = pick(&l[b]);
                    (v > 0.0).then(|| v.ln())
                })
                .collect();
            if let Some(y) = y {
                out.push(ols(&x, &y).slope);
            }
        }
        (!out.is_empty()).then_some(out)
    };
    let yv: Vec<f64> = summaries.iter().map(|s| s.variance.ln()).collect();
    let vboots = if with_ci { slope_of(&|p| p.1) } else { None };
    let variance_slope = fit(&x, &yv, vboots, opts.variance_target, opts.tolerance);
    let mean_slope = if summaries.iter().all(|s| s.mean > 0.0) {
        let ym: Vec<f64> = summaries.iter().map(|s| s.mean.ln()).collect();
        let mboots = if with_ci { slope_of(&|p| p.0) } else { None };
        Some(fit(&x, &ym, mboots, opts.mean_target, opts.tolerance))
    } else {
        None
    };
    Ok(ScalingReport {
        statistic: table.statistic.clone(),
        levels: summaries,
        mean_slope,
        variance_slope,
        resamples: opts.resamples,
    })
}

/// Kolmogorov distance of a standardized sample to `Φ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KsResult {
    Distance { value: f64, std_error: f64 },
    /// The sample is constant and cannot be standardized.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsLevel {
    pub level: f64,
    pub count: usize,
    pub ks: KsResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub statistic: String,
    pub levels: Vec<KsLevel>,
    /// `KS_{k+1} ≤ KS_k + 2·√(se_k² + se_{k+1}²)` along the grid; absent when some level is
    /// degenerate.
    pub non_increasing: Option<bool>,
}

/// Per-level KS distances after standardizing by the empirical mean and SD, with
/// bootstrap standard errors.
pub fn normality_check(table: &RawTable, resamples: usize, seed: u64) -> Result<NormalityReport> {
    let root = SeedRecord::new(seed, &[]);
    let mut levels = Vec::new();
    for (k, l) in table.levels().into_iter().enumerate() {
        let v = table.values(l);
        if v.len() < 100 {
            return Err(Error::invalid(format!("normality check needs at least 100 replicates, level {l} has {}", v.len())));
        }
        let ks = match ks_normal(&v) {
            None => KsResult::Degenerate,
            Some(d) => {
                let boots = bootstrap(&v, resamples, &root.child(&[k as u64]), |s| ks_normal(s).unwrap_or(1.0));
                KsResult::Distance {
                    value: d,
                    std_error: crate::stats::bootstrap_se(&boots),
                }
            }
        };
        levels.push(KsLevel {
            level: l,
            count: v.len(),
            ks,
        });
    }
    let pairs: Option<Vec<(f64, f64)>> = levels
        .iter()
        .map(|l| match l.ks {
            KsResult::Distance { value, std_error } => Some((value, std_error)),
            KsResult::Degenerate => None,
        })
        .collect();
    let non_increasing = pairs.map(|p| p.windows(2).all(|w| w[1].0 <= w[0].0 + 2.0 * w[0].1.hypot(w[1].1)));
    Ok(NormalityReport {
        statistic: table.statistic.clone(),
        levels,
        non_increasing,
    })
}

/// One sample size of a Poisson/binomial comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapLevel {
    pub n: u64,
    pub count: usize,
    pub var_binomial: f64,
    pub var_poisson: f64,
    /// `n^e·Var`, with `e` the normalizing exponent of the statistic.
    pub normalized_binomial: f64,
    pub normalized_poisson: f64,
    /// 95% bootstrap intervals of the normalized variances.
    pub normalized_binomial_ci: (f64, f64),
    pub normalized_poisson_ci: (f64, f64),
    /// `|Var_bin − Var_poi|·n^e`.
    pub normalized_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub statistic: String,
    /// `e` in `n^e·Var`.
    pub exponent: f64,
    pub levels: Vec<GapLevel>,
    /// Last gap below the first and a negative OLS trend of the gaps against `log n`.
    pub decreasing: bool,
}

/// Coupled binomial and Poissonized replicates sharing one i.i.d. stream. With
/// `equal_counts` the Poisson count is forced to `n` and the gap is exactly zero.
pub fn poisson_binomial_compare(cfg: &ExperimentConfig, equal_counts: bool, resamples: usize, workers: Workers) -> Result<GapReport> {
    cfg.validate()?;
    if cfg.levels.iter().any(|l| l.fract() != 0.0) {
        return Err(Error::invalid("sample sizes must be integers"));
    }
    let stat = Statistic::parse(&cfg.statistic)?;
    let scene = catalog::scene(&cfg.scene)?;
    let d = scene.dim() as f64;
    let exponent = if stat.is_volume() { (d + 1.0) / d } else { -(d - 1.0) / d };
    let reps = cfg.replicates;
    let results = map_indexed(cfg.levels.len() * reps, workers, |j| {
        let (k, r) = (j / reps, j % reps);
        let seed = SeedRecord::new(cfg.seed, &[k as u64, r as u64]);
        let n = cfg.levels[k] as u64;
        let pair = if equal_counts {
            couple_with_count(n, n, &scene.density, &seed)
        } else {
            couple_poissonized(n, &scene.density, &seed)
        };
        pair.and_then(|(b, p)| {
            let o = options(cfg, &seed);
            let vb = evaluate(&stat, &b, &scene, n as f64, o.clone())?.0;
            let vp = evaluate(&stat, &p, &scene, n as f64, o)?.0;
            Ok((vb, vp))
        })
    });
    let mut levels = Vec::new();
    let mut failed = 0;
    let root = SeedRecord::new(cfg.seed, &[u64::MAX]);
    for (k, &l) in cfg.levels.iter().enumerate() {
        let mut bin = Vec::new();
        let mut poi = Vec::new();
        for res in &results[k * reps..(k + 1) * reps] {
            match res {
                Ok((b, p)) => {
                    bin.push(*b);
                    poi.push(*p);
                }
                Err(e) if e.is_validation() => return Err(Error::invalid(e.to_string())),
                Err(_) => failed += 1,
            }
        }
        if bin.len() < 2 {
            return Err(Error::DegenerateVariance(l));
        }
        let f = l.powf(exponent);
        let ci = |xs: &[f64], s: u64| {
            let mut b = bootstrap(xs, resamples, &root.child(&[k as u64, s]), variance);
            let (lo, hi) = percentile_interval(&mut b, 0.05);
            (lo * f, hi * f)
        };
        let (vb, vp) = (variance(&bin), variance(&poi));
        levels.push(GapLevel {
            n: l as u64,
            count: bin.len(),
            var_binomial: vb,
            var_poisson: vp,
            normalized_binomial: vb * f,
            normalized_poisson: vp * f,
            normalized_binomial_ci: ci(&bin, 0),
            normalized_poisson_ci: ci(&poi, 1),
            normalized_gap: (vb - vp).abs() * f,
        });
    }
    let total = cfg.levels.len() * reps;
    if failed as f64 > 0.001 * total as f64 {
        return Err(Error::ReplicateFailures { failed, total });
    }
    let gaps: Vec<f64> = levels.iter().map(|l| l.normalized_gap).collect();
    let x: Vec<f64> = levels.iter().map(|l| (l.n as f64).ln()).collect();
    let decreasing = gaps.len() >= 2 && gaps[gaps.len() - 1] < gaps[0] && ols(&x, &gaps).slope < 0.0;
    Ok(GapReport {
        statistic: cfg.statistic.clone(),
        exponent,
        levels,
        decreasing,
    })
}

/// A table whose variance follows `λ^exponent` exactly: the same normal draws scaled by
/// `λ^{exponent/2}` at every level.
pub fn synthetic_power_law(levels: &[f64], replicates: usize, exponent: f64, seed: u64) -> RawTable {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = SeedRecord::new(seed, &[]).rng(crate::rng::purpose::POINTS);
    let z: Vec<f64> = (0..replicates).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut rows = Vec::new();
    for &l in levels {
        let s = l.powf(exponent / 2.0);
        for (r, zr) in z.iter().enumerate() {
            rows.push(Row {
                level: l,
                replicate: r,
                seed,
                value: s * zr,
                aux: vec![],
            });
        }
    }
    RawTable {
        statistic: "synthetic".into(),
        scene: "none".into(),
        dim: 0,
        aux_names: vec![],
        rows,
        failures: levels.iter().map(|&l| (l, 0)).collect(),
    }
}

/// Harness self-calibration: the regression recovers an exact power law.
pub fn self_test(exponent: f64) -> Result<()> {
    let levels: Vec<f64> = (12..=17).map(|k| 2f64.powi(k)).collect();
    let table = synthetic_power_law(&levels, 200, exponent, 1);
    let rep = scaling_regression(
        &table,
        &ScalingOptions {
            variance_target: Some(exponent),
            tolerance: 1e-9,
            ..ScalingOptions::default()
        },
    )?;
    let (lo, hi) = rep.variance_slope.ci.expect("six levels");
    if rep.variance_slope.pass != Some(true) || !(lo <= rep.variance_slope.slope && rep.variance_slope.slope <= hi) {
        return Err(Error::invalid(format!(
            "harness self-test failed: slope {} for exponent {exponent}",
            rep.variance_slope.slope
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(stat: &str, scene: &str, levels: Vec<f64>, reps: usize) -> ExperimentConfig {
        ExperimentConfig {
            scene: scene.into(),
            statistic: stat.into(),
            levels,
            replicates: reps,
            seed: 11,
            boundary: BoundaryMode::Clip,
            input: Input::Poisson,
            probes_per_site: None,
            out: None,
        }
    }

    fn csv(t: &RawTable) -> Vec<u8> {
        let mut b = Vec::new();
        t.write_csv(&mut b).unwrap();
        b
    }

    #[test]
    fn rerun_is_identical() {
        let c = cfg("volume", "disk", vec![500.0, 1000.0], 3);
        let a = run_experiment(&c, Workers::SEQUENTIAL).unwrap();
        let b = run_experiment(&c, Workers(3)).unwrap();
        assert_eq!(csv(&a), csv(&b));
        assert_eq!(a.rows.len(), 6);
        assert!(String::from_utf8(csv(&a)).unwrap().starts_with("level,replicate,seed,value,points,identity_residual\n"));
    }

    #[test]
    fn zero_statistic() {
        let t = run_experiment(&cfg("zero", "disk", vec![200.0], 5), Workers::default()).unwrap();
        assert!(t.values(200.0).iter().all(|&v| v == 0.0));
        assert!(matches!(
            scaling_regression(&t, &ScalingOptions::default()),
            Err(Error::Invalid(_))
        ));
        let t2 = run_experiment(&cfg("zero", "disk", vec![200.0, 400.0], 5), Workers::default()).unwrap();
        assert!(matches!(scaling_regression(&t2, &ScalingOptions::default()), Err(Error::DegenerateVariance(_))));
    }

    #[test]
    fn config_validation() {
        assert!(cfg("volume", "disk", vec![2.0, 1.0], 1).validate().is_err());
        assert!(cfg("bogus", "disk", vec![1.0], 1).validate().is_err());
        assert!(cfg("volume", "blob", vec![1.0], 1).validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"scene":"disk","statistic":"volume","levels":[1],"seed":1,"extra":2}"#).is_err());
        let c = ExperimentConfig::from_json(r#"{"scene":"disk","statistic":"volume","levels":[1],"seed":1}"#).unwrap();
        assert_eq!(c.replicates, 100);
    }

    #[test]
    fn power_law_is_recovered() {
        self_test(0.5).unwrap();
        self_test(-1.5).unwrap();
    }

    #[test]
    fn bootstrap_interval_shrinks_with_budget() {
        let levels: Vec<f64> = (12..=15).map(|k| 2f64.powi(k)).collect();
        let mut t = synthetic_power_law(&levels, 100, 0.5, 3);
        // Independent noise across levels so the slope is not exact.
        let mut rng = SeedRecord::new(4, &[]).rng(0);
        for r in &mut t.rows {
            r.value *= 1.0 + 0.5 * crate::rng::uniform(&mut rng);
        }
        let mut big = synthetic_power_law(&levels, 1600, 0.5, 3);
        for r in &mut big.rows {
            r.value *= 1.0 + 0.5 * crate::rng::uniform(&mut rng);
        }
        let w = |t: &RawTable| {
            let r = scaling_regression(t, &ScalingOptions::default()).unwrap();
            let (lo, hi) = r.variance_slope.ci.unwrap();
            assert!(lo <= r.variance_slope.slope && r.variance_slope.slope <= hi);
            hi - lo
        };
        assert!(w(&big) < w(&t));
    }

    #[test]
    fn normality_of_normal_sample() {
        let t = synthetic_power_law(&[1.0], 500, 0.0, 9);
        let r = normality_check(&t, 200, 1).unwrap();
        match &r.levels[0].ks {
            KsResult::Distance { value, .. } => assert!(*value < 1.36 / 500f64.sqrt()),
            KsResult::Degenerate => panic!(),
        }
        let mut flat = t.clone();
        flat.rows.iter_mut().for_each(|r| r.value = 3.0);
        let r = normality_check(&flat, 200, 1).unwrap();
        assert_eq!(r.levels[0].ks, KsResult::Degenerate);
        assert_eq!(r.non_increasing, None);
    }

    #[test]
    fn forced_counts_close_the_gap() {
        let c = cfg("maximal", "triangle-pareto", vec![256.0, 512.0], 20);
        let r = poisson_binomial_compare(&c, true, 200, Workers::default()).unwrap();
        assert!(r.levels.iter().all(|l| l.normalized_gap == 0.0));
    }

    #[test]
    fn maximal_mean_near_closed_form() {
        let c = cfg("maximal", "triangle-pareto", vec![1e4], 200);
        let t = run_experiment(&c, Workers::default()).unwrap();
        let v: Vec<f64> = t.values(1e4).iter().map(|x| x / 100.0).collect();
        let se = (variance(&v) / v.len() as f64).sqrt();
        assert!((mean(&v) - std::f64::consts::PI.sqrt()).abs() < 4.0 * se + 0.05, "{} ± {se}", mean(&v));
    }
}
