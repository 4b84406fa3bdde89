use crate::*;
use serde_json::{json, Map, Value};
use std::fs;
use std::io::{BufReader, Write};
use std::path::Path;
use surfscale::constants::{self, HalfSpaceConfig, HalfSpaceScore, LimitConstant, SurfaceConfig};
use surfscale::exec::Workers;
use surfscale::geometry::scene::Scene;
use surfscale::harness::{self, ExperimentConfig, RawTable, ScalingOptions, Statistic};
use surfscale::rng::SeedRecord;
use surfscale::sampler::{self, PointSet};
use surfscale::scores::{self, Context, Needs, Score, ScoreFunction, ScoreOptions};
use surfscale::svg;
use surfscale::voronoi::{self, BoundaryMode};
use surfscale::{Error, Result};

pub fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Sample(a) => sample(a),
        Command::Voronoi(a) => voronoi_cmd(a),
        Command::EstimateVolume(a) => volume(a),
        Command::EstimateSurface(a) => surface(a),
        Command::Maximal(a) => maximal(a),
        Command::Navigate(a) => navigate(a),
        Command::Constants(a) => constants_cmd(a),
        Command::VerifyScaling(a) => verify_scaling(a),
        Command::VerifyClt(a) => verify_clt(a),
        Command::CompareBinomial(a) => compare(a),
    }
}

fn mode(b: Boundary) -> BoundaryMode {
    match b {
        Boundary::Clip => BoundaryMode::Clip,
        Boundary::Torus => BoundaryMode::Torus,
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes())?;
            o.flush()?;
        }
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, v: &impl serde::Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    emit(out, &s)
}

fn need_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| Error::invalid("--seed is required for stochastic commands"))
}

/// The scene, the points and the intensity used to rescale scores.
fn load(src: &SampleSource) -> Result<(Scene, PointSet, f64)> {
    let scene = surfscale::catalog::scene(&src.scene)?;
    if let Some(path) = &src.input {
        let set = sampler::read_csv(BufReader::new(fs::File::open(path)?))?;
        if set.dim != scene.dim() {
            return Err(Error::Dimension {
                expected: scene.dim(),
                got: set.dim,
            });
        }
        let lambda = src.lambda.unwrap_or(set.len().max(1) as f64);
        return Ok((scene, set, lambda));
    }
    let seed = SeedRecord::new(need_seed(src.seed)?, &[]);
    let (set, lambda) = match (src.lambda, src.n) {
        (Some(l), None) => (sampler::sample_poisson(l, &scene.density, &seed)?, l),
        (None, Some(n)) => (sampler::sample_binomial(n, &scene.density, &seed)?, n as f64),
        _ => return Err(Error::invalid("give exactly one of --lambda, --n or --input")),
    };
    Ok((scene, set, lambda))
}

fn probe_seed(src: &SampleSource) -> SeedRecord {
    SeedRecord::new(src.seed.unwrap_or(0), &[1])
}

fn sample(a: SampleArgs) -> Result<()> {
    let (_, set, _) = load(&a.src)?;
    let mut buf = Vec::new();
    match &a.out {
        Some(p) if p.extension().is_some_and(|e| e == "bin") => sampler::write_binary(&set, &mut buf)?,
        _ => sampler::write_csv(&set, &mut buf)?,
    }
    match &a.out {
        Some(p) => fs::write(p, buf)?,
        None => std::io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

fn voronoi_cmd(a: VoronoiArgs) -> Result<()> {
    let (scene, set, _) = load(&a.src)?;
    let d = voronoi::build_voronoi_2d(&set, mode(a.boundary))?;
    match a.format {
        DiagramFormat::Json => emit_json(a.out.as_deref(), &voronoi::diagram_json(&d)),
        DiagramFormat::Svg => emit(a.out.as_deref(), &voronoi::diagram_svg(&d, Some(&scene.region), 640.0)),
    }
}

fn write_scores(path: &Path, set: &PointSet, scene: &Scene, scores: &[f64]) -> Result<()> {
    let mut buf = Vec::new();
    scores::write_scores_csv(&mut buf, set, &scene.region, scores)?;
    fs::write(path, buf)?;
    Ok(())
}

fn warn_density(scene: &Scene) {
    if !scene.density.bounded_away_from_zero() {
        eprintln!("warning: density of {} is not bounded away from zero on the cube", scene.name);
    }
}

fn volume(a: VolumeArgs) -> Result<()> {
    let (scene, set, lambda) = load(&a.src)?;
    warn_density(&scene);
    let opts = ScoreOptions {
        mode: mode(a.boundary),
        probes_per_site: a.probes_per_site,
        probe_seed: probe_seed(&a.src),
        ..ScoreOptions::default()
    };
    let needs = Needs {
        volume: true,
        ..Needs::default()
    };
    let ctx = Context::new(&set, &scene.region, lambda, needs, opts)?;
    if set.is_empty() {
        return Err(Error::DegenerateInput("empty sample".into()));
    }
    let e = scores::volume_estimator(&ctx)?;
    if let Some(p) = &a.scores {
        write_scores(p, &set, &scene, &Score::NuMinus.evaluate_all(&ctx)?)?;
    }
    emit_json(
        a.out.as_deref(),
        &json!({
            "vol_estimate": e.vol_alambda,
            "sym_diff": e.sym_diff,
            "n_points": set.len(),
            "points_inside": e.points_inside,
            "vol_true": scene.region.volume().ok(),
            "vol_reference": e.vol_reference,
            "identity_residual": e.identity_residual,
            "lambda": lambda,
            "boundary": ctx.opts.mode,
        }),
    )
}

fn surface(a: SurfaceArgs) -> Result<()> {
    let (scene, set, lambda) = load(&a.src)?;
    warn_density(&scene);
    let (correction, correction_se) = match a.correction {
        Some(c) => (c, 0.0),
        None => {
            let f = constants::fixture("mu(alpha,1)")?;
            (f.value, f.std_error)
        }
    };
    let opts = ScoreOptions {
        mode: mode(a.boundary),
        ..ScoreOptions::default()
    };
    let needs = Needs {
        voronoi: true,
        ..Needs::default()
    };
    let ctx = Context::new(&set, &scene.region, lambda, needs, opts)?;
    let f: &dyn Fn(&surfscale::Point) -> f64 = match a.weight {
        Weight::One => &|_| 1.0,
        Weight::X1 => &|p| p[0],
    };
    let est = scores::weighted_surface_integral(&ctx, correction, f)?;
    if let Some(p) = &a.scores {
        write_scores(p, &set, &scene, &Score::Alpha.evaluate_all(&ctx)?)?;
    }
    emit_json(
        a.out.as_deref(),
        &json!({
            "surface_estimate": est,
            "correction": correction,
            "correction_std_error": correction_se,
            "weight": match a.weight { Weight::One => "one", Weight::X1 => "x1" },
            "n_points": set.len(),
            "lambda": lambda,
            "surface_measure": scene.region.boundary.surface_measure(256).ok(),
        }),
    )
}

fn maximal(a: MaximalArgs) -> Result<()> {
    let (scene, set, lambda) = load(&a.src)?;
    let needs = Needs {
        dominance: true,
        ..Needs::default()
    };
    let ctx = Context::new(&set, &scene.region, lambda, needs, ScoreOptions::default())?;
    let z = Score::Zeta.evaluate_all(&ctx)?;
    let count = scores::sum_scores(&z);
    let d = scene.dim() as f64;
    if let Some(p) = &a.scores {
        write_scores(p, &set, &scene, &z)?;
    }
    let closed = constants::mu_zeta_scene(&a.src.scene, 1024).ok().map(|c| c.value);
    emit_json(
        a.out.as_deref(),
        &json!({
            "count": count,
            "normalized": count * lambda.powf(-(d - 1.0) / d),
            "closed_form_mean": closed,
            "n_points": set.len(),
            "lambda": lambda,
            "maximal": z.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(i, _)| i).collect::<Vec<_>>(),
        }),
    )
}

fn navigate(a: NavigateArgs) -> Result<()> {
    let (_, set, lambda) = load(&a.src)?;
    let curve = scores::Curve::parse(&a.curve)?;
    let d = voronoi::build_voronoi_2d(&set, BoundaryMode::Clip)?;
    let p = scores::navigation_path(&d, &curve, a.tol)?;
    let s = lambda.sqrt();
    emit_json(
        a.out.as_deref(),
        &json!({
            "curve": a.curve,
            "lambda": lambda,
            "n_points": set.len(),
            "cells": p.nodes.len(),
            "path_length": p.length * s,
            "sum_rho": p.rho.iter().sum::<f64>() * s,
            "crossing_length": p.crossing_length * s,
            "sum_rho_tilde": p.rho_tilde.iter().sum::<f64>() * s,
            "non_adjacent_steps": p.non_adjacent_steps,
            "nodes": p.nodes,
        }),
    )
}

fn constants_cmd(a: ConstantsArgs) -> Result<()> {
    let workers = Workers(a.workers.unwrap_or(0));
    if let Some(path) = &a.freeze {
        let all = constants::standard_fixtures(need_seed(a.seed)?, workers)?;
        constants::write_fixtures(path, &all)?;
        return emit_json(a.out.as_deref(), &all);
    }
    let score = HalfSpaceScore::parse(&a.xi)?;
    if a.closed_form {
        if !matches!(score, HalfSpaceScore::Zeta) || a.kind != ConstantKind::Mu {
            return Err(Error::invalid("closed forms exist for the ζ mean only"));
        }
        let scene = a.scene.as_deref().expect("clap requires --scene");
        return emit_json(a.out.as_deref(), &constants::mu_zeta_scene(scene, 4096)?);
    }
    let mut hs = HalfSpaceConfig {
        tau: a.tau,
        normal: a.normal.clone(),
        seed: need_seed(a.seed)?,
        ..HalfSpaceConfig::default()
    };
    if let Some(r) = a.reps {
        hs.replicates = r;
    }
    if let Some(p) = a.pairs {
        hs.pairs = p;
    }
    let c: LimitConstant = match (&a.scene, a.kind) {
        (None, ConstantKind::Mu) => constants::mu_universal(&score, a.dim + 1, &hs, workers)?,
        (None, ConstantKind::Nu) => constants::nu_universal(&score, a.dim + 1, &hs, workers)?,
        (None, ConstantKind::Sigma2) => return Err(Error::invalid("sigma2 needs --scene")),
        (Some(name), kind) => {
            let scene = surfscale::catalog::scene(name)?;
            if scene.dim() != a.dim + 1 {
                return Err(Error::Dimension {
                    expected: a.dim + 1,
                    got: scene.dim(),
                });
            }
            let sc = SurfaceConfig {
                half_space: hs,
                resolution: a.resolution,
            };
            match kind {
                ConstantKind::Mu => constants::mu_surface(&score, &scene.region, &scene.density, &sc, workers)?,
                ConstantKind::Sigma2 => constants::sigma2_surface(&score, &scene.region, &scene.density, &sc, workers)?,
                ConstantKind::Nu => return Err(Error::invalid("nu is a universal constant; drop --scene")),
            }
        }
    };
    emit_json(a.out.as_deref(), &c)
}

/// `a:b` doubles from `a` up to `b`; `a:b:f` uses factor `f`; otherwise a comma list.
pub fn parse_levels(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::invalid(format!("bad level grid {s:?}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => s.split(',').map(num).collect(),
        2 | 3 => {
            let (a, b) = (num(parts[0])?, num(parts[1])?);
            let f = if parts.len() == 3 { num(parts[2])? } else { 2.0 };
            if !(a > 0.0 && b >= a && f > 1.0) {
                return Err(bad());
            }
            let mut v = vec![a];
            while v.last().unwrap() * f <= b * (1.0 + 1e-12) {
                v.push(v.last().unwrap() * f);
            }
            Ok(v)
        }
        _ => Err(bad()),
    }
}

/// Config file fields overridden by any flags given.
fn experiment(a: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut m: Map<String, Value> = match &a.config {
        Some(p) => match serde_json::from_str(&fs::read_to_string(p)?)? {
            Value::Object(m) => m,
            _ => return Err(Error::invalid("config must be a JSON object")),
        },
        None => Map::new(),
    };
    let mut set = |k: &str, v: Value| {
        m.insert(k.into(), v);
    };
    if let Some(s) = &a.scene {
        set("scene", json!(s));
    }
    if let Some(s) = &a.statistic {
        set("statistic", json!(s));
    }
    if let Some(s) = &a.levels {
        set("levels", json!(parse_levels(s)?));
    }
    if let Some(r) = a.reps {
        set("replicates", json!(r));
    }
    if let Some(s) = a.seed {
        set("seed", json!(s));
    }
    if let Some(b) = a.boundary {
        set("boundary", json!(mode(b)));
    }
    if let Some(i) = &a.input {
        set("input", json!(i));
    }
    if let Some(p) = a.probes_per_site {
        set("probes_per_site", json!(p));
    }
    if let Some(o) = &a.out {
        set("out", json!(o));
    }
    if !m.contains_key("seed") {
        return Err(Error::invalid("--seed is required for stochastic commands"));
    }
    let cfg: ExperimentConfig = serde_json::from_value(Value::Object(m)).map_err(|e| Error::invalid(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> Result<Option<std::path::PathBuf>> {
    match &cfg.out {
        Some(o) => {
            fs::create_dir_all(o)?;
            Ok(Some(o.into()))
        }
        None => Ok(None),
    }
}

fn write_table(dir: &Path, t: &RawTable) -> Result<()> {
    let mut buf = Vec::new();
    t.write_csv(&mut buf)?;
    fs::write(dir.join("table.csv"), buf)?;
    Ok(())
}

fn finish(dir: Option<&Path>, name: &str, report: &impl serde::Serialize) -> Result<()> {
    if let Some(d) = dir {
        emit_json(Some(&d.join(name)), report)?;
    }
    emit_json(None, report)
}

fn verify_scaling(a: ExperimentArgs) -> Result<()> {
    let cfg = experiment(&a)?;
    let stat = Statistic::parse(&cfg.statistic)?;
    let dim = surfscale::catalog::scene(&cfg.scene)?.dim();
    let (mt, vt) = stat.exponents(dim);
    harness::self_test(a.variance_target.unwrap_or(vt))?;
    let table = harness::run_experiment(&cfg, Workers(a.workers.unwrap_or(0)))?;
    let report = harness::scaling_regression(
        &table,
        &ScalingOptions {
            mean_target: a.mean_target.or(mt),
            variance_target: Some(a.variance_target.unwrap_or(vt)),
            tolerance: a.tolerance,
            resamples: a.resamples,
            seed: cfg.seed,
        },
    )?;
    let dir = out_dir(&cfg)?;
    if let Some(d) = &dir {
        write_table(d, &table)?;
        let var: Vec<(f64, f64)> = report.levels.iter().map(|l| (l.level, l.variance)).collect();
        let plot = svg::loglog(
            &format!("{} on {}", cfg.statistic, cfg.scene),
            "level",
            "variance",
            &[svg::Series {
                name: "variance",
                points: var,
                fit: Some((report.variance_slope.slope, report.variance_slope.intercept)),
            }],
        );
        fs::write(d.join("scaling.svg"), plot)?;
    }
    finish(dir.as_deref(), "report.json", &report)
}

fn verify_clt(a: ExperimentArgs) -> Result<()> {
    let cfg = experiment(&a)?;
    let table = harness::run_experiment(&cfg, Workers(a.workers.unwrap_or(0)))?;
    let report = harness::normality_check(&table, a.resamples, cfg.seed)?;
    let dir = out_dir(&cfg)?;
    if let Some(d) = &dir {
        write_table(d, &table)?;
        if let Some(&last) = table.levels().last() {
            fs::write(d.join("qq.svg"), svg::qq(&format!("{} at level {last}", cfg.statistic), &table.values(last)))?;
        }
    }
    finish(dir.as_deref(), "normality.json", &report)
}

fn compare(a: CompareArgs) -> Result<()> {
    let cfg = experiment(&a.exp)?;
    let report = harness::poisson_binomial_compare(&cfg, a.equal_counts, a.exp.resamples, Workers(a.exp.workers.unwrap_or(0)))?;
    let dir = out_dir(&cfg)?;
    finish(dir.as_deref(), "gap.json", &report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_grids() {
        assert_eq!(parse_levels("4096:131072").unwrap().len(), 6);
        assert_eq!(parse_levels("1:100:10").unwrap(), vec![1.0, 10.0, 100.0]);
        assert_eq!(parse_levels("5,7").unwrap(), vec![5.0, 7.0]);
        assert!(parse_levels("8:2").is_err());
        assert!(parse_levels("x").is_err());
    }
}
