//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any fails.
//!
//! Budgets are sized for a single desktop core in the optimized test profile.

use std::f64::consts::PI;
use std::time::Instant;

use surfscale::catalog;
use surfscale::constants::{
    expected_score, fixture, load_fixtures, mu_zeta_closed_form, mu_zeta_closed_form_2d, HalfSpaceScore, Method,
};
use surfscale::exec::{map_indexed, Workers};
use surfscale::geometry::SurfaceKind;
use surfscale::harness::{
    normality_check, poisson_binomial_compare, run_experiment, scaling_regression, ExperimentConfig, Input, KsResult,
    NormalityReport, RawTable, Row, ScalingOptions, ScalingReport,
};
use surfscale::rng::{derive_key, purpose, SeedRecord};
use surfscale::sampler::sample_poisson;
use surfscale::scores::{
    maximal_layer, maximal_layer_brute, navigation_path, volume_estimator, Context, Curve, Needs, ScoreOptions,
};
use surfscale::stats::{bootstrap, bootstrap_se, mean};
use surfscale::voronoi::delaunay::{in_circle, Triangulation};
use surfscale::voronoi::{cell_volume_mc, BoundaryMode, NNIndex, VoronoiDiagram};
use surfscale::Point;

const SEED: u64 = 20261014;
const TOP: f64 = 131072.0;

fn grid() -> Vec<f64> {
    (12..=17).map(|k| 2f64.powi(k)).collect()
}

fn config(scene: &str, statistic: &str, levels: Vec<f64>, replicates: usize) -> ExperimentConfig {
    ExperimentConfig {
        scene: scene.into(),
        statistic: statistic.into(),
        levels,
        replicates,
        seed: SEED,
        boundary: BoundaryMode::Clip,
        input: Input::Poisson,
        probes_per_site: None,
        out: None,
    }
}

fn scaling(table: &RawTable, variance_target: f64) -> ScalingReport {
    let opts = ScalingOptions {
        mean_target: None,
        variance_target: Some(variance_target),
        tolerance: 0.1,
        resamples: 1000,
        seed: SEED,
    };
    scaling_regression(table, &opts).expect("scaling regression")
}

fn ks_at(report: &NormalityReport, level: f64) -> f64 {
    match report.levels.iter().find(|l| l.level == level).map(|l| &l.ks) {
        Some(KsResult::Distance { value, .. }) => *value,
        _ => f64::INFINITY,
    }
}

fn overlaps(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Volume and symmetric-difference tables from one pass over the same samples, plus the
/// largest identity residual seen (scaled by `λ`).
fn volume_tables(scene: &str, mode: BoundaryMode, levels: &[f64], reps: usize) -> (RawTable, RawTable, f64) {
    let sc = catalog::scene(scene).unwrap();
    let jobs = levels.len() * reps;
    let out = map_indexed(jobs, Workers::default(), |j| {
        let (k, r) = (j / reps, j % reps);
        let path = [k as u64, r as u64];
        let seed = SeedRecord::new(SEED, &path);
        let lambda = levels[k];
        let pts = sample_poisson(lambda, &sc.density, &seed).unwrap();
        let opts = ScoreOptions {
            mode,
            probe_seed: seed.child(&[1]),
            workers: Workers::SEQUENTIAL,
            ..ScoreOptions::default()
        };
        let needs = Needs {
            volume: true,
            ..Needs::default()
        };
        let ctx = Context::new(&pts, &sc.region, lambda, needs, opts).unwrap();
        let e = volume_estimator(&ctx).unwrap();
        (k, r, derive_key(SEED, &path), e.vol_alambda, e.sym_diff, lambda * e.identity_residual.abs())
    });
    let mut vol = Vec::with_capacity(jobs);
    let mut sym = Vec::with_capacity(jobs);
    let mut worst: f64 = 0.0;
    for (k, r, seed, v, s, res) in out {
        let row = |value| Row {
            level: levels[k],
            replicate: r,
            seed,
            value,
            aux: vec![],
        };
        vol.push(row(v));
        sym.push(row(s));
        worst = worst.max(res);
    }
    let table = |statistic: &str, rows| RawTable {
        statistic: statistic.into(),
        scene: scene.into(),
        dim: 2,
        aux_names: vec![],
        rows,
        failures: vec![],
    };
    (table("volume", vol), table("symdiff", sym), worst)
}

/// State shared between criteria so each expensive run happens once.
#[derive(Default)]
struct Shared {
    maximal: Option<RawTable>,
    volume: Option<(RawTable, RawTable)>,
    worst_identity: f64,
}

fn c1() -> Outcome {
    let t = run_experiment(&config("triangle-pareto", "maximal", vec![TOP], 200), Workers::default()).unwrap();
    let v: Vec<f64> = t.values(TOP).iter().map(|x| x / TOP.sqrt()).collect();
    let m = mean(&v);
    let se = bootstrap_se(&bootstrap(&v, 1000, &SeedRecord::new(SEED, &[1]), mean));
    let target = PI.sqrt();
    let rel = (m - target).abs() / target;
    outcome(
        rel <= 0.03 && (m - target).abs() <= 4.0 * se,
        format!("mean M_K/λ^1/2 = {m:.4} ± {se:.4}, closed form {target:.4}, rel err {:.2}%", 100.0 * rel),
    )
}

fn c2(shared: &mut Shared) -> Outcome {
    let t = run_experiment(&config("triangle-pareto", "maximal", grid(), 500), Workers::default()).unwrap();
    let rep = scaling(&t, 0.5);
    let s = &rep.variance_slope;
    let plateau: Vec<(f64, (f64, f64))> = rep
        .levels
        .iter()
        .map(|l| {
            let f = l.level.powf(-0.5);
            (l.variance * f, (l.variance_ci.0 * f, l.variance_ci.1 * f))
        })
        .collect();
    let sigma = fixture("sigma2(zeta,triangle-pareto)").unwrap();
    let band = (sigma.value - 2.0 * sigma.std_error, sigma.value + 2.0 * sigma.std_error);
    let (top, top_ci) = *plateau.last().unwrap();
    let positive = plateau.iter().all(|(_, ci)| ci.0 > 0.0);
    shared.maximal = Some(t);
    outcome(
        s.pass == Some(true) && positive && overlaps(top_ci, band),
        format!(
            "slope {:.3} (target 0.5 ± 0.1), plateau at 2^17 {top:.3} CI [{:.3}, {:.3}] vs σ² {:.3} ± {:.3}",
            s.slope, top_ci.0, top_ci.1, sigma.value, sigma.std_error
        ),
    )
}

fn c3(shared: &mut Shared) -> Outcome {
    let (vol, _, worst) = volume_tables("disk:0.25", BoundaryMode::Torus, &[1e4], 500);
    shared.worst_identity = shared.worst_identity.max(worst);
    let v = vol.values(1e4);
    let m = mean(&v);
    let se = (surfscale::stats::variance(&v) / v.len() as f64).sqrt();
    let target = PI / 16.0;
    outcome(
        (m - target).abs() <= 4.0 * se,
        format!("mean Vol(A_λ) = {m:.6} ± {se:.6}, π/16 = {target:.6}, |z| = {:.2}", (m - target).abs() / se),
    )
}

fn c4(shared: &mut Shared) -> Outcome {
    let (vol, sym, worst) = volume_tables("disk:0.25", BoundaryMode::Clip, &grid(), 500);
    shared.worst_identity = shared.worst_identity.max(worst);
    let a = scaling(&vol, -1.5);
    let b = scaling(&sym, -1.5);
    shared.volume = Some((vol, sym));
    outcome(
        a.variance_slope.pass == Some(true) && b.variance_slope.pass == Some(true),
        format!(
            "Var Vol(A_λ) slope {:.3}, Var Vol(A△A_λ) slope {:.3} (target −1.5 ± 0.1)",
            a.variance_slope.slope, b.variance_slope.slope
        ),
    )
}

fn c5() -> Outcome {
    let r = 0.3;
    let plain = run_experiment(&config("disk:0.3", "perimeter", vec![TOP], 100), Workers::default()).unwrap();
    let weighted = run_experiment(&config("disk:0.3", "perimeter-x1", vec![TOP], 100), Workers::default()).unwrap();
    let p = mean(&plain.values(TOP));
    let w = mean(&weighted.values(TOP));
    let (tp, tw) = (2.0 * PI * r, 0.5 * 2.0 * PI * r);
    let (ep, ew) = ((p - tp).abs() / tp, (w - tw).abs() / tw);
    outcome(
        ep <= 0.03 && ew <= 0.05,
        format!(
            "perimeter {p:.4} vs {tp:.4} ({:.2}%), ∫x₁ {w:.4} vs {tw:.4} ({:.2}%), μ(α,1) = {:.4}",
            100.0 * ep,
            100.0 * ew,
            fixture("mu(alpha,1)").unwrap().value
        ),
    )
}

fn c6(shared: &Shared) -> Outcome {
    let mk = normality_check(shared.maximal.as_ref().unwrap(), 1000, SEED).unwrap();
    let vol = normality_check(&shared.volume.as_ref().unwrap().0, 1000, SEED).unwrap();
    let (a, b) = (ks_at(&mk, TOP), ks_at(&vol, TOP));
    let trend = mk.non_increasing == Some(true) && vol.non_increasing == Some(true);
    outcome(
        a <= 0.08 && b <= 0.08 && trend,
        format!(
            "KS at 2^17: M_K {a:.4}, Vol(A_λ) {b:.4} (≤ 0.08); non-increasing: M_K {:?}, Vol {:?}",
            mk.non_increasing, vol.non_increasing
        ),
    )
}

fn c7() -> Outcome {
    let levels: Vec<f64> = (12..=16).map(|k| 2f64.powi(k)).collect();
    let z = poisson_binomial_compare(&config("triangle-pareto", "maximal", levels, 1000), false, 1000, Workers::default())
        .unwrap();
    let gaps: Vec<String> = z.levels.iter().map(|l| format!("{:.3}", l.normalized_gap)).collect();
    let v = poisson_binomial_compare(
        &config("disk:0.25", "volume", vec![4096.0, 16384.0, 65536.0], 300),
        false,
        1000,
        Workers::default(),
    )
    .unwrap();
    let plateaus = v.levels.iter().all(|l| overlaps(l.normalized_binomial_ci, l.normalized_poisson_ci));
    let last = v.levels.last().unwrap();
    outcome(
        z.decreasing && plateaus,
        format!(
            "ζ gaps [{}] decreasing {}; n^1.5 Var Vol at 2^16: binomial {:.4}, Poisson {:.4}, all overlap {plateaus}",
            gaps.join(", "),
            z.decreasing,
            last.normalized_binomial,
            last.normalized_poisson
        ),
    )
}

fn c8(shared: &Shared) -> Outcome {
    let root = SeedRecord::new(SEED, &[8]);
    let mut failures = Vec::new();

    // Maximal layer against the quadratic oracle, with ties from a coarse grid half the time.
    let mut maximal_bad = 0;
    for i in 0..1000u64 {
        let mut rng = root.child(&[0, i]).rng(purpose::POINTS);
        let d = 2 + (i % 2) as usize;
        let n = rand::Rng::random_range(&mut rng, 0..=200);
        let coarse = i % 4 < 2;
        let pts: Vec<Point> = (0..n)
            .map(|_| {
                let c: Vec<f64> = (0..d)
                    .map(|_| {
                        let x: f64 = rand::Rng::random(&mut rng);
                        if coarse {
                            (x * 16.0).floor() / 16.0
                        } else {
                            x
                        }
                    })
                    .collect();
                Point::from_slice(&c)
            })
            .collect();
        if maximal_layer(&pts).unwrap().indices != maximal_layer_brute(&pts) {
            maximal_bad += 1;
        }
    }
    if maximal_bad > 0 {
        failures.push(format!("maximal {maximal_bad}/1000"));
    }

    // Voronoi cell areas against probe estimates, area sums, navigation lengths.
    let mut worst_z: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    let mut worst_rho: f64 = 0.0;
    for i in 0..100u64 {
        let mut rng = root.child(&[1, i]).rng(purpose::POINTS);
        let n = rand::Rng::random_range(&mut rng, 1..=30);
        let sites: Vec<[f64; 2]> =
            (0..n).map(|_| [rand::Rng::random(&mut rng), rand::Rng::random(&mut rng)]).collect();
        let mode = if i % 2 == 0 { BoundaryMode::Clip } else { BoundaryMode::Torus };
        let d = VoronoiDiagram::build(&sites, mode).unwrap();
        let pts: Vec<Point> = sites.iter().map(|p| Point::xy(p[0], p[1])).collect();
        let index = NNIndex::new(&pts, mode);
        let total: f64 = (0..d.len()).map(|c| d.cell_volume(c)).sum();
        worst_sum = worst_sum.max((total - 1.0).abs());
        for c in 0..d.len() {
            let e = cell_volume_mc(&index, c, None, 20_000, &root.child(&[2, i, c as u64])).unwrap();
            let z = (e.value - d.cell_volume(c)).abs() / e.std_error.max(1e-12);
            if e.std_error > 0.0 {
                worst_z = worst_z.max(z);
            }
        }
        if mode == BoundaryMode::Clip {
            let curve = Curve::parse("segment:0.02,0.1,0.97,0.85").unwrap();
            let p = navigation_path(&d, &curve, 1e-10).unwrap();
            let s: f64 = p.rho.iter().sum();
            worst_rho = worst_rho.max((s - p.length).abs() / p.length.max(1.0));
        }
    }
    if worst_z > 4.0 {
        failures.push(format!("cell area z {worst_z:.2}"));
    }
    if worst_sum > 1e-9 {
        failures.push(format!("area sum {worst_sum:e}"));
    }
    if worst_rho > 1e-12 {
        failures.push(format!("Σρ {worst_rho:e}"));
    }
    if shared.worst_identity > 1e-6 {
        failures.push(format!("identity {:e}", shared.worst_identity));
    }

    // Empty circumcircles, brute force.
    let mut delaunay_bad = 0;
    for i in 0..40u64 {
        let mut rng = root.child(&[3, i]).rng(purpose::POINTS);
        let n = rand::Rng::random_range(&mut rng, 3..=300);
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|_| {
                let (x, y): (f64, f64) = (rand::Rng::random(&mut rng), rand::Rng::random(&mut rng));
                if i % 2 == 0 {
                    [x, y]
                } else {
                    [(x * 12.0).floor() / 12.0, (y * 12.0).floor() / 12.0]
                }
            })
            .collect();
        let t = Triangulation::new(&pts);
        for [a, b, c] in t.real_triangles() {
            let (pa, pb, pc) = (t.points[a as usize], t.points[b as usize], t.points[c as usize]);
            if pts.iter().any(|&p| p != pa && p != pb && p != pc && in_circle(pa, pb, pc, p) > 0.0) {
                delaunay_bad += 1;
            }
        }
    }
    if delaunay_bad > 0 {
        failures.push(format!("{delaunay_bad} non-empty circumcircles"));
    }
    outcome(
        failures.is_empty(),
        format!(
            "maximal 1000/1000 checked, worst cell z {worst_z:.2}, area sum err {worst_sum:.1e}, Σρ err {worst_rho:.1e}, identity err {:.1e}{}",
            shared.worst_identity,
            if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join(", ")) }
        ),
    )
}

fn c9() -> Outcome {
    let sc = catalog::scene("triangle-pareto").unwrap();
    let SurfaceKind::Graph(g) = &sc.region.boundary.kind else {
        return outcome(false, "triangle-pareto boundary is not a graph".into());
    };
    let general = mu_zeta_closed_form(g, &sc.density, 4096).unwrap().value;
    let planar = mu_zeta_closed_form_2d(g, &sc.density, 4096).unwrap().value;
    let closed_ok = (general - planar).abs() <= 1e-12;

    let n = Point::xy(1.0, 1.0).normalized().unwrap();
    let mut worst_rescale: f64 = 0.0;
    for (k, tau) in [0.5f64, 2.0].into_iter().enumerate() {
        for (j, u) in [-0.3f64, 0.2, 0.6].into_iter().enumerate() {
            let s = 10 * k as u64 + j as u64;
            let (a, sa) =
                expected_score(&HalfSpaceScore::Zeta, &n.scale(u), &n, tau, 20_000, SEED + s, Workers::default()).unwrap();
            let (b, sb) = expected_score(
                &HalfSpaceScore::Zeta,
                &n.scale(u * tau.sqrt()),
                &n,
                1.0,
                20_000,
                SEED + 100 + s,
                Workers::default(),
            )
            .unwrap();
            let se = sa.hypot(sb);
            if se > 0.0 {
                worst_rescale = worst_rescale.max((a - b).abs() / se);
            } else if a != b {
                worst_rescale = f64::INFINITY;
            }
        }
    }

    let mut worst_trunc: f64 = 0.0;
    let mut checked = 0;
    for c in load_fixtures().unwrap() {
        if c.method != Method::HalfSpaceMc {
            continue;
        }
        let t = c.truncation_report.as_ref().expect("simulated constants carry a truncation report");
        checked += 1;
        let diff = (c.value - t.inner_value).abs();
        let z = if t.difference_std_error > 0.0 {
            diff / t.difference_std_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        worst_trunc = worst_trunc.max(z);
    }
    outcome(
        closed_ok && worst_rescale <= 3.0 && worst_trunc <= 2.0,
        format!(
            "closed forms differ by {:.1e}; rescaling worst |z| {worst_rescale:.2}; truncation worst |z| {worst_trunc:.2} over {checked} constants",
            (general - planar).abs()
        ),
    )
}

fn c10() -> Outcome {
    let mut mismatched = Vec::new();
    let cases = [
        config("triangle-pareto", "maximal", vec![1024.0, 4096.0], 24),
        config("disk:0.25", "volume", vec![1024.0, 4096.0], 16),
        config("disk:0.3", "perimeter", vec![2048.0], 8),
        ExperimentConfig {
            boundary: BoundaryMode::Torus,
            ..config("disk", "symdiff", vec![2048.0], 8)
        },
        ExperimentConfig {
            input: Input::Binomial,
            ..config("sphere", "volume", vec![512.0], 6)
        },
    ];
    for cfg in &cases {
        let csv = |w| {
            let mut buf = Vec::new();
            run_experiment(cfg, w).unwrap().write_csv(&mut buf).unwrap();
            buf
        };
        let a = csv(Workers(1));
        if a != csv(Workers(3)) || a != csv(Workers(8)) {
            mismatched.push(format!("{}:{}", cfg.scene, cfg.statistic));
        }
    }
    outcome(
        mismatched.is_empty(),
        format!("{} experiments compared at 1, 3 and 8 workers; mismatches: {:?}", cases.len(), mismatched),
    )
}

fn main() {
    // `cargo test` passes filter arguments; this target always runs in full.
    let mut shared = Shared::default();
    let mut all = true;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        all &= o.pass;
        println!(
            "criterion {id:>2} [{}] {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    };
    report(1, "maximal-points mean", &mut c1);
    report(2, "maximal-points variance scaling", &mut || c2(&mut shared));
    report(3, "volume estimator unbiased on the torus", &mut || c3(&mut shared));
    report(4, "volume estimator variance scaling", &mut || c4(&mut shared));
    report(5, "surface-area estimator consistency", &mut c5);
    report(6, "CLT trend", &mut || c6(&shared));
    report(7, "Poisson/binomial agreement", &mut c7);
    report(8, "oracle equivalence suites", &mut || c8(&shared));
    report(9, "limit-constant consistency", &mut c9);
    report(10, "determinism across worker counts", &mut c10);
    if !all {
        std::process::exit(1);
    }
}
