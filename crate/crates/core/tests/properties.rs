//! Property tests of geometric and statistical invariants.

use proptest::prelude::*;
use surfscale::geometry::polygon::P2;
use surfscale::rng::SeedRecord;
use surfscale::sampler::{sample_poisson, Density, PointSet};
use surfscale::scores::{
    eval_statistic, maximal_layer, maximal_layer_brute, navigation_path, volume_estimator, zeta_direct, Context, Curve,
    Needs, Score, ScoreOptions,
};
use surfscale::stats::{bootstrap, ks_normal, mean, percentile_interval};
use surfscale::voronoi::delaunay::{in_circle, Triangulation};
use surfscale::voronoi::{BoundaryMode, VoronoiDiagram};
use surfscale::{Point, Region};

/// Points on a coarse grid so that ties and duplicates occur.
fn grid_points(d: usize, max: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::collection::vec(0u8..24, d), 0..max)
        .prop_map(|v| v.into_iter().map(|c| Point::from_slice(&c.iter().map(|&k| k as f64 / 23.0).collect::<Vec<_>>())).collect())
}

fn unit_points(max: usize) -> impl Strategy<Value = Vec<P2>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..max).prop_map(|v| v.into_iter().map(|(x, y)| [x, y]).collect())
}

fn monotone(p: &Point) -> Point {
    let c: Vec<f64> = p.coords().iter().map(|&x| x * x * x + 2.0 * x - 0.5).collect();
    Point::from_slice(&c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn maximal_layer_matches_quadratic_oracle(d in 2usize..=3, pts in (2usize..=3).prop_flat_map(|d| grid_points(d, 200))) {
        let pts: Vec<Point> = pts.into_iter().filter(|p| p.dim() == d).collect();
        let layer = maximal_layer(&pts).unwrap();
        prop_assert_eq!(layer.indices, maximal_layer_brute(&pts));
    }

    #[test]
    fn maximal_layer_is_invariant_under_monotone_maps(pts in grid_points(2, 120)) {
        let mapped: Vec<Point> = pts.iter().map(monotone).collect();
        prop_assert_eq!(maximal_layer(&pts).unwrap().indices, maximal_layer(&mapped).unwrap().indices);
    }

    #[test]
    fn adding_a_point_never_creates_maximal_points(pts in grid_points(3, 100), extra in prop::collection::vec(0u8..24, 3)) {
        let inside = vec![true; pts.len()];
        let before = zeta_direct(&pts, &inside);
        let mut more = pts.clone();
        more.push(Point::from_slice(&extra.iter().map(|&k| k as f64 / 23.0).collect::<Vec<_>>()));
        let after = zeta_direct(&more, &vec![true; more.len()]);
        for i in 0..pts.len() {
            prop_assert!(after[i] <= before[i]);
        }
    }

    #[test]
    fn delaunay_circumcircles_are_empty(pts in unit_points(120)) {
        let t = Triangulation::new(&pts);
        for [a, b, c] in t.real_triangles() {
            let (pa, pb, pc) = (t.points[a as usize], t.points[b as usize], t.points[c as usize]);
            for (k, &p) in pts.iter().enumerate() {
                if [a, b, c].contains(&(k as u32)) || t.duplicates.iter().any(|&(i, _)| i == k) {
                    continue;
                }
                prop_assert!(in_circle(pa, pb, pc, p) <= 0.0);
            }
        }
    }

    #[test]
    fn voronoi_cells_tile_the_square(pts in unit_points(150), torus in any::<bool>()) {
        let mode = if torus { BoundaryMode::Torus } else { BoundaryMode::Clip };
        let d = VoronoiDiagram::build(&pts, mode).unwrap();
        let total: f64 = (0..d.len()).map(|i| d.cell_volume(i)).sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "{}", total);
    }

    #[test]
    fn volume_identity_holds(r in 0.05f64..0.45, seed in any::<u64>(), torus in any::<bool>()) {
        let region = Region::ball(Point::xy(0.5, 0.5), r).unwrap();
        let lambda = 400.0;
        let pts = sample_poisson(lambda, &Density::uniform(2), &SeedRecord::new(seed, &[])).unwrap();
        prop_assume!(!pts.is_empty());
        let opts = ScoreOptions { mode: if torus { BoundaryMode::Torus } else { BoundaryMode::Clip }, ..ScoreOptions::default() };
        let ctx = Context::new(&pts, &region, lambda, Needs { volume: true, ..Needs::default() }, opts).unwrap();
        let e = volume_estimator(&ctx).unwrap();
        prop_assert!((lambda * e.identity_residual).abs() < 1e-6);
        prop_assert!(e.sym_diff >= (e.vol_alambda - e.vol_reference).abs() - 1e-12);
    }

    #[test]
    fn rescaling_is_consistent(seed in any::<u64>(), lambda in 50.0f64..2000.0) {
        let region = Region::ball(Point::xy(0.5, 0.5), 0.3).unwrap();
        let pts = sample_poisson(lambda, &Density::uniform(2), &SeedRecord::new(seed, &[])).unwrap();
        let v = eval_statistic(&Score::Slab { half_width: 1.0 }, &pts, &region, lambda, ScoreOptions::default()).unwrap();
        prop_assert!((v.rescaled - v.raw_sum * lambda.powf(-0.5)).abs() <= 1e-12 * v.raw_sum.abs().max(1.0));
    }

    #[test]
    fn navigation_rho_sums_to_path_length(pts in unit_points(80), y0 in 0.05f64..0.95, y1 in 0.05f64..0.95) {
        let d = VoronoiDiagram::build(&pts, BoundaryMode::Clip).unwrap();
        let curve = Curve::parse(&format!("segment:0.01,{y0},0.99,{y1}")).unwrap();
        let p = navigation_path(&d, &curve, 1e-10).unwrap();
        let s: f64 = p.rho.iter().sum();
        prop_assert!((s - p.length).abs() <= 1e-12 * p.length.max(1.0), "{} vs {}", s, p.length);
        let st: f64 = p.rho_tilde.iter().sum();
        prop_assert!((st - p.crossing_length).abs() <= 1e-12 * p.crossing_length.max(1.0));
    }

    #[test]
    fn samples_are_reproducible_and_in_the_cube(seed in any::<u64>(), lambda in 1.0f64..500.0) {
        let a = sample_poisson(lambda, &Density::uniform(3), &SeedRecord::new(seed, &[2])).unwrap();
        let b = sample_poisson(lambda, &Density::uniform(3), &SeedRecord::new(seed, &[2])).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.points.iter().all(|p| p.coords().iter().all(|c| (0.0..=1.0).contains(c))));
    }

    #[test]
    fn bootstrap_interval_contains_estimate(xs in prop::collection::vec(-10.0f64..10.0, 5..60), seed in any::<u64>()) {
        let mut b = bootstrap(&xs, 400, &SeedRecord::new(seed, &[]), mean);
        let (lo, hi) = percentile_interval(&mut b, 0.05);
        let m = mean(&xs);
        prop_assert!(lo <= m + 1e-12 && m <= hi + 1e-12);
    }

    #[test]
    fn ks_distance_is_a_probability(xs in prop::collection::vec(-5.0f64..5.0, 2..80)) {
        if let Some(d) = ks_normal(&xs) {
            prop_assert!((0.0..=1.0).contains(&d));
        }
    }
}

#[test]
fn empty_point_set_has_no_maximal_points() {
    let empty = PointSet::explicit(2, vec![]).unwrap();
    assert!(maximal_layer(&empty.points).unwrap().indices.is_empty());
}
