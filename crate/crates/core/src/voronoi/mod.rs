//! Planar Voronoi cell complex and a dimension-generic nearest-neighbour index.
//!
//! Cells are built from an incremental Delaunay triangulation: each cell is the unit
//! square (or the torus working box) clipped by the bisectors of its Delaunay
//! neighbours. In d = 3 no explicit cells are built; cell measures come from Monte Carlo
//! probes assigned to their nearest site.

pub mod delaunay;
mod diagram;
mod export;
mod kdtree;

pub use diagram::{BoundaryMode, CellVertex, Diagnostics, Face, FaceLabel, VoronoiDiagram};
pub use export::{diagram_json, diagram_svg};
pub use kdtree::NNIndex;

use crate::error::{Error, Result};
use crate::geometry::{Point, Region};
use crate::rng::{purpose, uniform, SeedRecord};
use crate::sampler::PointSet;

/// Voronoi diagram of a planar point set.
pub fn build_voronoi_2d(sites: &PointSet, mode: BoundaryMode) -> Result<VoronoiDiagram> {
    if sites.dim != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: sites.dim,
        });
    }
    let pts: Vec<_> = sites.points.iter().map(|p| p.xy_array()).collect();
    VoronoiDiagram::build(&pts, mode)
}

/// A Monte Carlo measure with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

fn unit_probe(rng: &mut crate::rng::StreamRng, dim: usize) -> Point {
    let mut p = Point::zeros(dim);
    for k in 0..dim {
        p.coords_mut()[k] = uniform(rng);
    }
    p
}

/// Unbiased estimate of `Vol({w ∈ [0,1]^d : nearest site is site} ∩ filter)` from
/// `probes` uniform probe points.
pub fn cell_volume_mc(
    index: &NNIndex,
    site: usize,
    filter: Option<&Region>,
    probes: usize,
    seed: &SeedRecord,
) -> Result<McEstimate> {
    if probes == 0 {
        return Err(Error::invalid("probes must be at least 1"));
    }
    if site >= index.len() {
        return Err(Error::invalid("site index out of range"));
    }
    let mut rng = seed.rng(purpose::PROBES);
    let mut hits = 0usize;
    for _ in 0..probes {
        let w = unit_probe(&mut rng, index.dim());
        if filter.is_some_and(|r| !r.contains(&w)) {
            continue;
        }
        if index.nearest(&w).map(|(i, _)| i) == Some(site) {
            hits += 1;
        }
    }
    let p = hits as f64 / probes as f64;
    Ok(McEstimate {
        value: p,
        std_error: (p * (1.0 - p) / probes as f64).sqrt(),
    })
}

/// Per-site probe counts and in-region counts from one shared probe sample.
#[derive(Clone, Debug)]
pub struct ProbePartition {
    pub probes: usize,
    pub total: Vec<u32>,
    pub inside: Vec<u32>,
}

impl ProbePartition {
    pub fn new(index: &NNIndex, region: &Region, probes: usize, seed: &SeedRecord) -> ProbePartition {
        let mut rng = seed.rng(purpose::PROBES);
        let mut total = vec![0u32; index.len()];
        let mut inside = vec![0u32; index.len()];
        for _ in 0..probes {
            let w = unit_probe(&mut rng, index.dim());
            if let Some((i, _)) = index.nearest(&w) {
                total[i] += 1;
                if region.contains(&w) {
                    inside[i] += 1;
                }
            }
        }
        ProbePartition {
            probes,
            total,
            inside,
        }
    }

    pub fn volume(&self, i: usize) -> f64 {
        self.total[i] as f64 / self.probes as f64
    }

    pub fn volume_inside(&self, i: usize) -> f64 {
        self.inside[i] as f64 / self.probes as f64
    }

    pub fn volume_outside(&self, i: usize) -> f64 {
        (self.total[i] - self.inside[i]) as f64 / self.probes as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon;
    use crate::sampler::{sample_poisson, Density};

    fn explicit(pts: &[[f64; 2]]) -> PointSet {
        PointSet::explicit(2, pts.iter().map(|p| Point::xy(p[0], p[1])).collect()).unwrap()
    }

    #[test]
    fn single_and_two_sites() {
        let d = build_voronoi_2d(&explicit(&[[0.3, 0.6]]), BoundaryMode::Clip).unwrap();
        assert_eq!(d.cell_volume(0), 1.0);
        assert!((d.stabilization_diagnostic(0) - 2f64.sqrt()).abs() < 1e-15);
        let d = build_voronoi_2d(&explicit(&[[0.25, 0.5], [0.75, 0.5]]), BoundaryMode::Clip).unwrap();
        assert!((d.cell_volume(0) - 0.5).abs() < 1e-15);
        assert!((d.cell_volume(0) + d.cell_volume(1) - 1.0).abs() < 1e-15);
        assert!((d.shared_face_measure(0, 1).unwrap() - 1.0).abs() < 1e-15);
        let tilted = build_voronoi_2d(&explicit(&[[0.2, 0.3], [0.7, 0.6]]), BoundaryMode::Clip).unwrap();
        assert!((tilted.cell_volume(0) + tilted.cell_volume(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_grid() {
        let pts = [[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]];
        let d = build_voronoi_2d(&explicit(&pts), BoundaryMode::Clip).unwrap();
        for i in 0..4 {
            assert!((d.cell_volume(i) - 0.25).abs() < 1e-15);
            assert!((d.stabilization_diagnostic(i) - 2f64.sqrt()).abs() < 1e-15);
        }
        assert!((d.shared_face_measure(0, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((d.shared_face_measure(0, 2).unwrap() - 0.5).abs() < 1e-15);
        // The diagonal pair is cocircular; either it is not adjacent or its face is empty.
        match d.shared_face_measure(0, 3) {
            Ok(l) => assert!(l < 1e-15),
            Err(e) => assert!(matches!(e, Error::NotAdjacent(0, 3))),
        }
    }

    #[test]
    fn random_partition_and_nn_consistency() {
        let u = Density::uniform(2);
        for rep in 0..20 {
            let s = sample_poisson(100.0, &u, &SeedRecord::new(8, &[rep])).unwrap();
            let d = build_voronoi_2d(&s, BoundaryMode::Clip).unwrap();
            let total: f64 = (0..d.len()).map(|i| d.cell_volume(i)).sum();
            assert!((total - 1.0).abs() < 1e-9);
            let idx = NNIndex::new(&s.points, BoundaryMode::Clip);
            let mut rng = SeedRecord::new(9, &[rep]).rng(purpose::PROBES);
            for _ in 0..200 {
                let q = [uniform(&mut rng), uniform(&mut rng)];
                let (nn, _) = idx.nearest(&Point::xy(q[0], q[1])).unwrap();
                assert!(polygon::contains(&d.cell_polygon(nn), q));
                assert_eq!(d.locate(q, 0), nn);
            }
        }
    }

    #[test]
    fn mc_volume_edge_cases() {
        let s = explicit(&[[0.3, 0.6]]);
        let idx = NNIndex::new(&s.points, BoundaryMode::Clip);
        let seed = SeedRecord::new(1, &[]);
        let e = cell_volume_mc(&idx, 0, None, 1000, &seed).unwrap();
        assert_eq!(e.value, 1.0);
        let empty = Region::half_space(
            crate::geometry::Hyperplane::new(Point::xy(0.0, -1.0), Point::xy(0.0, 1.0)).unwrap(),
        )
        .unwrap();
        let e = cell_volume_mc(&idx, 0, Some(&empty), 1000, &seed).unwrap();
        assert_eq!(e.value, 0.0);
    }
}
