use super::delaunay::Triangulation;
use crate::error::{Error, Result};
use crate::geometry::polygon::{self, clip_labelled, Labelled, P2};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    #[default]
    Clip,
    Torus,
}

impl std::str::FromStr for BoundaryMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clip" => Ok(BoundaryMode::Clip),
            "torus" => Ok(BoundaryMode::Torus),
            _ => Err(Error::UnknownName {
                kind: "boundary mode",
                name: s.into(),
                available: "clip, torus".into(),
            }),
        }
    }
}

/// What lies across a cell edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceLabel {
    /// The unit square (clip mode) or the working box (never in a valid torus diagram).
    Boundary,
    /// Site `site` translated by `shift` (always `[0, 0]` in clip mode).
    Site { site: u32, shift: [i8; 2] },
}

pub type CellVertex = Labelled<FaceLabel>;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    /// `(dropped, kept)` site pairs merged as duplicates; dropped sites have empty cells.
    pub duplicates: Vec<(usize, usize)>,
    /// Cells were built by direct half-plane intersection (collinear or tiny inputs).
    pub direct_fallback: bool,
    /// Final ghost margin in torus mode.
    pub torus_margin: Option<f64>,
}

/// The Voronoi cell complex of planar sites, clipped to `[0,1]²` or wrapped on the
/// torus. In torus mode each cell is the polygon around its site's own position, so it
/// may stick out of the unit square.
#[derive(Clone, Debug)]
pub struct VoronoiDiagram {
    pub sites: Vec<P2>,
    pub mode: BoundaryMode,
    /// Counter-clockwise cell polygons; each vertex carries the label of the edge that
    /// starts at it.
    pub cells: Vec<Vec<CellVertex>>,
    /// Delaunay neighbours (original indices).
    pub neighbors: Vec<Vec<u32>>,
    pub diagnostics: Diagnostics,
    pub triangulation: Option<Triangulation>,
}

/// A shared edge as seen from one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face {
    pub neighbor: u32,
    pub shift: [i8; 2],
    pub a: P2,
    pub b: P2,
}

impl Face {
    pub fn length(&self) -> f64 {
        polygon::dist(self.a, self.b)
    }
}

fn box_cell(lo: f64, hi: f64) -> Vec<CellVertex> {
    [[lo, lo], [hi, lo], [hi, hi], [lo, hi]]
        .into_iter()
        .map(|p| Labelled {
            p,
            label: FaceLabel::Boundary,
        })
        .collect()
}

/// Clips `cell` by the bisector half-plane of `site` against `other`.
#[inline]
fn clip_bisector(cell: &[CellVertex], site: P2, other: P2, label: FaceLabel) -> Vec<CellVertex> {
    let a = [other[0] - site[0], other[1] - site[1]];
    let mid = [(other[0] + site[0]) / 2.0, (other[1] + site[1]) / 2.0];
    clip_labelled(cell, a, a[0] * mid[0] + a[1] * mid[1], label)
}

fn all_collinear(pts: &[P2]) -> bool {
    if pts.len() < 3 {
        return true;
    }
    let a = pts[0];
    let Some(&b) = pts.iter().find(|p| **p != a) else {
        return true;
    };
    pts.iter()
        .all(|&p| super::delaunay::orient(a, b, p) == 0.0)
}

impl VoronoiDiagram {
    pub fn build(sites: &[P2], mode: BoundaryMode) -> Result<VoronoiDiagram> {
        if sites.is_empty() {
            return Err(Error::DegenerateInput("no sites".into()));
        }
        if sites.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::invalid("sites must be finite"));
        }
        match mode {
            BoundaryMode::Clip => Self::build_clip(sites),
            BoundaryMode::Torus => Self::build_torus(sites),
        }
    }

    fn build_clip(sites: &[P2]) -> Result<VoronoiDiagram> {
        let n = sites.len();
        if n < 3 || all_collinear(sites) {
            return Ok(Self::direct(sites));
        }
        let tri = Triangulation::new(sites);
        let mut neighbors = tri.adjacency();
        let dropped: Vec<bool> = {
            let mut d = vec![false; n];
            for &(i, _) in &tri.duplicates {
                d[i] = true;
            }
            d
        };
        let square = box_cell(0.0, 1.0);
        let cells = (0..n)
            .map(|i| {
                if dropped[i] {
                    return Vec::new();
                }
                let mut cell = square.clone();
                for &j in &neighbors[i] {
                    let label = FaceLabel::Site {
                        site: j,
                        shift: [0, 0],
                    };
                    cell = clip_bisector(&cell, sites[i], sites[j as usize], label);
                }
                cell
            })
            .collect();
        for (i, l) in neighbors.iter_mut().enumerate() {
            if dropped[i] {
                l.clear();
            }
        }
        Ok(VoronoiDiagram {
            sites: sites.to_vec(),
            mode: BoundaryMode::Clip,
            cells,
            neighbors,
            diagnostics: Diagnostics {
                duplicates: tri.duplicates.clone(),
                direct_fallback: false,
                torus_margin: None,
            },
            triangulation: Some(tri),
        })
    }

    /// Direct half-plane intersection against every other site.
    fn direct(sites: &[P2]) -> VoronoiDiagram {
        let n = sites.len();
        let mut duplicates = Vec::new();
        let mut dropped = vec![false; n];
        for i in 0..n {
            for j in 0..i {
                if !dropped[j] && polygon::dist(sites[i], sites[j]) <= 1e-12 {
                    dropped[i] = true;
                    duplicates.push((i, j));
                    break;
                }
            }
        }
        let mut cells = Vec::with_capacity(n);
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            if dropped[i] {
                cells.push(Vec::new());
                continue;
            }
            let mut cell = box_cell(0.0, 1.0);
            for j in 0..n {
                if j != i && !dropped[j] {
                    let label = FaceLabel::Site {
                        site: j as u32,
                        shift: [0, 0],
                    };
                    cell = clip_bisector(&cell, sites[i], sites[j], label);
                }
            }
            for v in &cell {
                if let FaceLabel::Site { site, .. } = v.label {
                    neighbors[i].push(site);
                }
            }
            neighbors[i].sort_unstable();
            neighbors[i].dedup();
            cells.push(cell);
        }
        VoronoiDiagram {
            sites: sites.to_vec(),
            mode: BoundaryMode::Clip,
            cells,
            neighbors,
            diagnostics: Diagnostics {
                duplicates,
                direct_fallback: true,
                torus_margin: None,
            },
            triangulation: None,
        }
    }

    fn build_torus(sites: &[P2]) -> Result<VoronoiDiagram> {
        let n = sites.len();
        if sites.iter().any(|p| !(0.0..=1.0).contains(&p[0]) || !(0.0..=1.0).contains(&p[1])) {
            return Err(Error::invalid("torus mode needs sites in the unit square"));
        }
        let mut margin = (4.0 / (n as f64).sqrt()).min(0.5);
        loop {
            let full = margin >= 1.0;
            let mut pts = sites.to_vec();
            let mut origin: Vec<(u32, [i8; 2])> = (0..n as u32).map(|i| (i, [0, 0])).collect();
            for sx in -1i8..=1 {
                for sy in -1i8..=1 {
                    if sx == 0 && sy == 0 {
                        continue;
                    }
                    for (i, p) in sites.iter().enumerate() {
                        let q = [p[0] + sx as f64, p[1] + sy as f64];
                        if q[0] >= -margin && q[0] <= 1.0 + margin && q[1] >= -margin && q[1] <= 1.0 + margin {
                            pts.push(q);
                            origin.push((i as u32, [sx, sy]));
                        }
                    }
                }
            }
            let (cells, adj, dups, tri) = if pts.len() >= 3 && !all_collinear(&pts) {
                let tri = Triangulation::new(&pts);
                let adj = tri.adjacency();
                let mut dropped = vec![false; n];
                for &(i, _) in &tri.duplicates {
                    if i < n {
                        dropped[i] = true;
                    }
                }
                let lo = -margin;
                let hi = 1.0 + margin;
                let cells: Vec<Vec<CellVertex>> = (0..n)
                    .map(|i| {
                        if dropped[i] {
                            return Vec::new();
                        }
                        let mut cell = box_cell(lo - 1.0, hi + 1.0);
                        for &j in &adj[i] {
                            let (site, shift) = origin[j as usize];
                            cell = clip_bisector(&cell, pts[i], pts[j as usize], FaceLabel::Site { site, shift });
                        }
                        cell
                    })
                    .collect();
                let dups: Vec<(usize, usize)> = tri
                    .duplicates
                    .iter()
                    .filter(|&&(i, _)| i < n)
                    .map(|&(i, k)| (i, origin[k].0 as usize))
                    .collect();
                (cells, adj, dups, Some(tri))
            } else {
                // Fewer than three distinct copies: direct intersection over all copies.
                let cells: Vec<Vec<CellVertex>> = (0..n)
                    .map(|i| {
                        let mut cell = box_cell(-margin - 1.0, 2.0 + margin);
                        for (j, q) in pts.iter().enumerate() {
                            if j != i {
                                let (site, shift) = origin[j];
                                cell = clip_bisector(&cell, pts[i], *q, FaceLabel::Site { site, shift });
                            }
                        }
                        cell
                    })
                    .collect();
                (cells, vec![Vec::new(); pts.len()], Vec::new(), None)
            };
            if !full {
                // Every cell vertex's empty disk must lie inside the ghost box.
                let ok = cells.iter().enumerate().all(|(i, cell)| {
                    cell.iter().all(|v| {
                        let r = polygon::dist(v.p, sites[i]);
                        v.label != FaceLabel::Boundary
                            && v.p[0] - r >= -margin
                            && v.p[0] + r <= 1.0 + margin
                            && v.p[1] - r >= -margin
                            && v.p[1] + r <= 1.0 + margin
                    })
                });
                if !ok {
                    margin *= 2.0;
                    continue;
                }
            }
            let mut neighbors: Vec<Vec<u32>> = (0..n)
                .map(|i| {
                    let mut l: Vec<u32> = if tri.is_some() {
                        adj[i].iter().map(|&j| origin[j as usize].0).collect()
                    } else {
                        cells[i]
                            .iter()
                            .filter_map(|v| match v.label {
                                FaceLabel::Site { site, .. } => Some(site),
                                FaceLabel::Boundary => None,
                            })
                            .collect()
                    };
                    l.sort_unstable();
                    l.dedup();
                    l
                })
                .collect();
            for &(i, _) in &dups {
                neighbors[i].clear();
            }
            return Ok(VoronoiDiagram {
                sites: sites.to_vec(),
                mode: BoundaryMode::Torus,
                cells,
                neighbors,
                diagnostics: Diagnostics {
                    duplicates: dups,
                    direct_fallback: tri.is_none(),
                    torus_margin: Some(margin.min(1.0)),
                },
                triangulation: tri,
            });
        }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn cell_polygon(&self, i: usize) -> Vec<P2> {
        self.cells[i].iter().map(|v| v.p).collect()
    }

    /// Shoelace area of cell `i`.
    pub fn cell_volume(&self, i: usize) -> f64 {
        polygon::area(&self.cell_polygon(i))
    }

    /// Edges of cell `i` shared with other cells.
    pub fn faces(&self, i: usize) -> impl Iterator<Item = Face> + '_ {
        let cell = &self.cells[i];
        let m = cell.len();
        (0..m).filter_map(move |k| match cell[k].label {
            FaceLabel::Site { site, shift } => Some(Face {
                neighbor: site,
                shift,
                a: cell[k].p,
                b: cell[(k + 1) % m].p,
            }),
            FaceLabel::Boundary => None,
        })
    }

    /// Total length of the edges shared by cells `i` and `j`.
    pub fn shared_face_measure(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.len() || j >= self.len() {
            return Err(Error::invalid("site index out of range"));
        }
        if self.neighbors[i].binary_search(&(j as u32)).is_err() {
            return Err(Error::NotAdjacent(i, j));
        }
        Ok(self
            .faces(i)
            .filter(|f| f.neighbor as usize == j)
            .map(|f| f.length())
            .sum())
    }

    /// Neighbours sharing an edge of positive length with cell `i`.
    pub fn face_neighbors(&self, i: usize) -> Vec<u32> {
        let mut l: Vec<u32> = self
            .faces(i)
            .filter(|f| f.length() > 0.0)
            .map(|f| f.neighbor)
            .collect();
        l.sort_unstable();
        l.dedup();
        l
    }

    /// Diameter of the union of cell `i` and its face-adjacent cells, the empirical
    /// stabilization radius proxy.
    pub fn stabilization_diagnostic(&self, i: usize) -> f64 {
        let mut pts: Vec<P2> = self.cell_polygon(i);
        for f in self.faces(i) {
            let s = [f.shift[0] as f64, f.shift[1] as f64];
            pts.extend(
                self.cells[f.neighbor as usize]
                    .iter()
                    .map(|v| [v.p[0] + s[0], v.p[1] + s[1]]),
            );
        }
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup();
        polygon::diameter(&pts)
    }

    /// Index of the site whose cell contains `q` by walking from `start` towards closer
    /// neighbours (a greedy walk on the Delaunay graph).
    pub fn locate(&self, q: P2, start: usize) -> usize {
        let d2 = |i: usize| -> f64 {
            let s = self.sites[i];
            match self.mode {
                BoundaryMode::Clip => (s[0] - q[0]).powi(2) + (s[1] - q[1]).powi(2),
                BoundaryMode::Torus => {
                    let dx = (s[0] - q[0]).abs();
                    let dy = (s[1] - q[1]).abs();
                    dx.min(1.0 - dx).powi(2) + dy.min(1.0 - dy).powi(2)
                }
            }
        };
        let mut cur = start;
        if self.cells[cur].is_empty() {
            cur = self
                .cells
                .iter()
                .position(|c| !c.is_empty())
                .expect("some cell is nonempty");
        }
        let mut best = d2(cur);
        loop {
            let mut moved = false;
            for &j in &self.neighbors[cur] {
                let dj = d2(j as usize);
                if dj < best {
                    best = dj;
                    cur = j as usize;
                    moved = true;
                }
            }
            if !moved {
                return cur;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random(n: usize, seed: u64) -> Vec<P2> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
    }

    fn check_faces(d: &VoronoiDiagram) {
        for i in 0..d.len() {
            for f in d.faces(i) {
                if f.length() == 0.0 {
                    continue;
                }
                let j = f.neighbor as usize;
                let back: Vec<Face> = d
                    .faces(j)
                    .filter(|g| {
                        g.neighbor as usize == i && g.shift == [-f.shift[0], -f.shift[1]]
                    })
                    .collect();
                let s = [f.shift[0] as f64, f.shift[1] as f64];
                let found = back.iter().any(|g| {
                    let ga = [g.a[0] + s[0], g.a[1] + s[1]];
                    let gb = [g.b[0] + s[0], g.b[1] + s[1]];
                    polygon::dist(ga, f.b) < 1e-12 && polygon::dist(gb, f.a) < 1e-12
                });
                assert!(found, "face {i}-{j} not mirrored");
            }
        }
    }

    #[test]
    fn faces_are_symmetric() {
        for seed in 0..5 {
            let pts = random(200, seed);
            check_faces(&VoronoiDiagram::build(&pts, BoundaryMode::Clip).unwrap());
            check_faces(&VoronoiDiagram::build(&pts, BoundaryMode::Torus).unwrap());
        }
    }

    #[test]
    fn torus_partition_and_translation_invariance() {
        for n in [1usize, 2, 5, 40, 500] {
            let pts = random(n, n as u64);
            let d = VoronoiDiagram::build(&pts, BoundaryMode::Torus).unwrap();
            let mut areas: Vec<f64> = (0..n).map(|i| d.cell_volume(i)).collect();
            assert!((areas.iter().sum::<f64>() - 1.0).abs() < 1e-9, "n = {n}");
            let shifted: Vec<P2> = pts
                .iter()
                .map(|p| [(p[0] + 0.37) % 1.0, (p[1] + 0.81) % 1.0])
                .collect();
            let e = VoronoiDiagram::build(&shifted, BoundaryMode::Torus).unwrap();
            let mut other: Vec<f64> = (0..n).map(|i| e.cell_volume(i)).collect();
            areas.sort_by(f64::total_cmp);
            other.sort_by(f64::total_cmp);
            for (a, b) in areas.iter().zip(&other) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn duality_with_delaunay() {
        let pts = random(300, 17);
        let d = VoronoiDiagram::build(&pts, BoundaryMode::Clip).unwrap();
        let tri = d.triangulation.as_ref().unwrap();
        for i in 0..d.len() {
            for j in d.face_neighbors(i) {
                assert!(d.neighbors[i].binary_search(&j).is_ok());
                assert!(d.face_neighbors(j as usize).contains(&(i as u32)));
            }
        }
        // Every Delaunay edge whose dual segment crosses the open square has a face.
        for (ti, t) in tri.tris.iter().enumerate() {
            for k in 0..3 {
                let u = t.n[k];
                if u == super::super::delaunay::NONE || (u as usize) < ti {
                    continue;
                }
                let (a, b) = (t.v[(k + 1) % 3], t.v[(k + 2) % 3]);
                if !tri.is_real(a) || !tri.is_real(b) {
                    continue;
                }
                let c1 = tri.circumcenter(t.v);
                let c2 = tri.circumcenter(tri.tris[u as usize].v);
                let seg = polygon::clip_by_convex(&[c1, c2], &polygon::unit_square());
                let len = if seg.len() >= 2 { polygon::dist(seg[0], seg[1]) } else { 0.0 };
                if len > 1e-9 {
                    let m = d.shared_face_measure(a as usize, b as usize).unwrap();
                    assert!((m - len).abs() < 1e-9, "{m} vs {len}");
                }
            }
        }
    }
}
