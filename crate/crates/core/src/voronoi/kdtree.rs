//! Static kd-tree over points of `[0,1]^d`, d ∈ {2, 3}, with optional periodic metric.

use super::BoundaryMode;
use crate::geometry::Point;

const LEAF: usize = 8;

#[derive(Clone, Debug)]
struct Node {
    lo: [f64; 3],
    hi: [f64; 3],
    start: u32,
    end: u32,
    /// Child node indices, or `u32::MAX` for leaves.
    left: u32,
    right: u32,
}

/// Nearest-neighbour index over a frozen site set.
#[derive(Clone, Debug)]
pub struct NNIndex {
    dim: usize,
    mode: BoundaryMode,
    pts: Vec<[f64; 3]>,
    /// Original index of each stored point.
    ids: Vec<u32>,
    nodes: Vec<Node>,
}

impl NNIndex {
    pub fn new(points: &[Point], mode: BoundaryMode) -> NNIndex {
        let dim = points.first().map_or(2, |p| p.dim());
        let mut pts: Vec<[f64; 3]> = points
            .iter()
            .map(|p| {
                let c = p.coords();
                [c[0], c[1], if dim == 3 { c[2] } else { 0.0 }]
            })
            .collect();
        let mut ids: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * points.len() / LEAF + 1);
        if !pts.is_empty() {
            build(&mut nodes, &mut pts, &mut ids, 0, points.len(), dim);
        }
        NNIndex {
            dim,
            mode,
            pts,
            ids,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(index, squared distance)` of the nearest site to `q`.
    pub fn nearest(&self, q: &Point) -> Option<(usize, f64)> {
        if self.pts.is_empty() {
            return None;
        }
        let c = q.coords();
        let q3 = [c[0], c[1], if self.dim == 3 { c[2] } else { 0.0 }];
        let mut best = (u32::MAX, f64::INFINITY);
        self.search(0, &q3, &mut best);
        if self.mode == BoundaryMode::Torus {
            let shifts = [-1.0, 0.0, 1.0];
            let zs: &[f64] = if self.dim == 3 { &shifts } else { &[0.0] };
            for &sx in &shifts {
                for &sy in &shifts {
                    for &sz in zs {
                        if sx == 0.0 && sy == 0.0 && sz == 0.0 {
                            continue;
                        }
                        let s = [q3[0] + sx, q3[1] + sy, q3[2] + sz];
                        if box_dist2(&self.nodes[0], &s, self.dim) < best.1 {
                            self.search(0, &s, &mut best);
                        }
                    }
                }
            }
        }
        Some((self.ids[best.0 as usize] as usize, best.1))
    }

    fn search(&self, node: usize, q: &[f64; 3], best: &mut (u32, f64)) {
        let nd = &self.nodes[node];
        if nd.left == u32::MAX {
            for k in nd.start..nd.end {
                let p = &self.pts[k as usize];
                let mut d = 0.0;
                for a in 0..self.dim {
                    d += (p[a] - q[a]) * (p[a] - q[a]);
                }
                // Ties go to the lower original index for determinism.
                if d < best.1 || (d == best.1 && self.ids[k as usize] < self.ids.get(best.0 as usize).copied().unwrap_or(u32::MAX)) {
                    *best = (k, d);
                }
            }
            return;
        }
        let (l, r) = (nd.left as usize, nd.right as usize);
        let dl = box_dist2(&self.nodes[l], q, self.dim);
        let dr = box_dist2(&self.nodes[r], q, self.dim);
        let (first, second, d2) = if dl <= dr { (l, r, dr) } else { (r, l, dl) };
        if dl.min(dr) <= best.1 {
            self.search(first, q, best);
        }
        if d2 <= best.1 {
            self.search(second, q, best);
        }
    }

    /// Linear-scan oracle for tests.
    pub fn nearest_brute(&self, q: &Point) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let c = q.coords();
        for (k, p) in self.pts.iter().enumerate() {
            let mut d = 0.0;
            for a in 0..self.dim {
                let mut x = (p[a] - c[a]).abs();
                if self.mode == BoundaryMode::Torus {
                    x = x.min(1.0 - x);
                }
                d += x * x;
            }
            let id = self.ids[k] as usize;
            if best.is_none_or(|(bi, bd)| d < bd || (d == bd && id < bi)) {
                best = Some((id, d));
            }
        }
        best
    }
}

#[inline]
fn box_dist2(n: &Node, q: &[f64; 3], dim: usize) -> f64 {
    let mut d = 0.0;
    for a in 0..dim {
        let x = if q[a] < n.lo[a] {
            n.lo[a] - q[a]
        } else if q[a] > n.hi[a] {
            q[a] - n.hi[a]
        } else {
            0.0
        };
        d += x * x;
    }
    d
}

fn build(nodes: &mut Vec<Node>, pts: &mut [[f64; 3]], ids: &mut [u32], start: usize, end: usize, dim: usize) -> u32 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in &pts[start..end] {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let me = nodes.len() as u32;
    nodes.push(Node {
        lo,
        hi,
        start: start as u32,
        end: end as u32,
        left: u32::MAX,
        right: u32::MAX,
    });
    if end - start <= LEAF {
        return me;
    }
    let axis = (0..dim)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
        .unwrap_or(0);
    let mid = (start + end) / 2;
    // Sort the slice by axis and keep ids aligned.
    let mut perm: Vec<usize> = (start..end).collect();
    perm.select_nth_unstable_by(mid - start, |&i, &j| pts[i][axis].total_cmp(&pts[j][axis]));
    let sub_p: Vec<[f64; 3]> = perm.iter().map(|&i| pts[i]).collect();
    let sub_i: Vec<u32> = perm.iter().map(|&i| ids[i]).collect();
    pts[start..end].copy_from_slice(&sub_p);
    ids[start..end].copy_from_slice(&sub_i);
    let left = build(nodes, pts, ids, start, mid, dim);
    let right = build(nodes, pts, ids, mid, end, dim);
    nodes[me as usize].left = left;
    nodes[me as usize].right = right;
    me
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn matches_linear_scan() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for dim in [2, 3] {
            for mode in [BoundaryMode::Clip, BoundaryMode::Torus] {
                let pts: Vec<Point> = (0..500)
                    .map(|_| {
                        let c: Vec<f64> = (0..dim).map(|_| rng.random()).collect();
                        Point::from_slice(&c)
                    })
                    .collect();
                let idx = NNIndex::new(&pts, mode);
                for _ in 0..2000 {
                    let c: Vec<f64> = (0..dim).map(|_| rng.random()).collect();
                    let q = Point::from_slice(&c);
                    let a = idx.nearest(&q).unwrap();
                    let b = idx.nearest_brute(&q).unwrap();
                    assert_eq!(a.0, b.0);
                    assert!((a.1 - b.1).abs() < 1e-14);
                }
            }
        }
    }
}
