//! Incremental Delaunay triangulation with Lawson flips.
//!
//! Points are inserted in Hilbert order inside a large enclosing triangle and located by
//! a visibility walk. Orientation and incircle tests use adaptive exact predicates.
//! An edge is flipped only when the opposite vertex lies strictly inside the
//! circumcircle, so exactly cocircular configurations keep whichever diagonal was
//! created first; the dual Voronoi diagram is the same either way.

use crate::geometry::polygon::P2;
use robust::{incircle, orient2d, Coord};

pub const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
pub struct Tri {
    /// Vertices in counter-clockwise order.
    pub v: [u32; 3],
    /// `n[i]` is the neighbour across the edge opposite `v[i]`.
    pub n: [u32; 3],
}

#[derive(Clone, Debug)]
pub struct Triangulation {
    /// Input points followed by the three enclosing vertices.
    pub points: Vec<P2>,
    pub tris: Vec<Tri>,
    /// Number of input points; vertex indices `>= n_real` are enclosing vertices.
    pub n_real: usize,
    /// `(dropped, kept)` pairs for inputs within the merge distance of an earlier point.
    pub duplicates: Vec<(usize, usize)>,
}

#[inline]
fn c(p: P2) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

#[inline]
pub fn orient(a: P2, b: P2, p: P2) -> f64 {
    orient2d(c(a), c(b), c(p))
}

#[inline]
pub fn in_circle(a: P2, b: P2, cc: P2, p: P2) -> f64 {
    incircle(c(a), c(b), c(cc), c(p))
}

/// Index along a Hilbert curve of order 16 for a point of the unit square.
fn hilbert_index(x: f64, y: f64) -> u64 {
    let n: u32 = 1 << 16;
    let mut xi = ((x.clamp(0.0, 1.0)) * (n - 1) as f64) as u32;
    let mut yi = ((y.clamp(0.0, 1.0)) * (n - 1) as f64) as u32;
    let mut d: u64 = 0;
    let mut s = n / 2;
    while s > 0 {
        let rx = u32::from(xi & s > 0);
        let ry = u32::from(yi & s > 0);
        d += s as u64 * s as u64 * ((3 * rx) ^ ry) as u64;
        if ry == 0 {
            if rx == 1 {
                xi = n - 1 - xi;
                yi = n - 1 - yi;
            }
            std::mem::swap(&mut xi, &mut yi);
        }
        s /= 2;
    }
    d
}

/// Squared merge distance for near-duplicate inputs.
const MERGE2: f64 = 1e-24;

impl Triangulation {
    pub fn new(input: &[P2]) -> Triangulation {
        let n = input.len();
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in input {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if n == 0 {
            lo = [0.0, 0.0];
            hi = [1.0, 1.0];
        }
        let center = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-3);
        let s = 1e4 * extent;
        let mut points = input.to_vec();
        points.push([center[0] - 2.0 * s, center[1] - s]);
        points.push([center[0] + 2.0 * s, center[1] - s]);
        points.push([center[0], center[1] + 2.0 * s]);
        let mut t = Triangulation {
            points,
            tris: vec![Tri {
                v: [n as u32, n as u32 + 1, n as u32 + 2],
                n: [NONE; 3],
            }],
            n_real: n,
            duplicates: Vec::new(),
        };
        let span = [(hi[0] - lo[0]).max(1e-300), (hi[1] - lo[1]).max(1e-300)];
        let mut order: Vec<(u64, u32)> = (0..n)
            .map(|i| {
                let p = input[i];
                (hilbert_index((p[0] - lo[0]) / span[0], (p[1] - lo[1]) / span[1]), i as u32)
            })
            .collect();
        order.sort_unstable();
        let mut start = 0u32;
        let mut stack = Vec::new();
        for &(_, i) in &order {
            start = t.insert(i, start, &mut stack);
        }
        t
    }

    #[inline]
    fn p(&self, i: u32) -> P2 {
        self.points[i as usize]
    }

    /// Walks from triangle `start` to the triangle containing point `q`.
    /// Returns the triangle and, if `q` lies on an edge, the index of the opposite vertex.
    fn locate(&self, q: P2, start: u32) -> (u32, Option<usize>, Option<usize>) {
        let mut t = start;
        let mut rot = 0usize;
        'walk: loop {
            let tri = self.tris[t as usize];
            let mut zero = None;
            let mut zeros = 0;
            for r in 0..3 {
                let k = (r + rot) % 3;
                let a = self.p(tri.v[(k + 1) % 3]);
                let b = self.p(tri.v[(k + 2) % 3]);
                let o = orient(a, b, q);
                if o < 0.0 {
                    t = tri.n[k];
                    rot = rot.wrapping_add(1);
                    continue 'walk;
                }
                if o == 0.0 {
                    zeros += 1;
                    zero = Some(k);
                }
            }
            if zeros >= 2 {
                // q coincides with a vertex: the one shared by the two zero edges.
                let k = (0..3)
                    .find(|&k| {
                        let a = self.p(tri.v[k]);
                        a[0] == q[0] && a[1] == q[1]
                    })
                    .unwrap_or(0);
                return (t, None, Some(k));
            }
            return (t, zero, None);
        }
    }

    fn set_nbr(&mut self, t: u32, old: u32, new: u32) {
        if t == NONE {
            return;
        }
        let tri = &mut self.tris[t as usize];
        for k in 0..3 {
            if tri.n[k] == old {
                tri.n[k] = new;
                return;
            }
        }
    }

    fn insert(&mut self, pi: u32, start: u32, stack: &mut Vec<u32>) -> u32 {
        let q = self.p(pi);
        let (t, edge, vertex) = self.locate(q, start);
        let tri = self.tris[t as usize];
        // Near-duplicates of a vertex of the containing triangle are merged.
        for k in 0..3 {
            let v = tri.v[k];
            let a = self.p(v);
            if (v as usize) < self.n_real
                && (vertex == Some(k) || (a[0] - q[0]).powi(2) + (a[1] - q[1]).powi(2) <= MERGE2)
            {
                self.duplicates.push((pi as usize, v as usize));
                return t;
            }
        }
        match edge {
            None => self.split3(t, pi, stack),
            Some(k) => self.split4(t, k, pi, stack),
        }
        self.legalize(stack);
        t
    }

    fn split3(&mut self, t: u32, p: u32, stack: &mut Vec<u32>) {
        let Tri {
            v: [a, b, c],
            n: [na, nb, nc],
        } = self.tris[t as usize];
        let t1 = self.tris.len() as u32;
        let t2 = t1 + 1;
        self.tris[t as usize] = Tri {
            v: [p, b, c],
            n: [na, t1, t2],
        };
        self.tris.push(Tri {
            v: [p, c, a],
            n: [nb, t2, t],
        });
        self.tris.push(Tri {
            v: [p, a, b],
            n: [nc, t, t1],
        });
        self.set_nbr(nb, t, t1);
        self.set_nbr(nc, t, t2);
        stack.extend([t, t1, t2]);
    }

    /// Splits `t` and its neighbour across the edge opposite `t.v[k]`.
    fn split4(&mut self, t: u32, k: usize, p: u32, stack: &mut Vec<u32>) {
        let tt = self.tris[t as usize];
        let a = tt.v[k];
        let b = tt.v[(k + 1) % 3];
        let c = tt.v[(k + 2) % 3];
        let nb = tt.n[(k + 1) % 3];
        let nc = tt.n[(k + 2) % 3];
        let u = tt.n[k];
        debug_assert!(u != NONE, "points lie strictly inside the enclosing triangle");
        let ut = self.tris[u as usize];
        let j = (0..3).find(|&j| ut.n[j] == t).expect("neighbour link");
        let d = ut.v[j];
        debug_assert_eq!(ut.v[(j + 1) % 3], c);
        let nuc = ut.n[(j + 1) % 3];
        let nub = ut.n[(j + 2) % 3];
        let t1 = self.tris.len() as u32;
        let t3 = t1 + 1;
        self.tris[t as usize] = Tri {
            v: [p, a, b],
            n: [nc, t3, t1],
        };
        self.tris.push(Tri {
            v: [p, c, a],
            n: [nb, t, u],
        });
        self.tris[u as usize] = Tri {
            v: [p, d, c],
            n: [nub, t1, t3],
        };
        self.tris.push(Tri {
            v: [p, b, d],
            n: [nuc, u, t],
        });
        self.set_nbr(nb, t, t1);
        self.set_nbr(nuc, u, t3);
        stack.extend([t, t1, u, t3]);
    }

    /// Restores the Delaunay property around the newly inserted vertex, which sits at
    /// index 0 of every triangle on the stack.
    fn legalize(&mut self, stack: &mut Vec<u32>) {
        while let Some(t) = stack.pop() {
            let tt = self.tris[t as usize];
            let u = tt.n[0];
            if u == NONE {
                continue;
            }
            let ut = self.tris[u as usize];
            let j = (0..3).find(|&j| ut.n[j] == t).expect("neighbour link");
            let q = ut.v[j];
            let [p, b, c] = tt.v;
            if in_circle(self.p(p), self.p(b), self.p(c), self.p(q)) <= 0.0 {
                continue;
            }
            let n_t_b = tt.n[1];
            let n_t_c = tt.n[2];
            let n_u_c = ut.n[(j + 1) % 3];
            let n_u_b = ut.n[(j + 2) % 3];
            self.tris[t as usize] = Tri {
                v: [p, b, q],
                n: [n_u_c, u, n_t_c],
            };
            self.tris[u as usize] = Tri {
                v: [p, q, c],
                n: [n_u_b, n_t_b, t],
            };
            self.set_nbr(n_u_c, u, t);
            self.set_nbr(n_t_b, t, u);
            stack.push(t);
            stack.push(u);
        }
    }

    pub fn is_real(&self, v: u32) -> bool {
        (v as usize) < self.n_real
    }

    /// Triangles whose three vertices are input points.
    pub fn real_triangles(&self) -> impl Iterator<Item = [u32; 3]> + '_ {
        self.tris
            .iter()
            .filter(|t| t.v.iter().all(|&v| self.is_real(v)))
            .map(|t| t.v)
    }

    /// Undirected edges between input points, as sorted adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n_real];
        for t in &self.tris {
            for k in 0..3 {
                let a = t.v[k];
                let b = t.v[(k + 1) % 3];
                if self.is_real(a) && self.is_real(b) {
                    adj[a as usize].push(b);
                    adj[b as usize].push(a);
                }
            }
        }
        for l in adj.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
        adj
    }

    /// Circumcenter of triangle `t`.
    pub fn circumcenter(&self, v: [u32; 3]) -> P2 {
        circumcenter(self.p(v[0]), self.p(v[1]), self.p(v[2]))
    }
}

pub fn circumcenter(a: P2, b: P2, c: P2) -> P2 {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    [a[0] + (cy * b2 - by * c2) / d, a[1] + (bx * c2 - cx * b2) / d]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_points(n: usize, seed: u64) -> Vec<P2> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
    }

    fn check_links(t: &Triangulation) {
        for (i, tri) in t.tris.iter().enumerate() {
            assert!(orient(t.p(tri.v[0]), t.p(tri.v[1]), t.p(tri.v[2])) > 0.0);
            for k in 0..3 {
                let u = tri.n[k];
                if u == NONE {
                    continue;
                }
                let ut = t.tris[u as usize];
                let j = (0..3).find(|&j| ut.n[j] == i as u32).expect("symmetric link");
                let e1 = [tri.v[(k + 1) % 3], tri.v[(k + 2) % 3]];
                let e2 = [ut.v[(j + 2) % 3], ut.v[(j + 1) % 3]];
                assert_eq!(e1, e2);
            }
        }
    }

    #[test]
    fn empty_circumcircles() {
        for seed in 0..5 {
            let pts = random_points(300, seed);
            let t = Triangulation::new(&pts);
            check_links(&t);
            // Euler: a full triangulation of n + 3 points with a triangular hull has
            // 2(n + 3) − 5 triangles.
            assert_eq!(t.tris.len(), 2 * (pts.len() + 3) - 5);
            for v in t.real_triangles() {
                for (i, &p) in pts.iter().enumerate() {
                    if v.contains(&(i as u32)) {
                        continue;
                    }
                    assert!(in_circle(pts[v[0] as usize], pts[v[1] as usize], pts[v[2] as usize], p) <= 0.0);
                }
            }
        }
    }

    #[test]
    fn grid_points_are_cocircular() {
        let mut pts = Vec::new();
        for i in 0..12 {
            for j in 0..12 {
                pts.push([i as f64 / 11.0, j as f64 / 11.0]);
            }
        }
        let t = Triangulation::new(&pts);
        check_links(&t);
        assert_eq!(t.tris.len(), 2 * (pts.len() + 3) - 5);
        for v in t.real_triangles() {
            for &p in &pts {
                assert!(in_circle(pts[v[0] as usize], pts[v[1] as usize], pts[v[2] as usize], p) <= 0.0);
            }
        }
    }

    #[test]
    fn duplicates_merged() {
        let pts = vec![[0.1, 0.1], [0.9, 0.2], [0.5, 0.8], [0.1, 0.1], [0.5, 0.8 + 1e-13]];
        let t = Triangulation::new(&pts);
        assert_eq!(t.duplicates.len(), 2);
        check_links(&t);
        assert_eq!(t.real_triangles().count(), 1);
    }

    #[test]
    fn collinear_points() {
        let pts: Vec<P2> = (0..20).map(|i| [i as f64 / 19.0, 0.5]).collect();
        let t = Triangulation::new(&pts);
        check_links(&t);
        let adj = t.adjacency();
        for i in 1..19 {
            assert!(adj[i].contains(&(i as u32 - 1)) && adj[i].contains(&(i as u32 + 1)));
        }
    }
}
