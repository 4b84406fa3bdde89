//! Maximal points for the orthant cone `K = [0,∞)^d` and the score `ζ`.
//!
//! A point is maximal when no other point is coordinatewise `≥` it. Exact duplicates
//! dominate each other, so neither copy is maximal.

use crate::error::{Error, Result};
use crate::geometry::Point;
use ordered_float::OrderedFloat;
use std::cmp::Ordering;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct MaximalLayer {
    /// Sorted indices of the maximal points.
    pub indices: Vec<usize>,
    /// Number of input points having an exact duplicate.
    pub duplicates: usize,
}

impl MaximalLayer {
    /// `M_K`.
    pub fn count(&self) -> usize {
        self.indices.len()
    }
}

fn dominates(y: &Point, x: &Point) -> bool {
    (0..x.dim()).all(|k| y[k] >= x[k])
}

fn lex_desc(a: &Point, b: &Point) -> Ordering {
    b.lex_cmp(a)
}

/// Maximal points of `points` (all of one dimension `d ≥ 1`).
pub fn maximal_layer(points: &[Point]) -> Result<MaximalLayer> {
    let Some(first) = points.first() else {
        return Ok(MaximalLayer {
            indices: vec![],
            duplicates: 0,
        });
    };
    let d = first.dim();
    if points.iter().any(|p| p.dim() != d) {
        return Err(Error::invalid("points of mixed dimension"));
    }
    if points.iter().any(|p| p.coords().iter().any(|c| !c.is_finite())) {
        return Err(Error::invalid("points must be finite"));
    }
    // Collapse exact duplicates; `reps` holds (representative, multiplicity).
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lex_desc(&points[a], &points[b]).then(a.cmp(&b)));
    let mut reps: Vec<(usize, usize)> = Vec::with_capacity(order.len());
    for &i in &order {
        match reps.last_mut() {
            Some((r, m)) if points[*r] == points[i] => *m += 1,
            _ => reps.push((i, 1)),
        }
    }
    let duplicates = reps.iter().filter(|r| r.1 > 1).map(|r| r.1).sum();
    let unique: Vec<usize> = reps.iter().map(|r| r.0).collect();
    let flags = match d {
        1 => {
            let mut f = vec![false; unique.len()];
            f[0] = true;
            f
        }
        2 => sweep_2d(points, &unique),
        3 => sweep_3d(points, &unique),
        _ => pruned(points, &unique),
    };
    let mut indices: Vec<usize> = reps
        .iter()
        .zip(&flags)
        .filter(|(r, &f)| f && r.1 == 1)
        .map(|(r, _)| r.0)
        .collect();
    indices.sort_unstable();
    Ok(MaximalLayer {
        indices,
        duplicates,
    })
}

/// Distinct points in lexicographically decreasing order: maximal iff `y` beats every
/// earlier `y`.
fn sweep_2d(points: &[Point], unique: &[usize]) -> Vec<bool> {
    let mut best = f64::NEG_INFINITY;
    unique
        .iter()
        .map(|&i| {
            let y = points[i][1];
            let m = y > best;
            best = best.max(y);
            m
        })
        .collect()
}

/// Sweep on the last coordinate with a staircase of `(x₁, x₂)` maxima: keys increase and
/// values strictly decrease.
fn sweep_3d(points: &[Point], unique: &[usize]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..unique.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (&points[unique[a]], &points[unique[b]]);
        q[2].total_cmp(&p[2]).then(lex_desc(p, q))
    });
    let mut stair: BTreeMap<OrderedFloat<f64>, f64> = BTreeMap::new();
    let mut flags = vec![false; unique.len()];
    for k in order {
        let p = &points[unique[k]];
        let (a, b) = (p[0], p[1]);
        let dominated = stair
            .range(OrderedFloat(a)..)
            .next()
            .is_some_and(|(_, &v)| v >= b);
        if dominated {
            continue;
        }
        flags[k] = true;
        let stale: Vec<OrderedFloat<f64>> = stair
            .range(..=OrderedFloat(a))
            .rev()
            .take_while(|(_, &v)| v <= b)
            .map(|(&key, _)| key)
            .collect();
        for key in stale {
            stair.remove(&key);
        }
        stair.insert(OrderedFloat(a), b);
    }
    flags
}

/// Lexicographically decreasing scan against the maxima found so far (any `d`).
fn pruned(points: &[Point], unique: &[usize]) -> Vec<bool> {
    let mut maxima: Vec<usize> = Vec::new();
    unique
        .iter()
        .map(|&i| {
            let m = !maxima.iter().any(|&j| dominates(&points[j], &points[i]));
            if m {
                maxima.push(i);
            }
            m
        })
        .collect()
}

/// Maximal points by the general-dimension scan, for cross-checks.
pub fn pairwise_maximal(points: &[Point]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lex_desc(&points[a], &points[b]));
    let flags = pruned(points, &order);
    let mut out: Vec<usize> = order.iter().zip(flags).filter(|(_, f)| *f).map(|(&i, _)| i).collect();
    out.sort_unstable();
    out
}

/// Quadratic dominance oracle.
pub fn maximal_layer_brute(points: &[Point]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !(0..points.len()).any(|j| j != i && dominates(&points[j], &points[i])))
        .collect()
}

/// Uniform bucket grid over `[0,1]^d` holding a subset of the points.
pub(crate) struct Buckets<'a> {
    points: &'a [Point],
    g: usize,
    d: usize,
    cells: Vec<Vec<u32>>,
}

impl<'a> Buckets<'a> {
    pub(crate) fn new(points: &'a [Point], members: impl Iterator<Item = usize>) -> Buckets<'a> {
        let members: Vec<usize> = members.collect();
        let d = points.first().map_or(2, |p| p.dim());
        let g = ((members.len() as f64).powf(1.0 / d as f64) / 2.0).ceil().max(1.0) as usize;
        let mut cells = vec![Vec::new(); g.pow(d as u32)];
        let mut b = Buckets {
            points,
            g,
            d,
            cells: Vec::new(),
        };
        for i in members {
            cells[b.flat(&b.coord(&points[i]))].push(i as u32);
        }
        b.cells = cells;
        b
    }

    fn coord(&self, p: &Point) -> Vec<usize> {
        (0..self.d)
            .map(|k| ((p[k] * self.g as f64).floor().max(0.0) as usize).min(self.g - 1))
            .collect()
    }

    fn flat(&self, c: &[usize]) -> usize {
        c.iter().rev().fold(0, |acc, &v| acc * self.g + v)
    }

    /// Calls `f` on every bucket whose index is `≥ from` in all coordinates, until it
    /// returns `false`.
    fn upper_buckets(&self, from: &[usize], mut f: impl FnMut(&[usize], &[u32]) -> bool) {
        let mut c = from.to_vec();
        loop {
            if !f(&c, &self.cells[self.flat(&c)]) {
                return;
            }
            let mut k = 0;
            loop {
                if k == self.d {
                    return;
                }
                c[k] += 1;
                if c[k] < self.g {
                    break;
                }
                c[k] = from[k];
                k += 1;
            }
        }
    }

    /// Whether some other member dominates point `i`.
    pub(crate) fn dominated(&self, i: usize) -> bool {
        self.dominated_by(&self.points[i], Some(i), &|_| true)
    }

    /// Whether a member accepted by `keep` (other than `skip`) dominates `x`.
    pub(crate) fn dominated_by(&self, x: &Point, skip: Option<usize>, keep: &dyn Fn(&Point) -> bool) -> bool {
        let mut found = false;
        self.upper_buckets(&self.coord(x), |_, members| {
            found = members.iter().any(|&j| {
                let y = &self.points[j as usize];
                Some(j as usize) != skip && dominates(y, x) && keep(y)
            });
            !found
        });
        found
    }

    /// Distance from point `i` to its nearest dominating member.
    pub(crate) fn nearest_dominator(&self, i: usize) -> Option<f64> {
        let x = &self.points[i];
        let h = 1.0 / self.g as f64;
        let from = self.coord(x);
        let mut best = f64::INFINITY;
        self.upper_buckets(&from, |c, members| {
            // Lower corner distance bounds every point in the bucket.
            let lb2: f64 = (0..self.d)
                .map(|k| ((c[k] as f64 * h) - x[k]).max(0.0).powi(2))
                .sum();
            if lb2 < best * best {
                for &j in members {
                    let y = &self.points[j as usize];
                    if j as usize != i && dominates(y, x) {
                        best = best.min(y.dist(x));
                    }
                }
            }
            true
        });
        best.is_finite().then_some(best)
    }
}

/// `ζ` flags by bucketed dominance queries, independent of [`maximal_layer`].
pub fn zeta_direct(points: &[Point], inside: &[bool]) -> Vec<bool> {
    let b = Buckets::new(points, (0..points.len()).filter(|&i| inside[i]));
    (0..points.len())
        .map(|i| inside[i] && !b.dominated(i))
        .collect()
}
