//! Closed forms for the maximal-point score.

use super::{LimitConstant, Method};
use crate::error::{Error, Result};
use crate::geometry::polygon::{self, P2};
use crate::geometry::{GraphSurface, Point};
use crate::sampler::Density;
use statrs::function::gamma::gamma;

/// `E ζ((0, u), H_τ, H)` for the tangent hyperplane of a graph with gradient `grad`
/// (all components negative): `exp(−τ|u|^d (1 + |∇F|²)^{d/2} / (d!·|∏∂_iF|))` below the
/// plane and 0 above it. `u` is the signed distance along the outward normal.
pub fn zeta_expectation(u: f64, grad: &[f64], tau: f64) -> f64 {
    if u > 0.0 {
        return 0.0;
    }
    let d = grad.len() + 1;
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    let g2: f64 = grad.iter().map(|g| g * g).sum();
    let prod: f64 = grad.iter().map(|g| g.abs()).product();
    (-tau * u.abs().powi(d as i32) * (1.0 + g2).powf(d as f64 / 2.0) / (fact * prod)).exp()
}

fn kappa_below(density: &Density, g: &GraphSurface, v: &Point) -> f64 {
    let y = g.point_at(v);
    let n = g.normal_at(v);
    density.kappa(&y.axpy(-1e-9, &n))
}

fn check_gradient(grad: &[f64]) -> Result<()> {
    if grad.iter().any(|&c| c >= 0.0) {
        return Err(Error::HypothesisViolation(format!(
            "graph partial derivatives must be negative, found {grad:?}"
        )));
    }
    Ok(())
}

/// `(d!)^{1/d} d^{−1} Γ(1/d) ∫_D |∏ ∂_iF|^{1/d} κ(v, F(v))^{(d−1)/d} dv` by composite
/// Gauss–Legendre quadrature with `panels` panels per axis.
pub fn mu_zeta_closed_form(g: &GraphSurface, density: &Density, panels: usize) -> Result<LimitConstant> {
    let d = g.dim();
    let df = d as f64;
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    let mut integral = 0.0;
    for (v, w) in g.domain.quadrature(panels, g.scale) {
        let grad = g.grad(v.coords());
        let grad = &grad[..d - 1];
        check_gradient(grad)?;
        let prod: f64 = grad.iter().map(|c| c.abs()).product();
        integral += w * prod.powf(1.0 / df) * kappa_below(density, g, &v).powf((df - 1.0) / df);
    }
    let c = fact.powf(1.0 / df) / df * gamma(1.0 / df);
    Ok(LimitConstant::closed_form(
        format!("mu(zeta,graph,d={d})"),
        c * integral,
        Method::Quadrature,
    ))
}

/// The planar specialization `(π/2)^{1/2} ∫ |F′(v)|^{1/2} κ(v, F(v))^{1/2} dv`.
pub fn mu_zeta_closed_form_2d(g: &GraphSurface, density: &Density, panels: usize) -> Result<LimitConstant> {
    if g.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: g.dim(),
        });
    }
    let mut integral = 0.0;
    for (v, w) in g.domain.quadrature(panels, g.scale) {
        let f1 = g.grad(v.coords())[0];
        check_gradient(&[f1])?;
        integral += w * f1.abs().sqrt() * kappa_below(density, g, &v).sqrt();
    }
    Ok(LimitConstant::closed_form(
        "mu(zeta,graph,d=2)",
        (std::f64::consts::PI / 2.0).sqrt() * integral,
        Method::Quadrature,
    ))
}

/// The region `(x + [0,∞)²) ∩ {w·n ≤ 0}` as a polygon (`n` with positive components).
fn upper_triangle(x: P2, n: P2) -> Vec<P2> {
    let depth = -(x[0] * n[0] + x[1] * n[1]);
    if depth < 0.0 {
        return vec![];
    }
    vec![x, [x[0] + depth / n[0], x[1]], [x[0], x[1] + depth / n[1]]]
}

/// Exact pair correlation `c^ζ(x, x′; H_τ, {w·n = 0})` in the plane.
pub fn zeta_pair_correlation_2d(x: P2, xp: P2, n: P2, tau: f64) -> f64 {
    let t = upper_triangle(x, n);
    let tp = upper_triangle(xp, n);
    if t.is_empty() || tp.is_empty() {
        return 0.0;
    }
    let (a, ap) = (polygon::area(&t), polygon::area(&tp));
    let dominated = |p: P2, q: P2| q[0] >= p[0] && q[1] >= p[1];
    let joint = if dominated(x, xp) || dominated(xp, x) {
        0.0
    } else {
        let overlap = polygon::area(&polygon::clip_by_convex(&t, &tp));
        (-tau * (a + ap - overlap)).exp()
    };
    joint - (-tau * (a + ap)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, GraphFn};
    use crate::sampler::Density;
    use std::sync::Arc;

    fn triangle() -> (GraphSurface, Density) {
        let g = GraphSurface::new(GraphFn::Linear(vec![1.0, -1.0]), Domain::Interval { lo: 0.0, hi: 1.0 }).unwrap();
        let region = Arc::new(crate::catalog::triangle_region());
        (g, Density::indicator(region, 2.0).unwrap())
    }

    #[test]
    fn triangle_gives_root_pi() {
        let (g, k) = triangle();
        let a = mu_zeta_closed_form(&g, &k, 64).unwrap().value;
        let b = mu_zeta_closed_form_2d(&g, &k, 64).unwrap().value;
        let root_pi = std::f64::consts::PI.sqrt();
        assert!((a - root_pi).abs() < 1e-12, "{a}");
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn curved_graph_forms_agree_and_converge() {
        let g = GraphSurface::new(
            GraphFn::Quadratic(vec![0.9, -0.2, -0.5]),
            Domain::Interval { lo: 0.0, hi: 1.0 },
        )
        .unwrap();
        let k = Density::uniform(2);
        let a = mu_zeta_closed_form(&g, &k, 32).unwrap().value;
        let b = mu_zeta_closed_form_2d(&g, &k, 32).unwrap().value;
        let a2 = mu_zeta_closed_form(&g, &k, 64).unwrap().value;
        assert!((a - b).abs() < 1e-12);
        assert!((a - a2).abs() < 1e-8);
        // Independent oracle: adaptive Simpson of √(π/2)·√|F'| with F' = −0.2 − v.
        let f = |v: f64| (0.2 + v).sqrt();
        let n = 20000;
        let h = 1.0 / n as f64;
        let simpson: f64 = (0..n)
            .map(|i| {
                let a = i as f64 * h;
                h / 6.0 * (f(a) + 4.0 * f(a + h / 2.0) + f(a + h))
            })
            .sum();
        assert!((a - (std::f64::consts::PI / 2.0).sqrt() * simpson).abs() < 1e-9);
    }

    #[test]
    fn simplex_gives_gamma_third() {
        let g = GraphSurface::new(GraphFn::Linear(vec![1.0, -1.0, -1.0]), Domain::Simplex).unwrap();
        let region = Arc::new(crate::geometry::Region::under_graph(g.clone()).unwrap());
        let k = Density::indicator(region, 6.0).unwrap();
        let v = mu_zeta_closed_form(&g, &k, 16).unwrap().value;
        assert!((v - gamma(1.0 / 3.0)).abs() < 1e-10, "{v}");
    }

    #[test]
    fn increasing_graph_is_rejected() {
        let g = GraphSurface::new(GraphFn::Linear(vec![0.2, 0.5]), Domain::Interval { lo: 0.0, hi: 1.0 }).unwrap();
        assert!(matches!(
            mu_zeta_closed_form(&g, &Density::uniform(2), 8),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn expectation_matches_triangle_area() {
        // Slope −1: the empty region is a right triangle with legs √2·|u|.
        let u: f64 = -0.7;
        let e = zeta_expectation(u, &[-1.0], 2.0);
        assert!((e - (-2.0 * u * u).exp()).abs() < 1e-15);
        assert_eq!(zeta_expectation(0.1, &[-1.0], 2.0), 0.0);
    }

    #[test]
    fn disjoint_cones_are_uncorrelated() {
        let n = [std::f64::consts::FRAC_1_SQRT_2; 2];
        assert!(zeta_pair_correlation_2d([-3.0, 0.2], [0.2, -3.0], n, 1.0).abs() < 1e-15);
        // x′ inside x's empty region forces ζ(x) = 0.
        let c = zeta_pair_correlation_2d([-0.5, -0.5], [-0.3, -0.4], n, 1.0);
        assert!(c < 0.0);
    }
}
