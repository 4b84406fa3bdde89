//! The surface score `α` and the Voronoi perimeter estimator (planar only).

use super::Context;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Length of the edges of cell `i` shared with cells centred outside `A` (unit scale),
/// or 0 for `x ∉ A`.
pub fn alpha_unscaled(ctx: &Context, i: usize) -> f64 {
    if !ctx.inside[i] {
        return 0.0;
    }
    let d = ctx.voronoi.as_ref().expect("voronoi context");
    d.faces(i)
        .filter(|f| !ctx.inside[f.neighbor as usize])
        .map(|f| f.length())
        .sum()
}

fn check(ctx: &Context, correction: f64) -> Result<()> {
    if !(correction > 0.0 && correction.is_finite()) {
        return Err(Error::invalid(format!("correction must be positive, got {correction}")));
    }
    if ctx.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: ctx.dim(),
        });
    }
    if ctx.voronoi.is_none() && !ctx.points.is_empty() {
        return Err(Error::invalid("context was built without Voronoi cells"));
    }
    Ok(())
}

/// Perimeter of `∂A_λ` inside the square (or on the torus), divided by `correction`.
pub fn surface_estimator(ctx: &Context, correction: f64) -> Result<f64> {
    weighted_surface_integral(ctx, correction, &|_| 1.0)
}

/// `correction^{−1}·λ^{−1/2}·Σ α_λ(x) f(x)`, an estimate of `∫_{∂A} f dH¹`.
pub fn weighted_surface_integral(ctx: &Context, correction: f64, f: &dyn Fn(&Point) -> f64) -> Result<f64> {
    check(ctx, correction)?;
    let mut s = 0.0;
    for (i, p) in ctx.points.points.iter().enumerate() {
        let a = alpha_unscaled(ctx, i);
        if a != 0.0 {
            s += a * f(p);
        }
    }
    Ok(s / correction)
}
