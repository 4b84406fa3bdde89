//! JSON scene descriptions: a region (with its boundary surface) and a density.
//!
//! ```json
//! { "region": { "kind": "under_graph",
//!               "function": { "name": "linear", "coefficients": [1.0, -1.0] },
//!               "domain": { "kind": "interval", "lo": 0.0, "hi": 1.0 } },
//!   "density": { "kind": "indicator", "value": 2.0 } }
//! ```

use super::surface::Ellipsoid;
use super::{Domain, GraphFn, GraphSurface, Hyperplane, ImplicitSurface, Point, Region};
use crate::error::{Error, Result};
use crate::sampler::Density;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Cube { dim: usize },
    Ball { center: Vec<f64>, radius: f64 },
    HalfSpace { point: Vec<f64>, normal: Vec<f64> },
    UnderGraph { function: GraphFn, domain: Domain },
    Polygon { vertices: Vec<[f64; 2]> },
    Ellipsoid {
        center: Vec<f64>,
        semi_axes: Vec<f64>,
        #[serde(default)]
        volume: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Uniform,
    Constant { value: f64 },
    /// `value · 1_A` for the scene's region.
    Indicator { value: f64 },
    Affine { c0: f64, grad: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub region: RegionSpec,
    #[serde(default = "uniform")]
    pub density: DensitySpec,
}

fn uniform() -> DensitySpec {
    DensitySpec::Uniform
}

/// A region, its boundary and a density, ready for sampling and scoring.
#[derive(Clone, Debug)]
pub struct Scene {
    pub name: String,
    pub region: Arc<Region>,
    pub density: Density,
}

impl Scene {
    pub fn dim(&self) -> usize {
        self.region.dim
    }
}

impl RegionSpec {
    pub fn build(&self) -> Result<Region> {
        match self {
            RegionSpec::Cube { dim } => {
                if !(2..=3).contains(dim) {
                    return Err(Error::invalid("cube dimension must be 2 or 3"));
                }
                Ok(Region::cube(*dim))
            }
            RegionSpec::Ball { center, radius } => Region::ball(Point::new(center)?, *radius),
            RegionSpec::HalfSpace { point, normal } => {
                Region::half_space(Hyperplane::new(Point::new(point)?, Point::new(normal)?)?)
            }
            RegionSpec::UnderGraph { function, domain } => {
                Region::under_graph(GraphSurface::new(function.clone(), domain.clone())?)
            }
            RegionSpec::Polygon { vertices } => {
                Region::polygon(vertices.iter().map(|v| Point::xy(v[0], v[1])).collect())
            }
            RegionSpec::Ellipsoid {
                center,
                semi_axes,
                volume,
            } => {
                let center = Point::new(center)?;
                let semi_axes = Point::new(semi_axes)?;
                if semi_axes.coords().iter().any(|a| !(*a > 0.0)) {
                    return Err(Error::invalid("ellipsoid semi-axes must be positive"));
                }
                let s = ImplicitSurface::new(Arc::new(Ellipsoid { center, semi_axes }), 0.0, 1.0)?;
                Ok(Region::implicit(s, center, *volume))
            }
        }
    }
}

impl SceneSpec {
    pub fn build(&self) -> Result<Scene> {
        let region = Arc::new(self.region.build()?);
        let dim = region.dim;
        let density = match &self.density {
            DensitySpec::Uniform => Density::uniform(dim),
            DensitySpec::Constant { value } => Density::constant(dim, *value)?,
            DensitySpec::Indicator { value } => Density::indicator(region.clone(), *value)?,
            DensitySpec::Affine { c0, grad } => Density::affine(*c0, Point::new(grad)?)?,
        };
        if density.dim != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: density.dim,
            });
        }
        region.self_check(if dim == 2 { 24 } else { 8 }, 1e-9)?;
        Ok(Scene {
            name: self.name.clone().unwrap_or_else(|| "custom".into()),
            region,
            density,
        })
    }

    pub fn from_json(s: &str) -> Result<SceneSpec> {
        Ok(serde_json::from_str(s)?)
    }
}
