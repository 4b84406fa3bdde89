//! Built-in scenes addressed by name, e.g. `disk:0.25` or `triangle-pareto`.

use crate::error::{Error, Result};
use crate::geometry::scene::{DensitySpec, RegionSpec, Scene, SceneSpec};
use crate::geometry::{Domain, GraphFn, Region};

pub const SCENES: &str =
    "disk[:r], square-half, triangle, triangle-pareto, simplex-pareto, sine-boundary, sphere[:r], cube[:d]";

fn arg(name: &str, a: Option<&str>, default: f64) -> Result<f64> {
    match a {
        None => Ok(default),
        Some(s) => s
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("bad parameter {s:?} for scene {name}"))),
    }
}

/// The scene description behind a catalog name.
pub fn scene_spec(name: &str) -> Result<SceneSpec> {
    let (head, a) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let (region, density) = match head {
        "disk" => {
            let r = arg(head, a, 0.25)?;
            (
                RegionSpec::Ball {
                    center: vec![0.5, 0.5],
                    radius: r,
                },
                DensitySpec::Uniform,
            )
        }
        "sphere" => {
            let r = arg(head, a, 0.3)?;
            (
                RegionSpec::Ball {
                    center: vec![0.5; 3],
                    radius: r,
                },
                DensitySpec::Uniform,
            )
        }
        "square-half" => (
            RegionSpec::HalfSpace {
                point: vec![0.5, 0.5],
                normal: vec![0.0, -1.0],
            },
            DensitySpec::Uniform,
        ),
        "triangle" | "triangle-pareto" => (
            RegionSpec::UnderGraph {
                function: GraphFn::Linear(vec![1.0, -1.0]),
                domain: Domain::Interval { lo: 0.0, hi: 1.0 },
            },
            if head == "triangle" {
                DensitySpec::Uniform
            } else {
                DensitySpec::Indicator { value: 2.0 }
            },
        ),
        "simplex-pareto" => (
            RegionSpec::UnderGraph {
                function: GraphFn::Linear(vec![1.0, -1.0, -1.0]),
                domain: Domain::Simplex,
            },
            DensitySpec::Indicator { value: 6.0 },
        ),
        "sine-boundary" => (
            RegionSpec::UnderGraph {
                function: GraphFn::Sine(vec![0.5, 0.1, 1.0, 0.0]),
                domain: Domain::Interval { lo: 0.0, hi: 1.0 },
            },
            DensitySpec::Uniform,
        ),
        "cube" => {
            let d = arg(head, a, 2.0)?;
            (RegionSpec::Cube { dim: d as usize }, DensitySpec::Uniform)
        }
        _ => {
            return Err(Error::UnknownName {
                kind: "scene",
                name: name.into(),
                available: SCENES.into(),
            })
        }
    };
    if a.is_some() && !matches!(head, "disk" | "sphere" | "cube") {
        return Err(Error::invalid(format!("scene {head} takes no parameter")));
    }
    Ok(SceneSpec {
        name: Some(name.into()),
        region,
        density,
    })
}

/// Builds a catalog scene, running the geometry self-checks.
pub fn scene(name: &str) -> Result<Scene> {
    scene_spec(name)?.build()
}

/// `{(x, y) : x + y ≤ 1}` in the unit square.
pub fn triangle_region() -> Region {
    scene_spec("triangle").and_then(|s| s.region.build()).expect("valid built-in")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_scene_loads() {
        for name in [
            "disk",
            "disk:0.3",
            "square-half",
            "triangle",
            "triangle-pareto",
            "simplex-pareto",
            "sine-boundary",
            "sphere:0.2",
            "cube",
            "cube:3",
        ] {
            let s = scene(name).unwrap();
            assert_eq!(s.name, name);
        }
        let s = scene("triangle-pareto").unwrap();
        assert!((s.density.integral().unwrap() - 1.0).abs() < 1e-9);
        assert!(s.density.normalized);
    }

    #[test]
    fn unknown_names_list_options() {
        match scene("moon") {
            Err(Error::UnknownName { available, .. }) => assert!(available.contains("triangle-pareto")),
            other => panic!("{other:?}"),
        }
        assert!(scene("disk:0.7").is_err());
        assert!(scene("square-half:2").is_err());
    }
}
