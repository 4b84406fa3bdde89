//! Limit constants: half-space Monte Carlo for the universal constants, their surface
//! integrals, and closed forms for maximal points.

mod closed;
mod halfspace;
mod surface;
mod universal;

pub use closed::{
    mu_zeta_closed_form, mu_zeta_closed_form_2d, zeta_expectation, zeta_pair_correlation_2d,
};
pub use halfspace::{local_cell, Explicit, HalfSpaceScore, LatticePoisson, PointSource, Spliced};
pub use surface::{mu_surface, sigma2_surface, SurfaceConfig};
pub use universal::{expected_score, mu_universal, nu_universal, HalfSpaceConfig};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    HalfSpaceMc,
}

/// How far the integrals were truncated and what that cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    /// Outer truncation in the normal coordinate(s).
    pub u_max: f64,
    /// Outer truncation in the tangential coordinate (pair integrals only).
    #[serde(default)]
    pub z_max: Option<f64>,
    /// Fitted integrand mass beyond `u_max`.
    pub tail_mass: f64,
    /// The same estimate at half the truncation.
    pub inner_value: f64,
    pub inner_std_error: f64,
    /// Standard error of `value − inner_value`.
    pub difference_std_error: f64,
    /// Largest search radius any score evaluation needed.
    pub max_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitConstant {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
    pub method: Method,
    #[serde(default)]
    pub truncation_report: Option<TruncationReport>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count (replicates or pairs).
    #[serde(default)]
    pub samples: usize,
}

impl LimitConstant {
    pub fn closed_form(name: impl Into<String>, value: f64, method: Method) -> LimitConstant {
        LimitConstant {
            name: name.into(),
            value,
            std_error: 0.0,
            method,
            truncation_report: None,
            seed: None,
            samples: 0,
        }
    }

    /// Whether `value ± k·std_error` and `other ± k·se` overlap.
    pub fn agrees_with(&self, value: f64, std_error: f64, k: f64) -> bool {
        (self.value - value).abs() <= k * (self.std_error.powi(2) + std_error.powi(2)).sqrt()
    }
}

/// Environment variable overriding the fixtures file.
pub const FIXTURES_ENV: &str = "SURFSCALE_FIXTURES";

/// The frozen constants file: `$SURFSCALE_FIXTURES`, else the copy shipped with the crate.
pub fn fixtures_path() -> PathBuf {
    match std::env::var_os(FIXTURES_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/constants.json"),
    }
}

pub fn load_fixtures_from(path: &Path) -> Result<Vec<LimitConstant>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_fixtures() -> Result<Vec<LimitConstant>> {
    load_fixtures_from(&fixtures_path())
}

/// A named constant from the fixtures file.
pub fn fixture(name: &str) -> Result<LimitConstant> {
    let all = load_fixtures()?;
    let available = all.iter().map(|c| c.name.clone()).collect::<Vec<_>>().join(", ");
    all.into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::UnknownName {
            kind: "fixture constant",
            name: name.into(),
            available,
        })
}

pub fn write_fixtures(path: &Path, constants: &[LimitConstant]) -> Result<()> {
    let mut text = serde_json::to_string_pretty(constants)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// The closed-form `μ(ζ, ∂A)` of a catalog scene whose boundary is a graph.
pub fn mu_zeta_scene(scene: &str, panels: usize) -> Result<LimitConstant> {
    let s = crate::catalog::scene(scene)?;
    match &s.region.boundary.kind {
        crate::geometry::SurfaceKind::Graph(g) => {
            let mut c = mu_zeta_closed_form(g, &s.density, panels)?;
            c.name = format!("mu(zeta,{scene})");
            Ok(c)
        }
        _ => Err(Error::HypothesisViolation(format!("scene {scene} has no graph boundary"))),
    }
}

/// Every constant in the shipped fixtures file, recomputed from `seed`.
pub fn standard_fixtures(seed: u64, workers: crate::exec::Workers) -> Result<Vec<LimitConstant>> {
    let hs = HalfSpaceConfig {
        seed,
        ..HalfSpaceConfig::default()
    };
    let alpha = HalfSpaceScore::Alpha;
    let alpha2 = HalfSpaceScore::Squared {
        inner: Box::new(HalfSpaceScore::Alpha),
    };
    let mut out = vec![mu_zeta_scene("triangle-pareto", 4096)?, mu_zeta_scene("simplex-pareto", 256)?];
    for score in [&alpha, &alpha2, &HalfSpaceScore::NuMinus, &HalfSpaceScore::NuPlus] {
        out.push(mu_universal(score, 2, &hs, workers)?);
    }
    let wide = HalfSpaceConfig {
        pairs: 1_000_000,
        ..hs.clone()
    };
    for score in [&alpha, &HalfSpaceScore::NuMinus, &HalfSpaceScore::NuPlus] {
        out.push(nu_universal(score, 2, &wide, workers)?);
    }
    let tri = crate::catalog::scene("triangle-pareto")?;
    let sc = SurfaceConfig {
        half_space: HalfSpaceConfig {
            pairs: 8_000_000,
            ..hs.clone()
        },
        resolution: 64,
    };
    let mut s = sigma2_surface(&HalfSpaceScore::Zeta, &tri.region, &tri.density, &sc, workers)?;
    s.name = "sigma2(zeta,triangle-pareto)".into();
    out.push(s);
    let mut m = mu_surface(&HalfSpaceScore::Zeta, &tri.region, &tri.density, &sc, workers)?;
    m.name = "mu_mc(zeta,triangle-pareto)".into();
    out.push(m);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shipped() -> Vec<LimitConstant> {
        load_fixtures_from(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/constants.json")).unwrap()
    }

    #[test]
    fn shipped_fixtures_are_consistent() {
        for c in shipped() {
            match c.method {
                Method::HalfSpaceMc => {
                    assert!(c.std_error > 0.0 || c.value == 0.0, "{}", c.name);
                    let t = c.truncation_report.as_ref().unwrap();
                    assert!((c.value - t.inner_value).abs() <= 2.0 * t.difference_std_error, "{}", c.name);
                }
                _ => assert_eq!(c.std_error, 0.0),
            }
        }
    }

    #[test]
    fn perimeter_bias_matches_known_ratio() {
        // Known limit of E Per(A_λ) / Per(A) for planar Poisson–Voronoi approximations.
        let c = shipped().into_iter().find(|c| c.name == "mu(alpha,1)").unwrap();
        assert!(c.agrees_with(4.0 / std::f64::consts::PI, 0.0, 4.0), "{} ± {}", c.value, c.std_error);
    }

    #[test]
    fn closed_and_simulated_zeta_means_agree() {
        let all = shipped();
        let get = |n: &str| all.iter().find(|c| c.name == n).unwrap().clone();
        let exact = get("mu(zeta,triangle-pareto)");
        assert!((exact.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!(get("mu_mc(zeta,triangle-pareto)").agrees_with(exact.value, 0.0, 3.0));
        assert!(get("sigma2(zeta,triangle-pareto)").value > 0.0);
    }

    #[test]
    fn environment_overrides_path() {
        let dir = std::env::temp_dir().join(format!("surfscale-fx-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("c.json");
        write_fixtures(&p, &[LimitConstant::closed_form("k", 1.5, Method::ClosedForm)]).unwrap();
        std::env::set_var(FIXTURES_ENV, &p);
        let got = fixture("k");
        let missing = fixture("absent");
        std::env::remove_var(FIXTURES_ENV);
        assert_eq!(got.unwrap().value, 1.5);
        assert!(matches!(missing, Err(Error::UnknownName { .. })));
    }
}
