//! Surface-order statistics of Poisson point processes.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] points, regions, surfaces and the closest-point chart `x = y + t·u_y`;
//! * [`sampler`] Poisson, binomial and homogeneous point processes with seeded streams;
//! * [`voronoi`] exact 2D Delaunay/Voronoi complex, kd-tree and Monte Carlo cell measures;
//! * [`scores`] the volume, surface, maximal-point and navigation scores and the generic
//!   statistic `H = Σ ξ_λ(x, P_λ, M)`;
//! * [`constants`] half-space Monte Carlo limit constants and closed forms;
//! * [`harness`] replicated experiments, scaling regressions and normality checks.
//!
//! Parallelism is confined to [`exec`]; with the `parallel` feature disabled every
//! data-parallel loop runs sequentially and produces bit-identical results.

pub mod catalog;
pub mod constants;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod harness;
pub mod rng;
pub mod sampler;
pub mod scores;
pub mod stats;
pub mod svg;
pub mod voronoi;

pub use error::{Error, Result};
pub use geometry::{Point, Region, Surface, SurfaceParamPoint};
pub use sampler::{Density, PointSet, Provenance};
