//! Boundary-aware geodesic consistency for partial surfaces.
//!
//! Given a surface sampled as a mesh or point cloud, `whkit` computes graph
//! geodesics, decides which pairs of points are guaranteed to keep their
//! geodesic distance when part of the surface is missing (the wormhole
//! criterion), and uses those masks in stress-majorization MDS and in
//! partial-to-full matching losses.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The root
//! re-exports `f64` aliases for the common types, with `*32` variants for
//! single precision.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod consistency;
pub mod criterion;
pub mod embedding;
mod error;
pub mod geodesics;
pub mod geometry;
pub mod matching;
mod scalar;
pub mod whm;

pub use error::{Error, Result};
pub use scalar::Real;

pub type TriangleMesh = geometry::TriangleMesh<f64>;
pub type PointCloud = geometry::PointCloud<f64>;
pub type SurfaceGraph = geometry::SurfaceGraph<f64>;
pub type VertexAreas = geometry::VertexAreas<f64>;
pub type DistanceMatrix = geodesics::DistanceMatrix<f64>;
pub type DistanceToBoundary = geodesics::DistanceToBoundary<f64>;
pub type MetricScale = criterion::MetricScale<f64>;
pub type MaskSet = criterion::MaskSet<f64>;
pub type Embedding = embedding::Embedding<f64>;
pub type Correspondence = matching::Correspondence<f64>;
pub type SpectralBasis = matching::SpectralBasis<f64>;
pub type FunctionalMap = matching::FunctionalMap<f64>;

pub type TriangleMesh32 = geometry::TriangleMesh<f32>;
pub type PointCloud32 = geometry::PointCloud<f32>;
pub type SurfaceGraph32 = geometry::SurfaceGraph<f32>;
pub type VertexAreas32 = geometry::VertexAreas<f32>;
pub type DistanceMatrix32 = geodesics::DistanceMatrix<f32>;
pub type DistanceToBoundary32 = geodesics::DistanceToBoundary<f32>;
pub type MetricScale32 = criterion::MetricScale<f32>;
pub type MaskSet32 = criterion::MaskSet<f32>;
pub type Embedding32 = embedding::Embedding<f32>;
pub type Correspondence32 = matching::Correspondence<f32>;
pub type SpectralBasis32 = matching::SpectralBasis<f32>;
pub type FunctionalMap32 = matching::FunctionalMap<f32>;
