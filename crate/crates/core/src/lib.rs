//! Uniform-sampling algorithms for affine subspace fitting and
//! (k,j)-projective clustering with outlier trimming.
//!
//! The library fits `k` j-dimensional affine flats to a point set so that the
//! average tau-th power of the point-to-nearest-flat distance is small, using
//! only uniform random sampling: candidate directions come from the mean
//! points of subsets of a sample united with its reflection through a center,
//! and a j-level recursive projection assembles full flats from those
//! directions. A trimmed objective discards a gamma-fraction of the points as
//! outliers; a regular (bounded coefficient-of-variation) mode fits all
//! points. Numeric verifiers for the underlying geometric lemmas and a
//! brute-force oracle for tiny instances live in [`verify`].
//!
//! All code is generic over the scalar type through [`scalar::Scalar`]
//! (`f32` or `f64`); the `*64` aliases at the crate root are the concrete
//! types most callers want.

pub mod cluster;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod linalg;
pub mod regular;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use scalar::Scalar;

/// Concrete `f64` instantiations.
pub type Vector64 = geometry::Vector<f64>;
pub type PointSet64 = geometry::PointSet<f64>;
pub type Flat64 = geometry::Flat<f64>;
pub type Slab64 = geometry::Slab<f64>;
pub type Hyperbox64 = geometry::Hyperbox<f64>;
pub type FitResult64 = fit::FitResult<f64>;
pub type ClusteringResult64 = cluster::ClusteringResult<f64>;

/// Concrete `f32` instantiations.
pub type Vector32 = geometry::Vector<f32>;
pub type PointSet32 = geometry::PointSet<f32>;
pub type Flat32 = geometry::Flat<f32>;
