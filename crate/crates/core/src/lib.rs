//! Computational geometry of singular Minkowski spaces: strictly convex
//! norms with corners, their horofunction boundaries, flag-directed
//! sequences, and the projection from the coarse to the weak ideal
//! boundary.

pub mod error;
pub mod space;
pub mod optim;
pub mod norm;
pub mod gauss;
pub mod horo;
pub mod flags;
pub mod boundary;
pub mod config;
pub mod verify;

pub use error::{Error, Result};
pub use norm::{DistanceFunction, NormFamily, Ray, SingularNorm};
pub use space::{BoundingBox, Point, PointGrid, Vector};
