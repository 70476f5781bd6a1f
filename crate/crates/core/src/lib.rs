//! Category-level manipulation from a single demonstration, in simulation.
//!
//! The crate canonicalizes object instances into normalized per-axis coordinates,
//! anchors demonstrated trajectories on receptacle-relative attention, reprojects
//! them onto novel instances and follows them in closed loop against a simulated
//! plant.

pub mod attention;
pub mod catbc;
pub mod correspond;
pub mod demo;
pub mod error;
pub mod geom;
pub mod nunocs;
pub mod rng;
pub mod shapes;
pub mod simgen;
pub mod tasks;

pub use error::{Error, Result};
pub use geom::{PointCloud, Pose, SimilarityTransform, TriangleMesh, Vec3};
