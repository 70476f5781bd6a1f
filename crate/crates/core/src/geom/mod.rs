//! Rigid and similarity transforms, point clouds, meshes, exact nearest-neighbor
//! search and the closed-form similarity solver.

pub mod cloud;
pub mod io;
pub mod kdtree;
pub mod mesh;
pub mod pose;
pub mod similarity;
pub mod umeyama;

pub use cloud::PointCloud;
pub use kdtree::{brute_force_nearest, nearest_neighbor, KdTree};
pub use mesh::TriangleMesh;
pub use pose::{rotation_geodesic, tilt_angle, yaw, Pose, PoseRecord, Vec3};
pub use similarity::SimilarityTransform;
pub use umeyama::{rms_residual, umeyama_similarity};
