use nalgebra::UnitQuaternion;

use super::NunocsCloud;
use crate::error::Result;
use crate::geom::umeyama::{rms_residual, umeyama_points};
use crate::geom::{PointCloud, Pose, SimilarityTransform, Vec3};

/// Rotation, translation and per-axis scale relating normalized coordinates to an
/// observation: `p = s R (scales ∘ c) + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryPose9D {
    pub similarity: SimilarityTransform,
    pub nonuniform_scales: Vec3,
    pub rms_residual: f64,
}

impl CategoryPose9D {
    pub fn apply(&self, c: &Vec3) -> Vec3 {
        self.similarity.apply(&c.component_mul(&self.nonuniform_scales))
    }

    pub fn rotation(&self) -> UnitQuaternion<f64> {
        self.similarity.rotation
    }

    /// Metric size of the normalized cube for this instance.
    pub fn extents(&self) -> Vec3 {
        self.nonuniform_scales * self.similarity.scale
    }

    /// Rigid pose of the object frame: origin at the cube center, axes canonical.
    pub fn object_pose(&self) -> Pose {
        Pose::new(self.similarity.rotation, self.apply(&Vec3::new(0.5, 0.5, 0.5)))
    }

    /// Position of a normalized coordinate in the object frame.
    pub fn to_object_frame(&self, c: &Vec3) -> Vec3 {
        (c - Vec3::new(0.5, 0.5, 0.5)).component_mul(&self.extents())
    }
}

/// Applies the predicted scales to the normalized coordinates, then solves the
/// uniform similarity onto the observed points in closed form.
pub fn solve_pose9d(predicted: &NunocsCloud, observed: &PointCloud) -> Result<CategoryPose9D> {
    let scaled = predicted.scaled_coords();
    let similarity = umeyama_points(&scaled, &observed.points)?;
    Ok(CategoryPose9D {
        similarity,
        nonuniform_scales: predicted.scales,
        rms_residual: rms_residual(&similarity, &scaled, &observed.points),
    })
}
