use nalgebra::UnitQuaternion;

use super::pose::{Pose, Vec3};

/// Uniformly scaled rigid transform: `p' = s R p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    pub scale: f64,
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vec3,
}

impl SimilarityTransform {
    pub fn new(scale: f64, rotation: UnitQuaternion<f64>, translation: Vec3) -> Self {
        debug_assert!(scale > 0.0);
        Self { scale, rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(1.0, UnitQuaternion::identity(), Vec3::zeros())
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.scale * (self.rotation * p) + self.translation
    }

    pub fn inverse(&self) -> SimilarityTransform {
        let r = self.rotation.inverse();
        let s = 1.0 / self.scale;
        SimilarityTransform::new(s, r, -(s * (r * self.translation)))
    }

    /// The rigid part, dropping the scale.
    pub fn rigid(&self) -> Pose {
        Pose::new(self.rotation, self.translation)
    }
}
