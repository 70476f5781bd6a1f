use nalgebra::UnitQuaternion;

use crate::error::{Error, Result};
use crate::geom::{Pose, Vec3};

/// Receptacle building blocks. Each primitive is defined in its own local frame
/// and placed by `pose`; distances are exact and positive outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SdfPrimitive {
    /// Half-space solid below the local plane `z = 0`.
    Plane { pose: Pose },
    /// Box centered at the local origin.
    Box { pose: Pose, half_extents: Vec3 },
    /// Cylinder along local Z centered at the origin. An infinite `half_height`
    /// gives an unbounded cylinder.
    Cylinder { pose: Pose, radius: f64, half_height: f64 },
}

impl SdfPrimitive {
    pub fn pose(&self) -> &Pose {
        match self {
            SdfPrimitive::Plane { pose } | SdfPrimitive::Box { pose, .. } | SdfPrimitive::Cylinder { pose, .. } => pose,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SdfPrimitive::Plane { .. } => "plane",
            SdfPrimitive::Box { .. } => "box",
            SdfPrimitive::Cylinder { .. } => "cylinder",
        }
    }

    pub fn horizontal_plane(z: f64) -> Self {
        SdfPrimitive::Plane { pose: Pose::from_translation(Vec3::new(0.0, 0.0, z)) }
    }

    pub fn aligned_box(center: Vec3, half_extents: Vec3) -> Self {
        SdfPrimitive::Box { pose: Pose::from_translation(center), half_extents }
    }

    pub fn vertical_cylinder(center: Vec3, radius: f64, half_height: f64) -> Self {
        SdfPrimitive::Cylinder { pose: Pose::from_translation(center), radius, half_height }
    }

    pub fn eval(&self, p: &Vec3) -> f64 {
        let pose = self.pose();
        let q = pose.rotation.inverse() * (p - pose.translation);
        match *self {
            SdfPrimitive::Plane { .. } => q.z,
            SdfPrimitive::Box { half_extents, .. } => {
                let d = q.abs() - half_extents;
                let outside = d.sup(&Vec3::zeros()).norm();
                let inside = d.max().min(0.0);
                outside + inside
            }
            SdfPrimitive::Cylinder { radius, half_height, .. } => {
                let dr = (q.x * q.x + q.y * q.y).sqrt() - radius;
                let dz = q.z.abs() - half_height;
                let inside = dr.max(dz).min(0.0);
                let outside = (dr.max(0.0).powi(2) + dz.max(0.0).powi(2)).sqrt();
                outside + inside
            }
        }
    }

    pub fn is_valid(&self) -> bool {
        let pose_ok = self.pose().is_finite();
        pose_ok
            && match *self {
                SdfPrimitive::Plane { .. } => true,
                SdfPrimitive::Box { half_extents, .. } => half_extents.iter().all(|v| *v > 0.0 && v.is_finite()),
                SdfPrimitive::Cylinder { radius, half_height, .. } => {
                    radius > 0.0 && radius.is_finite() && half_height > 0.0
                }
            }
    }
}

/// Union of primitives; the scene distance is the pointwise minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct SdfScene {
    primitives: Vec<SdfPrimitive>,
}

impl SdfScene {
    pub fn new(primitives: Vec<SdfPrimitive>) -> Result<Self> {
        if primitives.is_empty() {
            return Err(Error::EmptyScene);
        }
        if let Some(bad) = primitives.iter().find(|p| !p.is_valid()) {
            return Err(Error::InvalidGeometry(format!("invalid {} primitive", bad.kind())));
        }
        Ok(SdfScene { primitives })
    }

    pub fn primitives(&self) -> &[SdfPrimitive] {
        &self.primitives
    }

    /// Union with another scene (obstacles, a table, ...).
    pub fn union(&self, other: &SdfScene) -> SdfScene {
        let mut primitives = self.primitives.clone();
        primitives.extend_from_slice(&other.primitives);
        SdfScene { primitives }
    }

    pub fn eval(&self, p: &Vec3) -> f64 {
        self.primitives.iter().map(|s| s.eval(p)).fold(f64::INFINITY, f64::min)
    }

    /// Central-difference gradient; unit length almost everywhere.
    pub fn gradient(&self, p: &Vec3) -> Vec3 {
        const H: f64 = 1e-7;
        let mut g = Vec3::zeros();
        for axis in 0..3 {
            let mut e = Vec3::zeros();
            e[axis] = H;
            g[axis] = (self.eval(&(p + e)) - self.eval(&(p - e))) / (2.0 * H);
        }
        let n = g.norm();
        if n > 0.0 {
            g / n
        } else {
            Vec3::z()
        }
    }

    /// Smallest distance over a set of points placed by `pose`, with its index
    /// (lowest index on ties).
    pub fn min_distance(&self, points: &[Vec3], pose: &Pose) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, p) in points.iter().enumerate() {
            let d = self.eval(&pose.transform_point(p));
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// The same scene with every primitive moved by `g`.
    pub fn transformed(&self, g: &Pose) -> SdfScene {
        let moved = |p: &Pose| g.compose(p);
        SdfScene {
            primitives: self
                .primitives
                .iter()
                .map(|s| match *s {
                    SdfPrimitive::Plane { pose } => SdfPrimitive::Plane { pose: moved(&pose) },
                    SdfPrimitive::Box { pose, half_extents } => SdfPrimitive::Box { pose: moved(&pose), half_extents },
                    SdfPrimitive::Cylinder { pose, radius, half_height } => {
                        SdfPrimitive::Cylinder { pose: moved(&pose), radius, half_height }
                    }
                })
                .collect(),
        }
    }
}

/// Free-function form of [`SdfScene::eval`].
pub fn sdf_eval(scene: &SdfScene, p: &Vec3) -> f64 {
    scene.eval(p)
}

pub fn tilted(axis: Vec3, angle: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle)
}
