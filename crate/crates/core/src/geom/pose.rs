use nalgebra::{Point3, Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;

/// Rigid transform in SE(3). Rotation is a unit quaternion stored `(w, x, y, z)`
/// on the wire, translation in meters. Acts on column vectors: `p' = R p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vec3,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn new(rotation: UnitQuaternion<f64>, translation: Vec3) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(UnitQuaternion::identity(), Vec3::zeros())
    }

    pub fn from_translation(t: Vec3) -> Self {
        Self::new(UnitQuaternion::identity(), t)
    }

    pub fn from_rotation(r: UnitQuaternion<f64>) -> Self {
        Self::new(r, Vec3::zeros())
    }

    /// Builds a pose from `(w, x, y, z)` quaternion components, normalizing them.
    /// Components already unit to round-off are kept as given, so that writing a
    /// pose and reading it back is bit-exact.
    pub fn from_wxyz(q: [f64; 4], t: [f64; 3]) -> Self {
        let q = Quaternion::new(q[0], q[1], q[2], q[3]);
        let rotation = if (q.norm() - 1.0).abs() <= 1e-12 {
            UnitQuaternion::new_unchecked(q)
        } else {
            UnitQuaternion::new_normalize(q)
        };
        Self::new(rotation, Vec3::new(t[0], t[1], t[2]))
    }

    pub fn wxyz(&self) -> [f64; 4] {
        let q = self.rotation.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    pub fn xyz(&self) -> [f64; 3] {
        [self.translation.x, self.translation.y, self.translation.z]
    }

    /// `self * other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        let r = UnitQuaternion::new_normalize((self.rotation * other.rotation).into_inner());
        Pose::new(r, self.rotation * other.translation + self.translation)
    }

    pub fn inverse(&self) -> Pose {
        let r = self.rotation.inverse();
        Pose::new(r, -(r * self.translation))
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    pub fn is_finite(&self) -> bool {
        self.wxyz().iter().chain(self.xyz().iter()).all(|v| v.is_finite())
    }

    pub fn translation_distance(&self, other: &Pose) -> f64 {
        (self.translation - other.translation).norm()
    }

    pub fn rotation_distance(&self, other: &Pose) -> f64 {
        rotation_geodesic(&self.rotation, &other.rotation)
    }

    /// Point on the straight segment between `self` and `other` (slerp for rotation).
    pub fn interpolate(&self, other: &Pose, alpha: f64) -> Pose {
        let r = self
            .rotation
            .try_slerp(&other.rotation, alpha, 1e-12)
            .unwrap_or(self.rotation);
        Pose::new(r, self.translation.lerp(&other.translation, alpha))
    }
}

impl std::ops::Mul for Pose {
    type Output = Pose;
    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

/// Geodesic angle between two rotations in radians, in `[0, pi]`.
///
/// Uses `atan2` on the relative quaternion so that tiny angles keep full precision.
pub fn rotation_geodesic(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    let rel = a.inverse() * b;
    let q = rel.quaternion();
    2.0 * q.vector().norm().atan2(q.w.abs())
}

/// Rotation about the world Z axis.
pub fn yaw(angle: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(&Vec3::z_axis(), angle)
}

/// Tilt of the body Z axis away from world Z, radians.
pub fn tilt_angle(r: &UnitQuaternion<f64>) -> f64 {
    let axis = r * Vec3::z();
    axis.z.clamp(-1.0, 1.0).acos()
}

pub fn to_point(v: &Vec3) -> Point3<f64> {
    Point3::from(*v)
}

/// Wire format shared by every JSON document that carries a pose.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct PoseRecord {
    pub q: [f64; 4],
    pub p: [f64; 3],
}

impl From<&Pose> for PoseRecord {
    fn from(p: &Pose) -> Self {
        PoseRecord { q: p.wxyz(), p: p.xyz() }
    }
}

impl From<&PoseRecord> for Pose {
    fn from(r: &PoseRecord) -> Self {
        Pose::from_wxyz(r.q, r.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pose(rng: &mut impl Rng) -> Pose {
        let axis = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let angle = rng.random_range(-3.1..3.1);
        let r = UnitQuaternion::from_scaled_axis(axis.normalize() * angle);
        Pose::new(
            r,
            Vec3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            ),
        )
    }

    fn assert_identity(p: &Pose, tol: f64) {
        assert!(p.translation.norm() < tol, "{p:?}");
        assert!(rotation_geodesic(&p.rotation, &UnitQuaternion::identity()) < tol);
    }

    #[test]
    fn identity_is_neutral() {
        let p = Pose::from_wxyz([0.9, 0.1, -0.3, 0.2], [1.0, -2.0, 0.5]);
        let q = Pose::identity().compose(&p);
        assert_eq!(q.translation, p.translation);
        assert!(p.rotation_distance(&q) < 1e-15);
    }

    #[test]
    fn inverse_of_translation() {
        let p = Pose::from_translation(Vec3::new(1.0, 2.0, 3.0)).inverse();
        assert_eq!(p.translation, Vec3::new(-1.0, -2.0, -3.0));
    }

    #[test]
    fn group_axioms_over_seeded_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a = random_pose(&mut rng);
            let b = random_pose(&mut rng);
            let c = random_pose(&mut rng);
            assert_identity(&a.inverse().compose(&a), 1e-9);
            assert_identity(&a.compose(&a.inverse()), 1e-9);
            let l = a.compose(&b).compose(&c);
            let r = a.compose(&b.compose(&c));
            assert!(l.translation_distance(&r) < 1e-9);
            assert!(l.rotation_distance(&r) < 1e-9);
            assert!((l.rotation.quaternion().norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn geodesic_small_angles_are_precise() {
        let a = yaw(0.0);
        let b = yaw(1e-10);
        assert!((rotation_geodesic(&a, &b) - 1e-10).abs() < 1e-20);
        assert!((rotation_geodesic(&yaw(0.3), &yaw(-0.2)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn record_round_trip() {
        let p = Pose::from_wxyz([0.5, 0.5, 0.5, 0.5], [0.1, 0.2, 0.3]);
        let back = Pose::from(&PoseRecord::from(&p));
        assert_eq!(back, p);
    }
}
