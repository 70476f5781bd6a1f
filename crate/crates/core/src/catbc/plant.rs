use nalgebra::UnitQuaternion;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::attention::SdfScene;
use crate::geom::{Pose, Vec3};

/// A point may sit this far inside the receptacle before it counts as penetrating.
pub const PENETRATION_TOL: f64 = 1e-7;
const SEARCH_ITERS: usize = 48;
const NEAR_MARGIN: f64 = 1e-4;

/// World-frame rigid motion: rotate about `pivot`, then translate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Increment {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vec3,
    pub pivot: Vec3,
}

impl Increment {
    pub fn translation(t: Vec3) -> Self {
        Increment { rotation: UnitQuaternion::identity(), translation: t, pivot: Vec3::zeros() }
    }

    /// Motion taking `from` toward `to`, scaled down uniformly so that neither the
    /// translation nor the rotation exceeds its cap.
    pub fn toward(from: &Pose, to: &Pose, max_trans: f64, max_rot: f64) -> Self {
        let dr = to.rotation * from.rotation.inverse();
        let dt = to.translation - from.translation;
        let angle = dr.angle();
        let mut lambda = 1.0f64;
        if dt.norm() > max_trans {
            lambda = lambda.min(max_trans / dt.norm());
        }
        if angle > max_rot {
            lambda = lambda.min(max_rot / angle);
        }
        let rotation = if lambda < 1.0 { dr.powf(lambda) } else { dr };
        Increment { rotation, translation: dt * lambda, pivot: from.translation }
    }

    pub fn angle(&self) -> f64 {
        self.rotation.angle()
    }

    /// The fraction `s` of this motion as a left-multiplying pose.
    pub fn at(&self, s: f64) -> Pose {
        let r = if s == 1.0 { self.rotation } else { self.rotation.powf(s) };
        Pose::new(r, self.pivot + self.translation * s - r * self.pivot)
    }

    pub fn as_pose(&self) -> Pose {
        self.at(1.0)
    }

    pub fn apply(&self, p: &Pose) -> Pose {
        self.as_pose().compose(p)
    }
}

/// Object surface samples used for contact, in the model frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionModel {
    pub points: Vec<Vec3>,
    radius: f64,
}

impl CollisionModel {
    pub fn new(points: Vec<Vec3>) -> Self {
        let radius = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
        CollisionModel { points, radius }
    }

    /// Radius of the ball about the model origin that holds every point.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn min_distance(&self, scene: &SdfScene, pose: &Pose) -> f64 {
        scene.min_distance(&self.points, pose).1
    }

    pub fn penetrates(&self, scene: &SdfScene, pose: &Pose) -> bool {
        self.min_distance(scene, pose) < -PENETRATION_TOL
    }
}

/// Quasi-static, friction-free plant: the object follows commanded motions until
/// it touches the receptacle, then slides along the contact normal.
#[derive(Debug, Clone)]
pub struct PlantState {
    pub true_pose: Pose,
    pub believed: Pose,
    pub in_contact: bool,
    pub tick: usize,
    pub rng: ChaCha8Rng,
    pub scene: SdfScene,
    pub model: CollisionModel,
    /// Offset from the true model frame to the frame the controller tracks:
    /// the controller sees `true_pose * estimate_offset`.
    pub estimate_offset: Pose,
}

impl PlantState {
    /// Object grasped at `nominal`; the grasp slip is drawn from `rng` and applied
    /// in the object frame.
    pub fn new(
        scene: SdfScene,
        model: CollisionModel,
        nominal: Pose,
        slip_trans: f64,
        slip_rot: f64,
        mut rng: ChaCha8Rng,
    ) -> Self {
        let slip = perturbation(&mut rng, slip_trans, slip_rot);
        let mut true_pose = match slip {
            Some(s) => nominal.compose(&s),
            None => nominal,
        };
        // A slip into the support is resolved by the grasp lifting the object
        // straight up out of it.
        for _ in 0..8 {
            let d = model.min_distance(&scene, &true_pose);
            if d >= -PENETRATION_TOL {
                break;
            }
            true_pose.translation.z -= d;
        }
        PlantState {
            true_pose,
            believed: nominal,
            in_contact: false,
            tick: 0,
            rng,
            scene,
            model,
            estimate_offset: Pose::identity(),
        }
    }

    /// Pose of the tracked frame.
    pub fn tracked_pose(&self) -> Pose {
        if self.estimate_offset == Pose::identity() {
            self.true_pose
        } else {
            self.true_pose.compose(&self.estimate_offset)
        }
    }

    /// Moves the object by `inc` with contact projection. Returns whether the
    /// motion was cut short by contact.
    pub fn apply(&mut self, inc: &Increment) -> bool {
        let (pose, contact) = project_motion(&self.scene, &self.model, &self.true_pose, inc);
        self.true_pose = pose;
        self.in_contact = contact;
        contact
    }

    /// Random in-hand perturbation pushed through contact projection.
    pub fn slip(&mut self, sigma_trans: f64, sigma_rot: f64) -> bool {
        match perturbation(&mut self.rng, sigma_trans, sigma_rot) {
            Some(d) => {
                let inc = Increment { rotation: d.rotation, translation: d.translation, pivot: self.true_pose.translation };
                self.apply(&inc)
            }
            None => false,
        }
    }
}

/// Gaussian pose perturbation; `None` when both sigmas are zero so that callers
/// can skip it without touching the pose bits.
pub fn perturbation(rng: &mut impl Rng, sigma_trans: f64, sigma_rot: f64) -> Option<Pose> {
    if sigma_trans == 0.0 && sigma_rot == 0.0 {
        return None;
    }
    let mut normal3 = |s: f64| {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        Vec3::new(v[0], v[1], v[2]) * s
    };
    let t = normal3(sigma_trans);
    let r = normal3(sigma_rot);
    Some(Pose::new(UnitQuaternion::from_scaled_axis(r), t))
}

fn min_over(scene: &SdfScene, points: &[Vec3], near: &[usize], pose: &Pose) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for &i in near {
        let d = scene.eval(&pose.transform_point(&points[i]));
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Largest feasible fraction of `motion` (a family of poses over `s` in `[0, 1]`).
fn first_contact(
    scene: &SdfScene,
    points: &[Vec3],
    near: &[usize],
    reach: f64,
    motion: impl Fn(f64) -> Pose,
) -> (f64, bool) {
    if min_over(scene, points, near, &motion(1.0)).1 >= -PENETRATION_TOL {
        return (1.0, false);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..SEARCH_ITERS {
        if (hi - lo) * reach < 1e-10 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if min_over(scene, points, near, &motion(mid)).1 >= -PENETRATION_TOL {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, true)
}

/// Applies `inc` to `pose`, stopping at the first contact and then sliding the
/// remaining translation along the contact surface. The rotation left over after
/// contact is dropped.
pub fn project_motion(scene: &SdfScene, model: &CollisionModel, pose: &Pose, inc: &Increment) -> (Pose, bool) {
    let reach = inc.translation.norm() + inc.angle() * ((pose.translation - inc.pivot).norm() + model.radius());
    let clearance = scene.eval(&pose.translation) - model.radius();
    if clearance > reach + NEAR_MARGIN {
        return (inc.apply(pose), false);
    }
    let near: Vec<usize> = model
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| scene.eval(&pose.transform_point(p)) <= reach + NEAR_MARGIN)
        .map(|(i, _)| i)
        .collect();
    if near.is_empty() {
        return (inc.apply(pose), false);
    }
    let pts = &model.points;
    let (s, hit) = first_contact(scene, pts, &near, reach, |s| inc.at(s).compose(pose));
    if !hit {
        return (inc.apply(pose), false);
    }
    let contact_pose = inc.at(s).compose(pose);
    let (idx, _) = min_over(scene, pts, &near, &contact_pose);
    let normal = scene.gradient(&contact_pose.transform_point(&pts[idx]));
    let mut rest = inc.translation * (1.0 - s);
    let into = rest.dot(&normal);
    if into < 0.0 {
        rest -= normal * into;
    }
    if rest.norm() < 1e-12 {
        return (contact_pose, true);
    }
    let slide = |s: f64| Pose::new(contact_pose.rotation, contact_pose.translation + rest * s);
    let (s2, _) = first_contact(scene, pts, &near, rest.norm(), slide);
    (slide(s2), true)
}
