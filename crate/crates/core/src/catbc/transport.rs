use crate::attention::SdfScene;
use crate::demo::{Trajectory, Waypoint};
use crate::error::{Error, Result};
use crate::geom::Pose;

use super::plant::{CollisionModel, PENETRATION_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportParams {
    /// First lift height tried above the higher of start and keypose.
    pub lift: f64,
    pub lift_increment: f64,
    pub max_lift: f64,
    /// Largest point displacement between path samples.
    pub step: f64,
    pub dt: f64,
}

impl Default for TransportParams {
    fn default() -> Self {
        TransportParams { lift: 0.03, lift_increment: 0.02, max_lift: 0.25, step: 0.001, dt: 0.1 }
    }
}

fn sample_segment(out: &mut Vec<Pose>, from: &Pose, to: &Pose, step: f64, radius: f64) {
    let span = from.translation_distance(to) + from.rotation_distance(to) * radius;
    let n = ((span / step) - 1e-9).ceil().max(1.0) as usize;
    for i in 1..=n {
        out.push(from.interpolate(to, i as f64 / n as f64));
    }
}

/// Lift, move across (rotating on the way) and lower onto the keypose. Lift
/// heights are tried in increasing order until every path sample is clear of the
/// receptacle and the obstacles.
pub fn transport_to_keypose(
    start: &Pose,
    keypose: &Pose,
    model: &CollisionModel,
    scene: &SdfScene,
    obstacles: Option<&SdfScene>,
    params: &TransportParams,
) -> Result<Trajectory> {
    let world = match obstacles {
        Some(o) => scene.union(o),
        None => scene.clone(),
    };
    let clear = |p: &Pose| model.min_distance(&world, p) >= -PENETRATION_TOL;
    if !clear(start) || !clear(keypose) {
        return Err(Error::PathBlocked(0.0));
    }
    let base = start.translation.z.max(keypose.translation.z);
    let mut lift = params.lift;
    while lift <= params.max_lift + 1e-12 {
        let mut up = *start;
        up.translation.z = base + lift;
        let mut over = *keypose;
        over.translation.z = base + lift;
        let mut poses = vec![*start];
        sample_segment(&mut poses, start, &up, params.step, model.radius());
        sample_segment(&mut poses, &up, &over, params.step, model.radius());
        sample_segment(&mut poses, &over, keypose, params.step, model.radius());
        if poses.iter().all(clear) {
            let waypoints =
                poses.into_iter().enumerate().map(|(i, pose)| Waypoint { t: i as f64 * params.dt, pose }).collect();
            return Trajectory::new(waypoints, "receptacle");
        }
        lift += params.lift_increment;
    }
    Err(Error::PathBlocked(params.max_lift))
}
