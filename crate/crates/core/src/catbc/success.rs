use serde::Serialize;

use crate::error::Result;
use crate::geom::{Pose, Vec3};
use crate::tasks::TaskGeometry;

/// Geometric slack shared with the plant's penetration tolerance.
pub const CHECK_SLACK: f64 = 1e-6;
/// A standing battery may drop this far when released.
pub const MAX_RELEASE_DROP: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub success: bool,
    pub diagnostics: Vec<(String, f64)>,
}

impl Verdict {
    fn new(success: bool, diagnostics: &[(&str, f64)]) -> Self {
        Verdict { success, diagnostics: diagnostics.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.diagnostics.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// Extent of a disk of radius `r` with unit normal `n` along a world axis.
fn disk_extent(r: f64, n: &Vec3, axis: usize) -> f64 {
    r * (1.0 - n[axis] * n[axis]).max(0.0).sqrt()
}

/// Evaluates the task's success rule on the final object pose. `trace` holds the
/// object poses over the run (the assembly rule inspects the whole sequence).
pub fn check_success(geometry: &TaskGeometry, final_pose: &Pose, trace: &[Pose]) -> Result<Verdict> {
    geometry.validate()?;
    let axis = final_pose.transform_vector(&Vec3::z());
    let c = final_pose.translation;
    match *geometry {
        TaskGeometry::Standing { radius, half_height, platform_radius, .. } => {
            let tilt = axis.z.abs().clamp(0.0, 1.0).acos();
            let down = if axis.z >= 0.0 { -axis } else { axis };
            let base = c + down * half_height;
            let limit = (radius / half_height).atan();
            let offset = (base.x * base.x + base.y * base.y).sqrt();
            let ok = tilt <= limit + CHECK_SLACK
                && offset <= platform_radius + CHECK_SLACK
                && base.z.abs() <= MAX_RELEASE_DROP;
            Ok(Verdict::new(ok, &[("tilt_rad", tilt), ("tilt_limit_rad", limit), ("base_offset_m", offset), ("base_z_m", base.z)]))
        }
        TaskGeometry::Insertion { hole_radius, shaft_radius, half_thickness, shaft_height } => {
            let tilt = axis.z.abs().clamp(0.0, 1.0).acos();
            let lateral = (c.x * c.x + c.y * c.y).sqrt();
            let clearance = hole_radius - shaft_radius;
            let wobble = lateral + half_thickness * tilt.sin();
            let hole_top = c.z + half_thickness * axis.z.abs();
            let ok = wobble <= clearance + CHECK_SLACK && hole_top <= shaft_height + CHECK_SLACK;
            Ok(Verdict::new(
                ok,
                &[("lateral_m", lateral), ("tilt_rad", tilt), ("wobble_m", wobble), ("clearance_m", clearance), ("hole_top_m", hole_top)],
            ))
        }
        TaskGeometry::Assembly { radius, half_length, inner_length, channel_half_width, wall_height, spring_natural, spring_threshold } => {
            let ends = |p: &Pose| {
                let a = p.transform_vector(&Vec3::z());
                let neg = p.translation - a * half_length;
                let pos = p.translation + a * half_length;
                (a, neg, pos)
            };
            // The moment the positive end drops below the wall top inside the channel.
            let mut compression_at_clear = None;
            for p in trace.iter().chain(std::iter::once(final_pose)) {
                let (a, neg, pos) = ends(p);
                let pos_low = pos.z - disk_extent(radius, &a, 2);
                let pos_far = pos.x + disk_extent(radius, &a, 0);
                if pos_low < wall_height && pos_far <= inner_length + CHECK_SLACK && pos.x > 0.0 {
                    let neg_min_x = neg.x - disk_extent(radius, &a, 0);
                    compression_at_clear = Some(neg_min_x.clamp(0.0, spring_natural));
                    break;
                }
            }
            let (a, neg, pos) = ends(final_pose);
            let inside = pos.z - disk_extent(radius, &a, 2) < wall_height
                && neg.z - disk_extent(radius, &a, 2) < wall_height
                && (0.0..=inner_length).contains(&c.x)
                && c.y.abs() <= channel_half_width;
            let rest_length = inner_length - 2.0 * half_length;
            let holds = rest_length >= 0.0 && rest_length < spring_natural;
            let pressed = compression_at_clear.is_some_and(|l| l <= spring_threshold + CHECK_SLACK);
            Ok(Verdict::new(
                inside && holds && pressed,
                &[
                    ("spring_at_clear_m", compression_at_clear.unwrap_or(f64::NAN)),
                    ("spring_rest_m", rest_length),
                    ("inside", if inside { 1.0 } else { 0.0 }),
                ],
            ))
        }
    }
}
