//! Task fixtures: receptacle geometry, scripted demonstrations and start poses for
//! the standing, gear insertion and battery assembly tasks.
//!
//! Every receptacle frame has +Z up and its floor (or platform top) at `z = 0`.
//! The assembly frame has its origin at the inner face of the spring wall, with
//! the channel running along +X.

use std::f64::consts::FRAC_PI_2;

use nalgebra::UnitQuaternion;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attention::{SdfPrimitive, SdfScene};
use crate::demo::Trajectory;
use crate::error::{Error, Result};
use crate::geom::{yaw, Pose, Vec3};
use crate::shapes::ShapeSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Standing,
    Insertion,
    Assembly,
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Standing => "standing",
            TaskKind::Insertion => "insertion",
            TaskKind::Assembly => "assembly",
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standing" => Ok(TaskKind::Standing),
            "insertion" | "gear" => Ok(TaskKind::Insertion),
            "assembly" => Ok(TaskKind::Assembly),
            other => Err(Error::Parse(format!("unknown task `{other}`"))),
        }
    }
}

/// Receptacle dimensions and the parameters of the task's success checker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaskGeometry {
    /// Battery placed upright on a round platform whose top is at `z = 0`.
    Standing { radius: f64, half_height: f64, platform_radius: f64, platform_height: f64 },
    /// Gear lowered over a vertical shaft standing on a plate at `z = 0`.
    Insertion { hole_radius: f64, shaft_radius: f64, half_thickness: f64, shaft_height: f64 },
    /// Battery pressed against a spring and laid into a walled channel.
    Assembly {
        radius: f64,
        half_length: f64,
        inner_length: f64,
        channel_half_width: f64,
        wall_height: f64,
        spring_natural: f64,
        spring_threshold: f64,
    },
}

pub const PLATFORM_RADIUS: f64 = 0.020;
pub const PLATFORM_HEIGHT: f64 = 0.040;
pub const SHAFT_HEIGHT: f64 = 0.030;
pub const WALL_HEIGHT: f64 = 0.010;
pub const WALL_THICKNESS: f64 = 0.003;
pub const SPRING_NATURAL: f64 = 0.016;
pub const SIDE_CLEARANCE: f64 = 0.001;
/// Free channel length beyond the battery, left for the compressed spring.
pub const SPRING_POCKET: f64 = 0.008;

/// Demonstration tilt of the battery while it presses the spring.
const PRESS_TILT_DEG: f64 = 15.0;

impl TaskGeometry {
    pub fn kind(&self) -> TaskKind {
        match self {
            TaskGeometry::Standing { .. } => TaskKind::Standing,
            TaskGeometry::Insertion { .. } => TaskKind::Insertion,
            TaskGeometry::Assembly { .. } => TaskKind::Assembly,
        }
    }

    pub fn standing(radius: f64, half_height: f64) -> Self {
        TaskGeometry::Standing { radius, half_height, platform_radius: PLATFORM_RADIUS, platform_height: PLATFORM_HEIGHT }
    }

    /// Shaft sized for `hole_radius` minus `clearance`.
    pub fn insertion(hole_radius: f64, half_thickness: f64, clearance: f64) -> Self {
        TaskGeometry::Insertion {
            hole_radius,
            shaft_radius: hole_radius - clearance,
            half_thickness,
            shaft_height: SHAFT_HEIGHT,
        }
    }

    /// Channel sized for the battery plus the spring pocket.
    pub fn assembly(radius: f64, half_length: f64) -> Self {
        TaskGeometry::Assembly {
            radius,
            half_length,
            inner_length: 2.0 * half_length + SPRING_POCKET,
            channel_half_width: radius + SIDE_CLEARANCE,
            wall_height: WALL_HEIGHT,
            spring_natural: SPRING_NATURAL,
            spring_threshold: 0.5 * SPRING_NATURAL,
        }
    }

    /// Default geometry for `kind` around an object instance.
    pub fn for_object(kind: TaskKind, object: &ShapeSpec, clearance: f64) -> Result<Self> {
        match (kind, *object) {
            (TaskKind::Standing, ShapeSpec::Cylinder { radius, half_height }) => Ok(Self::standing(radius, half_height)),
            (TaskKind::Insertion, ShapeSpec::Ring { inner, half_height, .. }) => {
                let g = Self::insertion(inner, half_height, clearance);
                g.validate()?;
                Ok(g)
            }
            (TaskKind::Assembly, ShapeSpec::Cylinder { radius, half_height }) => Ok(Self::assembly(radius, half_height)),
            (k, o) => Err(Error::InvalidGeometry(format!("{o:?} does not fit the {} task", k.name()))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidGeometry(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            TaskGeometry::Standing { radius, half_height, platform_radius, platform_height } => {
                positive("radius", radius)?;
                positive("half_height", half_height)?;
                positive("platform_radius", platform_radius)?;
                positive("platform_height", platform_height)
            }
            TaskGeometry::Insertion { hole_radius, shaft_radius, half_thickness, shaft_height } => {
                positive("shaft_radius", shaft_radius)?;
                positive("half_thickness", half_thickness)?;
                positive("shaft_height", shaft_height)?;
                if shaft_radius >= hole_radius {
                    return Err(Error::InvalidGeometry(format!(
                        "shaft radius {shaft_radius} does not fit hole radius {hole_radius}"
                    )));
                }
                Ok(())
            }
            TaskGeometry::Assembly { radius, half_length, inner_length, channel_half_width, wall_height, spring_natural, spring_threshold } => {
                positive("radius", radius)?;
                positive("half_length", half_length)?;
                positive("wall_height", wall_height)?;
                positive("spring_natural", spring_natural)?;
                positive("spring_threshold", spring_threshold)?;
                if channel_half_width <= radius {
                    return Err(Error::InvalidGeometry("channel narrower than the battery".into()));
                }
                if inner_length < 2.0 * half_length {
                    return Err(Error::InvalidGeometry("channel shorter than the battery".into()));
                }
                Ok(())
            }
        }
    }

    pub fn clearance(&self) -> Option<f64> {
        match *self {
            TaskGeometry::Insertion { hole_radius, shaft_radius, .. } => Some(hole_radius - shaft_radius),
            _ => None,
        }
    }

    /// Receptacle as a union of primitives.
    pub fn scene(&self) -> Result<SdfScene> {
        self.validate()?;
        let prims = match *self {
            TaskGeometry::Standing { platform_radius, platform_height, .. } => vec![
                SdfPrimitive::vertical_cylinder(
                    Vec3::new(0.0, 0.0, -0.5 * platform_height),
                    platform_radius,
                    0.5 * platform_height,
                ),
                SdfPrimitive::horizontal_plane(-platform_height),
            ],
            TaskGeometry::Insertion { shaft_radius, shaft_height, .. } => vec![
                SdfPrimitive::horizontal_plane(0.0),
                SdfPrimitive::vertical_cylinder(Vec3::new(0.0, 0.0, 0.5 * shaft_height), shaft_radius, 0.5 * shaft_height),
            ],
            TaskGeometry::Assembly { inner_length, channel_half_width, wall_height, .. } => {
                let t = WALL_THICKNESS;
                let hz = 0.5 * wall_height;
                let hy = channel_half_width + t;
                vec![
                    SdfPrimitive::horizontal_plane(0.0),
                    SdfPrimitive::aligned_box(Vec3::new(-0.5 * t, 0.0, hz), Vec3::new(0.5 * t, hy, hz)),
                    SdfPrimitive::aligned_box(Vec3::new(inner_length + 0.5 * t, 0.0, hz), Vec3::new(0.5 * t, hy, hz)),
                    SdfPrimitive::aligned_box(
                        Vec3::new(0.5 * inner_length, channel_half_width + 0.5 * t, hz),
                        Vec3::new(0.5 * inner_length + t, 0.5 * t, hz),
                    ),
                    SdfPrimitive::aligned_box(
                        Vec3::new(0.5 * inner_length, -channel_half_width - 0.5 * t, hz),
                        Vec3::new(0.5 * inner_length + t, 0.5 * t, hz),
                    ),
                ]
            }
        };
        SdfScene::new(prims)
    }

    /// Height of the table the object starts on.
    pub fn table_height(&self) -> f64 {
        match *self {
            TaskGeometry::Standing { platform_height, .. } => -platform_height,
            _ => 0.0,
        }
    }
}

/// Battery rotation that lays its axis along +X, tilted up by `tilt` radians.
pub fn lying_along_x(tilt: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(&Vec3::y_axis(), FRAC_PI_2 - tilt)
}

fn push_segment(out: &mut Vec<Pose>, from: &Pose, to: &Pose, step: f64, angle_step: f64, radius: f64) {
    let n = segment_steps(from, to, step, angle_step, radius);
    for i in 1..=n {
        out.push(from.interpolate(to, i as f64 / n as f64));
    }
}

fn segment_steps(from: &Pose, to: &Pose, step: f64, angle_step: f64, radius: f64) -> usize {
    let lin = from.translation_distance(to) / step;
    let ang = from.rotation_distance(to) / angle_step;
    let arc = from.rotation_distance(to) * radius / step;
    (lin.max(ang).max(arc) - 1e-9).ceil().max(1.0) as usize
}

/// Pose sequence through `keys`, one waypoint per millimeter or degree.
fn densify(keys: &[Pose], radius: f64) -> Vec<Pose> {
    let mut out = vec![keys[0]];
    for w in keys.windows(2) {
        push_segment(&mut out, &w[0], &w[1], 0.001, 1f64.to_radians(), radius);
    }
    out
}

/// Demonstrated object trajectory in the receptacle frame, sampled at 10 Hz.
/// Starts well away from the receptacle and ends at the task goal.
pub fn demo_script(object: &ShapeSpec, geometry: &TaskGeometry) -> Result<Trajectory> {
    geometry.validate()?;
    let bound = object.mesh(16).extents().norm() * 0.5;
    let keys = match (*geometry, *object) {
        (TaskGeometry::Standing { .. }, ShapeSpec::Cylinder { radius, half_height }) => {
            let goal = Pose::from_translation(Vec3::new(0.0, 0.0, half_height));
            let hover = Pose::from_translation(Vec3::new(0.0, 0.0, half_height + 0.09));
            let start = Pose::new(lying_along_x(0.0), Vec3::new(0.06, 0.02, 0.11 + radius));
            vec![start, hover, goal]
        }
        (TaskGeometry::Insertion { shaft_height, .. }, ShapeSpec::Ring { half_height, .. }) => {
            let goal = Pose::from_translation(Vec3::new(0.0, 0.0, half_height));
            let hover = Pose::from_translation(Vec3::new(0.0, 0.0, shaft_height + half_height + 0.08));
            let start = Pose::new(yaw(0.4), Vec3::new(0.07, -0.03, shaft_height + half_height + 0.10));
            vec![start, hover, goal]
        }
        (TaskGeometry::Assembly { inner_length, .. }, ShapeSpec::Cylinder { radius, half_height }) => {
            let tilt = PRESS_TILT_DEG.to_radians();
            // Poses are placed through the lowest rim point of the negative end.
            let edge = Vec3::new(radius, 0.0, -half_height);
            let place = |tilt: f64, at: Vec3| {
                let r = lying_along_x(tilt);
                Pose::new(r, at - r * edge)
            };
            let clear_x = SPRING_NATURAL + 2.0 * radius * tilt.sin() + 0.001;
            let press_x = 0.007f64.min(inner_length - 2.0 * half_height - 0.001);
            let mut keys = vec![
                place(tilt, Vec3::new(clear_x, 0.0, 0.08)),
                place(tilt, Vec3::new(clear_x, 0.0, 0.0)),
                place(tilt, Vec3::new(press_x, 0.0, 0.0)),
            ];
            // Lay the battery down about the pressed rim, a degree at a time.
            let steps = PRESS_TILT_DEG.round() as usize;
            for i in 1..=steps {
                keys.push(place(tilt * (1.0 - i as f64 / steps as f64), Vec3::new(press_x, 0.0, 0.0)));
            }
            keys
        }
        (g, o) => return Err(Error::InvalidGeometry(format!("{o:?} does not fit the {} task", g.kind().name()))),
    };
    Trajectory::from_poses(&densify(&keys, bound), 0.1)
}

/// Resting pose on the table next to the receptacle, with random yaw and position.
pub fn sample_start_pose(object: &ShapeSpec, geometry: &TaskGeometry, rng: &mut impl Rng) -> Pose {
    let table = geometry.table_height();
    // Far enough out that no yaw reaches the receptacle.
    let reach = match *geometry {
        TaskGeometry::Standing { platform_radius, .. } => platform_radius,
        TaskGeometry::Insertion { shaft_radius, .. } => shaft_radius,
        TaskGeometry::Assembly { inner_length, .. } => inner_length + WALL_THICKNESS,
    };
    let x0 = 0.08f64.max(reach + object.mesh(16).extents().norm() * 0.5 + 0.01);
    let x = rng.random_range(x0..x0 + 0.03);
    let y = rng.random_range(-0.03..0.03);
    let psi = rng.random_range(0.0..std::f64::consts::TAU);
    match *object {
        ShapeSpec::Cylinder { radius, .. } => {
            Pose::new(yaw(psi) * lying_along_x(0.0), Vec3::new(x, y, table + radius))
        }
        _ => Pose::new(yaw(psi), Vec3::new(x, y, table + object.half_height())),
    }
}
