//! Synthetic instances, tabletop scenes, partial depth views and ground-truth
//! labels, plus demonstration logs generated from scripted trajectories.

mod render;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fs;
use std::path::Path;

use nalgebra::UnitQuaternion;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use render::{render_partial, Camera};

use crate::catbc::TrackerModel;
use crate::demo::{DemoLog, Trajectory};
use crate::error::{Error, Result};
use crate::geom::io::write_ply;
use crate::geom::{yaw, PointCloud, Pose, PoseRecord, SimilarityTransform, TriangleMesh, Vec3};
use crate::nunocs::{normalize_with_frame, CategoryPose9D, NormalizationFrame, NunocsCloud};
use crate::shapes::ShapeSpec;

pub const MAX_DROPOUT: f64 = 0.4;
pub const DEFAULT_SCALE_RANGE: (f64, f64) = (0.5, 2.0);

/// Per-axis uniform scales applied about the AABB center.
pub fn random_instance(base: &TriangleMesh, range: [(f64, f64); 3], rng: &mut impl Rng) -> (TriangleMesh, Vec3) {
    let mut s = Vec3::zeros();
    for axis in 0..3 {
        let (lo, hi) = range[axis];
        s[axis] = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    }
    (base.scaled_about_center(&s), s)
}

/// Stable resting orientations of a base shape on a flat table.
pub fn rest_poses(shape: &ShapeSpec) -> Vec<UnitQuaternion<f64>> {
    match shape {
        ShapeSpec::Cylinder { .. } => {
            vec![UnitQuaternion::identity(), UnitQuaternion::from_euler_angles(FRAC_PI_2, 0.0, 0.0)]
        }
        ShapeSpec::Ring { .. } => vec![UnitQuaternion::identity(), UnitQuaternion::from_euler_angles(PI, 0.0, 0.0)],
        ShapeSpec::Cuboid { .. } | ShapeSpec::Bracket { .. } => vec![UnitQuaternion::identity()],
    }
}

/// Ranges for scene placement. Positions are relative to the camera target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneRanges {
    pub xy_half: f64,
    pub table_height: (f64, f64),
    pub dropout: (f64, f64),
}

impl Default for SceneRanges {
    fn default() -> Self {
        SceneRanges { xy_half: 0.03, table_height: (0.0, 0.1), dropout: (0.0, MAX_DROPOUT) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub instance_id: String,
    pub mesh: TriangleMesh,
    pub scales: Vec3,
    pub pose: Pose,
    pub table_height: f64,
    pub camera: Camera,
    pub partial: PointCloud,
    pub seed: u64,
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Places the (already scaled) instance on the table in a random rest pose and
/// yaw, aims the camera at it and renders a corrupted partial view.
#[allow(clippy::too_many_arguments)]
pub fn sample_scene(
    instance_id: &str,
    mesh: &TriangleMesh,
    scales: Vec3,
    rest: &[UnitQuaternion<f64>],
    ranges: &SceneRanges,
    camera: &Camera,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<SyntheticScene> {
    if rest.is_empty() {
        return Err(Error::DegenerateInput("no rest poses".into()));
    }
    let r = rest[rng.random_range(0..rest.len())];
    let rotation = yaw(rng.random_range(0.0..TAU)) * r;
    let x = uniform(rng, (-ranges.xy_half, ranges.xy_half));
    let y = uniform(rng, (-ranges.xy_half, ranges.xy_half));
    let table_height = uniform(rng, ranges.table_height);
    let lowest = mesh.vertices.iter().map(|v| (rotation * v).z).fold(f64::INFINITY, f64::min);
    let target = Vec3::from(camera.target);
    let pose = Pose::new(rotation, target + Vec3::new(x, y, table_height - lowest));
    let camera = Camera { target: [pose.translation.x, pose.translation.y, table_height], ..*camera };
    let full = render_partial(mesh, &pose, &camera)?;
    let fraction = uniform(rng, ranges.dropout);
    let partial = corrupt_depth(&full, fraction, rng)?;
    Ok(SyntheticScene { instance_id: instance_id.to_string(), mesh: mesh.clone(), scales, pose, table_height, camera, partial, seed })
}

/// Removes exactly `round(N * fraction)` uniformly chosen points; survivors keep
/// their order and values.
pub fn corrupt_depth(cloud: &PointCloud, fraction: f64, rng: &mut impl Rng) -> Result<PointCloud> {
    if !(0.0..=MAX_DROPOUT).contains(&fraction) {
        return Err(Error::FractionOutOfRange(fraction));
    }
    let n = cloud.len();
    let drop = (n as f64 * fraction).round() as usize;
    if drop == 0 {
        return Ok(cloud.clone());
    }
    let mut keep = vec![true; n];
    for i in rand::seq::index::sample(rng, n, drop) {
        keep[i] = false;
    }
    let idx: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
    Ok(PointCloud::with_sources(
        idx.iter().map(|&i| cloud.points[i]).collect(),
        idx.iter().map(|&i| cloud.source_of(i)).collect(),
    ))
}

/// Ground-truth normalized coordinates of the partial view, in the frame of the
/// full instance's bounding box, and the matching 9D pose.
pub fn emit_labels(scene: &SyntheticScene) -> Result<(NunocsCloud, CategoryPose9D)> {
    let (lo, hi) = scene.mesh.bounds();
    let frame = NormalizationFrame::from_bounds(lo, hi)?;
    let local = scene.partial.transformed(&scene.pose.inverse());
    let labels = normalize_with_frame(&local, &frame);
    let r = scene.pose.rotation;
    let similarity = SimilarityTransform::new(frame.extents.x, r, scene.pose.translation + r * frame.min);
    Ok((labels, CategoryPose9D { similarity, nonuniform_scales: frame.scales(), rms_residual: 0.0 }))
}

/// Demonstration log a tracker would have produced while the object followed
/// `script` (receptacle frame), with the receptacle seen at `receptacle` in the
/// camera frame.
pub fn synth_demo_log(
    script: &Trajectory,
    tracker: &TrackerModel,
    rng: &mut ChaCha8Rng,
    receptacle: &Pose,
    extrinsics: &Pose,
) -> Result<DemoLog> {
    script.validate()?;
    let observed: Vec<Pose> =
        script.waypoints.iter().map(|w| tracker.observe(&receptacle.compose(&w.pose), rng)).collect();
    let initial = observed[0];
    let inv = initial.inverse();
    let relative = script.waypoints.iter().zip(&observed).map(|(w, o)| (w.t, o.compose(&inv))).collect();
    Ok(DemoLog { extrinsics: *extrinsics, receptacle: *receptacle, initial, relative })
}

#[derive(Serialize, Deserialize)]
struct Labels {
    coords: Vec<[f64; 3]>,
    scales: [f64; 3],
    pose: PoseRecord,
    similarity_scale: f64,
}

#[derive(Serialize, Deserialize)]
pub struct SceneMeta {
    pub instance_id: String,
    pub scales: [f64; 3],
    pub pose: PoseRecord,
    pub table_height: f64,
    pub seed: u64,
}

/// Writes `scenes/<id>/{cloud.ply,labels.json,meta.json}` under `root`.
pub fn write_scene(root: &Path, id: &str, scene: &SyntheticScene) -> Result<()> {
    let dir = root.join("scenes").join(id);
    fs::create_dir_all(&dir).map_err(|e| Error::Io(e.to_string()))?;
    let (labels, gt) = emit_labels(scene)?;
    let labels = Labels {
        coords: labels.coords.iter().map(|c| [c.x, c.y, c.z]).collect(),
        scales: labels.scales.into(),
        pose: PoseRecord::from(&gt.object_pose()),
        similarity_scale: gt.similarity.scale,
    };
    let meta = SceneMeta {
        instance_id: scene.instance_id.clone(),
        scales: scene.scales.into(),
        pose: PoseRecord::from(&scene.pose),
        table_height: scene.table_height,
        seed: scene.seed,
    };
    let write = |name: &str, text: String| fs::write(dir.join(name), text).map_err(|e| Error::Io(e.to_string()));
    let json = |e: serde_json::Error| Error::Io(e.to_string());
    write("cloud.ply", write_ply(&scene.partial))?;
    write("labels.json", serde_json::to_string(&labels).map_err(json)?)?;
    write("meta.json", serde_json::to_string_pretty(&meta).map_err(json)?)
}
