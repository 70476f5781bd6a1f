//! Scenario preparation (demo, perception, reprojection) and per-seed episodes.

use catbc_core::attention::SdfScene;
use catbc_core::catbc::{
    check_success, run_catbc, run_open_loop, transport_to_keypose, CollisionModel, PlantState, StepResult, Termination,
};
use catbc_core::correspond::{build_correspondence, relative_orientation, reproject_trajectory, DenseCorrespondence, ReprojectionMode};
use catbc_core::demo::{detect_keypose, discretize, parse_demo, DemoLog, Trajectory};
use catbc_core::geom::{yaw, PointCloud, Pose, Vec3};
use catbc_core::nunocs::{
    normalize_to_nunocs, solve_pose9d, CategoryPose9D, NunocsCloud, SymmetryGroup, Template, TemplateLibrary, TemplateMatcher,
};
use catbc_core::rng::{derive_seed, stream};
use catbc_core::shapes::{SamplingGrid, ShapeSpec};
use catbc_core::simgen::{render_partial, synth_demo_log, Camera};
use catbc_core::tasks::{demo_script, sample_start_pose, TaskGeometry};
use catbc_core::{Error, TriangleMesh};
use rand::Rng;
use rayon::prelude::*;

use crate::config::{Category, Policy, PredictorMode, ScenarioConfig};
use crate::error::CliResult;

/// Model sampling used for collision, attention and correspondence. 144 angular
/// samples keep the point set invariant under the 5 degree symmetry steps.
pub const MODEL_GRID: SamplingGrid = SamplingGrid { angular: 144, wall_rings: 6, face_rings: 4 };
pub const MESH_SEGMENTS: usize = 48;

// Scenario-level stream indices, far from the run indices.
const DEMO_STREAM: u64 = u64::MAX;
const OBSERVE_STREAM: u64 = u64::MAX - 1;
const TEMPLATE_STREAM: u64 = u64::MAX - 2;

/// Where the demonstration camera saw the receptacle, and its calibration.
pub fn demo_camera() -> (Pose, Pose) {
    let receptacle = Pose::new(
        nalgebra::UnitQuaternion::from_euler_angles(2.4, 0.1, -0.3),
        Vec3::new(0.03, -0.02, 0.55),
    );
    let extrinsics = Pose::new(nalgebra::UnitQuaternion::from_euler_angles(-2.4, 0.0, 1.2), Vec3::new(0.4, 0.0, 0.6));
    (receptacle, extrinsics)
}

/// Novel-instance perception: how the tracked frame sits on the object and what
/// the controller believes the object looks like.
#[derive(Debug, Clone)]
pub struct Perception {
    /// Pose of the tracked (estimated canonical) frame in the true model frame.
    pub estimate_offset: Pose,
    /// Estimated model in the tracked frame.
    pub model: PointCloud,
    pub nunocs: NunocsCloud,
    /// 9D pose of the canonical cube in the tracked frame.
    pub pose9d: CategoryPose9D,
    /// Observation the estimate came from, when one was rendered.
    pub observed: Option<PointCloud>,
}

/// Deterministic template library: `count` radial/axial variants of the category.
pub fn category_templates(category: Category, count: usize, seed: u64) -> CliResult<TemplateLibrary> {
    let mut rng = stream(seed, TEMPLATE_STREAM);
    let mut templates = Vec::with_capacity(count);
    for i in 0..count {
        let (radial, axial) =
            if i == 0 { (1.0, 1.0) } else { (rng.random_range(0.75..1.33), rng.random_range(0.75..1.33)) };
        let mesh = category.instance(radial, axial).mesh(MESH_SEGMENTS);
        templates.push(Template::from_mesh(format!("{}_{i:02}", category.name()), &mesh)?);
    }
    Ok(TemplateLibrary {
        category: category.name().to_string(),
        symmetry: SymmetryGroup::z_rotations(5.0),
        z_step_deg: Some(5.0),
        templates,
    })
}

fn oracle_perception(points: &PointCloud) -> CliResult<Perception> {
    let (nunocs, _) = normalize_to_nunocs(points)?;
    let pose9d = solve_pose9d(&nunocs, points)?;
    Ok(Perception { estimate_offset: Pose::identity(), model: points.clone(), nunocs, pose9d, observed: None })
}

/// Renders the novel instance resting upright at a seeded yaw, matches it against
/// the template library and fits the 9D pose.
fn matcher_perception(
    shape: &ShapeSpec,
    library: TemplateLibrary,
    canonical: &NunocsCloud,
    seed: u64,
) -> CliResult<Perception> {
    let mut rng = stream(seed, OBSERVE_STREAM);
    let truth = Pose::new(yaw(rng.random_range(0.0..std::f64::consts::TAU)), Vec3::new(0.0, 0.0, shape.half_height()));
    let partial = render_partial(&shape.mesh(MESH_SEGMENTS), &truth, &Camera::default())?;
    let matcher = TemplateMatcher::new(library);
    let (info, assign) = matcher.search(&partial)?;
    let tpl = &matcher.library.templates[info.template];
    // The object rests on the table at z = 0 and its top is in view, so the
    // vertical extent is measured directly instead of fitted.
    let top = partial.points.iter().map(|p| p.z).fold(f64::NEG_INFINITY, f64::max);
    let mut axis_scale = info.axis_scale;
    axis_scale.z = top / tpl.frame.extents.z;
    let extents = tpl.frame.extents.component_mul(&axis_scale);
    let observed_nunocs = NunocsCloud {
        coords: assign.iter().map(|&j| tpl.coords[j]).collect(),
        scales: extents / extents.x,
        source_indices: (0..partial.len()).collect(),
    };
    let world = solve_pose9d(&observed_nunocs, &partial)?;
    // Keep only the yaw of the fit and put the bottom on the table.
    let r = world.rotation().to_rotation_matrix();
    let psi = r[(1, 0)].atan2(r[(0, 0)]);
    let center = world.object_pose().translation;
    let upright = Pose::new(yaw(psi), Vec3::new(center.x, center.y, 0.5 * top));
    let estimate_offset = truth.inverse().compose(&upright);
    // Estimated model in the tracked frame: the category's canonical coordinates
    // stretched to the estimated extents.
    let model = PointCloud::new(
        canonical.coords.iter().map(|c| (c - Vec3::new(0.5, 0.5, 0.5)).component_mul(&extents)).collect(),
    );
    let nunocs = NunocsCloud { scales: observed_nunocs.scales, ..canonical.clone() };
    let pose9d = solve_pose9d(&nunocs, &model)?;
    Ok(Perception { estimate_offset, model, nunocs, pose9d, observed: Some(partial) })
}

/// `canonical` holds the category's normalized model coordinates (from the
/// demonstrated instance); the matcher builds its model estimate from them.
pub fn perceive(cfg: &ScenarioConfig, true_points: &PointCloud, canonical: &NunocsCloud) -> CliResult<Perception> {
    match &cfg.predictor {
        PredictorMode::Oracle => oracle_perception(true_points),
        PredictorMode::Matcher { templates, count } => {
            let library = match templates {
                Some(dir) => TemplateLibrary::load(dir)?,
                None => category_templates(cfg.category, *count, cfg.seed)?,
            };
            matcher_perception(&cfg.novel_shape(), library, canonical, cfg.seed)
        }
    }
}

/// Synthesized demonstration log and the receptacle-frame trajectory parsed from it.
pub fn demonstration(cfg: &ScenarioConfig) -> CliResult<(DemoLog, Trajectory)> {
    let shape = cfg.category.base_shape();
    let geometry = TaskGeometry::for_object(cfg.task, &shape, cfg.clearance)?;
    let script = demo_script(&shape, &geometry)?;
    let (receptacle, extrinsics) = demo_camera();
    let mut rng = stream(cfg.seed, DEMO_STREAM);
    let log = synth_demo_log(&script, &cfg.demo_tracker, &mut rng, &receptacle, &extrinsics)?;
    let traj = parse_demo(&log)?;
    Ok((log, traj))
}

/// Everything shared by the runs of one scenario.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ScenarioConfig,
    pub novel_shape: ShapeSpec,
    pub novel_geometry: TaskGeometry,
    pub novel_scene: SdfScene,
    pub demo_log: DemoLog,
    pub demo_traj: Trajectory,
    pub perception: Perception,
    pub correspondence: DenseCorrespondence,
    /// Demonstration reprojected onto the novel instance, in the tracked frame.
    pub target: Trajectory,
    pub keypose: usize,
    pub sym: SymmetryGroup,
    /// True geometry, true model frame.
    pub plant_model: CollisionModel,
    /// Estimated geometry, tracked frame.
    pub planning_model: CollisionModel,
}

pub fn prepare(cfg: &ScenarioConfig) -> CliResult<Prepared> {
    let demo_shape = cfg.category.base_shape();
    let demo_geometry = TaskGeometry::for_object(cfg.task, &demo_shape, cfg.clearance)?;
    let demo_scene = demo_geometry.scene()?;
    let (demo_log, demo_traj) = demonstration(cfg)?;
    let demo_points = demo_shape.sample(&MODEL_GRID);
    let (demo_nunocs, _) = normalize_to_nunocs(&demo_points)?;
    let demo_pose9d = solve_pose9d(&demo_nunocs, &demo_points)?;

    let novel_shape = cfg.novel_shape();
    let novel_geometry = TaskGeometry::for_object(cfg.task, &novel_shape, cfg.clearance)?;
    let novel_scene = novel_geometry.scene()?;
    let true_points = novel_shape.sample(&MODEL_GRID);
    let perception = perceive(cfg, &true_points, &demo_nunocs)?;

    let correspondence = build_correspondence(&demo_nunocs, &perception.nunocs)?;
    let delta_r = relative_orientation(&demo_pose9d, &perception.pose9d);
    let mode = match cfg.policy {
        Policy::Centroid => ReprojectionMode::CentroidFrame,
        Policy::Closed | Policy::Open => ReprojectionMode::Anchored,
    };
    let target = reproject_trajectory(
        &demo_traj,
        &demo_points,
        &perception.model,
        &correspondence,
        &demo_scene,
        &delta_r,
        mode,
    )?;
    let keypose = detect_keypose(&target, &perception.model, &novel_scene, cfg.keypose_distance);
    let sym = match cfg.category {
        Category::Gear | Category::Battery => SymmetryGroup::z_rotations(cfg.symmetry_step.to_degrees()),
    };
    Ok(Prepared {
        config: cfg.clone(),
        novel_shape,
        novel_geometry,
        novel_scene,
        demo_log,
        demo_traj,
        planning_model: CollisionModel::new(perception.model.points.clone()),
        perception,
        correspondence,
        target,
        keypose,
        sym,
        plant_model: CollisionModel::new(true_points.points),
    })
}

/// Outcome of one seeded run.
#[derive(Debug, Clone)]
pub struct Episode {
    pub run: usize,
    pub seed: u64,
    pub policy: Policy,
    pub subgoals: usize,
    /// `None` when no symmetric form of some subgoal was collision-free.
    pub result: Option<StepResult>,
}

impl Episode {
    pub fn success(&self) -> bool {
        self.result.as_ref().is_some_and(|r| r.success())
    }

    pub fn ticks(&self) -> usize {
        self.result.as_ref().map_or(0, |r| r.ticks)
    }

    pub fn final_error(&self) -> (f64, f64) {
        self.result.as_ref().map_or((f64::NAN, f64::NAN), |r| (r.final_error_trans, r.final_error_rot))
    }
}

impl Prepared {
    pub fn run_seed(&self, run: usize) -> u64 {
        derive_seed(self.config.seed, run as u64)
    }

    /// Full path for one run: transport from the start pose to the keypose, then
    /// the reprojected last inch, discretized.
    pub fn plan(&self, start_tracked: &Pose) -> CliResult<Trajectory> {
        let key = self.target.waypoints[self.keypose].pose;
        // The estimated geometry may sink slightly into the table at the start;
        // plan from just above it.
        let mut start = *start_tracked;
        let sink = self.planning_model.min_distance(&self.novel_scene, &start);
        if sink < 0.0 {
            start.translation.z -= sink;
        }
        let start_tracked = &start;
        let transport = transport_to_keypose(
            start_tracked,
            &key,
            &self.planning_model,
            &self.novel_scene,
            None,
            &self.config.transport,
        )?;
        let mut poses = transport.poses();
        poses.extend(self.target.waypoints[self.keypose + 1..].iter().map(|w| w.pose));
        let full = Trajectory::from_poses(&poses, self.config.transport.dt)?;
        Ok(discretize(&full, self.config.min_step, self.config.min_angle))
    }

    pub fn start_pose(&self, run: usize) -> Pose {
        let mut rng = stream(self.run_seed(run), 0);
        sample_start_pose(&self.novel_shape, &self.novel_geometry, &mut rng)
    }

    pub fn episode(&self, run: usize) -> CliResult<Episode> {
        let cfg = &self.config;
        let seed = self.run_seed(run);
        let start = self.start_pose(run);
        let offset = self.perception.estimate_offset;
        let nominal_tracked = start.compose(&offset);
        let path = self.plan(&nominal_tracked)?;
        let d = &cfg.disturbance;
        let mut plant = PlantState::new(
            self.novel_scene.clone(),
            self.plant_model.clone(),
            start,
            d.grasp_slip_trans,
            d.grasp_slip_rot,
            stream(seed, 1),
        );
        plant.estimate_offset = offset;
        plant.believed = nominal_tracked;
        let outcome = match cfg.policy {
            Policy::Open => run_open_loop(&path, &mut plant, d, &self.sym, &cfg.control),
            Policy::Closed | Policy::Centroid => {
                run_catbc(&path, &mut plant, &cfg.tracker, stream(seed, 2), d, &self.sym, &cfg.control)
            }
        };
        let result = match outcome {
            Ok(mut r) => {
                let verdict = check_success(&self.novel_geometry, &r.final_pose, &r.trace_poses())?;
                r.verdict = Some(verdict);
                Some(r)
            }
            Err(Error::NoFeasibleSubgoal) => None,
            Err(e) => return Err(e.into()),
        };
        Ok(Episode { run, seed, policy: cfg.policy, subgoals: path.len(), result })
    }

    /// All configured runs, in parallel, ordered by run index.
    pub fn episodes(&self) -> CliResult<Vec<Episode>> {
        (0..self.config.runs).into_par_iter().map(|i| self.episode(i)).collect()
    }
}

pub fn termination_name(e: &Episode) -> &'static str {
    match e.result.as_ref().map(|r| r.termination) {
        Some(Termination::Completed) => "completed",
        Some(Termination::Timeout) => "timeout",
        None => "infeasible",
    }
}

/// Mesh of the novel instance, for writing alongside outputs.
pub fn novel_mesh(cfg: &ScenarioConfig) -> TriangleMesh {
    cfg.novel_shape().mesh(MESH_SEGMENTS)
}
