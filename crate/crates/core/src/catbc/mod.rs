//! Closed-loop behavior cloning against a simulated plant, its open-loop variant,
//! the long-range transport planner and the task success rules.

mod plant;
mod success;
mod transport;

use std::collections::{HashMap, VecDeque};
use std::io::Write;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::demo::{symmetric_candidates, Trajectory};
use crate::error::{Error, Result};
use crate::geom::{Pose, PoseRecord, Vec3};
use crate::nunocs::SymmetryGroup;

pub use plant::{perturbation, project_motion, CollisionModel, Increment, PlantState, PENETRATION_TOL};
pub use success::{check_success, Verdict, CHECK_SLACK, MAX_RELEASE_DROP};
pub use transport::{transport_to_keypose, TransportParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams {
    pub goal_tol_trans: f64,
    pub goal_tol_rot: f64,
    pub max_step_trans: f64,
    pub max_step_rot: f64,
    /// Defaults to 50 ticks per subgoal.
    pub timeout_ticks: Option<usize>,
}

impl Default for ControlParams {
    fn default() -> Self {
        ControlParams {
            goal_tol_trans: 0.0005,
            goal_tol_rot: 0.5f64.to_radians(),
            max_step_trans: 0.001,
            max_step_rot: 1f64.to_radians(),
            timeout_ticks: None,
        }
    }
}

/// Simulated 6 DoF tracker: Gaussian pose noise and a fixed delay in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerModel {
    pub sigma_trans: f64,
    pub sigma_rot: f64,
    pub latency_ticks: usize,
    pub rate_hz: f64,
}

impl Default for TrackerModel {
    fn default() -> Self {
        TrackerModel { sigma_trans: 0.0, sigma_rot: 0.0, latency_ticks: 0, rate_hz: 10.0 }
    }
}

impl TrackerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_trans >= 0.0 && self.sigma_rot >= 0.0 && self.rate_hz > 0.0) {
            return Err(Error::InvalidGeometry(format!("invalid tracker model {self:?}")));
        }
        Ok(())
    }

    /// One noisy measurement of `pose`.
    pub fn observe(&self, pose: &Pose, rng: &mut ChaCha8Rng) -> Pose {
        match perturbation(rng, self.sigma_trans, self.sigma_rot) {
            Some(n) => Pose::new(n.rotation * pose.rotation, pose.translation + n.translation),
            None => *pose,
        }
    }
}

/// Scripted world-frame translation of the object at a given tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushEvent {
    pub tick: usize,
    pub offset: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DisturbanceModel {
    pub grasp_slip_trans: f64,
    pub grasp_slip_rot: f64,
    pub contact_slip_trans: f64,
    pub contact_slip_rot: f64,
    pub pushes: Vec<PushEvent>,
}

impl DisturbanceModel {
    pub fn validate(&self) -> Result<()> {
        let sig = [self.grasp_slip_trans, self.grasp_slip_rot, self.contact_slip_trans, self.contact_slip_rot];
        if sig.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidGeometry("disturbance sigmas must be non-negative".into()));
        }
        if self.pushes.windows(2).any(|w| w[1].tick < w[0].tick) {
            return Err(Error::InvalidGeometry("push events must be sorted by tick".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    Completed,
    Timeout,
}

/// State at the start of one control tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub tick: usize,
    pub true_pose: Pose,
    /// What the controller was given: the tracker output in closed loop, the
    /// commanded kinematic pose in open loop.
    pub believed: Pose,
    pub subgoal: usize,
    pub contact: bool,
}

#[derive(Serialize, Deserialize)]
struct TraceRecord {
    tick: usize,
    true_pose: PoseRecord,
    believed: PoseRecord,
    subgoal: usize,
    contact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    /// Highest subgoal index reached.
    pub subgoal_index: usize,
    pub ticks: usize,
    pub final_pose: Pose,
    pub termination: Termination,
    /// Distance from the tracked frame to the last target pose, modulo symmetry.
    pub final_error_trans: f64,
    pub final_error_rot: f64,
    pub verdict: Option<Verdict>,
    pub trace: Vec<TraceEntry>,
}

impl StepResult {
    /// Task checker result when available, otherwise whether the run completed.
    pub fn success(&self) -> bool {
        match &self.verdict {
            Some(v) => v.success,
            None => self.termination == Termination::Completed,
        }
    }

    pub fn trace_poses(&self) -> Vec<Pose> {
        self.trace.iter().map(|e| e.true_pose).collect()
    }

    pub fn write_trace_jsonl(&self, mut out: impl Write) -> Result<()> {
        for e in &self.trace {
            let rec = TraceRecord {
                tick: e.tick,
                true_pose: (&e.true_pose).into(),
                believed: (&e.believed).into(),
                subgoal: e.subgoal,
                contact: e.contact,
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Where the controller's pose estimate comes from.
pub enum Feedback<'a> {
    Tracker { model: &'a TrackerModel, rng: ChaCha8Rng },
    /// Integrate the commanded increments from the nominal start.
    Kinematic,
}

/// Closed-loop following of `target` with tracker feedback.
pub fn run_catbc(
    target: &Trajectory,
    plant: &mut PlantState,
    tracker: &TrackerModel,
    tracker_rng: ChaCha8Rng,
    disturbance: &DisturbanceModel,
    sym: &SymmetryGroup,
    params: &ControlParams,
) -> Result<StepResult> {
    tracker.validate()?;
    run_loop(target, plant, Feedback::Tracker { model: tracker, rng: tracker_rng }, disturbance, sym, params)
}

/// The same loop with the tracker disabled: the controller believes the object
/// moved exactly as commanded.
pub fn run_open_loop(
    target: &Trajectory,
    plant: &mut PlantState,
    disturbance: &DisturbanceModel,
    sym: &SymmetryGroup,
    params: &ControlParams,
) -> Result<StepResult> {
    run_loop(target, plant, Feedback::Kinematic, disturbance, sym, params)
}

fn within(a: &Pose, b: &Pose, params: &ControlParams) -> bool {
    a.translation_distance(b) <= params.goal_tol_trans && a.rotation_distance(b) <= params.goal_tol_rot
}

pub fn run_loop(
    target: &Trajectory,
    plant: &mut PlantState,
    mut feedback: Feedback<'_>,
    disturbance: &DisturbanceModel,
    sym: &SymmetryGroup,
    params: &ControlParams,
) -> Result<StepResult> {
    target.validate()?;
    disturbance.validate()?;
    if sym.is_empty() {
        return Err(Error::NoFeasibleSubgoal);
    }
    let goals = target.poses();
    let last = goals.len() - 1;
    let timeout = params.timeout_ticks.unwrap_or(50 * goals.len());
    let offset_inv = plant.estimate_offset.inverse();

    // Feasibility of subgoal `i` in symmetric form `k`, evaluated lazily.
    let mut feasible_cache: HashMap<(usize, usize), bool> = HashMap::new();
    let mut choose = |i: usize, est: &Pose, plant: &PlantState| -> Result<Pose> {
        for (k, cand) in symmetric_candidates(est, &goals[i], sym) {
            let ok = *feasible_cache
                .entry((i, k))
                .or_insert_with(|| !plant.model.penetrates(&plant.scene, &cand.compose(&offset_inv)));
            if ok {
                return Ok(cand);
            }
        }
        Err(Error::NoFeasibleSubgoal)
    };

    let mut kinematic = plant.believed;
    let mut observations: VecDeque<Pose> = VecDeque::new();
    let mut increments: VecDeque<Increment> = VecDeque::new();
    let mut trace = Vec::new();
    let mut index = 0usize;
    let mut termination = Termination::Timeout;
    let mut pushes = disturbance.pushes.iter().peekable();

    while plant.tick < timeout {
        let tick = plant.tick;
        let (raw, estimate) = match &mut feedback {
            Feedback::Kinematic => (kinematic, kinematic),
            Feedback::Tracker { model, rng } => {
                observations.push_back(model.observe(&plant.tracked_pose(), rng));
                let lag = model.latency_ticks;
                while observations.len() > lag + 1 {
                    observations.pop_front();
                }
                while increments.len() > lag {
                    increments.pop_front();
                }
                let raw = observations[0];
                // Replay the increments commanded since the delayed frame was taken.
                let skip = increments.len() + 1 - observations.len().min(increments.len() + 1);
                let est = increments.iter().skip(skip).fold(raw, |p, inc| inc.apply(&p));
                (raw, est)
            }
        };
        plant.believed = raw;

        let mut goal = choose(index, &estimate, plant)?;
        let mut done = false;
        while within(&estimate, &goal, params) {
            if index == last {
                done = true;
                break;
            }
            index += 1;
            goal = choose(index, &estimate, plant)?;
        }
        if done {
            termination = Termination::Completed;
            break;
        }

        trace.push(TraceEntry { tick, true_pose: plant.true_pose, believed: raw, subgoal: index, contact: plant.in_contact });

        let inc = Increment::toward(&estimate, &goal, params.max_step_trans, params.max_step_rot);
        kinematic = inc.apply(&kinematic);
        increments.push_back(inc);
        let mut contact = plant.apply(&inc);
        while let Some(p) = pushes.next_if(|p| p.tick <= tick) {
            if p.tick == tick {
                contact |= plant.apply(&Increment::translation(Vec3::from(p.offset)));
            }
        }
        if contact {
            contact |= plant.slip(disturbance.contact_slip_trans, disturbance.contact_slip_rot);
        }
        plant.in_contact = contact;
        plant.tick += 1;
    }

    let final_pose = plant.true_pose;
    let tracked = plant.tracked_pose();
    let best = symmetric_candidates(&tracked, &goals[last], sym)[0].1;
    Ok(StepResult {
        subgoal_index: index,
        ticks: plant.tick,
        final_pose,
        termination,
        final_error_trans: tracked.translation_distance(&best),
        final_error_rot: tracked.rotation_distance(&best),
        verdict: None,
        trace,
    })
}
