//! Demonstration ingestion: frame conversion of tracked motion, keypose detection,
//! dense discretization and symmetry-aware subgoal selection.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::attention::SdfScene;
use crate::error::{Error, Result};
use crate::geom::{PointCloud, Pose, PoseRecord};
use crate::nunocs::SymmetryGroup;

pub const DEFAULT_KEYPOSE_DISTANCE: f64 = 0.05;
pub const DEFAULT_MIN_STEP: f64 = 0.002;
pub const DEFAULT_MIN_ANGLE_DEG: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub t: f64,
    pub pose: Pose,
}

/// Timestamped object poses, normally expressed in the receptacle frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub waypoints: Vec<Waypoint>,
    pub frame: String,
}

#[derive(Serialize, Deserialize)]
struct WaypointRecord {
    t: f64,
    q: [f64; 4],
    p: [f64; 3],
}

impl Trajectory {
    pub fn new(waypoints: Vec<Waypoint>, frame: impl Into<String>) -> Result<Self> {
        let traj = Trajectory { waypoints, frame: frame.into() };
        traj.validate()?;
        Ok(traj)
    }

    /// Receptacle-frame trajectory from poses sampled at a fixed rate.
    pub fn from_poses(poses: &[Pose], dt: f64) -> Result<Self> {
        Self::new(
            poses.iter().enumerate().map(|(i, p)| Waypoint { t: i as f64 * dt, pose: *p }).collect(),
            "receptacle",
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.waypoints.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        for w in self.waypoints.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::InvalidTrajectory(format!("timestamps not increasing at t={}", w[1].t)));
            }
        }
        if self.waypoints.iter().any(|w| !w.t.is_finite() || !w.pose.is_finite()) {
            return Err(Error::InvalidTrajectory("non-finite waypoint".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn poses(&self) -> Vec<Pose> {
        self.waypoints.iter().map(|w| w.pose).collect()
    }

    pub fn last(&self) -> &Waypoint {
        self.waypoints.last().expect("validated nonempty")
    }

    /// Waypoints from `start` on.
    pub fn tail(&self, start: usize) -> Trajectory {
        Trajectory { waypoints: self.waypoints[start..].to_vec(), frame: self.frame.clone() }
    }

    /// Applies `g` on the left of every pose (moves the whole trajectory).
    pub fn transformed(&self, g: &Pose) -> Trajectory {
        Trajectory {
            waypoints: self.waypoints.iter().map(|w| Waypoint { t: w.t, pose: g.compose(&w.pose) }).collect(),
            frame: self.frame.clone(),
        }
    }

    /// One JSON object per line: `{"t", "q": [w,x,y,z], "p": [x,y,z]}`.
    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for w in &self.waypoints {
            let rec = WaypointRecord { t: w.t, q: w.pose.wxyz(), p: w.pose.xyz() };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl(input: impl BufRead) -> Result<Trajectory> {
        let mut waypoints = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: WaypointRecord = serde_json::from_str(&line)?;
            waypoints.push(Waypoint { t: rec.t, pose: Pose::from_wxyz(rec.q, rec.p) });
        }
        Trajectory::new(waypoints, "receptacle")
    }
}

/// Tracked demonstration: everything in the camera frame except the extrinsics.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoLog {
    /// Camera-to-robot calibration.
    pub extrinsics: Pose,
    /// Receptacle pose in the camera frame.
    pub receptacle: Pose,
    /// Initial category-level object pose in the camera frame.
    pub initial: Pose,
    /// Object motion relative to the first frame, `(t, motion)`.
    pub relative: Vec<(f64, Pose)>,
}

#[derive(Serialize, Deserialize)]
struct LogHeader {
    extrinsics: PoseRecord,
    receptacle: PoseRecord,
    initial: PoseRecord,
}

#[derive(Serialize, Deserialize)]
struct LogFrame {
    t: f64,
    rel_q: [f64; 4],
    rel_p: [f64; 3],
}

impl DemoLog {
    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        let header = LogHeader {
            extrinsics: (&self.extrinsics).into(),
            receptacle: (&self.receptacle).into(),
            initial: (&self.initial).into(),
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for (t, m) in &self.relative {
            serde_json::to_writer(&mut out, &LogFrame { t: *t, rel_q: m.wxyz(), rel_p: m.xyz() })?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Single pass over the lines: header first, then one frame per line.
    pub fn read_jsonl(input: impl BufRead) -> Result<DemoLog> {
        let mut lines = input.lines().filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let header: LogHeader = match lines.next() {
            Some(l) => serde_json::from_str(&l?).map_err(|e| Error::FrameChain(format!("bad header: {e}")))?,
            None => return Err(Error::FrameChain("missing header record".into())),
        };
        let mut relative = Vec::new();
        for l in lines {
            let f: LogFrame = serde_json::from_str(&l?)?;
            relative.push((f.t, Pose::from_wxyz(f.rel_q, f.rel_p)));
        }
        Ok(DemoLog {
            extrinsics: (&header.extrinsics).into(),
            receptacle: (&header.receptacle).into(),
            initial: (&header.initial).into(),
            relative,
        })
    }
}

/// Composes each relative motion with the initial pose and re-expresses the
/// result in the receptacle frame: `rec^-1 · (motion · initial)`.
pub fn parse_demo(log: &DemoLog) -> Result<Trajectory> {
    for (name, p) in [("extrinsics", &log.extrinsics), ("receptacle", &log.receptacle), ("initial", &log.initial)] {
        if !p.is_finite() {
            return Err(Error::FrameChain(format!("non-finite {name} pose")));
        }
    }
    if log.relative.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let rec_inv = log.receptacle.inverse();
    let mut waypoints = Vec::with_capacity(log.relative.len());
    for (t, motion) in &log.relative {
        if !motion.is_finite() || !t.is_finite() {
            return Err(Error::FrameChain(format!("non-finite motion at t={t}")));
        }
        let cam = motion.compose(&log.initial);
        waypoints.push(Waypoint { t: *t, pose: rec_inv.compose(&cam) });
    }
    Trajectory::new(waypoints, "receptacle")
}

/// First waypoint whose closest model point is within `threshold` of the
/// receptacle surface; the last waypoint if none is.
pub fn detect_keypose(traj: &Trajectory, model: &PointCloud, scene: &SdfScene, threshold: f64) -> usize {
    let distances: Vec<f64> =
        traj.waypoints.iter().map(|w| scene.min_distance(&model.points, &w.pose).1).collect();
    keypose_from_distances(&distances, threshold)
}

pub fn keypose_from_distances(distances: &[f64], threshold: f64) -> usize {
    distances.iter().position(|&d| d <= threshold).unwrap_or(distances.len().saturating_sub(1))
}

/// Greedy thinning: keeps the first waypoint, every waypoint at least `min_step`
/// meters or `min_angle` radians from the last kept one, and the final waypoint.
pub fn discretize(traj: &Trajectory, min_step: f64, min_angle: f64) -> Trajectory {
    let wps = &traj.waypoints;
    if wps.len() <= 1 {
        return traj.clone();
    }
    let mut kept = vec![wps[0]];
    for w in &wps[1..wps.len() - 1] {
        let last = kept.last().expect("nonempty");
        if w.pose.translation_distance(&last.pose) >= min_step || w.pose.rotation_distance(&last.pose) >= min_angle {
            kept.push(*w);
        }
    }
    kept.push(*wps.last().expect("nonempty"));
    Trajectory { waypoints: kept, frame: traj.frame.clone() }
}

/// Symmetry-equivalent forms `subgoal · Q`, ordered by rotation distance to
/// `current`, then translation distance, then group order.
pub fn symmetric_candidates(current: &Pose, subgoal: &Pose, sym: &SymmetryGroup) -> Vec<(usize, Pose)> {
    let mut keyed: Vec<(f64, f64, usize, Pose)> = sym
        .rotations
        .iter()
        .enumerate()
        .map(|(k, q)| {
            let cand = subgoal.compose(&Pose::from_rotation(*q));
            (cand.rotation_distance(current), cand.translation_distance(current), k, cand)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    keyed.into_iter().map(|(_, _, k, p)| (k, p)).collect()
}

/// First feasible symmetric form of `subgoal`, in [`symmetric_candidates`] order.
pub fn select_symmetric_subgoal(
    current: &Pose,
    subgoal: &Pose,
    sym: &SymmetryGroup,
    mut feasible: impl FnMut(&Pose) -> bool,
) -> Result<Pose> {
    symmetric_candidates(current, subgoal, sym)
        .into_iter()
        .map(|(_, p)| p)
        .find(|p| feasible(p))
        .ok_or(Error::NoFeasibleSubgoal)
}
