//! Dense cross-instance correspondence through normalized coordinates, and
//! reprojection of a demonstrated trajectory onto a novel instance.

use std::io::Write;

use nalgebra::UnitQuaternion;

use crate::attention::{attention_at, SdfScene};
use crate::demo::{Trajectory, Waypoint};
use crate::error::{Error, Result};
use crate::geom::{KdTree, PointCloud, Pose};
use crate::nunocs::{CategoryPose9D, NunocsCloud};

/// Every demo point's nearest novel point in normalized space.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseCorrespondence {
    pub demo_to_novel: Vec<usize>,
    pub residuals: Vec<f64>,
    pub novel_len: usize,
}

impl DenseCorrespondence {
    pub fn identity(n: usize) -> Self {
        DenseCorrespondence { demo_to_novel: (0..n).collect(), residuals: vec![0.0; n], novel_len: n }
    }

    /// Demo indices landing on each novel point.
    pub fn inverse(&self) -> Vec<Vec<usize>> {
        let mut inv = vec![Vec::new(); self.novel_len];
        for (d, &n) in self.demo_to_novel.iter().enumerate() {
            inv[n].push(d);
        }
        inv
    }

    pub fn image(&self, demo_index: usize) -> Result<usize> {
        self.demo_to_novel.get(demo_index).copied().ok_or(Error::MissingAnchorImage(demo_index))
    }

    /// CSV rows `demo_idx,novel_idx,residual` with a header line.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "demo_idx,novel_idx,residual")?;
        for (d, (n, r)) in self.demo_to_novel.iter().zip(&self.residuals).enumerate() {
            writeln!(out, "{d},{n},{r:?}")?;
        }
        Ok(())
    }
}

pub fn build_correspondence(demo: &NunocsCloud, novel: &NunocsCloud) -> Result<DenseCorrespondence> {
    if demo.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let tree = KdTree::new(&novel.coords)?;
    let (demo_to_novel, residuals) = demo.coords.iter().map(|c| tree.nearest(c)).unzip();
    Ok(DenseCorrespondence { demo_to_novel, residuals, novel_len: novel.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReprojectionMode {
    /// Pin the attended anchor of the novel instance onto the demo anchor's
    /// world position at every waypoint.
    Anchored,
    /// Keep the object origin (bounding-box center) on the demo trajectory.
    /// Diagnostic only: it ignores size differences between the instances.
    CentroidFrame,
}

/// Orientation offset between two instances' canonical frames,
/// `R_demo · R_novel^-1`.
pub fn relative_orientation(demo: &CategoryPose9D, novel: &CategoryPose9D) -> UnitQuaternion<f64> {
    demo.rotation() * novel.rotation().inverse()
}

/// Target trajectory for a novel instance.
///
/// At each waypoint the demo anchor `p*` (closest model point to the receptacle)
/// is mapped to the novel anchor `q*`; the target keeps orientation `R·ΔR` and is
/// translated so that `q*` lands where `p*` was: `t' = R p* + t - R' q*`.
pub fn reproject_trajectory(
    demo_traj: &Trajectory,
    demo_model: &PointCloud,
    novel_model: &PointCloud,
    corr: &DenseCorrespondence,
    scene: &SdfScene,
    delta_r: &UnitQuaternion<f64>,
    mode: ReprojectionMode,
) -> Result<Trajectory> {
    if demo_traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut waypoints = Vec::with_capacity(demo_traj.len());
    for w in &demo_traj.waypoints {
        let rot = w.pose.rotation * delta_r;
        let pose = match mode {
            ReprojectionMode::CentroidFrame => Pose::new(rot, w.pose.translation),
            ReprojectionMode::Anchored => {
                let attn = attention_at(demo_model, &w.pose, scene, w.t);
                let novel_idx = corr.image(attn.anchor_index)?;
                let q = novel_model
                    .points
                    .get(novel_idx)
                    .ok_or(Error::MissingAnchorImage(attn.anchor_index))?;
                let world_anchor = w.pose.transform_point(&demo_model.points[attn.anchor_index]);
                Pose::new(rot, world_anchor - rot * q)
            }
        };
        waypoints.push(Waypoint { t: w.t, pose });
    }
    Ok(Trajectory { waypoints, frame: demo_traj.frame.clone() })
}
