use super::sdf::SdfScene;
use crate::error::{Error, Result};
use crate::geom::{PointCloud, Pose, Vec3};

/// Per-point attention weights `1 - softmax(distance)` and the anchor index.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMap {
    pub weights: Vec<f64>,
    pub anchor_index: usize,
    pub timestamp: f64,
}

impl AttentionMap {
    /// Weights from precomputed receptacle distances. Exponentials are shifted by
    /// the maximum distance, which leaves the softmax unchanged.
    pub fn from_distances(distances: &[f64], timestamp: f64) -> AttentionMap {
        let max = distances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = distances.iter().map(|d| (d - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        let weights = exps.iter().map(|e| 1.0 - e / total).collect();
        // argmax of the weights == argmin of the distances; computing it on the
        // distances keeps the choice exact when weights round to the same value.
        let anchor_index = distances
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |b, (i, &d)| if d < b.1 { (i, d) } else { b })
            .0;
        AttentionMap { weights, anchor_index, timestamp }
    }

    pub fn complement_sum(&self) -> f64 {
        self.weights.iter().map(|w| 1.0 - w).sum()
    }
}

/// Attention of every model point placed by `pose` relative to the receptacle.
pub fn attention_heatmap(model: &PointCloud, pose: &Pose, scene: &SdfScene) -> AttentionMap {
    attention_at(model, pose, scene, 0.0)
}

pub fn attention_at(model: &PointCloud, pose: &Pose, scene: &SdfScene, timestamp: f64) -> AttentionMap {
    let d: Vec<f64> = model.points.iter().map(|p| scene.eval(&pose.transform_point(p))).collect();
    AttentionMap::from_distances(&d, timestamp)
}

/// Frame with the pose's orientation and its origin moved onto the anchor point.
pub fn anchor_frame(pose: &Pose, anchor: &Vec3) -> Pose {
    Pose::new(pose.rotation, pose.transform_point(anchor))
}

/// Carries a demo heatmap over to a novel instance through a demo→novel index map.
/// A novel point takes the largest weight among the demo points mapped onto it.
pub fn transfer_attention(map: &AttentionMap, demo_to_novel: &[usize], novel_len: usize) -> Result<AttentionMap> {
    let anchor = *demo_to_novel.get(map.anchor_index).ok_or(Error::MissingAnchorImage(map.anchor_index))?;
    if anchor >= novel_len {
        return Err(Error::MissingAnchorImage(map.anchor_index));
    }
    let mut weights = vec![0.0f64; novel_len];
    for (demo, &novel) in demo_to_novel.iter().enumerate() {
        if novel < novel_len {
            weights[novel] = weights[novel].max(map.weights[demo]);
        }
    }
    Ok(AttentionMap { weights, anchor_index: anchor, timestamp: map.timestamp })
}
