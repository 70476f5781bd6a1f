use super::pose::{Pose, Vec3};
use crate::error::{Error, Result};

/// A set of 3D points in meters, optionally carrying the index each point had
/// in the set it was derived from (mesh vertices, an uncropped scan, ...).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub source_indices: Option<Vec<usize>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        Self { points, source_indices: None }
    }

    pub fn with_sources(points: Vec<Vec3>, sources: Vec<usize>) -> Self {
        debug_assert_eq!(points.len(), sources.len());
        Self { points, source_indices: Some(sources) }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ensure_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyCloud)
        } else {
            Ok(())
        }
    }

    pub fn is_finite(&self) -> bool {
        self.points.iter().all(|p| p.iter().all(|v| v.is_finite()))
    }

    pub fn transformed(&self, pose: &Pose) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| pose.transform_point(p)).collect(),
            source_indices: self.source_indices.clone(),
        }
    }

    pub fn centroid(&self) -> Vec3 {
        let sum = self.points.iter().fold(Vec3::zeros(), |acc, p| acc + p);
        sum / self.points.len().max(1) as f64
    }

    /// Axis-aligned bounds `(min, max)`; `None` for an empty cloud.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (lo.inf(p), hi.sup(p))
        }))
    }

    /// Source index of point `i`, falling back to `i` itself.
    pub fn source_of(&self, i: usize) -> usize {
        self.source_indices.as_ref().map_or(i, |s| s[i])
    }
}

impl From<Vec<Vec3>> for PointCloud {
    fn from(points: Vec<Vec3>) -> Self {
        PointCloud::new(points)
    }
}
