//! Non-uniform normalized object coordinates: every instance of a category is
//! squeezed per axis into the unit cube, with the per-axis extents kept as a scale
//! triple normalized by the first axis.

mod bins;
mod loss;
mod pose9d;
mod predict;
mod symmetry;

pub use bins::{decode_bins, encode_bins, BinEncoding, BinDistributions, DEFAULT_BINS};
pub use loss::{nunocs_loss, scale_loss, total_loss};
pub use pose9d::{solve_pose9d, CategoryPose9D};
pub use predict::{
    MatchInfo, NunocsPredictor, OraclePredictor, Template, TemplateLibrary, TemplateMatcher,
};
pub use symmetry::SymmetryGroup;

use crate::error::{Error, Result};
use crate::geom::{PointCloud, Vec3};

/// Smallest per-axis span accepted by [`normalize_to_nunocs`], meters.
pub const MIN_EXTENT: f64 = 1e-9;

/// Normalized coordinates of a point set plus the instance's scale triple `(1, a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NunocsCloud {
    pub coords: Vec<Vec3>,
    pub scales: Vec3,
    pub source_indices: Vec<usize>,
}

impl NunocsCloud {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// `s ∘ c` for every coordinate.
    pub fn scaled_coords(&self) -> Vec<Vec3> {
        self.coords.iter().map(|c| c.component_mul(&self.scales)).collect()
    }

    pub fn as_cloud(&self) -> PointCloud {
        PointCloud::new(self.coords.clone())
    }
}

/// Per-axis affine map between an instance frame and the unit cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationFrame {
    pub min: Vec3,
    pub extents: Vec3,
}

impl NormalizationFrame {
    pub fn from_bounds(min: Vec3, max: Vec3) -> Result<Self> {
        let extents = max - min;
        for axis in 0..3 {
            if !(extents[axis] > MIN_EXTENT) {
                return Err(Error::DegenerateExtent { axis, extent: extents[axis] });
            }
        }
        Ok(NormalizationFrame { min, extents })
    }

    /// Frame of a centered box with the given extents.
    pub fn centered(extents: Vec3) -> Result<Self> {
        Self::from_bounds(-extents * 0.5, extents * 0.5)
    }

    pub fn normalize(&self, p: &Vec3) -> Vec3 {
        (p - self.min).component_div(&self.extents)
    }

    /// Like [`normalize`](Self::normalize) but clamped into the unit cube, for
    /// points known to lie inside the frame's box up to rounding.
    pub fn normalize_clamped(&self, p: &Vec3) -> Vec3 {
        self.normalize(p).map(|v| v.clamp(0.0, 1.0))
    }

    pub fn denormalize(&self, c: &Vec3) -> Vec3 {
        self.min + c.component_mul(&self.extents)
    }

    pub fn scales(&self) -> Vec3 {
        self.extents / self.extents.x
    }

    pub fn center(&self) -> Vec3 {
        self.min + self.extents * 0.5
    }
}

/// Normalizes a cloud by its own bounding box.
pub fn normalize_to_nunocs(cloud: &PointCloud) -> Result<(NunocsCloud, NormalizationFrame)> {
    let (lo, hi) = cloud.bounds().ok_or(Error::EmptyCloud)?;
    let frame = NormalizationFrame::from_bounds(lo, hi)?;
    Ok((normalize_with_frame(cloud, &frame), frame))
}

/// Normalizes `cloud` in a given frame, e.g. the bounding box of the full model
/// when `cloud` is only a partial view of it.
pub fn normalize_with_frame(cloud: &PointCloud, frame: &NormalizationFrame) -> NunocsCloud {
    NunocsCloud {
        coords: cloud.points.iter().map(|p| frame.normalize_clamped(p)).collect(),
        scales: frame.scales(),
        source_indices: (0..cloud.len()).map(|i| cloud.source_of(i)).collect(),
    }
}
