use nalgebra::UnitQuaternion;

use super::NunocsCloud;
use crate::error::{Error, Result};
use crate::geom::Vec3;

pub const DEFAULT_BINS: usize = 100;

/// Per-point, per-axis bin indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinEncoding {
    pub bins: Vec<[usize; 3]>,
    pub count: usize,
}

/// `min(floor(c B), B - 1)` for one coordinate.
pub fn bin_index(c: f64, count: usize) -> usize {
    ((c * count as f64).floor().max(0.0) as usize).min(count - 1)
}

pub fn encode_coords(coords: &[Vec3], count: usize) -> BinEncoding {
    assert!(count >= 2, "bin count must be at least 2");
    BinEncoding {
        bins: coords
            .iter()
            .map(|c| [bin_index(c.x, count), bin_index(c.y, count), bin_index(c.z, count)])
            .collect(),
        count,
    }
}

pub fn encode_bins(nunocs: &NunocsCloud, count: usize) -> BinEncoding {
    encode_coords(&nunocs.coords, count)
}

/// Bin centers `(index + 0.5) / B`.
pub fn decode_bins(enc: &BinEncoding) -> Vec<Vec3> {
    let b = enc.count as f64;
    enc.bins
        .iter()
        .map(|ix| Vec3::new((ix[0] as f64 + 0.5) / b, (ix[1] as f64 + 0.5) / b, (ix[2] as f64 + 0.5) / b))
        .collect()
}

/// Predicted categorical distributions over `count` bins, stored point-major then
/// axis then bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinDistributions {
    pub count: usize,
    pub probs: Vec<f64>,
}

impl BinDistributions {
    pub fn points(&self) -> usize {
        self.probs.len() / (3 * self.count)
    }

    pub fn row(&self, point: usize, axis: usize) -> &[f64] {
        let start = (point * 3 + axis) * self.count;
        &self.probs[start..start + self.count]
    }

    pub fn uniform(points: usize, count: usize) -> Self {
        BinDistributions { count, probs: vec![1.0 / count as f64; points * 3 * count] }
    }

    /// Distributions putting `1 - eps` on the encoded bin and spreading `eps` evenly
    /// over the rest.
    pub fn smoothed_one_hot(enc: &BinEncoding, eps: f64) -> Self {
        let b = enc.count;
        let off = if b > 1 { eps / (b - 1) as f64 } else { 0.0 };
        let mut probs = vec![off; enc.bins.len() * 3 * b];
        for (p, ix) in enc.bins.iter().enumerate() {
            for axis in 0..3 {
                probs[(p * 3 + axis) * b + ix[axis]] = 1.0 - eps;
            }
        }
        BinDistributions { count: b, probs }
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        for point in 0..self.points() {
            for axis in 0..3 {
                let row = self.row(point, axis);
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > tol || row.iter().any(|p| !(*p >= 0.0)) {
                    return Err(Error::InvalidDistribution { point, axis, sum });
                }
            }
        }
        Ok(())
    }

    /// Applies a rotation about the cube pivot to the prediction itself.
    ///
    /// Only rotations that map the bin lattice onto itself (signed axis
    /// permutations, e.g. quarter turns) have an exact action on bin
    /// distributions; anything else is rejected.
    pub fn rotated(&self, q: &UnitQuaternion<f64>) -> Result<Self> {
        let m = q.to_rotation_matrix().into_inner();
        // new[i] = sign * old[src] (about the pivot)
        let mut map = [(0usize, 1.0f64); 3];
        for (i, slot) in map.iter_mut().enumerate() {
            let mut found = None;
            for j in 0..3 {
                let v = m[(i, j)];
                if (v.abs() - 1.0).abs() < 1e-9 {
                    found = Some((j, v.signum()));
                } else if v.abs() > 1e-9 {
                    return Err(Error::InvalidGeometry("rotation does not preserve the bin lattice".into()));
                }
            }
            *slot = found.ok_or_else(|| Error::InvalidGeometry("rotation does not preserve the bin lattice".into()))?;
        }
        let b = self.count;
        let mut probs = vec![0.0; self.probs.len()];
        for point in 0..self.points() {
            for (axis, &(src, sign)) in map.iter().enumerate() {
                let from = self.row(point, src);
                let to = &mut probs[(point * 3 + axis) * b..(point * 3 + axis + 1) * b];
                for (k, v) in from.iter().enumerate() {
                    let k2 = if sign > 0.0 { k } else { b - 1 - k };
                    to[k2] = *v;
                }
            }
        }
        Ok(BinDistributions { count: b, probs })
    }
}
