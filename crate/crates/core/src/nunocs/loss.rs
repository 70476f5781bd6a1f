use super::bins::{bin_index, BinDistributions};
use super::{NunocsCloud, SymmetryGroup};
use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Row-sum tolerance for predicted distributions.
pub const DISTRIBUTION_TOL: f64 = 1e-6;

/// Symmetry-aware classification loss: the smallest, over group elements `Q`, of
/// the summed natural-log cross-entropy between the one-hot bins of `Q` applied to
/// the ground truth and the predicted distributions.
pub fn nunocs_loss(pred: &BinDistributions, gt: &NunocsCloud, sym: &SymmetryGroup) -> Result<f64> {
    if pred.points() != gt.len() {
        return Err(Error::SizeMismatch(pred.points(), gt.len()));
    }
    pred.validate(DISTRIBUTION_TOL)?;
    let b = pred.count;
    let mut best = f64::INFINITY;
    for k in 0..sym.len() {
        let mut sum = 0.0;
        for (p, c) in gt.coords.iter().enumerate() {
            let rc = sym.apply(k, c);
            for axis in 0..3 {
                let bin = bin_index(rc[axis].clamp(0.0, 1.0), b);
                sum -= pred.row(p, axis)[bin].ln();
            }
        }
        best = best.min(sum);
    }
    Ok(best)
}

/// Euclidean distance between predicted and ground-truth scale triples.
pub fn scale_loss(pred: &Vec3, gt: &Vec3) -> f64 {
    (pred - gt).norm()
}

pub fn total_loss(nunocs_term: f64, scale_term: f64, w_nunocs: f64, w_scale: f64) -> f64 {
    w_nunocs * nunocs_term + w_scale * scale_term
}
