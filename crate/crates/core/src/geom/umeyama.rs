//! Closed-form least-squares similarity alignment between corresponding point sets.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion};

use super::cloud::PointCloud;
use super::pose::Vec3;
use super::similarity::SimilarityTransform;
use crate::error::{Error, Result};

/// Relative threshold on the second singular value of the source covariance
/// below which the source is treated as collinear.
const RANK_TOL: f64 = 1e-12;

/// Similarity `(s, R, t)` minimizing `sum |dst_i - (s R src_i + t)|^2` with uniform weights.
///
/// Scale uses the source variance normalization; a reflection in the SVD solution is
/// replaced by a proper rotation by flipping the smallest singular direction.
pub fn umeyama_similarity(src: &PointCloud, dst: &PointCloud) -> Result<SimilarityTransform> {
    umeyama_points(&src.points, &dst.points)
}

pub fn umeyama_points(src: &[Vec3], dst: &[Vec3]) -> Result<SimilarityTransform> {
    if src.len() != dst.len() {
        return Err(Error::SizeMismatch(src.len(), dst.len()));
    }
    let n = src.len();
    if n < 3 {
        return Err(Error::DegenerateInput(format!("need at least 3 points, got {n}")));
    }
    let inv_n = 1.0 / n as f64;
    let mu_src = src.iter().fold(Vec3::zeros(), |a, p| a + p) * inv_n;
    let mu_dst = dst.iter().fold(Vec3::zeros(), |a, p| a + p) * inv_n;

    let mut cov = Matrix3::zeros();
    let mut src_cov = Matrix3::zeros();
    let mut var_src = 0.0;
    for (s, d) in src.iter().zip(dst) {
        let cs = s - mu_src;
        let cd = d - mu_dst;
        cov += cd * cs.transpose();
        src_cov += cs * cs.transpose();
        var_src += cs.norm_squared();
    }
    cov *= inv_n;
    src_cov *= inv_n;
    var_src *= inv_n;

    let mut sv = src_cov.symmetric_eigenvalues().as_slice().to_vec();
    sv.sort_by(|a, b| b.total_cmp(a));
    if !(sv[0] > 0.0) || sv[1] <= RANK_TOL * sv[0] {
        return Err(Error::DegenerateInput("source points are collinear".into()));
    }

    let svd = cov.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::DegenerateInput("svd failed".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::DegenerateInput("svd failed".into()))?;
    let d = svd.singular_values;

    let mut signs = Vec3::new(1.0, 1.0, 1.0);
    if (u.determinant() * v_t.determinant()) < 0.0 {
        // nalgebra sorts singular values in descending order
        signs.z = -1.0;
    }
    let r = u * Matrix3::from_diagonal(&signs) * v_t;
    let scale = d.dot(&signs) / var_src;
    let rotation = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(r));
    let translation = mu_dst - scale * (rotation * mu_src);
    Ok(SimilarityTransform::new(scale, rotation, translation))
}

/// Root-mean-square residual of `dst_i - T(src_i)`.
pub fn rms_residual(t: &SimilarityTransform, src: &[Vec3], dst: &[Vec3]) -> f64 {
    let sum: f64 = src.iter().zip(dst).map(|(s, d)| (d - t.apply(s)).norm_squared()).sum();
    (sum / src.len().max(1) as f64).sqrt()
}
