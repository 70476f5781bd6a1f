use nalgebra::UnitQuaternion;

use crate::geom::{rotation_geodesic, Vec3};

/// Category symmetry: rotations acting about the normalized cube center.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryGroup {
    pub rotations: Vec<UnitQuaternion<f64>>,
}

impl SymmetryGroup {
    pub const PIVOT: Vec3 = Vec3::new(0.5, 0.5, 0.5);

    pub fn identity() -> Self {
        SymmetryGroup { rotations: vec![UnitQuaternion::identity()] }
    }

    /// Rotations about Z at multiples of `step_deg`, starting with the identity.
    pub fn z_rotations(step_deg: f64) -> Self {
        let n = (360.0 / step_deg).round().max(1.0) as usize;
        let rotations = (0..n)
            .map(|k| UnitQuaternion::from_axis_angle(&Vec3::z_axis(), (k as f64 * 360.0 / n as f64).to_radians()))
            .collect();
        SymmetryGroup { rotations }
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    /// Applies rotation `k` to a normalized coordinate about the cube pivot.
    pub fn apply(&self, k: usize, c: &Vec3) -> Vec3 {
        self.rotations[k] * (c - Self::PIVOT) + Self::PIVOT
    }

    /// Index of the element closest to `q`, with its geodesic distance.
    pub fn closest(&self, q: &UnitQuaternion<f64>) -> (usize, f64) {
        self.rotations
            .iter()
            .enumerate()
            .map(|(i, r)| (i, rotation_geodesic(r, q)))
            .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
    }

    /// Every product of two elements lies within `tol` of some element.
    pub fn is_closed(&self, tol: f64) -> bool {
        self.rotations.iter().all(|a| {
            self.rotations.iter().all(|b| self.closest(&(a * b)).1 <= tol)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_group_is_closed_and_contains_identity() {
        let g = SymmetryGroup::z_rotations(5.0);
        assert_eq!(g.len(), 72);
        assert_eq!(g.rotations[0], UnitQuaternion::identity());
        assert!(g.is_closed(1e-9));
    }

    #[test]
    fn pivot_is_fixed() {
        let g = SymmetryGroup::z_rotations(90.0);
        for k in 0..g.len() {
            assert!((g.apply(k, &SymmetryGroup::PIVOT) - SymmetryGroup::PIVOT).norm() < 1e-15);
        }
        let c = g.apply(1, &Vec3::new(1.0, 0.5, 0.2));
        assert!((c - Vec3::new(0.5, 1.0, 0.2)).norm() < 1e-15);
    }
}
