use nalgebra::{Matrix3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::mesh::ray_triangle;
use crate::geom::{PointCloud, Pose, TriangleMesh, Vec3};

/// Pinhole depth camera looking at `target` from a given elevation, azimuth and
/// range. Camera axes follow the usual vision convention: x right, y down,
/// z along the optical axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub elevation: f64,
    pub azimuth: f64,
    pub range: f64,
    pub fov_y: f64,
    pub width: usize,
    pub height: usize,
    pub target: [f64; 3],
}

impl Default for Camera {
    fn default() -> Self {
        Camera {
            elevation: 45f64.to_radians(),
            azimuth: 0.0,
            range: 0.6,
            fov_y: 15f64.to_radians(),
            width: 160,
            height: 120,
            target: [0.0; 3],
        }
    }
}

impl Camera {
    pub fn eye(&self) -> Vec3 {
        let (se, ce) = self.elevation.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        Vec3::from(self.target) + Vec3::new(ce * ca, ce * sa, se) * self.range
    }

    /// Camera-to-world pose.
    pub fn pose(&self) -> Pose {
        let eye = self.eye();
        let forward = (Vec3::from(self.target) - eye).normalize();
        let mut right = forward.cross(&Vec3::z());
        if right.norm() < 1e-9 {
            right = Vec3::x();
        }
        let right = right.normalize();
        let down = forward.cross(&right);
        let m = Matrix3::from_columns(&[right, down, forward]);
        Pose::new(UnitQuaternion::from_matrix(&m), eye)
    }

    pub fn focal(&self) -> f64 {
        0.5 * self.height as f64 / (0.5 * self.fov_y).tan()
    }

    pub fn with_resolution(&self, width: usize, height: usize) -> Camera {
        Camera { width, height, ..*self }
    }
}

/// Ray-cast depth image of `mesh` placed at `pose`, back-projected to world
/// points. Each point keeps the index of the face it was seen on.
pub fn render_partial(mesh: &TriangleMesh, pose: &Pose, camera: &Camera) -> Result<PointCloud> {
    let world: Vec<Vec3> = mesh.vertices.iter().map(|v| pose.transform_point(v)).collect();
    let cam = camera.pose();
    let inv = cam.inverse();
    let f = camera.focal();
    let (cx, cy) = (0.5 * camera.width as f64, 0.5 * camera.height as f64);

    // Pixel window covering the projected vertices.
    let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for w in &world {
        let c = inv.transform_point(w);
        if c.z <= 1e-6 {
            return Err(Error::OutOfFrustum);
        }
        let (u, v) = (f * c.x / c.z + cx, f * c.y / c.z + cy);
        u0 = u0.min(u);
        u1 = u1.max(u);
        v0 = v0.min(v);
        v1 = v1.max(v);
    }
    let clip = |a: f64, n: usize| a.floor().clamp(0.0, n as f64) as usize;
    let (ua, ub) = (clip(u0, camera.width), clip(u1 + 1.0, camera.width));
    let (va, vb) = (clip(v0, camera.height), clip(v1 + 1.0, camera.height));
    if ua >= ub || va >= vb {
        return Err(Error::OutOfFrustum);
    }

    let center = world.iter().fold(Vec3::zeros(), |a, b| a + b) / world.len() as f64;
    let radius = world.iter().map(|w| (w - center).norm()).fold(0.0, f64::max);
    let eye = cam.translation;
    let mut points = Vec::new();
    let mut sources = Vec::new();
    for v in va..vb {
        for u in ua..ub {
            let d_cam = Vec3::new((u as f64 + 0.5 - cx) / f, (v as f64 + 0.5 - cy) / f, 1.0);
            let dir = cam.transform_vector(&d_cam).normalize();
            let oc = center - eye;
            let along = oc.dot(&dir);
            if (oc - dir * along).norm() > radius {
                continue;
            }
            let mut best: Option<(f64, usize)> = None;
            for (fi, face) in mesh.faces.iter().enumerate() {
                if let Some(t) = ray_triangle(&eye, &dir, &world[face[0]], &world[face[1]], &world[face[2]]) {
                    if best.is_none_or(|(bt, _)| t < bt) {
                        best = Some((t, fi));
                    }
                }
            }
            if let Some((t, fi)) = best {
                points.push(eye + dir * t);
                sources.push(fi);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::OutOfFrustum);
    }
    Ok(PointCloud::with_sources(points, sources))
}
