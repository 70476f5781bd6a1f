use rand::Rng;

use super::cloud::PointCloud;
use super::pose::{Pose, Vec3};
use crate::error::{Error, Result};

/// Minimum face area (m^2) accepted by [`TriangleMesh::validate`].
pub const MIN_FACE_AREA: f64 = 1e-14;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Builds a mesh and runs [`validate`](Self::validate) on it.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let m = TriangleMesh { vertices, faces };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidGeometry("non-finite vertex".into()));
        }
        for (fi, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&i| i >= self.vertices.len()) {
                return Err(Error::InvalidGeometry(format!("face {fi} index out of range")));
            }
            if self.face_area(fi) <= MIN_FACE_AREA {
                return Err(Error::InvalidGeometry(format!("face {fi} is degenerate")));
            }
        }
        Ok(())
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        PointCloud::new(self.vertices.clone())
            .bounds()
            .unwrap_or((Vec3::zeros(), Vec3::zeros()))
    }

    pub fn extents(&self) -> Vec3 {
        let (lo, hi) = self.bounds();
        hi - lo
    }

    pub fn aabb_center(&self) -> Vec3 {
        let (lo, hi) = self.bounds();
        (lo + hi) * 0.5
    }

    /// Per-axis scaling about the AABB center.
    pub fn scaled_about_center(&self, scales: &Vec3) -> TriangleMesh {
        let c = self.aabb_center();
        TriangleMesh {
            vertices: self.vertices.iter().map(|v| c + (v - c).component_mul(scales)).collect(),
            faces: self.faces.clone(),
        }
    }

    pub fn transformed(&self, pose: &Pose) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|v| pose.transform_point(v)).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Appends another mesh as a separate component.
    pub fn merge(&mut self, other: &TriangleMesh) {
        let off = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.faces.extend(other.faces.iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
    }

    /// Area-weighted uniform surface samples. `source_indices` hold the face index.
    pub fn sample_surface(&self, n: usize, rng: &mut impl Rng) -> PointCloud {
        let mut cdf = Vec::with_capacity(self.faces.len());
        let mut total = 0.0;
        for f in 0..self.faces.len() {
            total += self.face_area(f);
            cdf.push(total);
        }
        let mut points = Vec::with_capacity(n);
        let mut faces = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.random::<f64>() * total;
            let f = cdf.partition_point(|&c| c < u).min(self.faces.len() - 1);
            let [a, b, c] = self.triangle(f);
            let (mut r1, mut r2): (f64, f64) = (rng.random(), rng.random());
            if r1 + r2 > 1.0 {
                r1 = 1.0 - r1;
                r2 = 1.0 - r2;
            }
            points.push(a + (b - a) * r1 + (c - a) * r2);
            faces.push(f);
        }
        PointCloud::with_sources(points, faces)
    }

    /// Unsigned distance from `p` to the closest point on the surface.
    pub fn distance_to_surface(&self, p: &Vec3) -> f64 {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.triangle(f);
                (p - closest_point_on_triangle(p, &a, &b, &c)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Axis-aligned box centered at the origin.
    pub fn cuboid(half: Vec3) -> TriangleMesh {
        let mut vertices = Vec::with_capacity(8);
        for i in 0..8 {
            let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
            vertices.push(Vec3::new(sx * half.x, sy * half.y, sz * half.z));
        }
        let faces = vec![
            [0, 2, 1], [1, 2, 3], // -z
            [4, 5, 6], [5, 7, 6], // +z
            [0, 1, 4], [1, 5, 4], // -y
            [2, 6, 3], [3, 6, 7], // +y
            [0, 4, 2], [2, 4, 6], // -x
            [1, 3, 5], [3, 7, 5], // +x
        ];
        TriangleMesh { vertices, faces }
    }

    pub fn cuboid_at(half: Vec3, center: Vec3) -> TriangleMesh {
        TriangleMesh::cuboid(half).transformed(&Pose::from_translation(center))
    }

    /// Closed cylinder along Z centered at the origin.
    pub fn cylinder(radius: f64, half_height: f64, segments: usize) -> TriangleMesh {
        let mut vertices = vec![Vec3::new(0.0, 0.0, -half_height), Vec3::new(0.0, 0.0, half_height)];
        let mut faces = Vec::new();
        for k in 0..segments {
            let a = std::f64::consts::TAU * k as f64 / segments as f64;
            let (s, c) = a.sin_cos();
            vertices.push(Vec3::new(radius * c, radius * s, -half_height));
            vertices.push(Vec3::new(radius * c, radius * s, half_height));
        }
        for k in 0..segments {
            let b0 = 2 + 2 * k;
            let t0 = b0 + 1;
            let b1 = 2 + 2 * ((k + 1) % segments);
            let t1 = b1 + 1;
            faces.push([b0, b1, t1]);
            faces.push([b0, t1, t0]);
            faces.push([0, b1, b0]);
            faces.push([1, t0, t1]);
        }
        TriangleMesh { vertices, faces }
    }

    /// Thick ring (annulus extruded along Z) centered at the origin.
    pub fn ring(outer: f64, inner: f64, half_height: f64, segments: usize) -> TriangleMesh {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for k in 0..segments {
            let a = std::f64::consts::TAU * k as f64 / segments as f64;
            let (s, c) = a.sin_cos();
            for r in [outer, inner] {
                vertices.push(Vec3::new(r * c, r * s, -half_height));
                vertices.push(Vec3::new(r * c, r * s, half_height));
            }
        }
        for k in 0..segments {
            let i0 = 4 * k;
            let i1 = 4 * ((k + 1) % segments);
            let (ob0, ot0, ib0, it0) = (i0, i0 + 1, i0 + 2, i0 + 3);
            let (ob1, ot1, ib1, it1) = (i1, i1 + 1, i1 + 2, i1 + 3);
            faces.push([ob0, ob1, ot1]);
            faces.push([ob0, ot1, ot0]);
            faces.push([ib0, it1, ib1]);
            faces.push([ib0, it0, it1]);
            faces.push([ot0, ot1, it1]);
            faces.push([ot0, it1, it0]);
            faces.push([ob0, ib1, ob1]);
            faces.push([ob0, ib0, ib1]);
        }
        TriangleMesh { vertices, faces }
    }
}

/// Closest point on triangle `abc` to `p` (Ericson, Real-Time Collision Detection 5.1.5).
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Moller-Trumbore ray/triangle intersection; returns the ray parameter of the hit.
pub fn ray_triangle(origin: &Vec3, dir: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    if det.abs() < 1e-18 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - a;
    let u = inv * s.dot(&h);
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = inv * dir.dot(&q);
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = inv * e2.dot(&q);
    (t > 1e-12).then_some(t)
}
