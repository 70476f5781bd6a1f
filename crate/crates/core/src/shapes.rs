//! Parametric category shapes and their deterministic surface samplings.
//!
//! Every instance of a shape family is sampled on the same parametric grid, so two
//! instances that differ only by per-axis scaling share identical normalized
//! coordinates point for point. Sampling order is fixed: outer wall, inner wall
//! (rings only), bottom face, top face.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geom::{PointCloud, TriangleMesh, Vec3};

/// Resolution of the parametric sampling grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid {
    pub angular: usize,
    pub wall_rings: usize,
    pub face_rings: usize,
}

impl Default for SamplingGrid {
    fn default() -> Self {
        SamplingGrid { angular: 96, wall_rings: 6, face_rings: 4 }
    }
}

/// Base shapes, each centered on its AABB center with the symmetry axis along Z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeSpec {
    /// Battery-like solid cylinder.
    Cylinder { radius: f64, half_height: f64 },
    /// Gear-like ring: outer radius, hole radius, half thickness.
    Ring { outer: f64, inner: f64, half_height: f64 },
    Cuboid { half: Vec3 },
    /// L-shaped bracket with no rotational symmetry about Z.
    Bracket { size: f64 },
}

impl ShapeSpec {
    pub fn half_height(&self) -> f64 {
        match *self {
            ShapeSpec::Cylinder { half_height, .. } | ShapeSpec::Ring { half_height, .. } => half_height,
            ShapeSpec::Cuboid { half } => half.z,
            ShapeSpec::Bracket { size } => 0.25 * size,
        }
    }

    pub fn mesh(&self, segments: usize) -> TriangleMesh {
        match *self {
            ShapeSpec::Cylinder { radius, half_height } => TriangleMesh::cylinder(radius, half_height, segments),
            ShapeSpec::Ring { outer, inner, half_height } => TriangleMesh::ring(outer, inner, half_height, segments),
            ShapeSpec::Cuboid { half } => TriangleMesh::cuboid(half),
            ShapeSpec::Bracket { size } => bracket_mesh(size),
        }
    }

    pub fn sample(&self, grid: &SamplingGrid) -> PointCloud {
        match *self {
            ShapeSpec::Cylinder { radius, half_height } => {
                let mut pts = wall(radius, half_height, grid);
                pts.extend(disk(0.0, radius, -half_height, grid));
                pts.extend(disk(0.0, radius, half_height, grid));
                PointCloud::new(pts)
            }
            ShapeSpec::Ring { outer, inner, half_height } => {
                let mut pts = wall(outer, half_height, grid);
                pts.extend(wall(inner, half_height, grid));
                pts.extend(disk(inner, outer, -half_height, grid));
                pts.extend(disk(inner, outer, half_height, grid));
                PointCloud::new(pts)
            }
            ShapeSpec::Cuboid { .. } | ShapeSpec::Bracket { .. } => {
                let n = grid.angular * (2 * grid.wall_rings + 2 * grid.face_rings);
                let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
                let mut c = self.mesh(grid.angular).sample_surface(n, &mut rng);
                c.source_indices = None;
                c
            }
        }
    }
}

fn wall(radius: f64, half_height: f64, grid: &SamplingGrid) -> Vec<Vec3> {
    let mut pts = Vec::with_capacity(grid.angular * (grid.wall_rings + 1));
    for ring in 0..=grid.wall_rings {
        let z = -half_height + 2.0 * half_height * ring as f64 / grid.wall_rings as f64;
        for k in 0..grid.angular {
            let (s, c) = (TAU * k as f64 / grid.angular as f64).sin_cos();
            pts.push(Vec3::new(radius * c, radius * s, z));
        }
    }
    pts
}

fn disk(r0: f64, r1: f64, z: f64, grid: &SamplingGrid) -> Vec<Vec3> {
    let mut pts = Vec::new();
    if r0 == 0.0 {
        pts.push(Vec3::new(0.0, 0.0, z));
    }
    // Boundary rings are already covered by the walls.
    for ring in 1..grid.face_rings {
        let r = r0 + (r1 - r0) * ring as f64 / grid.face_rings as f64;
        for k in 0..grid.angular {
            let (s, c) = (TAU * k as f64 / grid.angular as f64).sin_cos();
            pts.push(Vec3::new(r * c, r * s, z));
        }
    }
    pts
}

fn bracket_mesh(size: f64) -> TriangleMesh {
    let t = 0.25 * size;
    let mut m = TriangleMesh::cuboid_at(Vec3::new(size * 0.5, t * 0.5, t), Vec3::new(0.0, -size * 0.5 + t * 0.5, 0.0));
    m.merge(&TriangleMesh::cuboid_at(
        Vec3::new(t * 0.5, size * 0.5 - t * 0.5, t),
        Vec3::new(-size * 0.5 + t * 0.5, t * 0.5, 0.0),
    ));
    m
}
