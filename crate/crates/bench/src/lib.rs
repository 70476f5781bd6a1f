//! Seeded fixtures shared by the benchmarks.

use catbc_core::catbc::CollisionModel;
use catbc_core::shapes::{SamplingGrid, ShapeSpec};
use catbc_core::tasks::{TaskGeometry, TaskKind};
use catbc_core::attention::SdfScene;
use catbc_core::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_points(n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Gear over a 0.5 mm clearance shaft, sampled like the experiment harness does.
pub fn gear_insertion() -> (SdfScene, CollisionModel) {
    let gear = ShapeSpec::Ring { outer: 0.020, inner: 0.006, half_height: 0.004 };
    let geometry = TaskGeometry::for_object(TaskKind::Insertion, &gear, 0.0005).expect("valid gear geometry");
    let grid = SamplingGrid { angular: 144, wall_rings: 6, face_rings: 4 };
    (geometry.scene().expect("valid scene"), CollisionModel::new(gear.sample(&grid).points))
}
