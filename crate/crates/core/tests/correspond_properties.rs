mod common;

use catbc_core::attention::{attention_at, SdfPrimitive, SdfScene};
use catbc_core::correspond::{build_correspondence, reproject_trajectory, ReprojectionMode};
use catbc_core::demo::Trajectory;
use catbc_core::nunocs::normalize_to_nunocs;
use catbc_core::{PointCloud, Pose, Vec3};
use common::{random_points, random_rotation, random_vec, rng};
use nalgebra::UnitQuaternion;
use proptest::prelude::*;
use rand::Rng;

struct Case {
    traj: Trajectory,
    demo: PointCloud,
    novel: PointCloud,
    scene: SdfScene,
    delta_r: UnitQuaternion<f64>,
}

/// Random demo cloud, a per-axis stretched copy as the novel instance, a random
/// receptacle and trajectory. Continuous randomness keeps anchor ties away.
fn case(seed: u64) -> Case {
    let mut r = rng(seed);
    let n = r.random_range(8..120);
    let demo = PointCloud::new(random_points(&mut r, n, 0.02));
    let stretch = Vec3::new(r.random_range(0.5..2.0), r.random_range(0.5..2.0), r.random_range(0.5..2.0));
    let novel = PointCloud::new(demo.points.iter().map(|p| p.component_mul(&stretch)).collect());
    let scene = SdfScene::new(vec![
        SdfPrimitive::Plane { pose: Pose::new(random_rotation(&mut r), random_vec(&mut r, 0.02)) },
        SdfPrimitive::Box { pose: Pose::new(random_rotation(&mut r), random_vec(&mut r, 0.05)), half_extents: Vec3::new(0.01, 0.02, 0.015) },
    ])
    .unwrap();
    let poses: Vec<Pose> =
        (0..r.random_range(1..30)).map(|_| Pose::new(random_rotation(&mut r), random_vec(&mut r, 0.1))).collect();
    let delta_r = if r.random::<bool>() { UnitQuaternion::identity() } else { random_rotation(&mut r) };
    Case { traj: Trajectory::from_poses(&poses, 0.1).unwrap(), demo, novel, scene, delta_r }
}

fn reproject(c: &Case, traj: &Trajectory, scene: &SdfScene) -> Trajectory {
    let (dn, _) = normalize_to_nunocs(&c.demo).unwrap();
    let (nn, _) = normalize_to_nunocs(&c.novel).unwrap();
    let corr = build_correspondence(&dn, &nn).unwrap();
    reproject_trajectory(traj, &c.demo, &c.novel, &corr, scene, &c.delta_r, ReprojectionMode::Anchored).unwrap()
}

proptest! {
    #[test]
    fn reprojecting_onto_the_demo_instance_is_identity(seed in any::<u64>()) {
        let mut c = case(seed);
        c.novel = c.demo.clone();
        c.delta_r = UnitQuaternion::identity();
        let out = reproject(&c, &c.traj, &c.scene);
        for (a, b) in out.waypoints.iter().zip(&c.traj.waypoints) {
            prop_assert!(a.pose.translation_distance(&b.pose) <= 1e-9);
            prop_assert!(a.pose.rotation_distance(&b.pose) <= 1e-9);
            prop_assert_eq!(a.t, b.t);
        }
    }

    #[test]
    fn anchors_land_where_the_demo_anchors_were(seed in any::<u64>()) {
        let c = case(seed);
        let (dn, _) = normalize_to_nunocs(&c.demo).unwrap();
        let (nn, _) = normalize_to_nunocs(&c.novel).unwrap();
        let corr = build_correspondence(&dn, &nn).unwrap();
        let out = reproject(&c, &c.traj, &c.scene);
        for (w, t) in c.traj.waypoints.iter().zip(&out.waypoints) {
            let a = attention_at(&c.demo, &w.pose, &c.scene, w.t).anchor_index;
            let demo_world = w.pose.transform_point(&c.demo.points[a]);
            let novel_world = t.pose.transform_point(&c.novel.points[corr.image(a).unwrap()]);
            prop_assert!((demo_world - novel_world).norm() <= 1e-9);
        }
    }

    #[test]
    fn moving_the_receptacle_moves_the_target(seed in any::<u64>(), g_seed in any::<u64>()) {
        let c = case(seed);
        let mut r = rng(g_seed);
        let g = Pose::new(random_rotation(&mut r), random_vec(&mut r, 0.5));
        let base = reproject(&c, &c.traj, &c.scene);
        let moved = reproject(&c, &c.traj.transformed(&g), &c.scene.transformed(&g));
        for (a, b) in base.transformed(&g).waypoints.iter().zip(&moved.waypoints) {
            prop_assert!(a.pose.translation_distance(&b.pose) <= 1e-9);
            prop_assert!(a.pose.rotation_distance(&b.pose) <= 1e-9);
        }
    }
}
