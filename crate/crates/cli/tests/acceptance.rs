//! End-to-end acceptance suite. Every criterion prints one PASS/FAIL line; the
//! test fails if any criterion does.
//!
//! All criteria run inside a single test so the simulation sweeps do not compete
//! for cores with each other.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use catbc_cli::commands::load_scenario;
use catbc_cli::pipeline::{prepare, Prepared, MODEL_GRID};
use catbc_cli::ScenarioConfig;
use catbc_core::attention::{attention_heatmap, AttentionMap, SdfPrimitive, SdfScene};
use catbc_core::demo::{detect_keypose, discretize, Trajectory};
use catbc_core::geom::umeyama::umeyama_points;
use catbc_core::geom::{rotation_geodesic, yaw};
use catbc_core::nunocs::{
    normalize_to_nunocs, nunocs_loss, scale_loss, solve_pose9d, BinDistributions, NunocsCloud, SymmetryGroup,
    DEFAULT_BINS,
};
use catbc_core::rng::stream;
use catbc_core::shapes::ShapeSpec;
use catbc_core::simgen::{emit_labels, random_instance, rest_poses, sample_scene, Camera, SceneRanges};
use catbc_core::tasks::TaskGeometry;
use catbc_core::{Pose, Vec3};
use nalgebra::{Quaternion, UnitQuaternion};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

const GOLDEN: [&str; 5] = [
    "gear_0p5mm_closed",
    "gear_0p5mm_open",
    "battery_standing_closed",
    "battery_assembly_closed",
    "gear_matcher_closed",
];

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.cfg"))
}

fn scenario(name: &str, overrides: &[String]) -> ScenarioConfig {
    load_scenario(&config_path(name), overrides, None).expect("golden config loads")
}

fn prepared(cfg: &ScenarioConfig) -> Prepared {
    prepare(cfg).expect("scenario prepares")
}

fn successes(cfg: &ScenarioConfig) -> Vec<bool> {
    prepared(cfg).episodes().expect("episodes run").iter().map(|e| e.success()).collect()
}

fn rate(v: &[bool]) -> f64 {
    v.iter().filter(|&&s| s).count() as f64 / v.len() as f64
}

fn random_rotation(rng: &mut impl Rng) -> UnitQuaternion<f64> {
    loop {
        let q = Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = q.norm();
        if n > 0.1 && n <= 1.0 {
            return UnitQuaternion::from_quaternion(q);
        }
    }
}

fn random_vec(rng: &mut impl Rng, half: f64) -> Vec3 {
    Vec3::new(rng.random_range(-half..half), rng.random_range(-half..half), rng.random_range(-half..half))
}

fn timed(limit: Duration, start: Instant) -> Result<Duration, String> {
    let t = start.elapsed();
    if t > limit {
        return Err(format!("took {:.1} s, limit {:.0} s", t.as_secs_f64(), limit.as_secs_f64()));
    }
    Ok(t)
}

fn alignment_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = stream(101, 0);
    let (mut worst_r, mut worst_s, mut worst_t) = (0.0f64, 0.0f64, 0.0f64);
    for case in 0..1000 {
        let n = rng.random_range(4..80);
        let src: Vec<Vec3> = (0..n).map(|_| random_vec(&mut rng, 1.0)).collect();
        let s = rng.random_range(0.1..10.0);
        let r = random_rotation(&mut rng);
        let t = random_vec(&mut rng, 1.0);
        let dst: Vec<Vec3> = src.iter().map(|p| s * (r * p) + t).collect();
        let est = umeyama_points(&src, &dst).map_err(|e| format!("case {case}: {e}"))?;
        worst_r = worst_r.max(rotation_geodesic(&est.rotation, &r));
        worst_s = worst_s.max((est.scale - s).abs() / s);
        worst_t = worst_t.max((est.translation - t).norm());
    }
    ensure!(worst_r < 1e-9, "rotation error {worst_r:e}");
    ensure!(worst_s < 1e-9, "relative scale error {worst_s:e}");
    ensure!(worst_t < 1e-9, "translation error {worst_t:e}");
    let t = timed(Duration::from_secs(5), start)?;
    Ok(format!(
        "worst rot {worst_r:.1e} rad, scale {worst_s:.1e}, trans {worst_t:.1e} m, {:.2} s",
        t.as_secs_f64()
    ))
}

fn nunocs_round_trips() -> Outcome {
    let start = Instant::now();
    let shapes = [
        ShapeSpec::Ring { outer: 0.020, inner: 0.006, half_height: 0.004 },
        ShapeSpec::Cylinder { radius: 0.007, half_height: 0.025 },
        ShapeSpec::Cuboid { half: Vec3::new(0.010, 0.015, 0.020) },
    ];
    let camera = Camera::default();
    let ranges = SceneRanges::default();
    let mut worst_norm = 0.0f64;
    let mut worst_label = 0.0f64;
    let mut worst_pose = 0.0f64;
    for i in 0..500u64 {
        let mut rng = stream(202, i);
        let shape = shapes[i as usize % shapes.len()];
        let (mesh, scales) = random_instance(&shape.mesh(24), [(0.5, 2.0); 3], &mut rng);
        let scene = sample_scene(&format!("s{i}"), &mesh, scales, &rest_poses(&shape), &ranges, &camera, i, &mut rng)
            .map_err(|e| format!("scene {i}: {e}"))?;
        let partial = &scene.partial;

        let (nc, frame) = normalize_to_nunocs(partial).map_err(|e| format!("scene {i}: {e}"))?;
        for (c, p) in nc.coords.iter().zip(&partial.points) {
            worst_norm = worst_norm.max((frame.denormalize(c) - p).norm());
        }

        let (labels, gt) = emit_labels(&scene).map_err(|e| format!("scene {i}: {e}"))?;
        for (c, p) in labels.coords.iter().zip(&partial.points) {
            worst_label = worst_label.max((gt.apply(c) - p).norm());
        }
        let solved = solve_pose9d(&labels, partial).map_err(|e| format!("scene {i}: {e}"))?;
        let dr = rotation_geodesic(&solved.rotation(), &gt.rotation());
        let ds = (solved.similarity.scale - gt.similarity.scale).abs() / gt.similarity.scale;
        let dt = (solved.similarity.translation - gt.similarity.translation).norm();
        worst_pose = worst_pose.max(dr).max(ds).max(dt);
    }
    ensure!(worst_norm < 1e-9, "normalize/denormalize error {worst_norm:e}");
    ensure!(worst_label < 1e-9, "label reconstruction error {worst_label:e}");
    ensure!(worst_pose < 1e-9, "pose recovery error {worst_pose:e}");
    let t = timed(Duration::from_secs(30), start)?;
    Ok(format!(
        "worst denormalize {worst_norm:.1e}, labels {worst_label:.1e}, pose {worst_pose:.1e}, {:.1} s",
        t.as_secs_f64()
    ))
}

fn random_prediction(points: usize, rng: &mut impl Rng) -> BinDistributions {
    let b = DEFAULT_BINS;
    let mut probs = Vec::with_capacity(points * 3 * b);
    for _ in 0..points * 3 {
        let row: Vec<f64> = (0..b).map(|_| rng.random_range(0.01..1.0)).collect();
        let sum: f64 = row.iter().sum();
        probs.extend(row.iter().map(|p| p / sum));
    }
    BinDistributions { count: b, probs }
}

fn loss_identities() -> Outcome {
    let sym = SymmetryGroup::z_rotations(90.0);
    let mut worst_inv = 0.0f64;
    let mut worst_uniform = 0.0f64;
    for case in 0..20u64 {
        let mut rng = stream(303, case);
        let n = 64;
        let gt = NunocsCloud {
            coords: (0..n)
                .map(|_| Vec3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()))
                .collect(),
            scales: Vec3::new(1.0, rng.random_range(0.3..3.0), rng.random_range(0.3..3.0)),
            source_indices: (0..n).collect(),
        };
        let pred = random_prediction(n, &mut rng);
        let base = nunocs_loss(&pred, &gt, &sym).map_err(|e| e.to_string())?;
        for k in 0..4 {
            let q = yaw(k as f64 * FRAC_PI_2);
            let moved = pred.rotated(&q).map_err(|e| e.to_string())?;
            let l = nunocs_loss(&moved, &gt, &sym).map_err(|e| e.to_string())?;
            worst_inv = worst_inv.max((l - base).abs());
        }
        let uniform = nunocs_loss(&BinDistributions::uniform(n, DEFAULT_BINS), &gt, &sym).map_err(|e| e.to_string())?;
        let expected = 3.0 * n as f64 * (DEFAULT_BINS as f64).ln();
        worst_uniform = worst_uniform.max((uniform - expected).abs());
    }
    ensure!(worst_inv <= 1e-9, "loss changed by {worst_inv:e} under a group element");
    ensure!(worst_uniform <= 1e-9, "uniform loss off by {worst_uniform:e}");

    let mut rng = stream(303, 999);
    let mut worst_scale = 0.0f64;
    for _ in 0..1000 {
        let p = random_vec(&mut rng, 3.0);
        let g = random_vec(&mut rng, 3.0);
        let mut sq = 0.0;
        for i in 0..3 {
            sq += (p[i] - g[i]) * (p[i] - g[i]);
        }
        worst_scale = worst_scale.max((scale_loss(&p, &g) - sq.sqrt()).abs());
    }
    ensure!(worst_scale <= 1e-12, "scale loss off by {worst_scale:e}");
    Ok(format!("invariance {worst_inv:.1e}, uniform {worst_uniform:.1e}, scale norm {worst_scale:.1e}"))
}

fn random_sdf_scene(rng: &mut impl Rng) -> SdfScene {
    let mut prims = vec![SdfPrimitive::horizontal_plane(rng.random_range(-0.05..0.0))];
    for _ in 0..rng.random_range(1..4) {
        let center = random_vec(rng, 0.05);
        if rng.random::<bool>() {
            let half = Vec3::new(rng.random_range(0.002..0.03), rng.random_range(0.002..0.03), rng.random_range(0.002..0.03));
            prims.push(SdfPrimitive::aligned_box(center, half));
        } else {
            prims.push(SdfPrimitive::vertical_cylinder(center, rng.random_range(0.002..0.03), rng.random_range(0.002..0.03)));
        }
    }
    SdfScene::new(prims).expect("valid primitives")
}

fn attention_identities() -> Outcome {
    let mut rng = stream(404, 0);
    let mut worst_shift = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..300);
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(-0.1..0.1)).collect();
        let c = rng.random_range(-10.0..10.0);
        let shifted: Vec<f64> = d.iter().map(|x| x + c).collect();
        let a = AttentionMap::from_distances(&d, 0.0);
        let b = AttentionMap::from_distances(&shifted, 0.0);
        for (x, y) in a.weights.iter().zip(&b.weights) {
            worst_shift = worst_shift.max((x - y).abs());
        }
    }
    ensure!(worst_shift <= 1e-9, "shift changed weights by {worst_shift:e}");

    let mut worst_complement = 0.0f64;
    for i in 0..200u64 {
        let mut rng = stream(404, i + 1);
        let scene = random_sdf_scene(&mut rng);
        let n = rng.random_range(20..400);
        let model = catbc_core::PointCloud::new((0..n).map(|_| random_vec(&mut rng, 0.03)).collect());
        let pose = Pose::new(random_rotation(&mut rng), random_vec(&mut rng, 0.08));
        let map = attention_heatmap(&model, &pose, &scene);
        let mut best = (0usize, f64::INFINITY);
        for (j, p) in model.points.iter().enumerate() {
            let w = pose.transform_point(p);
            let d = scene.primitives().iter().map(|prim| prim.eval(&w)).fold(f64::INFINITY, f64::min);
            if d < best.1 {
                best = (j, d);
            }
        }
        ensure!(map.anchor_index == best.0, "scene {i}: anchor {} but argmin {}", map.anchor_index, best.0);
        let max_w = map.weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ensure!(map.weights[map.anchor_index] == max_w, "scene {i}: anchor is not the attention peak");
        worst_complement = worst_complement.max((map.complement_sum() - 1.0).abs());
    }
    ensure!(worst_complement <= 1e-9, "complement sum off by {worst_complement:e}");

    // A battery stood onto a platform attends to its base.
    let cfg = scenario("battery_standing_closed", &[]);
    let base = cfg.category.base_shape();
    let geometry = TaskGeometry::for_object(cfg.task, &base, cfg.clearance).map_err(|e| e.to_string())?;
    let scene = geometry.scene().map_err(|e| e.to_string())?;
    let model = base.sample(&MODEL_GRID);
    let p = prepared(&cfg);
    let key = detect_keypose(&p.demo_traj, &model, &scene, cfg.keypose_distance);
    let mut worst_z = 0.0f64;
    for w in &p.demo_traj.waypoints[key..] {
        let map = attention_heatmap(&model, &w.pose, &scene);
        let anchor_z = w.pose.transform_point(&model.points[map.anchor_index]).z;
        let min_z = model.points.iter().map(|q| w.pose.transform_point(q).z).fold(f64::INFINITY, f64::min);
        worst_z = worst_z.max(anchor_z - min_z);
    }
    ensure!(worst_z <= 0.001, "standing anchor {:.3} mm above the lowest surface", worst_z * 1e3);
    Ok(format!(
        "shift {worst_shift:.1e}, 200/200 anchors, complement {worst_complement:.1e}, standing anchor {:.3} mm over {} waypoints",
        worst_z * 1e3,
        p.demo_traj.len() - key
    ))
}

fn trajectory_gap(a: &Trajectory, b: &Trajectory) -> Result<f64, String> {
    ensure!(a.len() == b.len(), "lengths {} and {}", a.len(), b.len());
    Ok(a.waypoints
        .iter()
        .zip(&b.waypoints)
        .map(|(x, y)| x.pose.translation_distance(&y.pose).max(x.pose.rotation_distance(&y.pose)))
        .fold(0.0, f64::max))
}

fn reprojection() -> Outcome {
    let same = ["instance.scale_radial=1".to_string(), "instance.scale_axial=1".to_string()];
    let mut worst_self = 0.0f64;
    for name in ["battery_standing_closed", "battery_assembly_closed", "gear_0p5mm_closed"] {
        let p = prepared(&scenario(name, &same));
        worst_self = worst_self.max(trajectory_gap(&p.target, &p.demo_traj).map_err(|e| format!("{name}: {e}"))?);
    }
    ensure!(worst_self <= 1e-9, "self-reprojection moved waypoints by {worst_self:e}");

    // Novel battery 3 mm shorter in half-height: 25 mm * 0.88 = 22 mm.
    let shorter = ["instance.scale_radial=1".to_string(), "instance.scale_axial=0.88".to_string()];
    let gap = |policy: &str| {
        let mut o = shorter.to_vec();
        o.push(format!("policy.mode={policy}"));
        let p = prepared(&scenario("battery_standing_closed", &o));
        p.planning_model.min_distance(&p.novel_scene, &p.target.last().pose)
    };
    let centroid = gap("centroid");
    let anchored = gap("closed");
    ensure!((centroid - 0.003).abs() <= 1e-9, "centroid float {:.6} mm, expected 3.000", centroid * 1e3);
    ensure!(anchored.abs() <= 1e-9, "anchored gap {:.6} mm, expected 0.000", anchored * 1e3);
    Ok(format!(
        "self {worst_self:.1e}, centroid float {:.3} mm, anchored {:.3} mm",
        centroid * 1e3,
        anchored.abs() * 1e3
    ))
}

fn random_trajectory(rng: &mut impl Rng) -> Trajectory {
    let n = rng.random_range(2..300);
    let mut pose = Pose::new(random_rotation(rng), random_vec(rng, 0.1));
    let mut poses = vec![pose];
    for _ in 1..n {
        let step_t = random_vec(rng, 0.003);
        let axis = random_vec(rng, 1.0);
        let angle = rng.random_range(0.0..4f64.to_radians());
        let r = UnitQuaternion::from_scaled_axis(axis.normalize() * angle);
        pose = Pose::new(r * pose.rotation, pose.translation + step_t);
        poses.push(pose);
    }
    Trajectory::from_poses(&poses, 0.1).expect("finite poses")
}

fn discretization_and_keypose() -> Outcome {
    let (step, angle) = (0.002, 2f64.to_radians());
    for i in 0..100u64 {
        let mut rng = stream(606, i);
        let traj = random_trajectory(&mut rng);
        let kept = discretize(&traj, step, angle);
        let w = &traj.waypoints;
        let k = &kept.waypoints;
        ensure!(k[0] == w[0] && k.last() == w.last(), "trajectory {i}: endpoints not kept");
        // Walk the original alongside the kept list.
        let mut j = 0;
        for (idx, wp) in w.iter().enumerate().skip(1) {
            let last_kept = &k[j];
            let far = wp.pose.translation_distance(&last_kept.pose) >= step
                || wp.pose.rotation_distance(&last_kept.pose) >= angle;
            let is_final = idx == w.len() - 1;
            if j + 1 < k.len() && k[j + 1] == *wp {
                ensure!(far || is_final, "trajectory {i}: waypoint {idx} kept closer than 2 mm and 2 deg");
                j += 1;
            } else {
                ensure!(!far && !is_final, "trajectory {i}: waypoint {idx} dropped although far enough");
            }
        }
        ensure!(j == k.len() - 1, "trajectory {i}: kept waypoints not a subsequence");
    }

    let mut changed = 0;
    let mut episodes = 0;
    for name in GOLDEN {
        let outcomes: Vec<Vec<bool>> = ["0.04", "0.05", "0.06"]
            .iter()
            .map(|d| successes(&scenario(name, &[format!("demo.keypose_distance={d}")])))
            .collect();
        episodes += outcomes[0].len();
        changed += outcomes[0].iter().zip(&outcomes[1]).zip(&outcomes[2]).filter(|((a, b), c)| a != b || b != c).count();
    }
    ensure!(changed == 0, "{changed} golden runs changed outcome across keypose 4/5/6 cm");
    Ok(format!("100 trajectories, 0 of {episodes} golden runs changed across keypose 4/5/6 cm"))
}

fn slip_overrides(sigma: f64) -> Vec<String> {
    vec![
        "scenario.runs=50".into(),
        format!("disturbance.grasp_slip_trans_mm={sigma}"),
        format!("disturbance.grasp_slip_rot_deg={sigma}"),
    ]
}

fn closed_vs_open() -> Outcome {
    let start = Instant::now();
    let rate_at = |name: &str, sigma: f64| rate(&successes(&scenario(name, &slip_overrides(sigma))));
    let open0 = rate_at("gear_0p5mm_open", 0.0);
    let closed0 = rate_at("gear_0p5mm_closed", 0.0);
    ensure!(open0 == 1.0 && closed0 == 1.0, "zero disturbance: open {open0:.2}, closed {closed0:.2}");

    let mut sweep = Vec::new();
    let mut calibrated = None;
    for step in 1..=10 {
        let sigma = step as f64 * 0.1;
        let open = rate_at("gear_0p5mm_open", sigma);
        let closed = rate_at("gear_0p5mm_closed", sigma);
        sweep.push(format!("{sigma:.1}:{:.0}/{:.0}%", open * 100.0, closed * 100.0));
        ensure!(closed >= open, "closed loop below open loop at sigma {sigma:.1}: {}", sweep.join(" "));
        if (0.30..=0.55).contains(&open) {
            calibrated = Some((sigma, open, closed));
            break;
        }
    }
    let (sigma, open, closed) =
        calibrated.ok_or_else(|| format!("no slip level puts open loop in [30%, 55%]: {}", sweep.join(" ")))?;
    ensure!(closed >= 0.90, "at sigma {sigma:.1} closed loop {:.0}% (open {:.0}%)", closed * 100.0, open * 100.0);
    let t = timed(Duration::from_secs(120), start)?;
    Ok(format!(
        "open/closed sweep [{}], sigma {sigma:.1} mm/deg: open {:.0}%, closed {:.0}%, {:.0} s",
        sweep.join(" "),
        open * 100.0,
        closed * 100.0,
        t.as_secs_f64()
    ))
}

fn tolerance_gradient() -> Outcome {
    let mut rates = Vec::new();
    for clearance in ["5", "0.5", "0.1"] {
        let o = vec![
            "scenario.runs=50".to_string(),
            "tracker.sigma_trans_mm=0.3".into(),
            "tracker.sigma_rot_deg=0.3".into(),
            "tracker.latency_ticks=1".into(),
            format!("receptacle.clearance_mm={clearance}"),
        ];
        rates.push(rate(&successes(&scenario("gear_0p5mm_closed", &o))));
    }
    let line = format!("5 mm {:.0}%, 0.5 mm {:.0}%, 0.1 mm {:.0}%", rates[0] * 100.0, rates[1] * 100.0, rates[2] * 100.0);
    ensure!(rates[0] >= rates[1] && rates[1] >= rates[2], "not monotone: {line}");
    ensure!(rates[0] >= 0.98, "5 mm below 98%: {line}");
    Ok(line)
}

fn push_recovery() -> Outcome {
    let o = vec![
        "scenario.runs=50".to_string(),
        "disturbance.push_tick=10".into(),
        "disturbance.push_x_mm=5".into(),
        "disturbance.push_y_mm=0".into(),
        "disturbance.push_z_mm=0".into(),
    ];
    let closed_cfg = scenario("gear_0p5mm_closed", &o);
    let (tol_t, tol_r) = (closed_cfg.control.goal_tol_trans, closed_cfg.control.goal_tol_rot);
    let closed = prepared(&closed_cfg).episodes().map_err(|e| e.to_string())?;
    let recovered = closed
        .iter()
        .filter(|e| {
            let (t, r) = e.final_error();
            t <= tol_t && r <= tol_r
        })
        .count();
    let open = prepared(&scenario("gear_0p5mm_open", &o)).episodes().map_err(|e| e.to_string())?;
    let displaced = open.iter().filter(|e| e.final_error().0 >= 0.004).count();
    let min_open = open.iter().map(|e| e.final_error().0).fold(f64::INFINITY, f64::min);
    let line = format!(
        "closed recovered {recovered}/{}, open displaced >= 4 mm {displaced}/{} (min {:.2} mm)",
        closed.len(),
        open.len(),
        min_open * 1e3
    );
    ensure!(recovered as f64 >= 0.95 * closed.len() as f64, "{line}");
    ensure!(displaced == open.len(), "{line}");
    Ok(line)
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("readable output dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).expect("inside root").to_path_buf();
                out.insert(rel, std::fs::read(&path).expect("readable output file"));
            }
        }
    }
    out
}

fn catbc(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_catbc")).args(args).output().map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "catbc {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr));
    Ok(())
}

fn determinism() -> Outcome {
    let mut files = 0;
    for name in GOLDEN {
        let cfg = config_path(name);
        let cfg = cfg.to_str().expect("utf-8 path");
        let mut snaps = Vec::new();
        for _ in 0..2 {
            let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
            let out = tmp.path().to_str().expect("utf-8 path").to_string();
            catbc(&["--config", cfg, "--out", &out, "gen-data"])?;
            catbc(&["--config", cfg, "--out", &out, "run"])?;
            let results = format!("{out}/results.csv");
            catbc(&["--out", &out, "report", &results])?;
            snaps.push(snapshot(tmp.path()));
        }
        ensure!(!snaps[0].is_empty(), "{name}: nothing written");
        ensure!(
            snaps[0].keys().eq(snaps[1].keys()),
            "{name}: replays wrote different file sets"
        );
        for (path, bytes) in &snaps[0] {
            ensure!(&snaps[1][path] == bytes, "{name}: {} differs between replays", path.display());
        }
        files += snaps[0].len();
    }
    Ok(format!("{} configs, {files} files byte-identical across replays", GOLDEN.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("alignment oracle", alignment_oracle),
        ("normalized-coordinate round trips", nunocs_round_trips),
        ("loss identities", loss_identities),
        ("attention identities", attention_identities),
        ("reprojection", reprojection),
        ("discretization and keypose", discretization_and_keypose),
        ("closed vs open loop", closed_vs_open),
        ("tolerance gradient", tolerance_gradient),
        ("push recovery", push_recovery),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail}) [{secs:.1} s]", i + 1),
            Err(detail) => {
                println!("criterion {:>2} {name}: FAIL ({detail}) [{secs:.1} s]", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
