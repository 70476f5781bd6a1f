//! Subcommand implementations. Each writes its artifacts under `out` and returns
//! the paths it wrote.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use catbc_core::demo::{DemoLog, Trajectory};
use catbc_core::geom::io::write_ply;
use catbc_core::geom::PoseRecord;
use catbc_core::nunocs::{normalize_to_nunocs, solve_pose9d};
use catbc_core::rng::{derive_seed, stream};
use catbc_core::simgen::{emit_labels, random_instance, rest_poses, sample_scene, write_scene, Camera, SceneRanges};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Config, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::pipeline::{category_templates, demonstration, perceive, prepare, MESH_SEGMENTS, MODEL_GRID};
use crate::report::{parse_results_csv, sort_rows, summarize, summary_csv, summary_table, write_results_csv, ResultRow};

fn write(path: &Path, text: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn read(path: &Path) -> CliResult<String> {
    if !path.exists() {
        return Err(CliError::MissingArtifact(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Loads a scenario, applying `section.key=value` overrides and a seed override.
pub fn load_scenario(path: &Path, overrides: &[String], seed: Option<u64>) -> CliResult<ScenarioConfig> {
    let mut raw = Config::load(path)?;
    for o in overrides {
        raw.apply_override(o)?;
    }
    if let Some(s) = seed {
        raw.set("scenario", "seed", &s.to_string())?;
    }
    ScenarioConfig::from_config(raw)
}

/// Synthetic scenes of the scenario's category plus a template library.
pub fn gen_data(cfg: &ScenarioConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let root = out.join("dataset");
    let shape = cfg.category.base_shape();
    let base = shape.mesh(MESH_SEGMENTS);
    let rest = rest_poses(&shape);
    let ds = &cfg.dataset;
    let range = (ds.scale_min, ds.scale_max);
    let ranges = SceneRanges { dropout: (0.0, ds.dropout_max), ..SceneRanges::default() };
    let lines: Vec<String> = (0..ds.scenes)
        .into_par_iter()
        .map(|i| -> CliResult<String> {
            let seed = derive_seed(cfg.seed, i as u64);
            let mut rng = stream(seed, 0);
            let (mesh, scales) = random_instance(&base, [range; 3], &mut rng);
            let id = format!("{:06}", i);
            let instance = format!("{}_{id}", cfg.category.name());
            let scene = sample_scene(&instance, &mesh, scales, &rest, &ranges, &Camera::default(), seed, &mut rng)?;
            write_scene(&root, &id, &scene)?;
            // Built-in label check: the labels must solve back to the generating pose.
            let (labels, truth) = emit_labels(&scene)?;
            let est = solve_pose9d(&labels, &scene.partial)?;
            let err = est.object_pose().translation_distance(&truth.object_pose())
                + est.object_pose().rotation_distance(&truth.object_pose());
            Ok(format!("{id},{instance},{seed},{},{err:.3e}", scene.partial.len()))
        })
        .collect::<CliResult<_>>()?;
    let index = root.join("index.csv");
    write(&index, format!("id,instance,seed,points,label_roundtrip_err\n{}\n", lines.join("\n")))?;
    let templates = root.join("templates");
    category_templates(cfg.category, ds.templates, cfg.seed)?.save(&templates)?;
    Ok(vec![index, templates])
}

/// Parses a demo log (synthesizing one from the scenario when none is given)
/// into a receptacle-frame trajectory.
pub fn parse_demo(cfg: &ScenarioConfig, log: Option<&Path>, out: &Path) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    let traj = match log {
        Some(p) => {
            if !p.exists() {
                return Err(CliError::MissingArtifact(p.to_path_buf()));
            }
            let f = fs::File::open(p).map_err(|e| CliError::io(p, e))?;
            catbc_core::demo::parse_demo(&DemoLog::read_jsonl(BufReader::new(f))?)?
        }
        None => {
            let (log, traj) = demonstration(cfg)?;
            let mut buf = Vec::new();
            log.write_jsonl(&mut buf)?;
            let p = out.join("demo_log.jsonl");
            write(&p, buf)?;
            written.push(p);
            traj
        }
    };
    let p = out.join("demo_traj.jsonl");
    write(&p, traj.to_jsonl())?;
    written.push(p);
    Ok(written)
}

#[derive(Serialize)]
struct Prediction {
    scenario: String,
    predictor: String,
    estimate_offset: PoseRecord,
    scales: [f64; 3],
    extents_mm: [f64; 3],
    rms_residual: f64,
}

pub fn predict(cfg: &ScenarioConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let truth = cfg.novel_shape().sample(&MODEL_GRID);
    let canonical = normalize_to_nunocs(&cfg.category.base_shape().sample(&MODEL_GRID))?.0;
    let p = perceive(cfg, &truth, &canonical)?;
    let extents = p.pose9d.extents() * 1e3;
    let pred = Prediction {
        scenario: cfg.name.clone(),
        predictor: match cfg.predictor {
            crate::config::PredictorMode::Oracle => "oracle".into(),
            crate::config::PredictorMode::Matcher { .. } => "matcher".into(),
        },
        estimate_offset: (&p.estimate_offset).into(),
        scales: p.nunocs.scales.into(),
        extents_mm: extents.into(),
        rms_residual: p.pose9d.rms_residual,
    };
    let path = out.join("prediction.json");
    write(&path, json(&pred))?;
    let mut written = vec![path];
    if let Some(obs) = &p.observed {
        let path = out.join("observed.ply");
        write(&path, write_ply(obs))?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Serialize)]
struct KeyposeInfo {
    index: usize,
    waypoints: usize,
    pose: PoseRecord,
}

pub fn reproject(cfg: &ScenarioConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let prep = prepare(cfg)?;
    let target = out.join("target.jsonl");
    write(&target, prep.target.to_jsonl())?;
    let corr = out.join("correspondence.csv");
    let mut buf = Vec::new();
    prep.correspondence.write_csv(&mut buf)?;
    write(&corr, buf)?;
    let key = out.join("keypose.json");
    let info = KeyposeInfo {
        index: prep.keypose,
        waypoints: prep.target.len(),
        pose: (&prep.target.waypoints[prep.keypose].pose).into(),
    };
    write(&key, json(&info))?;
    Ok(vec![target, corr, key])
}

/// Runs every seed of a scenario. Returns the rows and writes one trace per run.
pub fn run_rows(cfg: &ScenarioConfig, traces: Option<&Path>) -> CliResult<Vec<ResultRow>> {
    let prep = prepare(cfg)?;
    let episodes = prep.episodes()?;
    let mut rows = Vec::with_capacity(episodes.len());
    for e in &episodes {
        if let (Some(dir), Some(r)) = (traces, &e.result) {
            let mut buf = Vec::new();
            r.write_trace_jsonl(&mut buf)?;
            write(&dir.join(format!("{}_{:03}_{}.jsonl", cfg.name, e.run, e.policy.name())), buf)?;
        }
        rows.push(ResultRow::from_episode(&cfg.name, e));
    }
    Ok(rows)
}

pub fn run(cfg: &ScenarioConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let mut rows = run_rows(cfg, Some(&out.join("traces")))?;
    sort_rows(&mut rows);
    let path = out.join("results.csv");
    write(&path, write_results_csv(&rows))?;
    Ok(vec![path, out.join("traces")])
}

/// Aggregates result files. Returns the written paths and the text table.
pub fn report(results: &[PathBuf], out: &Path) -> CliResult<(Vec<PathBuf>, String)> {
    if results.is_empty() {
        return Err(CliError::config("report needs at least one results file"));
    }
    let mut rows = Vec::new();
    for p in results {
        rows.extend(parse_results_csv(&read(p)?, p)?);
    }
    sort_rows(&mut rows);
    let summary = summarize(&rows);
    let table = summary_table(&summary);
    let csv = out.join("summary.csv");
    let txt = out.join("summary.txt");
    write(&csv, summary_csv(&summary))?;
    write(&txt, &table)?;
    Ok((vec![csv, txt], table))
}

/// Runs the scenario once per value of `section.key=v1,v2,...`, naming each
/// variant `<name>_<key><value>`.
pub fn sweep(path: &Path, overrides: &[String], seed: Option<u64>, param: &str, out: &Path) -> CliResult<Vec<PathBuf>> {
    let (lhs, values) = param.split_once('=').ok_or_else(|| CliError::config(format!("bad sweep spec {param:?}")))?;
    let key = lhs.split_once('.').map(|(_, k)| k).ok_or_else(|| CliError::config(format!("bad sweep key {lhs:?}")))?;
    let mut rows = Vec::new();
    for v in values.split(',').map(str::trim).filter(|v| !v.is_empty()) {
        let mut o = overrides.to_vec();
        o.push(format!("{lhs}={v}"));
        let base = load_scenario(path, &o, seed)?;
        let name = format!("{}_{key}{}", base.name, v.replace('.', "p"));
        o.push(format!("scenario.name={name}"));
        let cfg = load_scenario(path, &o, seed)?;
        rows.extend(run_rows(&cfg, None)?);
    }
    if rows.is_empty() {
        return Err(CliError::config(format!("sweep {param:?} lists no values")));
    }
    sort_rows(&mut rows);
    let p = out.join("results.csv");
    write(&p, write_results_csv(&rows))?;
    Ok(vec![p])
}

/// Reads a trajectory written by `parse-demo` or `reproject`.
pub fn read_trajectory(path: &Path) -> CliResult<Trajectory> {
    let text = read(path)?;
    Ok(Trajectory::read_jsonl(text.as_bytes())?)
}
