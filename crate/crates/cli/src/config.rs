//! Flat keyed text configs with one level of `[section]`s.
//!
//! Keys ending in `_mm` are read as millimeters and stored in meters; keys ending
//! in `_deg` are read as degrees and stored in radians. The suffix is dropped, so
//! `clearance_mm = 0.5` is looked up as `clearance` with value `0.0005`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use catbc_core::catbc::{ControlParams, DisturbanceModel, PushEvent, TrackerModel, TransportParams};
use catbc_core::demo::{DEFAULT_KEYPOSE_DISTANCE, DEFAULT_MIN_ANGLE_DEG, DEFAULT_MIN_STEP};
use catbc_core::shapes::ShapeSpec;
use catbc_core::tasks::TaskKind;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    text: String,
    factor: Option<f64>,
    line: usize,
    used: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    pub path: String,
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

fn split_unit(key: &str) -> (&str, Option<f64>) {
    if let Some(k) = key.strip_suffix("_mm") {
        (k, Some(1e-3))
    } else if let Some(k) = key.strip_suffix("_deg") {
        (k, Some(std::f64::consts::PI / 180.0))
    } else {
        (key, None)
    }
}

impl Config {
    pub fn parse(text: &str, path: &str) -> CliResult<Config> {
        let err = |line: usize, message: String| CliError::Config { path: path.to_string(), line, message };
        let mut cfg = Config { path: path.to_string(), ..Default::default() };
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| err(n, format!("unterminated section header {line:?}")))?;
                let name = name.trim();
                if name.is_empty() || name.contains(['[', ']', '.']) {
                    return Err(err(n, format!("bad section name {name:?}")));
                }
                cfg.sections.entry(name.to_string()).or_default();
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| err(n, format!("expected key = value, got {line:?}")))?;
            let sec = section.as_ref().ok_or_else(|| err(n, "key outside of any section".into()))?;
            cfg.insert(sec, key.trim(), value.trim(), n).map_err(|m| err(n, m))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Config> {
        if !path.exists() {
            return Err(CliError::MissingArtifact(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Config::parse(&text, &path.display().to_string())
    }

    fn insert(&mut self, section: &str, key: &str, value: &str, line: usize) -> Result<(), String> {
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(format!("bad key {key:?}"));
        }
        let (base, factor) = split_unit(key);
        let sec = self.sections.entry(section.to_string()).or_default();
        if sec.contains_key(base) {
            return Err(format!("duplicate key {section}.{base}"));
        }
        sec.insert(base.to_string(), Entry { text: value.to_string(), factor, line, used: false });
        Ok(())
    }

    /// Replaces or adds `section.key` (key may carry a unit suffix).
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> CliResult<()> {
        let (base, _) = split_unit(key);
        if let Some(sec) = self.sections.get_mut(section) {
            sec.remove(base);
        }
        self.insert(section, key, value, 0).map_err(CliError::config)
    }

    /// Parses an override of the form `section.key=value`.
    pub fn apply_override(&mut self, spec: &str) -> CliResult<()> {
        let (lhs, value) = spec.split_once('=').ok_or_else(|| CliError::config(format!("bad override {spec:?}")))?;
        let (section, key) =
            lhs.trim().split_once('.').ok_or_else(|| CliError::config(format!("override needs section.key: {spec:?}")))?;
        self.set(section, key, value.trim())
    }

    fn err(&self, line: usize, message: String) -> CliError {
        CliError::Config { path: self.path.clone(), line, message }
    }

    fn take(&mut self, section: &str, key: &str) -> Option<Entry> {
        let e = self.sections.get_mut(section)?.get_mut(key)?;
        e.used = true;
        Some(e.clone())
    }

    pub fn has(&self, section: &str, key: &str) -> bool {
        self.sections.get(section).is_some_and(|s| s.contains_key(key))
    }

    pub fn str(&mut self, section: &str, key: &str) -> CliResult<Option<String>> {
        match self.take(section, key) {
            None => Ok(None),
            Some(e) if e.factor.is_some() => Err(self.err(e.line, format!("{section}.{key} takes no unit suffix"))),
            Some(e) => Ok(Some(e.text)),
        }
    }

    pub fn f64(&mut self, section: &str, key: &str) -> CliResult<Option<f64>> {
        let Some(e) = self.take(section, key) else { return Ok(None) };
        let v: f64 = e.text.parse().map_err(|_| self.err(e.line, format!("{section}.{key}: not a number: {:?}", e.text)))?;
        if !v.is_finite() {
            return Err(self.err(e.line, format!("{section}.{key} must be finite")));
        }
        Ok(Some(v * e.factor.unwrap_or(1.0)))
    }

    /// Non-negative number with a default.
    pub fn nonneg(&mut self, section: &str, key: &str, default: f64) -> CliResult<f64> {
        let line = self.line(section, key);
        let v = self.f64(section, key)?.unwrap_or(default);
        if v < 0.0 {
            return Err(self.err(line, format!("{section}.{key} must be non-negative, got {v}")));
        }
        Ok(v)
    }

    pub fn positive(&mut self, section: &str, key: &str, default: f64) -> CliResult<f64> {
        let line = self.line(section, key);
        let v = self.f64(section, key)?.unwrap_or(default);
        if v <= 0.0 {
            return Err(self.err(line, format!("{section}.{key} must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn uint(&mut self, section: &str, key: &str) -> CliResult<Option<u64>> {
        match self.take(section, key) {
            None => Ok(None),
            Some(e) if e.factor.is_some() => Err(self.err(e.line, format!("{section}.{key} takes no unit suffix"))),
            Some(e) => e
                .text
                .parse()
                .map(Some)
                .map_err(|_| self.err(e.line, format!("{section}.{key}: not a non-negative integer: {:?}", e.text))),
        }
    }

    fn line(&self, section: &str, key: &str) -> usize {
        self.sections.get(section).and_then(|s| s.get(key)).map_or(0, |e| e.line)
    }

    /// Errors on keys nobody asked for, which are almost always typos.
    pub fn finish(&self) -> CliResult<()> {
        for (name, sec) in &self.sections {
            if let Some((key, e)) = sec.iter().find(|(_, e)| !e.used) {
                return Err(self.err(e.line, format!("unknown key {name}.{key}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Gear,
    Battery,
}

impl Category {
    pub fn name(&self) -> &'static str {
        match self {
            Category::Gear => "gear",
            Category::Battery => "battery",
        }
    }

    /// Base model of the category; the demonstration uses this instance.
    pub fn base_shape(&self) -> ShapeSpec {
        match self {
            Category::Gear => ShapeSpec::Ring { outer: 0.020, inner: 0.006, half_height: 0.004 },
            Category::Battery => ShapeSpec::Cylinder { radius: 0.007, half_height: 0.025 },
        }
    }

    /// Base shape with its radial and axial dimensions scaled.
    pub fn instance(&self, radial: f64, axial: f64) -> ShapeSpec {
        match self.base_shape() {
            ShapeSpec::Ring { outer, inner, half_height } => {
                ShapeSpec::Ring { outer: outer * radial, inner: inner * radial, half_height: half_height * axial }
            }
            ShapeSpec::Cylinder { radius, half_height } => {
                ShapeSpec::Cylinder { radius: radius * radial, half_height: half_height * axial }
            }
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Closed,
    Open,
    /// Closed loop on a trajectory reprojected by the object center, not the anchor.
    Centroid,
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::Closed => "closed",
            Policy::Open => "open",
            Policy::Centroid => "centroid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PredictorMode {
    /// Ground-truth canonical coordinates.
    Oracle,
    /// Template search over a library, loaded from `templates` or built from
    /// `count` instances of the category.
    Matcher { templates: Option<PathBuf>, count: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub scenes: usize,
    pub scale_min: f64,
    pub scale_max: f64,
    pub dropout_max: f64,
    pub templates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub task: TaskKind,
    pub category: Category,
    pub scale_radial: f64,
    pub scale_axial: f64,
    pub clearance: f64,
    pub predictor: PredictorMode,
    pub policy: Policy,
    pub tracker: TrackerModel,
    pub demo_tracker: TrackerModel,
    pub disturbance: DisturbanceModel,
    pub control: ControlParams,
    pub transport: TransportParams,
    pub keypose_distance: f64,
    pub min_step: f64,
    pub min_angle: f64,
    pub symmetry_step: f64,
    pub seed: u64,
    pub runs: usize,
    pub dataset: DatasetSpec,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> CliResult<ScenarioConfig> {
        Self::from_config(Config::load(path)?)
    }

    pub fn from_config(mut c: Config) -> CliResult<ScenarioConfig> {
        let path = c.path.clone();
        let bad = |m: String| CliError::Config { path: path.clone(), line: 0, message: m };
        let name = c.str("scenario", "name")?.ok_or_else(|| bad("scenario.name is required".into()))?;
        if name.is_empty() || !name.chars().all(|ch| ch.is_ascii_alphanumeric() || "_-.".contains(ch)) {
            return Err(bad(format!("scenario.name {name:?} must be [A-Za-z0-9_.-]+")));
        }
        let task: TaskKind = c
            .str("scenario", "task")?
            .ok_or_else(|| bad("scenario.task is required".into()))?
            .parse()
            .map_err(|e: catbc_core::Error| bad(e.to_string()))?;
        let category = match c.str("scenario", "category")?.as_deref() {
            Some("gear") => Category::Gear,
            Some("battery") => Category::Battery,
            None => match task {
                TaskKind::Insertion => Category::Gear,
                _ => Category::Battery,
            },
            Some(other) => return Err(bad(format!("unknown category {other:?}"))),
        };
        match (task, category) {
            (TaskKind::Insertion, Category::Gear) | (TaskKind::Standing | TaskKind::Assembly, Category::Battery) => {}
            _ => return Err(bad(format!("category {} does not fit task {}", category.name(), task.name()))),
        }
        let seed = c.uint("scenario", "seed")?.unwrap_or(0);
        let runs = c.uint("scenario", "runs")?.unwrap_or(5) as usize;
        if runs == 0 {
            return Err(bad("scenario.runs must be at least 1".into()));
        }

        let scale_radial = c.positive("instance", "scale_radial", 1.0)?;
        let scale_axial = c.positive("instance", "scale_axial", 1.0)?;
        let clearance = c.positive("receptacle", "clearance", 0.0005)?;

        let predictor = match c.str("predictor", "mode")?.as_deref() {
            None | Some("oracle") => PredictorMode::Oracle,
            Some("matcher") => {
                let templates = c.str("predictor", "templates")?.map(PathBuf::from);
                if let Some(p) = &templates {
                    if !p.exists() {
                        return Err(CliError::MissingArtifact(p.clone()));
                    }
                }
                let count = c.uint("predictor", "count")?.unwrap_or(6) as usize;
                if count == 0 {
                    return Err(bad("predictor.count must be at least 1".into()));
                }
                if category == Category::Battery {
                    return Err(bad("the template matcher needs an upright resting category".into()));
                }
                PredictorMode::Matcher { templates, count }
            }
            Some(other) => return Err(bad(format!("unknown predictor mode {other:?}"))),
        };
        let policy = match c.str("policy", "mode")?.as_deref() {
            None | Some("closed") => Policy::Closed,
            Some("open") => Policy::Open,
            Some("centroid") => Policy::Centroid,
            Some(other) => return Err(bad(format!("unknown policy {other:?}"))),
        };

        let tracker = TrackerModel {
            sigma_trans: c.nonneg("tracker", "sigma_trans", 0.0)?,
            sigma_rot: c.nonneg("tracker", "sigma_rot", 0.0)?,
            latency_ticks: c.uint("tracker", "latency_ticks")?.unwrap_or(0) as usize,
            rate_hz: c.positive("tracker", "rate_hz", 10.0)?,
        };
        let demo_tracker = TrackerModel {
            sigma_trans: c.nonneg("demo", "sigma_trans", 0.0)?,
            sigma_rot: c.nonneg("demo", "sigma_rot", 0.0)?,
            ..TrackerModel::default()
        };

        let mut pushes = Vec::new();
        if let Some(tick) = c.uint("disturbance", "push_tick")? {
            let offset = [
                c.f64("disturbance", "push_x")?.unwrap_or(0.0),
                c.f64("disturbance", "push_y")?.unwrap_or(0.0),
                c.f64("disturbance", "push_z")?.unwrap_or(0.0),
            ];
            pushes.push(PushEvent { tick: tick as usize, offset });
        }
        let disturbance = DisturbanceModel {
            grasp_slip_trans: c.nonneg("disturbance", "grasp_slip_trans", 0.0)?,
            grasp_slip_rot: c.nonneg("disturbance", "grasp_slip_rot", 0.0)?,
            contact_slip_trans: c.nonneg("disturbance", "contact_slip_trans", 0.0)?,
            contact_slip_rot: c.nonneg("disturbance", "contact_slip_rot", 0.0)?,
            pushes,
        };

        let d = ControlParams::default();
        let control = ControlParams {
            goal_tol_trans: c.positive("control", "goal_tol_trans", d.goal_tol_trans)?,
            goal_tol_rot: c.positive("control", "goal_tol_rot", d.goal_tol_rot)?,
            max_step_trans: c.positive("control", "max_step_trans", d.max_step_trans)?,
            max_step_rot: c.positive("control", "max_step_rot", d.max_step_rot)?,
            timeout_ticks: c.uint("control", "timeout_ticks")?.map(|t| t as usize),
        };
        let t = TransportParams::default();
        let transport = TransportParams {
            lift: c.positive("transport", "lift", t.lift)?,
            lift_increment: c.positive("transport", "lift_increment", t.lift_increment)?,
            max_lift: c.positive("transport", "max_lift", t.max_lift)?,
            ..t
        };
        let keypose_distance = c.positive("demo", "keypose_distance", DEFAULT_KEYPOSE_DISTANCE)?;
        let min_step = c.positive("demo", "min_step", DEFAULT_MIN_STEP)?;
        let min_angle = c.positive("demo", "min_angle", DEFAULT_MIN_ANGLE_DEG.to_radians())?;
        let symmetry_step = c.positive("demo", "symmetry_step", 5f64.to_radians())?;

        let dataset = DatasetSpec {
            scenes: c.uint("dataset", "scenes")?.unwrap_or(20) as usize,
            scale_min: c.positive("dataset", "scale_min", 0.5)?,
            scale_max: c.positive("dataset", "scale_max", 2.0)?,
            dropout_max: c.nonneg("dataset", "dropout_max", 0.4)?,
            templates: c.uint("dataset", "templates")?.unwrap_or(6) as usize,
        };
        if dataset.scale_min > dataset.scale_max {
            return Err(bad("dataset.scale_min exceeds dataset.scale_max".into()));
        }
        if dataset.dropout_max > catbc_core::simgen::MAX_DROPOUT {
            return Err(bad(format!("dataset.dropout_max above {}", catbc_core::simgen::MAX_DROPOUT)));
        }
        c.finish()?;
        Ok(ScenarioConfig {
            name,
            task,
            category,
            scale_radial,
            scale_axial,
            clearance,
            predictor,
            policy,
            tracker,
            demo_tracker,
            disturbance,
            control,
            transport,
            keypose_distance,
            min_step,
            min_angle,
            symmetry_step,
            seed,
            runs,
            dataset,
        })
    }

    pub fn novel_shape(&self) -> ShapeSpec {
        self.category.instance(self.scale_radial, self.scale_axial)
    }
}
