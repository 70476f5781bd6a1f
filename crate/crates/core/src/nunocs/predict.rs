//! Predictors standing in for a learned point-to-canonical-space network.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{normalize_with_frame, NormalizationFrame, NunocsCloud, SymmetryGroup};
use crate::error::{Error, Result};
use crate::geom::{io, yaw, KdTree, PointCloud, Pose, TriangleMesh, Vec3};

/// Maps a partial observation to normalized coordinates and a scale triple.
pub trait NunocsPredictor {
    fn predict(&self, partial: &PointCloud) -> Result<NunocsCloud>;
}

/// Uses simulation ground truth: the instance's model-to-world pose and its
/// full-model bounding box.
#[derive(Debug, Clone, Copy)]
pub struct OraclePredictor {
    pub model_pose: Pose,
    pub frame: NormalizationFrame,
}

impl NunocsPredictor for OraclePredictor {
    fn predict(&self, partial: &PointCloud) -> Result<NunocsCloud> {
        partial.ensure_nonempty()?;
        let local = partial.transformed(&self.model_pose.inverse());
        Ok(normalize_with_frame(&local, &self.frame))
    }
}

/// One training model of a category, centered on its bounding-box center.
#[derive(Debug, Clone)]
pub struct Template {
    pub id: String,
    pub mesh: TriangleMesh,
    pub points: Vec<Vec3>,
    pub frame: NormalizationFrame,
    pub coords: Vec<Vec3>,
}

pub const TEMPLATE_POINTS: usize = 2048;

impl Template {
    /// Recenters the mesh on its AABB center and samples its surface.
    pub fn from_mesh(id: impl Into<String>, mesh: &TriangleMesh) -> Result<Self> {
        let c = mesh.aabb_center();
        let mesh = mesh.transformed(&Pose::from_translation(-c));
        let mut rng = ChaCha8Rng::seed_from_u64(0x7e3a);
        let points = mesh.sample_surface(TEMPLATE_POINTS, &mut rng).points;
        Self::from_points(id, mesh, points)
    }

    pub fn from_points(id: impl Into<String>, mesh: TriangleMesh, points: Vec<Vec3>) -> Result<Self> {
        let (lo, hi) = mesh.bounds();
        let frame = NormalizationFrame::from_bounds(lo, hi)?;
        let coords = points.iter().map(|p| frame.normalize_clamped(p)).collect();
        Ok(Template { id: id.into(), mesh, points, frame, coords })
    }
}

#[derive(Debug, Clone)]
pub struct TemplateLibrary {
    pub category: String,
    pub symmetry: SymmetryGroup,
    pub z_step_deg: Option<f64>,
    pub templates: Vec<Template>,
}

impl TemplateLibrary {
    /// Reads `manifest.txt` (`key: value` lines: `category`, `z_step_deg`, and one
    /// `model: <id> <file.obj>` per template) from `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join("manifest.txt"))?;
        let mut category = None;
        let mut z_step = None;
        let mut templates = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("manifest line {}: expected `key: value`", ln + 1)))?;
            let value = value.trim();
            match key.trim() {
                "category" => category = Some(value.to_string()),
                "z_step_deg" => {
                    z_step = Some(value.parse::<f64>().map_err(|_| Error::Parse(format!("bad z_step_deg {value:?}")))?)
                }
                "model" => {
                    let mut it = value.split_whitespace();
                    let (id, file) = match (it.next(), it.next()) {
                        (Some(id), Some(file)) => (id, file),
                        _ => return Err(Error::Parse(format!("manifest line {}: `model: <id> <file>`", ln + 1))),
                    };
                    templates.push(Template::from_mesh(id, &io::load_mesh(&dir.join(file))?)?);
                }
                other => return Err(Error::Parse(format!("unknown manifest key {other:?}"))),
            }
        }
        let symmetry = z_step.map_or_else(SymmetryGroup::identity, SymmetryGroup::z_rotations);
        Ok(TemplateLibrary {
            category: category.ok_or_else(|| Error::Parse("manifest lacks `category`".into()))?,
            symmetry,
            z_step_deg: z_step,
            templates,
        })
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut manifest = format!("category: {}\n", self.category);
        if let Some(step) = self.z_step_deg {
            let _ = writeln!(manifest, "z_step_deg: {step}");
        }
        for t in &self.templates {
            let file = format!("{}.obj", t.id);
            std::fs::write(dir.join(&file), io::write_obj(&t.mesh))?;
            let _ = writeln!(manifest, "model: {} {}", t.id, file);
        }
        std::fs::write(dir.join("manifest.txt"), manifest)?;
        Ok(())
    }
}

/// Which template and yaw won the search, with the fitted per-axis scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchInfo {
    pub template: usize,
    pub yaw_index: usize,
    pub yaw: f64,
    pub axis_scale: Vec3,
    pub offset: Vec3,
    pub score: f64,
}

/// Brute-force template search over templates and yaw angles.
///
/// Assumes the observation is expressed in a gravity-aligned frame with the object
/// resting upright (template Z along world Z). For each template and yaw the
/// template is fitted to the un-rotated observation with an independent scale and
/// offset per axis (a few nearest-neighbor refinement rounds), then scored by the
/// symmetric chamfer distance.
#[derive(Debug, Clone)]
pub struct TemplateMatcher {
    pub library: TemplateLibrary,
    pub yaw_step_deg: f64,
    pub refine_iters: usize,
}

impl TemplateMatcher {
    pub fn new(library: TemplateLibrary) -> Self {
        TemplateMatcher { library, yaw_step_deg: 5.0, refine_iters: 12 }
    }

    pub fn search(&self, partial: &PointCloud) -> Result<(MatchInfo, Vec<usize>)> {
        partial.ensure_nonempty()?;
        if self.library.templates.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        let n_yaw = (360.0 / self.yaw_step_deg).round() as usize;
        let candidates: Vec<(usize, usize)> =
            (0..self.library.templates.len()).flat_map(|t| (0..n_yaw).map(move |k| (t, k))).collect();
        let fits: Vec<(MatchInfo, Vec<usize>)> = candidates
            .par_iter()
            .map(|&(t, k)| {
                let angle = (k as f64 * self.yaw_step_deg).to_radians();
                self.fit(t, k, angle, partial)
            })
            .collect();
        // Lowest score, then lowest template index, then lowest yaw index.
        let best = fits
            .into_iter()
            .min_by(|a, b| {
                a.0.score
                    .total_cmp(&b.0.score)
                    .then(a.0.template.cmp(&b.0.template))
                    .then(a.0.yaw_index.cmp(&b.0.yaw_index))
            })
            .expect("nonempty candidate set");
        Ok(best)
    }

    fn fit(&self, t: usize, k: usize, angle: f64, partial: &PointCloud) -> (MatchInfo, Vec<usize>) {
        let tpl = &self.library.templates[t];
        let unrot = yaw(-angle);
        let q: Vec<Vec3> = partial.points.iter().map(|p| unrot * p).collect();
        let (qlo, qhi) = PointCloud::new(q.clone()).bounds().expect("nonempty");
        let text = tpl.frame.extents;
        let mut scale = (qhi - qlo).component_div(&text);
        // A partial view underestimates the hidden extents; start isotropic at the
        // largest observed ratio.
        let s0 = scale.max();
        scale = Vec3::repeat(s0);
        let mut offset = Vec3::new((qlo.x + qhi.x) * 0.5, (qlo.y + qhi.y) * 0.5, qlo.z - s0 * tpl.frame.min.z);
        let mut assign = vec![0usize; q.len()];
        let fitted = |scale: &Vec3, offset: &Vec3| -> Vec<Vec3> {
            tpl.points.iter().map(|m| m.component_mul(scale) + offset).collect()
        };
        for _ in 0..self.refine_iters {
            let pts = fitted(&scale, &offset);
            let tree = KdTree::new(&pts).expect("template has points");
            for (i, p) in q.iter().enumerate() {
                assign[i] = tree.nearest(p).0;
            }
            for axis in 0..3 {
                let n = q.len() as f64;
                let (mut sm, mut sq, mut smm, mut smq) = (0.0, 0.0, 0.0, 0.0);
                for (i, p) in q.iter().enumerate() {
                    let m = tpl.points[assign[i]][axis];
                    sm += m;
                    sq += p[axis];
                    smm += m * m;
                    smq += m * p[axis];
                }
                let var = smm / n - (sm / n).powi(2);
                let cov = smq / n - (sm / n) * (sq / n);
                let extent = text[axis];
                if var > 1e-4 * extent * extent {
                    let s = (cov / var).clamp(0.25 * s0, 4.0 * s0);
                    scale[axis] = s;
                }
                offset[axis] = sq / n - scale[axis] * sm / n;
            }
        }
        let pts = fitted(&scale, &offset);
        let tree = KdTree::new(&pts).expect("template has points");
        let mut forward = 0.0;
        for (i, p) in q.iter().enumerate() {
            let (j, d) = tree.nearest(p);
            assign[i] = j;
            forward += d;
        }
        let qtree = KdTree::new(&q).expect("nonempty");
        let backward: f64 = pts.iter().map(|m| qtree.nearest(m).1).sum();
        let score = forward / q.len() as f64 + backward / pts.len() as f64;
        (
            MatchInfo { template: t, yaw_index: k, yaw: angle, axis_scale: scale, offset, score },
            assign,
        )
    }
}

impl NunocsPredictor for TemplateMatcher {
    fn predict(&self, partial: &PointCloud) -> Result<NunocsCloud> {
        let (info, assign) = self.search(partial)?;
        let tpl = &self.library.templates[info.template];
        let extents = tpl.frame.extents.component_mul(&info.axis_scale);
        Ok(NunocsCloud {
            coords: assign.iter().map(|&j| tpl.coords[j]).collect(),
            scales: extents / extents.x,
            source_indices: (0..partial.len()).map(|i| partial.source_of(i)).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn empty_library_is_an_error() {
        let lib = TemplateLibrary {
            category: "gear".into(),
            symmetry: SymmetryGroup::identity(),
            z_step_deg: None,
            templates: vec![],
        };
        let m = TemplateMatcher::new(lib);
        let cloud = PointCloud::new(vec![Vec3::zeros()]);
        assert_eq!(m.predict(&cloud).unwrap_err(), Error::EmptyDatabase);
    }

    #[test]
    fn oracle_matches_direct_normalization() {
        let frame = NormalizationFrame::centered(Vec3::new(0.02, 0.04, 0.01)).unwrap();
        let pose = Pose::new(yaw(0.7), Vec3::new(0.1, 0.2, 0.3));
        let local = vec![Vec3::new(0.01, -0.02, 0.0), Vec3::new(-0.005, 0.01, 0.005)];
        let world = PointCloud::new(local.iter().map(|p| pose.transform_point(p)).collect());
        let n = OraclePredictor { model_pose: pose, frame }.predict(&world).unwrap();
        for (c, p) in n.coords.iter().zip(&local) {
            assert!((c - frame.normalize(p)).norm() < 1e-12);
        }
        assert_eq!(n.scales, Vec3::new(1.0, 2.0, 0.5));
    }
}
