//! Plain-text geometry formats: OBJ (`v`/`f` triangles), ASCII PLY and XYZ.

use std::fmt::Write as _;
use std::path::Path;

use super::cloud::PointCloud;
use super::mesh::TriangleMesh;
use super::pose::Vec3;
use crate::error::{Error, Result};

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::Parse(format!("line {line}: missing coordinate")))?;
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad number {tok:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("line {line}: non-finite value")));
    }
    Ok(v)
}

fn parse_vec3<'a>(it: &mut impl Iterator<Item = &'a str>, line: usize) -> Result<Vec3> {
    Ok(Vec3::new(parse_f64(it.next(), line)?, parse_f64(it.next(), line)?, parse_f64(it.next(), line)?))
}

/// Parses the OBJ subset used for model libraries. Face entries may carry
/// `v/vt/vn` suffixes; only the vertex index is used. Polygons are rejected.
pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let mut it = raw.split_whitespace();
        match it.next() {
            Some("v") => vertices.push(parse_vec3(&mut it, line)?),
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        let i: i64 = head
                            .parse()
                            .map_err(|_| Error::Parse(format!("line {line}: bad index {t:?}")))?;
                        let n = vertices.len() as i64;
                        let resolved = if i < 0 { n + i } else { i - 1 };
                        if resolved < 0 {
                            return Err(Error::Parse(format!("line {line}: index {i} out of range")));
                        }
                        Ok(resolved as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(Error::Parse(format!("line {line}: only triangles are supported")));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces)
}

pub fn write_obj(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {:?} {:?} {:?}", v.x, v.y, v.z);
    }
    for f in &mesh.faces {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

/// ASCII PLY with a `vertex` element whose first three properties are x, y, z.
pub fn parse_ply(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(Error::Parse("missing ply magic".into())),
    }
    let mut count = None;
    let mut props = Vec::new();
    let mut in_vertex = false;
    for (_, l) in lines.by_ref() {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["format", fmt, ..] if *fmt != "ascii" => {
                return Err(Error::Parse(format!("unsupported ply format {fmt}")))
            }
            ["element", "vertex", n] => {
                count = Some(n.parse::<usize>().map_err(|_| Error::Parse("bad vertex count".into()))?);
                in_vertex = true;
            }
            ["element", ..] => in_vertex = false,
            ["property", _, name] if in_vertex => props.push(name.to_string()),
            ["end_header"] => break,
            _ => {}
        }
    }
    let count = count.ok_or_else(|| Error::Parse("no vertex element".into()))?;
    let pos = |n: &str| props.iter().position(|p| p == n);
    let (ix, iy, iz) = match (pos("x"), pos("y"), pos("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(Error::Parse("vertex element lacks x/y/z".into())),
    };
    let mut points = Vec::with_capacity(count);
    for (ln, l) in lines.take(count) {
        let toks: Vec<&str> = l.split_whitespace().collect();
        let get = |i: usize| parse_f64(toks.get(i).copied(), ln + 1);
        points.push(Vec3::new(get(ix)?, get(iy)?, get(iz)?));
    }
    if points.len() != count {
        return Err(Error::Parse(format!("expected {count} vertices, got {}", points.len())));
    }
    Ok(PointCloud::new(points))
}

pub fn write_ply(cloud: &PointCloud) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        cloud.len()
    );
    for p in &cloud.points {
        let _ = writeln!(s, "{:?} {:?} {:?}", p.x, p.y, p.z);
    }
    s
}

/// Whitespace-separated `x y z` rows; blank lines and `#` comments are skipped.
pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (ln, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        points.push(parse_vec3(&mut l.split_whitespace(), ln + 1)?);
    }
    Ok(PointCloud::new(points))
}

pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    parse_obj(&std::fs::read_to_string(path)?)
}

/// Loads `.ply` or whitespace XYZ depending on the file extension.
pub fn load_cloud(path: &Path) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("ply") => parse_ply(&text),
        _ => parse_xyz(&text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obj_subset() {
        let text = "# cube corner\nv 0 0 0\nv 1 0 0\nvn 0 0 1\nv 0 1 0\nf 1//1 2//1 3//1\nusemtl x\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.vertices.len(), 3);
        assert_eq!(m.faces, vec![[0, 1, 2]]);
        assert!(parse_obj("v 0 0 nan\n").is_err());
        assert!(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3 4\n").is_err());
    }

    #[test]
    fn ply_and_xyz() {
        let c = PointCloud::new(vec![Vec3::new(0.1, 0.2, 0.3), Vec3::new(-1.0, 2.5, 1e-7)]);
        assert_eq!(parse_ply(&write_ply(&c)).unwrap(), c);
        let x = parse_xyz("# pts\n1 2 3\n\n4 5 6\n").unwrap();
        assert_eq!(x.points[1], Vec3::new(4.0, 5.0, 6.0));
        assert!(parse_xyz("1 2 inf\n").is_err());
        let bad = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 NaN 0\n";
        assert!(parse_ply(bad).is_err());
    }

    #[test]
    fn obj_round_trip() {
        let m = TriangleMesh::ring(0.02, 0.006, 0.004, 16);
        assert_eq!(parse_obj(&write_obj(&m)).unwrap(), m);
    }
}
