use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Point2, Point3, Vector3};

use super::{drop_degenerate, load_texture};
use crate::error::MeshError;
use crate::mesh::{Albedo, TriMesh};
use crate::real::Real;

#[derive(Default)]
struct Material {
    diffuse: Option<[f32; 3]>,
    texture: Option<String>,
}

/// Parses Wavefront OBJ text. `path` locates material files and labels errors.
pub fn parse_obj(bytes: &[u8], path: &Path) -> Result<TriMesh<f64>, MeshError> {
    let text = std::str::from_utf8(bytes).map_err(|e| MeshError::Parse {
        path: path.into(),
        line: 0,
        message: format!("not UTF-8: {e}"),
    })?;
    let parse_err = |line: usize, message: String| MeshError::Parse {
        path: path.into(),
        line,
        message,
    };

    let mut positions: Vec<Point3<f64>> = Vec::new();
    let mut texcoords: Vec<Point2<f64>> = Vec::new();
    let mut normals: Vec<Vector3<f64>> = Vec::new();
    let mut corner_index: HashMap<(usize, Option<usize>, Option<usize>), u32> = HashMap::new();
    let mut corners: Vec<(usize, Option<usize>, Option<usize>)> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut materials: HashMap<String, Material> = HashMap::new();
    let mut active_material: Option<String> = None;
    let mut face_number = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().unwrap_or("");
        let rest: Vec<&str> = tokens.collect();
        let floats = |n: usize| -> Result<Vec<f64>, MeshError> {
            if rest.len() < n {
                return Err(parse_err(
                    line_no,
                    format!("`{keyword}` expects {n} numbers"),
                ));
            }
            rest[..n]
                .iter()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| parse_err(line_no, format!("invalid number `{t}`")))
                })
                .collect()
        };
        match keyword {
            "v" => {
                let c = floats(3)?;
                positions.push(Point3::new(c[0], c[1], c[2]));
            }
            "vt" => {
                let c = floats(1)?;
                let v = rest.get(1).and_then(|t| t.parse().ok()).unwrap_or(0.0);
                texcoords.push(Point2::new(c[0], v));
            }
            "vn" => {
                let c = floats(3)?;
                normals.push(Vector3::new(c[0], c[1], c[2]));
            }
            "f" => {
                face_number += 1;
                if rest.len() < 3 {
                    return Err(parse_err(
                        line_no,
                        format!("face {face_number} has fewer than 3 vertices"),
                    ));
                }
                let mut polygon = Vec::with_capacity(rest.len());
                for token in &rest {
                    let mut parts = token.split('/');
                    let resolve = |s: Option<&str>,
                                   count: usize|
                     -> Result<Option<usize>, MeshError> {
                        let s = match s {
                            Some(s) if !s.is_empty() => s,
                            _ => return Ok(None),
                        };
                        let i: i64 = s.parse().map_err(|_| {
                            parse_err(line_no, format!("face {face_number}: invalid index `{s}`"))
                        })?;
                        let resolved = if i > 0 { i - 1 } else { count as i64 + i };
                        if i == 0 || resolved < 0 || resolved >= count as i64 {
                            return Err(MeshError::FaceIndexOutOfRange {
                                path: path.into(),
                                line: line_no,
                                face: face_number,
                                index: i,
                                vertex_count: count,
                            });
                        }
                        Ok(Some(resolved as usize))
                    };
                    let v = resolve(parts.next(), positions.len())?.ok_or_else(|| {
                        parse_err(line_no, format!("face {face_number}: missing vertex index"))
                    })?;
                    let vt = resolve(parts.next(), texcoords.len())?;
                    let vn = resolve(parts.next(), normals.len())?;
                    let key = (v, vt, vn);
                    let id = *corner_index.entry(key).or_insert_with(|| {
                        corners.push(key);
                        (corners.len() - 1) as u32
                    });
                    polygon.push(id);
                }
                for k in 1..polygon.len() - 1 {
                    faces.push([polygon[0], polygon[k], polygon[k + 1]]);
                }
            }
            "mtllib" => {
                let name = rest.join(" ");
                let mtl_path = path.parent().unwrap_or(Path::new(".")).join(&name);
                match std::fs::read_to_string(&mtl_path) {
                    Ok(src) => parse_mtl(&src, &mtl_path, &mut materials),
                    Err(e) => log::warn!(
                        "{}: cannot read material file {}: {e}",
                        path.display(),
                        mtl_path.display()
                    ),
                }
            }
            "usemtl" => {
                let name = rest.join(" ");
                match &active_material {
                    None => active_material = Some(name),
                    Some(current) if *current != name => {
                        log::warn!(
                            "{}:{line_no}: multiple materials, keeping `{current}`",
                            path.display()
                        )
                    }
                    _ => {}
                }
            }
            _ => {}
        }
    }

    let vertices: Vec<Point3<f64>> = corners.iter().map(|&(v, _, _)| positions[v]).collect();
    let has_uv = corners.iter().any(|c| c.1.is_some());
    let uvs = has_uv.then(|| {
        corners
            .iter()
            .map(|c| c.1.map(|t| texcoords[t]).unwrap_or_else(Point2::origin))
            .collect()
    });
    let has_normals = !corners.is_empty() && corners.iter().all(|c| c.2.is_some());
    let vnormals = has_normals.then(|| corners.iter().map(|c| normals[c.2.unwrap()]).collect());
    let faces = drop_degenerate(&vertices, faces, path);
    if faces.is_empty() {
        return Err(MeshError::NoFaces);
    }

    let material = active_material
        .as_ref()
        .and_then(|name| materials.get(name))
        .or_else(|| {
            // A single defined material applies even without `usemtl`.
            (materials.len() == 1)
                .then(|| materials.values().next())
                .flatten()
        });
    let albedo = match material {
        Some(Material {
            texture: Some(tex), ..
        }) => {
            let tex_path = path.parent().unwrap_or(Path::new(".")).join(tex);
            load_texture(&tex_path)?
        }
        Some(Material {
            diffuse: Some(kd), ..
        }) => Albedo::Uniform(*kd),
        _ => Albedo::default(),
    };
    TriMesh::new(vertices, vnormals, uvs, faces, albedo)
}

fn parse_mtl(src: &str, path: &Path, materials: &mut HashMap<String, Material>) {
    let mut current: Option<String> = None;
    for (idx, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        let Some(keyword) = tokens.next() else {
            continue;
        };
        let rest: Vec<&str> = tokens.collect();
        match keyword {
            "newmtl" => {
                let name = rest.join(" ");
                materials.entry(name.clone()).or_default();
                current = Some(name);
            }
            "Kd" => {
                if let (Some(name), Some(rgb)) = (&current, parse_rgb(&rest)) {
                    materials.get_mut(name).unwrap().diffuse = Some(rgb);
                }
            }
            "map_Kd" => {
                // Options such as `-s 1 1 1` precede the file name.
                if let (Some(name), Some(file)) = (&current, rest.last()) {
                    materials.get_mut(name).unwrap().texture = Some(file.to_string());
                }
            }
            k if k.starts_with("map_")
                || matches!(k, "bump" | "disp" | "decal" | "refl" | "norm") =>
            {
                log::warn!(
                    "{}:{}: ignoring material map `{k}`",
                    path.display(),
                    idx + 1
                );
            }
            _ => {}
        }
    }
}

fn parse_rgb(tokens: &[&str]) -> Option<[f32; 3]> {
    if tokens.len() < 3 {
        return None;
    }
    let mut out = [0.0f32; 3];
    for (o, t) in out.iter_mut().zip(tokens) {
        *o = t.parse().ok()?;
    }
    Some(out)
}

/// Serializes positions, UVs, normals and faces as OBJ text (no material).
pub fn write_obj<T: Real>(mesh: &TriMesh<T>) -> String {
    let mut out = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v.x.as_f64(), v.y.as_f64(), v.z.as_f64());
    }
    for uv in mesh.uvs() {
        let _ = writeln!(out, "vt {} {}", uv.x.as_f64(), uv.y.as_f64());
    }
    for n in mesh.normals() {
        let _ = writeln!(out, "vn {} {} {}", n.x.as_f64(), n.y.as_f64(), n.z.as_f64());
    }
    for f in mesh.faces() {
        let [a, b, c] = f.map(|i| i + 1);
        let _ = writeln!(out, "f {a}/{a}/{a} {b}/{b}/{b} {c}/{c}/{c}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE: &str = "\
# unit cube
v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nv 0 0 1\nv 1 0 1\nv 0 1 1\nv 1 1 1
f 1 3 4\nf 1 4 2\nf 5 6 8\nf 5 8 7\nf 1 2 6\nf 1 6 5
f 3 7 8\nf 3 8 4\nf 1 5 7\nf 1 7 3\nf 2 4 8\nf 2 8 6
";

    #[test]
    fn parses_cube() {
        let mesh = parse_obj(CUBE.as_bytes(), Path::new("cube.obj")).unwrap();
        assert_eq!(mesh.faces().len(), 12);
        assert_eq!(mesh.vertices().len(), 8);
        let (lo, hi) = mesh.aabb();
        assert_eq!(lo, Point3::new(0.0, 0.0, 0.0));
        assert_eq!(hi, Point3::new(1.0, 1.0, 1.0));
        assert_eq!(mesh.albedo(), &Albedo::Uniform([0.5; 3]));
        assert!(mesh.uvs().iter().all(|uv| *uv == Point2::origin()));
    }

    #[test]
    fn face_index_out_of_range_names_face() {
        let src = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\nf 1 2 9\n";
        let err = parse_obj(src.as_bytes(), Path::new("bad.obj")).unwrap_err();
        match &err {
            MeshError::FaceIndexOutOfRange {
                face,
                index,
                line,
                vertex_count,
                ..
            } => {
                assert_eq!((*face, *index, *line, *vertex_count), (2, 9, 5, 3));
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(err.to_string().contains("face 2"));
    }

    #[test]
    fn bad_number_reports_line() {
        let src = "v 0 0 0\nv 1 x 0\n";
        match parse_obj(src.as_bytes(), Path::new("bad.obj")).unwrap_err() {
            MeshError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn zero_faces_rejected() {
        let src = "v 0 0 0\nv 1 0 0\nv 0 1 0\n";
        assert!(matches!(
            parse_obj(src.as_bytes(), Path::new("x.obj")),
            Err(MeshError::NoFaces)
        ));
    }

    #[test]
    fn negative_indices_and_quads() {
        let src = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf -4 -3 -2 -1\n";
        let mesh = parse_obj(src.as_bytes(), Path::new("q.obj")).unwrap();
        assert_eq!(mesh.faces().len(), 2);
    }
}
