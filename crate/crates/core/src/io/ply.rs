use std::path::Path;
use std::sync::Arc;

use nalgebra::{Point2, Point3, Vector3};

use super::drop_degenerate;
use crate::color::srgb_to_linear;
use crate::error::MeshError;
use crate::mesh::{Albedo, TriMesh};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar {
        name: String,
        ty: Scalar,
    },
    List {
        name: String,
        count: Scalar,
        item: Scalar,
    },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(PartialEq)]
enum Format {
    Ascii,
    BinaryLittleEndian,
}

/// One decoded element instance: scalar values and list values by property order.
type Record = Vec<Vec<f64>>;

/// Parses ASCII or binary little-endian PLY with optional normals, UVs and vertex colors.
pub fn parse_ply(bytes: &[u8], path: &Path) -> Result<TriMesh<f64>, MeshError> {
    let err = |line: usize, message: String| MeshError::Parse {
        path: path.into(),
        line,
        message,
    };

    // Header is ASCII up to and including the `end_header` line.
    let mut offset = 0usize;
    let mut line_no = 0usize;
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let end = bytes[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| err(line_no + 1, "unterminated header".into()))?;
        let line = String::from_utf8_lossy(&bytes[offset..offset + end])
            .trim()
            .to_string();
        offset += end + 1;
        line_no += 1;
        if line_no == 1 {
            if line != "ply" {
                return Err(err(1, "missing `ply` magic".into()));
            }
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.first().copied() {
            Some("format") => {
                format = Some(match tokens.get(1).copied() {
                    Some("ascii") => Format::Ascii,
                    Some("binary_little_endian") => Format::BinaryLittleEndian,
                    Some(other) => {
                        return Err(MeshError::Unsupported {
                            path: path.into(),
                            message: format!("PLY format {other}"),
                        })
                    }
                    None => return Err(err(line_no, "format line without a format".into())),
                })
            }
            Some("element") => {
                let (Some(name), Some(count)) = (tokens.get(1), tokens.get(2)) else {
                    return Err(err(line_no, "malformed element line".into()));
                };
                let count = count
                    .parse()
                    .map_err(|_| err(line_no, format!("invalid element count `{count}`")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| err(line_no, "property before any element".into()))?;
                let prop = if tokens.get(1) == Some(&"list") {
                    let (Some(c), Some(i), Some(name)) =
                        (tokens.get(2), tokens.get(3), tokens.get(4))
                    else {
                        return Err(err(line_no, "malformed list property".into()));
                    };
                    Property::List {
                        name: name.to_string(),
                        count: Scalar::parse(c)
                            .ok_or_else(|| err(line_no, format!("unknown type `{c}`")))?,
                        item: Scalar::parse(i)
                            .ok_or_else(|| err(line_no, format!("unknown type `{i}`")))?,
                    }
                } else {
                    let (Some(t), Some(name)) = (tokens.get(1), tokens.get(2)) else {
                        return Err(err(line_no, "malformed property".into()));
                    };
                    Property::Scalar {
                        name: name.to_string(),
                        ty: Scalar::parse(t)
                            .ok_or_else(|| err(line_no, format!("unknown type `{t}`")))?,
                    }
                };
                element.properties.push(prop);
            }
            Some("end_header") => break,
            _ => {}
        }
    }
    let format = format.ok_or_else(|| err(line_no, "missing format line".into()))?;

    let mut data: Vec<(String, Vec<Record>)> = Vec::new();
    match format {
        Format::Ascii => {
            let body = String::from_utf8_lossy(&bytes[offset..]);
            let mut lines = body
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty());
            for el in &elements {
                let mut records = Vec::with_capacity(el.count);
                for _ in 0..el.count {
                    let (i, l) = lines.next().ok_or_else(|| {
                        err(line_no + 1, format!("unexpected end of `{}` data", el.name))
                    })?;
                    let here = line_no + 1 + i;
                    let mut values = l.split_whitespace().map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| err(here, format!("invalid number `{t}`")))
                    });
                    let mut next = || {
                        values
                            .next()
                            .unwrap_or_else(|| Err(err(here, "too few values".into())))
                    };
                    let mut record = Vec::with_capacity(el.properties.len());
                    for p in &el.properties {
                        match p {
                            Property::Scalar { .. } => record.push(vec![next()?]),
                            Property::List { .. } => {
                                let n = next()? as usize;
                                record.push((0..n).map(|_| next()).collect::<Result<_, _>>()?);
                            }
                        }
                    }
                    records.push(record);
                }
                data.push((el.name.clone(), records));
            }
        }
        Format::BinaryLittleEndian => {
            let mut pos = offset;
            let mut take = |ty: Scalar| -> Result<f64, MeshError> {
                let n = ty.size();
                if pos + n > bytes.len() {
                    return Err(err(line_no, format!("binary body truncated at byte {pos}")));
                }
                let v = ty.read_le(&bytes[pos..pos + n]);
                pos += n;
                Ok(v)
            };
            for el in &elements {
                let mut records = Vec::with_capacity(el.count);
                for _ in 0..el.count {
                    let mut record = Vec::with_capacity(el.properties.len());
                    for p in &el.properties {
                        match p {
                            Property::Scalar { ty, .. } => record.push(vec![take(*ty)?]),
                            Property::List { count, item, .. } => {
                                let n = take(*count)? as usize;
                                record.push((0..n).map(|_| take(*item)).collect::<Result<_, _>>()?);
                            }
                        }
                    }
                    records.push(record);
                }
                data.push((el.name.clone(), records));
            }
        }
    }

    let find_el = |name: &str| elements.iter().position(|e| e.name == name);
    let vi = find_el("vertex").ok_or_else(|| err(line_no, "no vertex element".into()))?;
    let fi = find_el("face").ok_or(MeshError::NoFaces)?;
    let prop_index = |el: &Element, names: &[&str]| {
        el.properties.iter().position(|p| match p {
            Property::Scalar { name, .. } | Property::List { name, .. } => {
                names.contains(&name.as_str())
            }
        })
    };
    let vel = &elements[vi];
    let idx = |names: &[&str]| prop_index(vel, names);
    let (px, py, pz) = match (idx(&["x"]), idx(&["y"]), idx(&["z"])) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(err(line_no, "vertex element lacks x/y/z".into())),
    };
    let normal_idx = match (idx(&["nx"]), idx(&["ny"]), idx(&["nz"])) {
        (Some(x), Some(y), Some(z)) => Some((x, y, z)),
        _ => None,
    };
    let uv_idx = match (idx(&["u", "s", "texture_u"]), idx(&["v", "t", "texture_v"])) {
        (Some(u), Some(v)) => Some((u, v)),
        _ => None,
    };
    let color_idx = match (
        idx(&["red", "r"]),
        idx(&["green", "g"]),
        idx(&["blue", "b"]),
    ) {
        (Some(r), Some(g), Some(b)) => Some((r, g, b)),
        _ => None,
    };
    let color_is_byte = color_idx.is_some_and(|(r, _, _)| {
        matches!(vel.properties[r], Property::Scalar { ty: Scalar::U8, .. })
    });

    let verts = &data[vi].1;
    let vertices: Vec<Point3<f64>> = verts
        .iter()
        .map(|r| Point3::new(r[px][0], r[py][0], r[pz][0]))
        .collect();
    let normals = normal_idx.map(|(x, y, z)| {
        verts
            .iter()
            .map(|r| Vector3::new(r[x][0], r[y][0], r[z][0]))
            .collect()
    });
    let uvs = uv_idx.map(|(u, v)| {
        verts
            .iter()
            .map(|r| Point2::new(r[u][0], r[v][0]))
            .collect()
    });
    let albedo = match color_idx {
        Some((ri, gi, bi)) => {
            let conv = |v: f64| -> f32 {
                if color_is_byte {
                    srgb_to_linear((v / 255.0) as f32)
                } else {
                    v as f32
                }
            };
            Albedo::VertexColors(Arc::new(
                verts
                    .iter()
                    .map(|r| [conv(r[ri][0]), conv(r[gi][0]), conv(r[bi][0])])
                    .collect(),
            ))
        }
        None => Albedo::default(),
    };

    let fel = &elements[fi];
    let list = prop_index(fel, &["vertex_indices", "vertex_index"])
        .ok_or_else(|| err(line_no, "face element lacks vertex_indices".into()))?;
    let mut faces = Vec::new();
    for (n, record) in data[fi].1.iter().enumerate() {
        let poly = &record[list];
        if poly.len() < 3 {
            return Err(err(
                line_no,
                format!("face {} has fewer than 3 vertices", n + 1),
            ));
        }
        for &v in poly {
            if v < 0.0 || v as usize >= vertices.len() {
                return Err(MeshError::FaceIndexOutOfRange {
                    path: path.into(),
                    line: line_no,
                    face: n + 1,
                    index: v as i64,
                    vertex_count: vertices.len(),
                });
            }
        }
        for k in 1..poly.len() - 1 {
            faces.push([poly[0] as u32, poly[k] as u32, poly[k + 1] as u32]);
        }
    }
    let faces = drop_degenerate(&vertices, faces, path);
    if faces.is_empty() {
        return Err(MeshError::NoFaces);
    }
    TriMesh::new(vertices, normals, uvs, faces, albedo)
}
