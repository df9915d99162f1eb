//! ASCII PLY and XYZ point-cloud readers and writers.
//!
//! Only the `vertex` element is read. Vertex properties `x y z` are
//! required and `nx ny nz` are optional (all three or none); any other
//! scalar properties such as colors are skipped.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{Point3, Vector3};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    PlyAscii,
    Xyz,
}

impl CloudFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "ply" => Some(Self::PlyAscii),
            "xyz" | "txt" | "pts" => Some(Self::Xyz),
            _ => None,
        }
    }
}

impl FromStr for CloudFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ply" | "ply-ascii" => Ok(Self::PlyAscii),
            "xyz" => Ok(Self::Xyz),
            other => Err(format!("unknown cloud format '{other}' (expected ply-ascii or xyz)")),
        }
    }
}

pub fn load_cloud(path: impl AsRef<Path>, format: CloudFormat) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let cloud = match format {
        CloudFormat::PlyAscii => parse_ply(&text, path)?,
        CloudFormat::Xyz => parse_xyz(&text, path)?,
    };
    let frame = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(cloud.with_frame_id(frame))
}

pub fn save_cloud(cloud: &PointCloud, path: impl AsRef<Path>, format: CloudFormat) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    match format {
        CloudFormat::PlyAscii => write_ply(cloud, &mut buf),
        CloudFormat::Xyz => write_xyz(cloud, &mut buf),
    }
    .and_then(|_| fs::write(path, buf))
    .map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

struct Element {
    name: String,
    count: usize,
    properties: Vec<String>,
    has_list: bool,
}

pub fn parse_ply(text: &str, path: &Path) -> Result<PointCloud> {
    let err = |line: usize, msg: &str| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.to_string(),
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(err(1, "missing 'ply' magic")),
    }

    let mut elements: Vec<Element> = Vec::new();
    let mut saw_format = false;
    let mut header_done = false;
    for (ln, line) in lines.by_ref() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => {
                match (tok.next(), tok.next()) {
                    (Some("ascii"), Some("1.0")) => {}
                    (Some("ascii"), _) => return Err(err(ln, "unsupported PLY version")),
                    _ => return Err(err(ln, "only ASCII PLY is supported")),
                }
                saw_format = true;
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("element") => {
                let name = tok.next().ok_or_else(|| err(ln, "element without name"))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| err(ln, "element without valid count"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                    has_list: false,
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| err(ln, "property before any element"))?;
                let ty = tok.next().ok_or_else(|| err(ln, "property without type"))?;
                if ty == "list" {
                    el.has_list = true;
                    let name = tok.nth(2).ok_or_else(|| err(ln, "malformed list property"))?;
                    el.properties.push(name.to_string());
                } else {
                    if !is_scalar_type(ty) {
                        return Err(err(ln, &format!("unknown property type '{ty}'")));
                    }
                    let name = tok.next().ok_or_else(|| err(ln, "property without name"))?;
                    el.properties.push(name.to_string());
                }
            }
            Some("end_header") => {
                header_done = true;
                break;
            }
            Some(other) => return Err(err(ln, &format!("unexpected header keyword '{other}'"))),
        }
    }
    if !header_done {
        return Err(err(0, "missing end_header"));
    }
    if !saw_format {
        return Err(err(0, "missing format line"));
    }

    let vertex_pos = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| err(0, "no vertex element"))?;
    let vertex = &elements[vertex_pos];
    if vertex.has_list {
        return Err(err(0, "list properties on vertices are not supported"));
    }
    let col = |name: &str| vertex.properties.iter().position(|p| p == name);
    let (xi, yi, zi) = match (col("x"), col("y"), col("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(err(0, "vertex element lacks x, y, z")),
    };
    let normal_cols = match (col("nx"), col("ny"), col("nz")) {
        (Some(a), Some(b), Some(c)) => Some((a, b, c)),
        (None, None, None) => None,
        _ => return Err(err(0, "partial normal properties")),
    };
    if vertex.count == 0 {
        return Err(Error::EmptyCloud);
    }

    let mut data = lines.filter(|(_, l)| !l.is_empty());
    for el in &elements[..vertex_pos] {
        for _ in 0..el.count {
            data.next()
                .ok_or_else(|| err(0, &format!("truncated '{}' element", el.name)))?;
        }
    }

    let mut points = Vec::with_capacity(vertex.count);
    let mut normals = normal_cols.map(|_| Vec::with_capacity(vertex.count));
    let mut row = Vec::with_capacity(vertex.properties.len());
    for i in 0..vertex.count {
        let (ln, line) = data.next().ok_or_else(|| {
            err(
                0,
                &format!("header declares {} vertices, found {}", vertex.count, i),
            )
        })?;
        row.clear();
        for t in line.split_whitespace() {
            let v: f64 = t
                .parse()
                .map_err(|_| err(ln, &format!("bad number '{t}'")))?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { line: ln });
            }
            row.push(v);
        }
        if row.len() != vertex.properties.len() {
            return Err(err(
                ln,
                &format!(
                    "expected {} values, found {}",
                    vertex.properties.len(),
                    row.len()
                ),
            ));
        }
        points.push(Point3::new(row[xi], row[yi], row[zi]));
        if let (Some(ns), Some((a, b, c))) = (normals.as_mut(), normal_cols) {
            ns.push(Vector3::new(row[a], row[b], row[c]));
        }
    }
    PointCloud::new(points, normals)
}

fn is_scalar_type(ty: &str) -> bool {
    matches!(
        ty,
        "char" | "uchar" | "short" | "ushort" | "int" | "uint" | "float" | "double"
            | "int8" | "uint8" | "int16" | "uint16" | "int32" | "uint32" | "float32"
            | "float64"
    )
}

pub fn parse_xyz(text: &str, path: &Path) -> Result<PointCloud> {
    let err = |line: usize, msg: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        msg,
    };
    let mut points = Vec::new();
    let mut normals = Vec::new();
    let mut columns = None;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut vals = [0.0; 6];
        let mut n = 0;
        for t in line.split_whitespace() {
            if n == 6 {
                return Err(err(ln, "more than 6 columns".into()));
            }
            let v: f64 = t.parse().map_err(|_| err(ln, format!("bad number '{t}'")))?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { line: ln });
            }
            vals[n] = v;
            n += 1;
        }
        if n != 3 && n != 6 {
            return Err(err(ln, format!("expected 3 or 6 columns, found {n}")));
        }
        match columns {
            None => columns = Some(n),
            Some(c) if c != n => {
                return Err(err(ln, format!("column count changed from {c} to {n}")))
            }
            _ => {}
        }
        points.push(Point3::new(vals[0], vals[1], vals[2]));
        if n == 6 {
            normals.push(Vector3::new(vals[3], vals[4], vals[5]));
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let normals = (columns == Some(6)).then_some(normals);
    PointCloud::new(points, normals)
}

pub fn write_ply(cloud: &PointCloud, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    if !cloud.frame_id().is_empty() {
        writeln!(out, "comment frame_id {}", cloud.frame_id())?;
    }
    writeln!(out, "element vertex {}", cloud.len())?;
    for p in ["x", "y", "z"] {
        writeln!(out, "property double {p}")?;
    }
    if cloud.has_normals() {
        for p in ["nx", "ny", "nz"] {
            writeln!(out, "property double {p}")?;
        }
    }
    writeln!(out, "end_header")?;
    write_rows(cloud, out)
}

pub fn write_xyz(cloud: &PointCloud, out: &mut impl Write) -> std::io::Result<()> {
    write_rows(cloud, out)
}

fn write_rows(cloud: &PointCloud, out: &mut impl Write) -> std::io::Result<()> {
    let normals = cloud.normals();
    for (i, p) in cloud.points().iter().enumerate() {
        write!(out, "{} {} {}", p.x, p.y, p.z)?;
        if let Some(ns) = normals {
            let n = ns[i];
            write!(out, " {} {} {}", n.x, n.y, n.z)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ply(body: &str) -> Result<PointCloud> {
        parse_ply(body, Path::new("test.ply"))
    }

    #[test]
    fn reads_vertices_with_normals() {
        let cloud = ply(
            "ply\nformat ascii 1.0\nelement vertex 3\n\
             property float x\nproperty float y\nproperty float z\n\
             property float nx\nproperty float ny\nproperty float nz\nend_header\n\
             0 0 0 0 0 2\n1 0 0 1 0 0\n0 1 0 0 -1 0\n",
        )
        .unwrap();
        assert_eq!(cloud.len(), 3);
        for i in 0..3 {
            assert!((cloud.normal(i).unwrap().norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(cloud.normal(0).unwrap(), Vector3::z());
    }

    #[test]
    fn missing_normal_properties_flag_cloud() {
        let cloud = ply(
            "ply\nformat ascii 1.0\nelement vertex 2\n\
             property double x\nproperty double y\nproperty double z\n\
             property uchar red\nend_header\n0 0 0 255\n1 2 3 0\n",
        )
        .unwrap();
        assert!(!cloud.has_normals());
        assert_eq!(cloud.points()[1], Point3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn truncated_body_is_parse_error() {
        let r = ply(
            "ply\nformat ascii 1.0\nelement vertex 5\n\
             property float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 1 1\n",
        );
        assert!(matches!(r, Err(Error::Parse { .. })), "{r:?}");
    }

    #[test]
    fn zero_vertices_is_empty() {
        let r = ply(
            "ply\nformat ascii 1.0\nelement vertex 0\n\
             property float x\nproperty float y\nproperty float z\nend_header\n",
        );
        assert!(matches!(r, Err(Error::EmptyCloud)));
    }

    #[test]
    fn binary_and_nan_rejected() {
        let r = ply("ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty float x\nend_header\n");
        assert!(matches!(r, Err(Error::Parse { .. })));
        let r = ply(
            "ply\nformat ascii 1.0\nelement vertex 1\n\
             property float x\nproperty float y\nproperty float z\nend_header\nnan 0 0\n",
        );
        assert!(matches!(r, Err(Error::NonFiniteValue { line: 8 })));
    }

    #[test]
    fn skips_elements_before_vertices() {
        let cloud = ply(
            "ply\nformat ascii 1.0\nelement camera 1\nproperty float f\n\
             element vertex 1\nproperty float x\nproperty float y\nproperty float z\n\
             element face 1\nproperty list uchar int vertex_indices\nend_header\n\
             500\n1 2 3\n3 0 0 0\n",
        )
        .unwrap();
        assert_eq!(cloud.points()[0], Point3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn xyz_with_comments() {
        let cloud = parse_xyz(
            "# header\n0 0 0 0 0 1\n\n1 1 1 1 0 0 # trailing\n",
            Path::new("a.xyz"),
        )
        .unwrap();
        assert_eq!(cloud.len(), 2);
        assert!(cloud.has_normals());
        let r = parse_xyz("0 0 0\n1 1 1 0 0 1\n", Path::new("a.xyz"));
        assert!(matches!(r, Err(Error::Parse { line: 2, .. })));
    }
}
