//! ASCII OFF meshes, XYZ point clouds and vertex index lists.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Point3;

use super::{PointCloud, TriangleMesh};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_num<T: Real>(tok: &str, line: usize) -> Result<T> {
    let x: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a number, found {tok:?}")))?;
    if !x.is_finite() {
        return Err(Error::parse(line, format!("non-finite coordinate {tok:?}")));
    }
    Ok(T::lit(x))
}

fn parse_index(tok: &str, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("expected a vertex index, found {tok:?}")))
}

fn parse_point<T: Real>(l: &str, line: usize) -> Result<Point3<T>> {
    let toks: Vec<&str> = l.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(Error::parse(
            line,
            format!("expected 3 coordinates, found {}", toks.len()),
        ));
    }
    Ok(Point3::new(
        parse_num(toks[0], line)?,
        parse_num(toks[1], line)?,
        parse_num(toks[2], line)?,
    ))
}

pub fn parse_off<T: Real>(text: &str) -> Result<TriangleMesh<T>> {
    let mut lines = content_lines(text);
    let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    if header != "OFF" {
        return Err(Error::parse(ln, format!("expected \"OFF\" header, found {header:?}")));
    }
    let (ln, counts) = lines
        .next()
        .ok_or_else(|| Error::parse(ln + 1, "missing vertex/face count line"))?;
    let counts: Vec<&str> = counts.split_whitespace().collect();
    if counts.len() != 3 {
        return Err(Error::parse(ln, "expected \"<nv> <nf> <ne>\""));
    }
    let nv = parse_index(counts[0], ln)?;
    let nf = parse_index(counts[1], ln)?;
    let mut last = ln;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| Error::parse(last + 1, format!("expected {nv} vertex lines")))?;
        vertices.push(parse_point(l, ln)?);
        last = ln;
    }

    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| Error::parse(last + 1, format!("expected {nf} face lines")))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        let arity = toks
            .first()
            .map(|t| parse_index(t, ln))
            .transpose()?
            .unwrap_or(0);
        if arity != 3 {
            return Err(Error::parse(ln, format!("only triangles are supported, found a {arity}-gon")));
        }
        if toks.len() < 4 {
            return Err(Error::parse(ln, "face line has fewer than 3 indices"));
        }
        let mut f = [0usize; 3];
        for k in 0..3 {
            f[k] = parse_index(toks[k + 1], ln)?;
            if f[k] >= nv {
                return Err(Error::parse(
                    ln,
                    format!("face index {} out of range for {nv} vertices", f[k]),
                ));
            }
        }
        if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            return Err(Error::parse(ln, "degenerate face (repeated index)"));
        }
        faces.push(f);
        last = ln;
    }
    TriangleMesh::new(vertices, faces)
}

pub fn parse_xyz<T: Real>(text: &str) -> Result<PointCloud<T>> {
    let points = content_lines(text)
        .map(|(ln, l)| parse_point(l, ln))
        .collect::<Result<Vec<_>>>()?;
    PointCloud::new(points)
}

/// One 0-based index per line.
pub fn parse_index_list(text: &str) -> Result<Vec<usize>> {
    content_lines(text)
        .map(|(ln, l)| parse_index(l, ln))
        .collect()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_mesh<T: Real>(path: impl AsRef<Path>) -> Result<TriangleMesh<T>> {
    parse_off(&read(path.as_ref())?)
}

pub fn load_pointcloud<T: Real>(path: impl AsRef<Path>) -> Result<PointCloud<T>> {
    parse_xyz(&read(path.as_ref())?)
}

pub fn load_index_list(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    parse_index_list(&read(path.as_ref())?)
}

fn fmt_f<T: Real>(x: T) -> String {
    // shortest round-trip representation
    format!("{}", x.as_f64())
}

pub fn write_off<T: Real>(mesh: &TriangleMesh<T>) -> String {
    let mut s = format!("OFF\n{} {} 0\n", mesh.n_vertices(), mesh.n_faces());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{} {} {}", fmt_f(v.x), fmt_f(v.y), fmt_f(v.z));
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
    }
    s
}

pub fn write_xyz<T: Real>(cloud: &PointCloud<T>) -> String {
    let mut s = String::new();
    for v in cloud.points() {
        let _ = writeln!(s, "{} {} {}", fmt_f(v.x), fmt_f(v.y), fmt_f(v.z));
    }
    s
}

pub fn save_mesh<T: Real>(path: impl AsRef<Path>, mesh: &TriangleMesh<T>) -> Result<()> {
    write(path.as_ref(), &write_off(mesh))
}

pub fn save_pointcloud<T: Real>(path: impl AsRef<Path>, cloud: &PointCloud<T>) -> Result<()> {
    write(path.as_ref(), &write_xyz(cloud))
}

pub fn save_index_list(path: impl AsRef<Path>, indices: &[usize]) -> Result<()> {
    let mut s = String::new();
    for i in indices {
        let _ = writeln!(s, "{i}");
    }
    write(path.as_ref(), &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRI: &str = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";

    #[test]
    fn smallest_mesh() {
        let m: TriangleMesh<f64> = parse_off(TRI).unwrap();
        assert_eq!((m.n_vertices(), m.n_faces()), (3, 1));
    }

    #[test]
    fn tetrahedron_file() {
        let text = write_off(&crate::geometry::primitives::tetrahedron::<f64>());
        let m: TriangleMesh<f64> = parse_off(&text).unwrap();
        assert_eq!((m.n_vertices(), m.n_faces()), (4, 4));
    }

    #[test]
    fn out_of_range_index_names_line() {
        let err = parse_off::<f64>("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 5\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 6),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn malformed_header_and_quads() {
        assert!(matches!(
            parse_off::<f64>("PLY\n3 1 0\n").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            parse_off::<f64>("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n").unwrap_err(),
            Error::Parse { line: 7, .. }
        ));
        assert!(parse_off::<f64>("OFF\n3 1 0\n0 0 0\n1 0 0\n").is_err());
    }

    #[test]
    fn xyz_points() {
        let c: PointCloud<f64> = parse_xyz("0 0 0\n1 0 0").unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.parameterization().is_none());
    }

    #[test]
    fn xyz_errors_carry_line() {
        assert!(matches!(
            parse_xyz::<f64>("0 0 0\na b c\n").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        assert!(matches!(
            parse_xyz::<f64>("0 0 0\n1 2\n").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
    }

    #[test]
    fn index_list() {
        assert_eq!(parse_index_list("3\n0\n\n7\n").unwrap(), vec![3, 0, 7]);
        assert!(parse_index_list("1\n-2\n").is_err());
    }
}
