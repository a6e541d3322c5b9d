//! Minimal Wavefront OBJ reader: `v` and `f` records only.

use std::fmt;

use super::{Mesh, Vec3};
use crate::num::Real;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjErrorKind {
    MalformedVertex,
    MalformedFace,
    IndexOutOfRange,
    EmptyMesh,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjError {
    pub kind: ObjErrorKind,
    /// 1-based line number; for an empty mesh this is the line count.
    pub line: usize,
}

impl fmt::Display for ObjError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ObjErrorKind::MalformedVertex => "malformed vertex",
            ObjErrorKind::MalformedFace => "malformed face",
            ObjErrorKind::IndexOutOfRange => "index out of range",
            ObjErrorKind::EmptyMesh => "empty mesh",
        };
        write!(f, "{what}, line {}", self.line)
    }
}

impl std::error::Error for ObjError {}

/// Parses OBJ text into a triangle mesh. Polygons are fan-triangulated,
/// 1-based and negative (relative) indices are accepted, everything other
/// than `v`/`f` is ignored.
pub fn parse_obj<T: Real>(text: &str) -> Result<Mesh<T>, ObjError> {
    let mut vertices: Vec<Vec3<T>> = Vec::new();
    // (line, resolved 0-based index) so range errors can name the face line.
    let mut faces: Vec<(usize, [i64; 3])> = Vec::new();
    let mut line_count = 0;

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        line_count = line_no;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let err = ObjError {
                    kind: ObjErrorKind::MalformedVertex,
                    line: line_no,
                };
                let coords: Vec<f64> = tokens
                    .map(|t| t.parse::<f64>().map_err(|_| err.clone()))
                    .collect::<Result<_, _>>()?;
                if !(3..=4).contains(&coords.len()) || coords.iter().any(|c| !c.is_finite()) {
                    return Err(err);
                }
                vertices.push(Vec3::new(
                    T::lit(coords[0]),
                    T::lit(coords[1]),
                    T::lit(coords[2]),
                ));
            }
            Some("f") => {
                let mut idx = Vec::with_capacity(4);
                for tok in tokens {
                    let head = tok.split('/').next().unwrap_or("");
                    let i: i64 = head.parse().map_err(|_| ObjError {
                        kind: ObjErrorKind::MalformedFace,
                        line: line_no,
                    })?;
                    let resolved = match i {
                        0 => {
                            return Err(ObjError {
                                kind: ObjErrorKind::IndexOutOfRange,
                                line: line_no,
                            })
                        }
                        i if i > 0 => i - 1,
                        i => vertices.len() as i64 + i,
                    };
                    if resolved < 0 {
                        return Err(ObjError {
                            kind: ObjErrorKind::IndexOutOfRange,
                            line: line_no,
                        });
                    }
                    idx.push(resolved);
                }
                if idx.len() < 3 {
                    return Err(ObjError {
                        kind: ObjErrorKind::MalformedFace,
                        line: line_no,
                    });
                }
                for k in 1..idx.len() - 1 {
                    faces.push((line_no, [idx[0], idx[k], idx[k + 1]]));
                }
            }
            _ => {}
        }
    }

    if faces.is_empty() {
        return Err(ObjError {
            kind: ObjErrorKind::EmptyMesh,
            line: line_count,
        });
    }
    let count = vertices.len() as i64;
    let mut triangles = Vec::with_capacity(faces.len());
    for (line, f) in faces {
        if f.iter().any(|&i| i >= count) {
            return Err(ObjError {
                kind: ObjErrorKind::IndexOutOfRange,
                line,
            });
        }
        triangles.push([f[0] as u32, f[1] as u32, f[2] as u32]);
    }
    Mesh::new(vertices, triangles).map_err(|_| ObjError {
        kind: ObjErrorKind::EmptyMesh,
        line: line_count,
    })
}

/// Writes a mesh as OBJ text. Coordinates use the shortest round-trip
/// representation, so `parse_obj(write_obj(m)) == m`.
pub fn write_obj<T: Real>(mesh: &Mesh<T>, out: &mut impl std::io::Write) -> std::io::Result<()> {
    for v in mesh.vertices() {
        writeln!(out, "v {} {} {}", v.x.as_f64(), v.y.as_f64(), v.z.as_f64())?;
    }
    for [a, b, c] in mesh.triangles() {
        writeln!(out, "f {} {} {}", a + 1, b + 1, c + 1)?;
    }
    Ok(())
}
