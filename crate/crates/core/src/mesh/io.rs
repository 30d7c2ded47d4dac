//! Plain-text mesh format:
//!
//! ```text
//! vertices N triangles M boundary K
//! x y            (N lines)
//! i j k          (M lines, 0-based)
//! i j marker     (K lines)
//! ```

use std::io::{BufRead, Write};

use super::{BoundaryEdge, Mesh};
use crate::error::{Error, Result};

fn parse<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::Mesh(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Mesh(format!("cannot parse {what}")))
}

pub fn read_mesh<R: BufRead>(reader: R) -> Result<Mesh> {
    let mut lines = reader
        .lines()
        .map(|l| l.map_err(Error::from))
        .filter(|l| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
    let header = lines.next().ok_or_else(|| Error::Mesh("empty mesh file".into()))??;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 6 || tok[0] != "vertices" || tok[2] != "triangles" || tok[4] != "boundary" {
        return Err(Error::Mesh(format!("bad header line: {header:?}")));
    }
    let nv: usize = parse(Some(tok[1]), "vertex count")?;
    let nt: usize = parse(Some(tok[3]), "triangle count")?;
    let nb: usize = parse(Some(tok[5]), "boundary count")?;

    let mut next = |what: &str| -> Result<String> {
        lines.next().ok_or_else(|| Error::Mesh(format!("unexpected end of file reading {what}")))?
    };
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let l = next("vertices")?;
        let mut it = l.split_whitespace();
        vertices.push([parse(it.next(), "x")?, parse(it.next(), "y")?]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let l = next("triangles")?;
        let mut it = l.split_whitespace();
        triangles.push([parse(it.next(), "i")?, parse(it.next(), "j")?, parse(it.next(), "k")?]);
    }
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let l = next("boundary edges")?;
        let mut it = l.split_whitespace();
        let vertices = [parse(it.next(), "i")?, parse(it.next(), "j")?];
        boundary.push(BoundaryEdge { vertices, marker: parse(it.next(), "marker")? });
    }
    Mesh::new(vertices, triangles, boundary)
}

pub fn write_mesh<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    writeln!(
        w,
        "vertices {} triangles {} boundary {}",
        mesh.num_vertices(),
        mesh.num_triangles(),
        mesh.boundary_edges().len()
    )?;
    for v in mesh.vertices() {
        writeln!(w, "{:?} {:?}", v[0], v[1])?;
    }
    for t in mesh.triangles() {
        writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
    }
    for e in mesh.boundary_edges() {
        writeln!(w, "{} {} {}", e.vertices[0], e.vertices[1], e.marker)?;
    }
    Ok(())
}
