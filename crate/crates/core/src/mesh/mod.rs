//! Conforming triangle meshes of polygonal 2D domains.

mod io;

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};

pub use io::{read_mesh, write_mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub marker: i32,
}

/// Unique edges of a mesh and the local-to-global edge map.
///
/// Local edge `k` of triangle `[v0, v1, v2]` is the edge opposite vertex `k`.
#[derive(Clone, Debug)]
pub struct EdgeTable {
    pub edges: Vec<[usize; 2]>,
    pub triangle_edges: Vec<[usize; 3]>,
    /// Number of triangles incident to each edge.
    pub incidence: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
}

fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

fn edge_key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

impl Mesh {
    /// Builds a mesh, flipping clockwise triangles, and checks that the
    /// boundary edge list matches the topological boundary.
    pub fn new(vertices: Vec<[f64; 2]>, mut triangles: Vec<[usize; 3]>, boundary_edges: Vec<BoundaryEdge>) -> Result<Self> {
        let nv = vertices.len();
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::Mesh(format!("triangle {t} references a vertex out of range")));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area == 0.0 {
                return Err(Error::Mesh(format!("triangle {t} is degenerate")));
            }
            if area < 0.0 {
                tri.swap(1, 2);
            }
        }
        if boundary_edges.iter().any(|e| e.vertices.iter().any(|&v| v >= nv)) {
            return Err(Error::Mesh("boundary edge references a vertex out of range".into()));
        }
        let mesh = Mesh { vertices, triangles, boundary_edges };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        let table = self.edge_table();
        if let Some(e) = table.incidence.iter().position(|&c| c > 2) {
            return Err(Error::Mesh(format!("edge {:?} shared by more than two triangles", table.edges[e])));
        }
        let topological: BTreeSet<[usize; 2]> = table
            .edges
            .iter()
            .zip(&table.incidence)
            .filter(|(_, &c)| c == 1)
            .map(|(e, _)| *e)
            .collect();
        let listed: BTreeSet<[usize; 2]> =
            self.boundary_edges.iter().map(|e| edge_key(e.vertices[0], e.vertices[1])).collect();
        if listed.len() != self.boundary_edges.len() {
            return Err(Error::Mesh("duplicate boundary edge".into()));
        }
        if topological != listed {
            return Err(Error::Mesh(format!(
                "boundary edges do not match the topological boundary ({} listed, {} found)",
                listed.len(),
                topological.len()
            )));
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let tri = self.triangles[t];
        [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [p, q, r] = self.triangle_coords(t);
        signed_area(p, q, r)
    }

    /// Compensated (Neumaier) sum of triangle areas.
    pub fn total_area(&self) -> f64 {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for t in 0..self.num_triangles() {
            let a = self.triangle_area(t);
            let s = sum + a;
            comp += if sum.abs() >= a.abs() { (sum - s) + a } else { (a - s) + sum };
            sum = s;
        }
        sum + comp
    }

    /// Longest edge length.
    pub fn h(&self) -> f64 {
        let mut h: f64 = 0.0;
        for t in 0..self.num_triangles() {
            let c = self.triangle_coords(t);
            for k in 0..3 {
                let (p, q) = (c[k], c[(k + 1) % 3]);
                h = h.max((p[0] - q[0]).hypot(p[1] - q[1]));
            }
        }
        h
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in 0..self.num_triangles() {
            let c = self.triangle_coords(t);
            for k in 0..3 {
                let (p, q, r) = (c[k], c[(k + 1) % 3], c[(k + 2) % 3]);
                let u = [q[0] - p[0], q[1] - p[1]];
                let v = [r[0] - p[0], r[1] - p[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                min = min.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        min
    }

    pub fn edge_table(&self) -> EdgeTable {
        let mut index: HashMap<[usize; 2], usize> = HashMap::with_capacity(3 * self.triangles.len());
        let mut edges = Vec::new();
        let mut incidence = Vec::new();
        let mut triangle_edges = Vec::with_capacity(self.triangles.len());
        for tri in &self.triangles {
            let mut local = [0usize; 3];
            for (k, slot) in local.iter_mut().enumerate() {
                let key = edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let id = *index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    incidence.push(0u8);
                    edges.len() - 1
                });
                incidence[id] = incidence[id].saturating_add(1);
                *slot = id;
            }
            triangle_edges.push(local);
        }
        EdgeTable { edges, triangle_edges, incidence }
    }

    /// Vertices lying on a boundary edge, sorted.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.boundary_edges.iter().flat_map(|e| e.vertices).collect();
        set.into_iter().collect()
    }

    /// Red refinement: every triangle is split into four through its edge
    /// midpoints. Midpoint of global edge `e` gets vertex index `nv + e`.
    pub fn refine_uniform(&self) -> Mesh {
        let table = self.edge_table();
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(table.edges.iter().map(|&[a, b]| {
            let (p, q) = (self.vertices[a], self.vertices[b]);
            [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
        }));
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for (tri, te) in self.triangles.iter().zip(&table.triangle_edges) {
            let [a, b, c] = *tri;
            // te[k] is opposite vertex k
            let (m_bc, m_ca, m_ab) = (nv + te[0], nv + te[1], nv + te[2]);
            triangles.push([a, m_ab, m_ca]);
            triangles.push([m_ab, b, m_bc]);
            triangles.push([m_ca, m_bc, c]);
            triangles.push([m_ab, m_bc, m_ca]);
        }
        let lookup: HashMap<[usize; 2], usize> = table.edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for be in &self.boundary_edges {
            let [a, b] = be.vertices;
            let mid = nv + lookup[&edge_key(a, b)];
            boundary_edges.push(BoundaryEdge { vertices: [a, mid], marker: be.marker });
            boundary_edges.push(BoundaryEdge { vertices: [mid, b], marker: be.marker });
        }
        Mesh { vertices, triangles, boundary_edges }
    }
}

/// Structured mesh of the unit square with `n` divisions per side; each
/// cell is cut along its rising diagonal. Boundary markers are
/// 1 bottom, 2 right, 3 top, 4 left.
pub fn unit_square_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::Mesh("unit square needs at least one division".into()));
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    // exact endpoints
    for v in vertices.iter_mut() {
        for c in v.iter_mut() {
            if (*c - 1.0).abs() < 1e-14 {
                *c = 1.0;
            }
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let mut boundary_edges = Vec::with_capacity(4 * n);
    for i in 0..n {
        boundary_edges.push(BoundaryEdge { vertices: [idx(i, 0), idx(i + 1, 0)], marker: 1 });
        boundary_edges.push(BoundaryEdge { vertices: [idx(n, i), idx(n, i + 1)], marker: 2 });
        boundary_edges.push(BoundaryEdge { vertices: [idx(i + 1, n), idx(i, n)], marker: 3 });
        boundary_edges.push(BoundaryEdge { vertices: [idx(0, i + 1), idx(0, i)], marker: 4 });
    }
    Mesh::new(vertices, triangles, boundary_edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_square() {
        let m = unit_square_mesh(1).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_triangles(), 2);
        assert_eq!(m.boundary_edges().len(), 4);
        assert_eq!(m.boundary_vertices(), vec![0, 1, 2, 3]);
        assert!(unit_square_mesh(0).is_err());
    }

    #[test]
    fn counts_follow_formulas() {
        for n in 1..=6 {
            let m = unit_square_mesh(n).unwrap();
            assert_eq!(m.num_vertices(), (n + 1) * (n + 1));
            assert_eq!(m.num_triangles(), 2 * n * n);
            assert!((m.h() - 2f64.sqrt() / n as f64).abs() < 1e-14);
            assert!((m.total_area() - 1.0).abs() < 1e-14);
            assert_eq!(m.boundary_vertices().len(), 4 * n);
        }
        let m = unit_square_mesh(2).unwrap();
        assert_eq!(m.boundary_vertices().len(), 8);
        assert!(!m.boundary_vertices().contains(&4));
    }

    #[test]
    fn edge_incidence_brute_force() {
        let m = unit_square_mesh(4).unwrap();
        // count by scanning all triangle pairs, independent of the edge table
        let mut interior = 0;
        let mut boundary = 0;
        let tris = m.triangles();
        let mut seen = BTreeSet::new();
        for t in tris {
            for k in 0..3 {
                let e = edge_key(t[k], t[(k + 1) % 3]);
                if !seen.insert(e) {
                    continue;
                }
                let count = tris.iter().filter(|s| s.contains(&e[0]) && s.contains(&e[1])).count();
                match count {
                    1 => boundary += 1,
                    2 => interior += 1,
                    c => panic!("edge {e:?} in {c} triangles"),
                }
            }
        }
        assert_eq!(boundary, 16);
        // Euler: E = V + T - 1
        assert_eq!(interior + boundary, 25 + 32 - 1);
    }

    #[test]
    fn refinement_matches_finer_square() {
        let coarse = unit_square_mesh(1).unwrap();
        let fine = coarse.refine_uniform();
        assert_eq!(fine.num_triangles(), 8);
        let key = |v: &[f64; 2]| ((v[0] * 1e9).round() as i64, (v[1] * 1e9).round() as i64);
        let a: BTreeSet<_> = fine.vertices().iter().map(key).collect();
        let b: BTreeSet<_> = unit_square_mesh(2).unwrap().vertices().iter().map(key).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn refinement_preserves_area_angles_and_markers() {
        let mut m = unit_square_mesh(3).unwrap();
        let angle = m.min_angle();
        assert!((angle - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        for level in 1..=3 {
            let r = m.refine_uniform();
            assert_eq!(r.num_triangles(), 4 * m.num_triangles());
            assert!((r.total_area() - 1.0).abs() < 1e-14);
            assert!((r.min_angle() - angle).abs() < 1e-12);
            let n = 3 << level;
            assert_eq!(r.boundary_vertices().len(), 4 * n);
            for be in r.boundary_edges() {
                let [p, q] = be.vertices.map(|v| r.vertices()[v]);
                let on_side = match be.marker {
                    1 => p[1] == 0.0 && q[1] == 0.0,
                    2 => p[0] == 1.0 && q[0] == 1.0,
                    3 => p[1] == 1.0 && q[1] == 1.0,
                    4 => p[0] == 0.0 && q[0] == 0.0,
                    _ => false,
                };
                assert!(on_side, "marker {} on edge {p:?}-{q:?}", be.marker);
            }
            r.validate().unwrap();
            m = r;
        }
    }

    #[test]
    fn orientation_is_normalized() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let b = vec![
            BoundaryEdge { vertices: [0, 1], marker: 1 },
            BoundaryEdge { vertices: [1, 2], marker: 1 },
            BoundaryEdge { vertices: [2, 0], marker: 1 },
        ];
        let m = Mesh::new(v, vec![[0, 2, 1]], b).unwrap();
        assert!(m.triangle_area(0) > 0.0);
    }

    #[test]
    fn rejects_bad_boundary() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let b = vec![BoundaryEdge { vertices: [0, 1], marker: 1 }];
        assert!(Mesh::new(v.clone(), vec![[0, 1, 2]], b).is_err());
        assert!(Mesh::new(v, vec![[0, 1, 5]], vec![]).is_err());
    }
}
