//! Taylor-Hood velocity/pressure spaces and the P2 symmetric-tensor stress
//! space, with their dof maps and the discrete state.

use std::sync::{Arc, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::element::ElementData;
use super::sparse::{CsrMatrix, LuSolver};
use crate::mesh::{EdgeTable, Mesh};
use crate::model::SymMat2;

/// Discrete spaces on one mesh.
///
/// Layouts: velocity `[u1 nodes | u2 nodes]` over all P2 nodes (boundary
/// entries kept and held at zero), pressure one value per mesh vertex,
/// stress `[s11 | s12 | s22]` over all P2 nodes.
pub struct FunctionSpaces {
    mesh: Mesh,
    edges: EdgeTable,
    cells: Vec<[usize; 6]>,
    nodes: Vec<[f64; 2]>,
    boundary_node: Vec<bool>,
    interior: Vec<usize>,
    interior_index: Vec<Option<usize>>,
    elements: Vec<ElementData>,
    pub(crate) cache: SpaceCache,
}

#[derive(Default)]
pub(crate) struct SpaceCache {
    pub mass2: OnceLock<CsrMatrix>,
    pub stiff2: OnceLock<CsrMatrix>,
    pub mass1: OnceLock<CsrMatrix>,
    pub divergence: OnceLock<CsrMatrix>,
    pub coupling: OnceLock<CsrMatrix>,
    pub source: OnceLock<CsrMatrix>,
    pub poisson: OnceLock<LuSolver>,
    pub h1: OnceLock<LuSolver>,
    pub stokes: OnceLock<LuSolver>,
}

impl std::fmt::Debug for FunctionSpaces {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionSpaces")
            .field("triangles", &self.mesh.num_triangles())
            .field("p2_nodes", &self.nodes.len())
            .field("p1_nodes", &self.mesh.num_vertices())
            .finish()
    }
}

impl FunctionSpaces {
    pub fn new(mesh: Mesh) -> Self {
        let edges = mesh.edge_table();
        let nv = mesh.num_vertices();
        let cells: Vec<[usize; 6]> = mesh
            .triangles()
            .iter()
            .zip(&edges.triangle_edges)
            .map(|(t, e)| [t[0], t[1], t[2], nv + e[0], nv + e[1], nv + e[2]])
            .collect();
        let mut nodes = mesh.vertices().to_vec();
        nodes.extend(edges.edges.iter().map(|&[a, b]| {
            let (p, q) = (mesh.vertices()[a], mesh.vertices()[b]);
            [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
        }));
        let mut boundary_node = vec![false; nodes.len()];
        for (e, &c) in edges.incidence.iter().enumerate() {
            if c == 1 {
                let [a, b] = edges.edges[e];
                boundary_node[a] = true;
                boundary_node[b] = true;
                boundary_node[nv + e] = true;
            }
        }
        let interior: Vec<usize> = (0..nodes.len()).filter(|&i| !boundary_node[i]).collect();
        let mut interior_index = vec![None; nodes.len()];
        for (k, &i) in interior.iter().enumerate() {
            interior_index[i] = Some(k);
        }
        let elements = (0..mesh.num_triangles()).map(|t| ElementData::new(mesh.triangle_coords(t))).collect();
        FunctionSpaces {
            mesh,
            edges,
            cells,
            nodes,
            boundary_node,
            interior,
            interior_index,
            elements,
            cache: SpaceCache::default(),
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn edge_table(&self) -> &EdgeTable {
        &self.edges
    }

    /// Global P2 node ids of each element.
    pub fn cells(&self) -> &[[usize; 6]] {
        &self.cells
    }

    pub fn elements(&self) -> &[ElementData] {
        &self.elements
    }

    /// Coordinates of the P2 nodes (vertices first, then edge midpoints).
    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn n_scalar(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_velocity(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn n_pressure(&self) -> usize {
        self.mesh.num_vertices()
    }

    pub fn n_stress(&self) -> usize {
        3 * self.nodes.len()
    }

    pub fn is_boundary_node(&self, i: usize) -> bool {
        self.boundary_node[i]
    }

    /// Interior (unconstrained) scalar P2 nodes.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn interior_index(&self, node: usize) -> Option<usize> {
        self.interior_index[node]
    }

    /// Number of free velocity dofs.
    pub fn n_velocity_free(&self) -> usize {
        2 * self.interior.len()
    }

    /// Free velocity index of global velocity dof `i`.
    pub fn velocity_free_index(&self, i: usize) -> Option<usize> {
        let n = self.n_scalar();
        let (c, node) = (i / n, i % n);
        self.interior_index[node].map(|k| c * self.interior.len() + k)
    }

    /// Global velocity dof of free index `k`.
    pub fn velocity_global_index(&self, k: usize) -> usize {
        let m = self.interior.len();
        (k / m) * self.n_scalar() + self.interior[k % m]
    }

    pub fn restrict_velocity(&self, u: &[f64]) -> Vec<f64> {
        (0..self.n_velocity_free()).map(|k| u[self.velocity_global_index(k)]).collect()
    }

    pub fn extend_velocity(&self, uf: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.n_velocity()];
        for (k, v) in uf.iter().enumerate() {
            u[self.velocity_global_index(k)] = *v;
        }
        u
    }

    /// Local velocity coefficients `[component][local node]` of element `t`.
    pub fn local_velocity(&self, t: usize, u: &[f64]) -> [[f64; 6]; 2] {
        let n = self.n_scalar();
        let c = &self.cells[t];
        [c.map(|i| u[i]), c.map(|i| u[n + i])]
    }

    pub fn local_stress(&self, t: usize, s: &[f64]) -> [[f64; 6]; 3] {
        let n = self.n_scalar();
        let c = &self.cells[t];
        [c.map(|i| s[i]), c.map(|i| s[n + i]), c.map(|i| s[2 * n + i])]
    }

    pub fn local_pressure(&self, t: usize, p: &[f64]) -> [f64; 3] {
        let c = &self.cells[t];
        [p[c[0]], p[c[1]], p[c[2]]]
    }
}

/// Discrete `(u, p, sigma)` coefficient vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub s: Vec<f64>,
}

impl State {
    pub fn zeros(sp: &FunctionSpaces) -> Self {
        State { u: vec![0.0; sp.n_velocity()], p: vec![0.0; sp.n_pressure()], s: vec![0.0; sp.n_stress()] }
    }

    /// Independent uniform entries in `[-1, 1]`; boundary velocity dofs zero.
    pub fn random<R: Rng>(sp: &FunctionSpaces, rng: &mut R) -> Self {
        let mut st = State::zeros(sp);
        let n = sp.n_scalar();
        for (i, v) in st.u.iter_mut().enumerate() {
            if !sp.is_boundary_node(i % n) {
                *v = rng.random_range(-1.0..1.0);
            }
        }
        st.p.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        st.s.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        st
    }

    pub fn scaled(&self, c: f64) -> Self {
        State {
            u: self.u.iter().map(|v| c * v).collect(),
            p: self.p.iter().map(|v| c * v).collect(),
            s: self.s.iter().map(|v| c * v).collect(),
        }
    }

    /// `(1 - theta) self + theta other`.
    pub fn blend(&self, other: &State, theta: f64) -> Self {
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (1.0 - theta) * x + theta * y).collect();
        State { u: mix(&self.u, &other.u), p: mix(&self.p, &other.p), s: mix(&self.s, &other.s) }
    }

    /// `self - other`.
    pub fn difference(&self, other: &State) -> Self {
        let sub = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p - q).collect();
        State { u: sub(&self.u, &other.u), p: sub(&self.p, &other.p), s: sub(&self.s, &other.s) }
    }

    /// Lengths match the spaces and boundary velocity dofs are exactly zero.
    pub fn is_admissible(&self, sp: &FunctionSpaces) -> bool {
        let n = sp.n_scalar();
        self.u.len() == sp.n_velocity()
            && self.p.len() == sp.n_pressure()
            && self.s.len() == sp.n_stress()
            && self.u.iter().enumerate().all(|(i, v)| !sp.is_boundary_node(i % n) || *v == 0.0)
    }
}

type VectorFn = dyn Fn(f64, f64) -> [f64; 2] + Send + Sync;

/// Momentum forcing `f`, an L2 vector field given pointwise.
#[derive(Clone)]
pub struct Forcing {
    func: Option<Arc<VectorFn>>,
    scale: f64,
}

impl std::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Forcing").field("zero", &self.is_zero()).field("scale", &self.scale).finish()
    }
}

impl Forcing {
    pub fn zero() -> Self {
        Forcing { func: None, scale: 1.0 }
    }

    pub fn from_fn(f: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Forcing { func: Some(Arc::new(f)), scale: 1.0 }
    }

    pub fn constant(fx: f64, fy: f64) -> Self {
        Self::from_fn(move |_, _| [fx, fy])
    }

    pub fn scaled(&self, c: f64) -> Self {
        Forcing { func: self.func.clone(), scale: self.scale * c }
    }

    pub fn is_zero(&self) -> bool {
        self.func.is_none() || self.scale == 0.0
    }

    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        match &self.func {
            None => [0.0, 0.0],
            Some(f) => {
                let v = f(x, y);
                [self.scale * v[0], self.scale * v[1]]
            }
        }
    }
}

type TensorFn = dyn Fn(f64, f64) -> SymMat2 + Send + Sync;

/// Extra right-hand side of the stress equation. Only manufactured-solution
/// runs use it; the physical model has none, and the public solver entry
/// point does not accept one.
#[derive(Clone)]
pub struct StressSource(pub(crate) Arc<TensorFn>);

impl std::fmt::Debug for StressSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("StressSource")
    }
}

impl StressSource {
    pub fn from_fn(g: impl Fn(f64, f64) -> SymMat2 + Send + Sync + 'static) -> Self {
        StressSource(Arc::new(g))
    }

    pub fn eval(&self, x: f64, y: f64) -> SymMat2 {
        (self.0)(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_square_mesh;
    use rand::SeedableRng;

    #[test]
    fn dof_counts() {
        let sp = FunctionSpaces::new(unit_square_mesh(2).unwrap());
        // (2n + 1)^2 P2 nodes, interior (2n - 1)^2
        assert_eq!(sp.n_scalar(), 25);
        assert_eq!(sp.interior_nodes().len(), 9);
        assert_eq!(sp.n_velocity_free(), 18);
        assert_eq!(sp.n_pressure(), 9);
        for k in 0..sp.n_velocity_free() {
            assert_eq!(sp.velocity_free_index(sp.velocity_global_index(k)), Some(k));
        }
        for (i, x) in sp.nodes().iter().enumerate() {
            let on = x[0] == 0.0 || x[0] == 1.0 || x[1] == 0.0 || x[1] == 1.0;
            assert_eq!(on, sp.is_boundary_node(i));
        }
    }

    #[test]
    fn random_state_is_admissible() {
        let sp = FunctionSpaces::new(unit_square_mesh(3).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let st = State::random(&sp, &mut rng);
        assert!(st.is_admissible(&sp));
        let back = sp.extend_velocity(&sp.restrict_velocity(&st.u));
        assert_eq!(back, st.u);
        let d = st.difference(&st.scaled(0.25));
        assert!((d.u[sp.velocity_global_index(0)] - 0.75 * st.u[sp.velocity_global_index(0)]).abs() < 1e-15);
    }

    #[test]
    fn forcing_scaling() {
        let f = Forcing::from_fn(|x, y| [x, y]).scaled(3.0);
        assert_eq!(f.eval(1.0, 2.0), [3.0, 6.0]);
        assert!(Forcing::zero().is_zero());
        assert!(f.scaled(0.0).is_zero());
    }
}
