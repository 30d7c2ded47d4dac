//! Element-loop assembly of every bilinear and trilinear form of the weak
//! problem.
//!
//! Stress matrices act on the component vector `[s11 | s12 | s22]` and
//! represent the Frobenius forms, so the `s12` rows and columns carry the
//! factor 2 of `sigma : tau = s11 t11 + 2 s12 t12 + s22 t22`.
//!
//! Both transport forms use the skew-symmetric split
//! `c(w; u, v) = 1/2 [(w . grad u, v) - (w . grad v, u)]`, which keeps
//! `c(w; v, v) = 0` for any discrete `w`, divergence-free or not.

use rayon::prelude::*;

use super::element::ElementData;
use super::spaces::{Forcing, FunctionSpaces, StressSource};
use super::sparse::{CsrMatrix, TripletBuilder};
use crate::model::{eval_g_a, FluidParams, Mat2, SymMat2};

type Triplets = Vec<(usize, usize, f64)>;

/// Runs `local` on every element in parallel and sums the contributions
/// in element order, so the result is independent of the thread count.
pub(crate) fn assemble<F>(sp: &FunctionSpaces, nrows: usize, ncols: usize, local: F) -> CsrMatrix
where
    F: Fn(usize, &ElementData, &mut Triplets) + Sync,
{
    let parts: Vec<Triplets> = (0..sp.elements().len())
        .into_par_iter()
        .map(|t| {
            let mut out = Vec::new();
            local(t, &sp.elements()[t], &mut out);
            out
        })
        .collect();
    let mut b = TripletBuilder::with_capacity(nrows, ncols, parts.iter().map(Vec::len).sum());
    for p in parts {
        b.extend(p);
    }
    b.build()
}

/// `kron(diag(weights), m)`: one copy of the scalar matrix per component.
pub(crate) fn component_block(m: &CsrMatrix, weights: &[f64]) -> CsrMatrix {
    let (nr, nc) = (m.nrows(), m.ncols());
    let mut b = TripletBuilder::with_capacity(weights.len() * nr, weights.len() * nc, weights.len() * m.nnz());
    for (c, &w) in weights.iter().enumerate() {
        b.add_block(m, w, |i| Some(c * nr + i), |j| Some(c * nc + j));
    }
    b.build()
}

/// Gradient of the vector field `phi e_c` as a 2x2 matrix `G[a][b] = d_b u_a`.
fn vector_basis_grad(c: usize, g: [f64; 2]) -> Mat2 {
    let mut m = Mat2::ZERO;
    m.0[c] = g;
    m
}

pub fn scalar_mass(sp: &FunctionSpaces) -> &CsrMatrix {
    sp.cache.mass2.get_or_init(|| {
        assemble(sp, sp.n_scalar(), sp.n_scalar(), |t, el, out| {
            let cell = &sp.cells()[t];
            for q in 0..el.num_points() {
                let (w, phi) = (el.weights[q], &el.phi[q]);
                for i in 0..6 {
                    for j in 0..6 {
                        out.push((cell[i], cell[j], w * phi[i] * phi[j]));
                    }
                }
            }
        })
    })
}

pub fn scalar_stiffness(sp: &FunctionSpaces) -> &CsrMatrix {
    sp.cache.stiff2.get_or_init(|| {
        assemble(sp, sp.n_scalar(), sp.n_scalar(), |t, el, out| {
            let cell = &sp.cells()[t];
            for q in 0..el.num_points() {
                let (w, g) = (el.weights[q], &el.grad_phi[q]);
                for i in 0..6 {
                    for j in 0..6 {
                        out.push((cell[i], cell[j], w * (g[i][0] * g[j][0] + g[i][1] * g[j][1])));
                    }
                }
            }
        })
    })
}

/// P1 pressure mass matrix.
pub fn pressure_mass(sp: &FunctionSpaces) -> &CsrMatrix {
    sp.cache.mass1.get_or_init(|| {
        assemble(sp, sp.n_pressure(), sp.n_pressure(), |t, el, out| {
            let cell = &sp.cells()[t];
            for q in 0..el.num_points() {
                let l = el.p1_values(q);
                for i in 0..3 {
                    for j in 0..3 {
                        out.push((cell[i], cell[j], el.weights[q] * l[i] * l[j]));
                    }
                }
            }
        })
    })
}

/// `(q, div v)` with pressure rows and velocity columns.
pub fn divergence(sp: &FunctionSpaces) -> &CsrMatrix {
    sp.cache.divergence.get_or_init(|| {
        let n = sp.n_scalar();
        assemble(sp, sp.n_pressure(), sp.n_velocity(), |t, el, out| {
            let cell = &sp.cells()[t];
            for q in 0..el.num_points() {
                let l = el.p1_values(q);
                let g = &el.grad_phi[q];
                for k in 0..3 {
                    for j in 0..6 {
                        for c in 0..2 {
                            out.push((cell[k], c * n + cell[j], el.weights[q] * l[k] * g[j][c]));
                        }
                    }
                }
            }
        })
    })
}

/// `(sigma, D(v))` with velocity rows and stress columns.
pub fn coupling(sp: &FunctionSpaces) -> &CsrMatrix {
    sp.cache.coupling.get_or_init(|| {
        let n = sp.n_scalar();
        assemble(sp, sp.n_velocity(), sp.n_stress(), |t, el, out| {
            let cell = &sp.cells()[t];
            for q in 0..el.num_points() {
                let (w, phi, g) = (el.weights[q], &el.phi[q], &el.grad_phi[q]);
                for i in 0..6 {
                    for cv in 0..2 {
                        let grad_v = vector_basis_grad(cv, g[i]);
                        for cs in 0..3 {
                            let k = SymMat2::basis(cs).contract_mat(&grad_v);
                            if k == 0.0 {
                                continue;
                            }
                            for j in 0..6 {
                                out.push((cv * n + cell[i], cs * n + cell[j], w * k * phi[j]));
                            }
                        }
                    }
                }
            }
        })
    })
}

/// `(D(u), tau)` with stress rows and velocity columns. Assembled on its own
/// loop; it must equal the transpose of [`coupling`].
pub fn strain_source(sp: &FunctionSpaces) -> &CsrMatrix {
    sp.cache.source.get_or_init(|| {
        let n = sp.n_scalar();
        assemble(sp, sp.n_stress(), sp.n_velocity(), |t, el, out| {
            let cell = &sp.cells()[t];
            for q in 0..el.num_points() {
                let (w, phi, g) = (el.weights[q], &el.phi[q], &el.grad_phi[q]);
                for d in 0..3 {
                    let tau = SymMat2::basis(d);
                    for i in 0..6 {
                        for j in 0..6 {
                            for c in 0..2 {
                                let k = tau.contract_mat(&vector_basis_grad(c, g[j]));
                                if k != 0.0 {
                                    out.push((d * n + cell[i], c * n + cell[j], w * k * phi[i]));
                                }
                            }
                        }
                    }
                }
            }
        })
    })
}

/// Scalar skew transport matrix `S_ij = 1/2 [(w . grad phi_j, phi_i) - (w . grad phi_i, phi_j)]`.
/// Each element contribution is antisymmetrized before summation, so the
/// global matrix is exactly antisymmetric.
pub fn skew_transport_scalar(sp: &FunctionSpaces, u: &[f64]) -> CsrMatrix {
    assemble(sp, sp.n_scalar(), sp.n_scalar(), |t, el, out| {
        let cell = &sp.cells()[t];
        let [u1, u2] = sp.local_velocity(t, u);
        let mut a = [[0.0; 6]; 6];
        for q in 0..el.num_points() {
            let (w, phi, g) = (el.weights[q], &el.phi[q], &el.grad_phi[q]);
            let wx = el.eval(q, &u1);
            let wy = el.eval(q, &u2);
            for i in 0..6 {
                for j in 0..6 {
                    a[i][j] += w * (wx * g[j][0] + wy * g[j][1]) * phi[i];
                }
            }
        }
        for i in 0..6 {
            for j in 0..6 {
                out.push((cell[i], cell[j], 0.5 * (a[i][j] - a[j][i])));
            }
        }
    })
}

/// Plain (non-symmetrized) scalar transport `(w . grad phi_j, phi_i)`.
pub fn plain_transport_scalar(sp: &FunctionSpaces, u: &[f64]) -> CsrMatrix {
    assemble(sp, sp.n_scalar(), sp.n_scalar(), |t, el, out| {
        let cell = &sp.cells()[t];
        let [u1, u2] = sp.local_velocity(t, u);
        for q in 0..el.num_points() {
            let (w, phi, g) = (el.weights[q], &el.phi[q], &el.grad_phi[q]);
            let wx = el.eval(q, &u1);
            let wy = el.eval(q, &u2);
            for i in 0..6 {
                for j in 0..6 {
                    out.push((cell[i], cell[j], w * (wx * g[j][0] + wy * g[j][1]) * phi[i]));
                }
            }
        }
    })
}

/// Convection operator `N(u)` on the velocity space (unscaled by Re).
pub fn assemble_convection(sp: &FunctionSpaces, u: &[f64]) -> CsrMatrix {
    component_block(&skew_transport_scalar(sp, u), &[1.0, 1.0])
}

/// `(g_a(grad u, sigma), tau)` on the stress space (unscaled by We).
pub fn assemble_g_a(sp: &FunctionSpaces, u: &[f64], a: f64) -> CsrMatrix {
    let n = sp.n_scalar();
    assemble(sp, sp.n_stress(), sp.n_stress(), |t, el, out| {
        let cell = &sp.cells()[t];
        let [u1, u2] = sp.local_velocity(t, u);
        let mut k = [[[0.0; 3]; 3]; 0].to_vec();
        k.reserve(el.num_points());
        for q in 0..el.num_points() {
            let g1 = el.eval_grad(q, &u1);
            let g2 = el.eval_grad(q, &u2);
            let grad = Mat2([g1, g2]);
            let mut kq = [[0.0; 3]; 3];
            for (c, row) in kq.iter_mut().enumerate() {
                let image = eval_g_a(&grad, &SymMat2::basis(c), a);
                for (d, v) in row.iter_mut().enumerate() {
                    *v = image.contract(&SymMat2::basis(d));
                }
            }
            k.push(kq);
        }
        for d in 0..3 {
            for c in 0..3 {
                let mut local = [[0.0; 6]; 6];
                let mut any = false;
                for (q, kq) in k.iter().enumerate() {
                    let coef = kq[c][d];
                    if coef == 0.0 {
                        continue;
                    }
                    any = true;
                    let (w, phi) = (el.weights[q], &el.phi[q]);
                    for i in 0..6 {
                        for j in 0..6 {
                            local[i][j] += w * coef * phi[i] * phi[j];
                        }
                    }
                }
                if any {
                    for i in 0..6 {
                        for j in 0..6 {
                            out.push((d * n + cell[i], c * n + cell[j], local[i][j]));
                        }
                    }
                }
            }
        }
    })
}

/// Velocity-pressure-stress blocks of the momentum equation.
#[derive(Clone, Debug)]
pub struct StokesBlocks {
    /// `(1 - r) (grad u, grad v)` on the full velocity space.
    pub viscous: CsrMatrix,
    /// `(q, div v)`, pressure rows.
    pub divergence: CsrMatrix,
    /// `(sigma, D(v))`, velocity rows.
    pub coupling: CsrMatrix,
}

pub fn assemble_stokes_blocks(sp: &FunctionSpaces, p: &FluidParams) -> StokesBlocks {
    StokesBlocks {
        viscous: component_block(scalar_stiffness(sp), &[1.0 - p.r(), 1.0 - p.r()]),
        divergence: divergence(sp).clone(),
        coupling: coupling(sp).clone(),
    }
}

/// Blocks of the stress equation for a frozen velocity `u`.
#[derive(Clone, Debug)]
pub struct StressBlocks {
    /// `(sigma, tau)`.
    pub mass: CsrMatrix,
    /// `D (grad sigma, grad tau)`.
    pub diffusion: CsrMatrix,
    /// `We b(u; sigma, tau)`, skew-symmetric.
    pub transport: CsrMatrix,
    /// `We (g_a(grad u, sigma), tau)`.
    pub g_a: CsrMatrix,
    /// `2r (D(v), tau)`, stress rows and velocity columns.
    pub source: CsrMatrix,
}

impl StressBlocks {
    /// Full stress operator `mass + diffusion + transport + g_a`.
    pub fn operator(&self) -> CsrMatrix {
        self.mass.add_scaled(&self.diffusion, 1.0).add_scaled(&self.transport, 1.0).add_scaled(&self.g_a, 1.0)
    }
}

pub fn assemble_stress_blocks(sp: &FunctionSpaces, p: &FluidParams, u: &[f64]) -> StressBlocks {
    let w = SymMat2::WEIGHTS;
    StressBlocks {
        mass: component_block(scalar_mass(sp), &w),
        diffusion: component_block(scalar_stiffness(sp), &w.map(|x| x * p.diff())),
        transport: component_block(&skew_transport_scalar(sp, u), &w.map(|x| x * p.we())),
        g_a: assemble_g_a(sp, u, p.a()).scaled(p.we()),
        source: strain_source(sp).scaled(2.0 * p.r()),
    }
}

/// `<f, v>` for every velocity basis function (full velocity layout).
pub fn forcing_load(sp: &FunctionSpaces, f: &Forcing) -> Vec<f64> {
    let n = sp.n_scalar();
    let mut b = vec![0.0; sp.n_velocity()];
    if f.is_zero() {
        return b;
    }
    let parts: Vec<[[f64; 6]; 2]> = (0..sp.elements().len())
        .into_par_iter()
        .map(|t| {
            let el = &sp.elements()[t];
            let mut loc = [[0.0; 6]; 2];
            for q in 0..el.num_points() {
                let [x, y] = el.points[q];
                let fv = f.eval(x, y);
                for i in 0..6 {
                    loc[0][i] += el.weights[q] * fv[0] * el.phi[q][i];
                    loc[1][i] += el.weights[q] * fv[1] * el.phi[q][i];
                }
            }
            loc
        })
        .collect();
    for (t, loc) in parts.iter().enumerate() {
        for (i, &node) in sp.cells()[t].iter().enumerate() {
            b[node] += loc[0][i];
            b[n + node] += loc[1][i];
        }
    }
    for (i, v) in b.iter_mut().enumerate() {
        if sp.is_boundary_node(i % n) {
            *v = 0.0;
        }
    }
    b
}

/// `(g, tau)` for every stress basis function.
pub(crate) fn stress_source_load(sp: &FunctionSpaces, g: &StressSource) -> Vec<f64> {
    let n = sp.n_scalar();
    let parts: Vec<[[f64; 6]; 3]> = (0..sp.elements().len())
        .into_par_iter()
        .map(|t| {
            let el = &sp.elements()[t];
            let mut loc = [[0.0; 6]; 3];
            for q in 0..el.num_points() {
                let [x, y] = el.points[q];
                let gv = g.eval(x, y);
                for (d, row) in loc.iter_mut().enumerate() {
                    let coef = gv.contract(&SymMat2::basis(d));
                    for i in 0..6 {
                        row[i] += el.weights[q] * coef * el.phi[q][i];
                    }
                }
            }
            loc
        })
        .collect();
    let mut b = vec![0.0; sp.n_stress()];
    for (t, loc) in parts.iter().enumerate() {
        for (i, &node) in sp.cells()[t].iter().enumerate() {
            for d in 0..3 {
                b[d * n + node] += loc[d][i];
            }
        }
    }
    b
}

/// `int psi_k` for the P1 basis; the zero-mean constraint row.
pub fn pressure_mean_weights(sp: &FunctionSpaces) -> Vec<f64> {
    let mut m = vec![0.0; sp.n_pressure()];
    for (t, tri) in sp.mesh().triangles().iter().enumerate() {
        let a = sp.elements()[t].area / 3.0;
        for &v in tri {
            m[v] += a;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::sparse::{dot, norm2};
    use crate::fem::State;
    use crate::mesh::unit_square_mesh;
    use rand::SeedableRng;

    fn spaces(n: usize) -> FunctionSpaces {
        FunctionSpaces::new(unit_square_mesh(n).unwrap())
    }

    fn params() -> FluidParams {
        FluidParams::new(1.0, 0.3, 0.4, 0.7, 0.2).unwrap()
    }

    #[test]
    fn mass_and_stiffness_basics() {
        let sp = spaces(3);
        let ones = vec![1.0; sp.n_scalar()];
        assert!((scalar_mass(&sp).bilinear(&ones, &ones) - 1.0).abs() < 1e-13);
        assert!(norm2(&scalar_stiffness(&sp).matvec(&ones)) < 1e-12);
        let x: Vec<f64> = sp.nodes().iter().map(|p| p[0]).collect();
        // |grad x|^2 integrated over the unit square
        assert!((scalar_stiffness(&sp).bilinear(&x, &x) - 1.0).abs() < 1e-13);
        let onesp = vec![1.0; sp.n_pressure()];
        assert!((pressure_mass(&sp).bilinear(&onesp, &onesp) - 1.0).abs() < 1e-13);
        let m = pressure_mean_weights(&sp);
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn viscous_block_positive_definite_on_interior() {
        let sp = spaces(2);
        let blocks = assemble_stokes_blocks(&sp, &params());
        let nf = sp.n_velocity_free();
        let mut b = TripletBuilder::new(nf, nf);
        b.add_block(&blocks.viscous, 1.0, |i| sp.velocity_free_index(i), |j| sp.velocity_free_index(j));
        let kf = b.build();
        // smallest eigenvalue via a dense symmetric eigen-solve
        let dense = faer::Mat::<f64>::from_fn(nf, nf, |i, j| kf.get(i, j));
        let eig = dense.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0, "smallest eigenvalue {min}");
        for i in 0..nf {
            for j in 0..nf {
                assert!((kf.get(i, j) - kf.get(j, i)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn divergence_of_constant_velocity_vanishes() {
        let sp = spaces(3);
        let n = sp.n_scalar();
        // constant extension including boundary nodes
        for c in 0..2 {
            let mut u = vec![0.0; sp.n_velocity()];
            u[c * n..(c + 1) * n].iter_mut().for_each(|v| *v = 1.0);
            assert!(norm2(&divergence(&sp).matvec(&u)) < 1e-13);
        }
    }

    #[test]
    fn coupling_single_element_quadrature() {
        // one reference triangle, sigma = identity, v = (x, 0): sigma : D(v) = 1, area 1/2.
        use crate::mesh::{BoundaryEdge, Mesh};
        let mesh = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            vec![
                BoundaryEdge { vertices: [0, 1], marker: 1 },
                BoundaryEdge { vertices: [1, 2], marker: 1 },
                BoundaryEdge { vertices: [2, 0], marker: 1 },
            ],
        )
        .unwrap();
        let sp = FunctionSpaces::new(mesh);
        let n = sp.n_scalar();
        let mut s = vec![0.0; sp.n_stress()];
        s[..n].iter_mut().for_each(|v| *v = 1.0);
        s[2 * n..].iter_mut().for_each(|v| *v = 1.0);
        let mut u = vec![0.0; sp.n_velocity()];
        for (i, p) in sp.nodes().iter().enumerate() {
            u[i] = p[0];
            u[n + i] = 2.0 * p[0] - p[1];
        }
        // D(v) = [[1, 1], [1, -1]], trace = 0 -> sigma : D(v) = 1 - 1 = 0
        assert!(coupling(&sp).bilinear(&u, &s).abs() < 1e-15);
        for v in u[n..].iter_mut() {
            *v = 0.0;
        }
        assert!((coupling(&sp).bilinear(&u, &s) - 0.5).abs() < 1e-15);
        // off-diagonal stress s12 = 1 with v = (y, 0): sigma : D(v) = 2 * 1/2 = 1
        let mut s12 = vec![0.0; sp.n_stress()];
        s12[n..2 * n].iter_mut().for_each(|v| *v = 1.0);
        for (i, p) in sp.nodes().iter().enumerate() {
            u[i] = p[1];
        }
        assert!((coupling(&sp).bilinear(&u, &s12) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coupling_duality() {
        let sp = spaces(3);
        let c = coupling(&sp);
        let s = strain_source(&sp);
        let ct = c.transpose();
        assert_eq!(ct.nnz(), s.nnz());
        for (i, j, v) in s.iter() {
            assert!((ct.get(i, j) - v).abs() <= 1e-13 * (1.0 + v.abs()));
        }
        let blocks = assemble_stress_blocks(&sp, &params(), &vec![0.0; sp.n_velocity()]);
        for (i, j, v) in blocks.source.iter() {
            assert!((v - 2.0 * params().r() * c.get(j, i)).abs() <= 1e-13);
        }
    }

    #[test]
    fn skew_forms_vanish_on_diagonal() {
        let sp = spaces(4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let st = State::random(&sp, &mut rng);
            let v = State::random(&sp, &mut rng);
            let n = assemble_convection(&sp, &st.u);
            let scale = n.max_abs() * dot(&v.u, &v.u);
            assert!(n.bilinear(&v.u, &v.u).abs() <= 1e-13 * scale);
            let blocks = assemble_stress_blocks(&sp, &params(), &st.u);
            let scale = blocks.transport.max_abs() * dot(&v.s, &v.s);
            assert!(blocks.transport.bilinear(&v.s, &v.s).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn zero_velocity_gives_zero_blocks() {
        let sp = spaces(2);
        let zero = vec![0.0; sp.n_velocity()];
        assert_eq!(assemble_convection(&sp, &zero).max_abs(), 0.0);
        let blocks = assemble_stress_blocks(&sp, &params(), &zero);
        assert_eq!(blocks.transport.max_abs(), 0.0);
        assert_eq!(blocks.g_a.max_abs(), 0.0);
        let blocks = assemble_stress_blocks(&sp, &params().with_we(0.0).unwrap(), &vec![1.0; sp.n_velocity()]);
        assert_eq!(blocks.transport.max_abs(), 0.0);
        assert_eq!(blocks.g_a.max_abs(), 0.0);
    }

    #[test]
    fn corotational_block_is_neutral() {
        let sp = spaces(3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let st = State::random(&sp, &mut rng);
            let g0 = assemble_g_a(&sp, &st.u, 0.0);
            let scale = g0.max_abs() * dot(&st.s, &st.s);
            assert!(g0.bilinear(&st.s, &st.s).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn load_vector_of_constant_forcing() {
        let sp = spaces(2);
        let b = forcing_load(&sp, &Forcing::constant(1.0, -2.0));
        let n = sp.n_scalar();
        // test with a function equal to 1 at all interior nodes is not exact;
        // summing all basis integrals of a partition of unity gives |Omega|
        let full: f64 = {
            let mut bb = vec![0.0; 2 * n];
            for (t, el) in sp.elements().iter().enumerate() {
                for q in 0..el.num_points() {
                    for (i, &node) in sp.cells()[t].iter().enumerate() {
                        bb[node] += el.weights[q] * el.phi[q][i];
                    }
                }
            }
            bb.iter().sum()
        };
        assert!((full - 1.0).abs() < 1e-13);
        assert!(b.iter().enumerate().all(|(i, v)| !sp.is_boundary_node(i % n) || *v == 0.0));
        // vertex basis functions of P2 integrate to zero on every element
        let nv = sp.n_pressure();
        for &i in sp.interior_nodes() {
            if i < nv {
                assert!(b[i].abs() < 1e-15);
            } else {
                assert!(b[i] > 0.0 && b[n + i] < 0.0);
            }
        }
    }
}
