//! Discrete norms, the cached scalar solvers behind the dual norms, and the
//! inf-sup diagnostic of the velocity/pressure pair.

use std::sync::OnceLock;

use super::assembly::{divergence, forcing_load, pressure_mass, pressure_mean_weights, scalar_mass, scalar_stiffness};
use super::spaces::{Forcing, FunctionSpaces, State};
use super::sparse::{dot, CsrMatrix, LuSolver, TripletBuilder};
use crate::error::{Error, Result};
use crate::model::SymMat2;

fn cached(cell: &OnceLock<LuSolver>, build: impl FnOnce() -> Result<LuSolver>) -> Result<&LuSolver> {
    if let Some(lu) = cell.get() {
        return Ok(lu);
    }
    let lu = build()?;
    Ok(cell.get_or_init(|| lu))
}

/// Scalar stiffness restricted to interior P2 nodes.
pub(crate) fn interior_stiffness(sp: &FunctionSpaces) -> CsrMatrix {
    let ni = sp.interior_nodes().len();
    let mut b = TripletBuilder::new(ni, ni);
    b.add_block(scalar_stiffness(sp), 1.0, |i| sp.interior_index(i), |j| sp.interior_index(j));
    b.build()
}

/// LU of the Dirichlet Laplacian on interior nodes.
pub(crate) fn poisson_solver(sp: &FunctionSpaces) -> Result<&LuSolver> {
    cached(&sp.cache.poisson, || LuSolver::factor(&interior_stiffness(sp)))
}

/// LU of the scalar H1 Gram matrix `M + K` over all P2 nodes.
pub(crate) fn h1_solver(sp: &FunctionSpaces) -> Result<&LuSolver> {
    cached(&sp.cache.h1, || LuSolver::factor(&scalar_mass(sp).add_scaled(scalar_stiffness(sp), 1.0)))
}

/// LU of the saddle-point system
/// `[K_V, -B^T, 0; -B, 0, m; 0, m^T, 0]` on free velocity, pressure and the
/// mean multiplier. Solving it with right side `(g, 0, 0)` gives the
/// V-Riesz representative of `g` inside the weakly divergence-free subspace.
pub(crate) fn stokes_solver(sp: &FunctionSpaces) -> Result<&LuSolver> {
    cached(&sp.cache.stokes, || {
        let ni = sp.interior_nodes().len();
        let nf = 2 * ni;
        let np = sp.n_pressure();
        let dim = nf + np + 1;
        let mut b = TripletBuilder::new(dim, dim);
        let k = interior_stiffness(sp);
        for c in 0..2 {
            b.add_block(&k, 1.0, |i| Some(c * ni + i), |j| Some(c * ni + j));
        }
        let div = divergence(sp);
        b.add_block(div, -1.0, |i| Some(nf + i), |j| sp.velocity_free_index(j));
        b.add_block(&div.transpose(), -1.0, |i| sp.velocity_free_index(i), |j| Some(nf + j));
        for (k, &m) in pressure_mean_weights(sp).iter().enumerate() {
            b.push(nf + k, nf + np, m);
            b.push(nf + np, nf + k, m);
        }
        LuSolver::factor(&b.build())
    })
}

/// V-orthogonal projection of a velocity onto the weakly divergence-free
/// subspace `{v : (q, div v) = 0 for all q}`.
pub fn project_div_free(sp: &FunctionSpaces, u: &[f64]) -> Result<Vec<f64>> {
    let k = interior_stiffness(sp);
    let ni = k.nrows();
    let uf = sp.restrict_velocity(u);
    let mut rhs = vec![0.0; 2 * ni + sp.n_pressure() + 1];
    for c in 0..2 {
        let kc = k.matvec(&uf[c * ni..(c + 1) * ni]);
        rhs[c * ni..(c + 1) * ni].copy_from_slice(&kc);
    }
    let x = stokes_solver(sp)?.solve(&rhs)?;
    Ok(sp.extend_velocity(&x[..2 * ni]))
}

/// `sqrt(g^T K^{-1} g)` per velocity component, for a load vector in the
/// full velocity layout (boundary rows ignored).
pub fn velocity_dual_norm(sp: &FunctionSpaces, g: &[f64]) -> Result<f64> {
    let lu = poisson_solver(sp)?;
    let gf = sp.restrict_velocity(g);
    let ni = gf.len() / 2;
    let mut total = 0.0;
    for c in 0..2 {
        let part = &gf[c * ni..(c + 1) * ni];
        total += dot(part, &lu.solve(part)?);
    }
    Ok(total.max(0.0).sqrt())
}

/// Dual norm of a stress load vector with respect to the W inner product.
pub fn stress_dual_norm(sp: &FunctionSpaces, g: &[f64]) -> Result<f64> {
    let lu = h1_solver(sp)?;
    let n = sp.n_scalar();
    let mut total = 0.0;
    for (c, w) in SymMat2::WEIGHTS.iter().enumerate() {
        let part = &g[c * n..(c + 1) * n];
        total += dot(part, &lu.solve(part)?) / w;
    }
    Ok(total.max(0.0).sqrt())
}

/// `||grad u||_{L2}`.
pub fn norm_v(sp: &FunctionSpaces, u: &[f64]) -> f64 {
    let n = sp.n_scalar();
    let k = scalar_stiffness(sp);
    (0..2).map(|c| k.bilinear(&u[c * n..(c + 1) * n], &u[c * n..(c + 1) * n])).sum::<f64>().max(0.0).sqrt()
}

/// `||sigma||_{L2}` and `||grad sigma||_{L2}` with the Frobenius product.
pub fn stress_norm_parts(sp: &FunctionSpaces, s: &[f64]) -> (f64, f64) {
    let n = sp.n_scalar();
    let (m, k) = (scalar_mass(sp), scalar_stiffness(sp));
    let mut l2 = 0.0;
    let mut grad = 0.0;
    for (c, w) in SymMat2::WEIGHTS.iter().enumerate() {
        let sc = &s[c * n..(c + 1) * n];
        l2 += w * m.bilinear(sc, sc);
        grad += w * k.bilinear(sc, sc);
    }
    (l2.max(0.0).sqrt(), grad.max(0.0).sqrt())
}

/// `(||sigma||^2 + ||grad sigma||^2)^{1/2}`.
pub fn norm_w(sp: &FunctionSpaces, s: &[f64]) -> f64 {
    let (l2, grad) = stress_norm_parts(sp, s);
    l2.hypot(grad)
}

/// `(2r ||u||_V^2 + ||sigma||_W^2)^{1/2}`.
pub fn norm_x(sp: &FunctionSpaces, state: &State, r: f64) -> f64 {
    (2.0 * r * norm_v(sp, &state.u).powi(2) + norm_w(sp, &state.s).powi(2)).sqrt()
}

/// X inner product `2r (u, v)_V + (sigma, tau)_W`.
pub fn inner_x(sp: &FunctionSpaces, r: f64, a: &State, b: &State) -> f64 {
    let n = sp.n_scalar();
    let (m, k) = (scalar_mass(sp), scalar_stiffness(sp));
    let mut v = 0.0;
    for c in 0..2 {
        v += k.bilinear(&a.u[c * n..(c + 1) * n], &b.u[c * n..(c + 1) * n]);
    }
    let mut w = 0.0;
    for (c, wt) in SymMat2::WEIGHTS.iter().enumerate() {
        let (x, y) = (&a.s[c * n..(c + 1) * n], &b.s[c * n..(c + 1) * n]);
        w += wt * (m.bilinear(x, y) + k.bilinear(x, y));
    }
    2.0 * r * v + w
}

/// `(int |sigma|_F^4)^{1/4}`.
pub fn norm_l4(sp: &FunctionSpaces, s: &[f64]) -> f64 {
    let mut total = 0.0;
    for (t, el) in sp.elements().iter().enumerate() {
        let [s11, s12, s22] = sp.local_stress(t, s);
        for q in 0..el.num_points() {
            let (a, b, c) = (el.eval(q, &s11), el.eval(q, &s12), el.eval(q, &s22));
            let f2 = a * a + 2.0 * b * b + c * c;
            total += el.weights[q] * f2 * f2;
        }
    }
    total.sqrt().sqrt()
}

/// L4 norm of a scalar P2 field.
pub fn scalar_norm_l4(sp: &FunctionSpaces, v: &[f64]) -> f64 {
    let mut total = 0.0;
    for (t, el) in sp.elements().iter().enumerate() {
        let c = sp.cells()[t].map(|i| v[i]);
        for q in 0..el.num_points() {
            total += el.weights[q] * el.eval(q, &c).powi(4);
        }
    }
    total.sqrt().sqrt()
}

/// H1 norm of a scalar P2 field.
pub fn scalar_norm_h1(sp: &FunctionSpaces, v: &[f64]) -> f64 {
    (scalar_mass(sp).bilinear(v, v) + scalar_stiffness(sp).bilinear(v, v)).max(0.0).sqrt()
}

/// L2 norm of a P1 pressure.
pub fn norm_pressure(sp: &FunctionSpaces, p: &[f64]) -> f64 {
    pressure_mass(sp).bilinear(p, p).max(0.0).sqrt()
}

/// Discrete H^{-1} norm: `||grad w||` where `-Lap w = f` componentwise in
/// the interior P2 space. A lower bound for the continuous norm.
pub fn h_minus1_norm(sp: &FunctionSpaces, f: &Forcing) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    velocity_dual_norm(sp, &forcing_load(sp, f))
}

/// Smallest nonzero singular value of the divergence pairing,
/// `inf_q sup_v (q, div v) / (||q|| ||v||_V)` over zero-mean pressures,
/// from a dense generalized eigenproblem. Meant for small meshes.
pub fn inf_sup_constant(sp: &FunctionSpaces) -> Result<f64> {
    let np = sp.n_pressure();
    let ni = sp.interior_nodes().len();
    let lu = poisson_solver(sp)?;
    let div = divergence(sp);
    // Schur complement S = B K^{-1} B^T, one pressure column at a time.
    let mut bt = vec![vec![0.0; 2 * ni]; np];
    for (i, j, v) in div.iter() {
        if let Some(k) = sp.velocity_free_index(j) {
            bt[i][k] += v;
        }
    }
    let mut kinv_bt = Vec::with_capacity(np);
    for col in &bt {
        let mut x = lu.solve(&col[..ni])?;
        x.extend(lu.solve(&col[ni..])?);
        kinv_bt.push(x);
    }
    let schur = faer::Mat::<f64>::from_fn(np, np, |i, j| dot(&bt[i], &kinv_bt[j]));
    let mass = faer::Mat::<f64>::from_fn(np, np, |i, j| pressure_mass(sp).get(i, j));
    let eig = mass
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::LinearSolveFailure(format!("mass eigendecomposition: {e:?}")))?;
    let (q, lam) = (eig.U(), eig.S().column_vector());
    let half_inv = faer::Mat::<f64>::from_fn(np, np, |i, j| (0..np).map(|k| q[(i, k)] * q[(j, k)] / lam[k].sqrt()).sum());
    let c = &half_inv * &schur * &half_inv;
    let c = faer::Mat::<f64>::from_fn(np, np, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let vals = c
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::LinearSolveFailure(format!("schur eigenvalues: {e:?}")))?;
    // the constant pressure spans the kernel; every other mode is positive
    let scale = vals.last().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
    vals.iter()
        .copied()
        .find(|&v| v > 1e-10 * scale)
        .map(f64::sqrt)
        .ok_or_else(|| Error::LinearSolveFailure("divergence pairing has no positive mode".into()))
}
