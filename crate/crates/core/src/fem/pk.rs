//! The Galerkin map `P_k` on the discrete product space, its energy
//! pairing and the weak residual of the stationary problem.

use super::assembly::{assemble_convection, assemble_g_a, assemble_stokes_blocks, assemble_stress_blocks, divergence, forcing_load, stress_source_load};
use super::norms::{inner_x, norm_v, stokes_solver, stress_dual_norm, stress_norm_parts, velocity_dual_norm};
use super::spaces::{Forcing, FunctionSpaces, State, StressSource};
use super::sparse::{axpy, dot};
use crate::error::Result;
use crate::model::{FluidParams, SymMat2};

/// Terms of the energy expansion of `(P_k(xi), xi)_X`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyTerms {
    /// `2r (1 - r) ||grad u||^2`
    pub viscous: f64,
    /// `||sigma||^2`
    pub stress_l2: f64,
    /// `D ||grad sigma||^2`
    pub stress_grad: f64,
    /// `We (g_a(grad u, sigma), sigma)`
    pub g_a: f64,
    /// `-2r <f, u>`
    pub forcing: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        self.viscous + self.stress_l2 + self.stress_grad + self.g_a + self.forcing
    }
}

pub fn energy_terms(sp: &FunctionSpaces, p: &FluidParams, f: &Forcing, state: &State) -> EnergyTerms {
    let r = p.r();
    let (l2, grad) = stress_norm_parts(sp, &state.s);
    let g_a = if p.we() == 0.0 || p.a() == 0.0 {
        0.0
    } else {
        p.we() * assemble_g_a(sp, &state.u, p.a()).bilinear(&state.s, &state.s)
    };
    EnergyTerms {
        viscous: 2.0 * r * (1.0 - r) * norm_v(sp, &state.u).powi(2),
        stress_l2: l2 * l2,
        stress_grad: p.diff() * grad * grad,
        g_a,
        forcing: -2.0 * r * dot(&forcing_load(sp, f), &state.u),
    }
}

/// Momentum and stress functionals of `P_k(u, sigma)` tested against every
/// basis function; boundary velocity rows are zero.
fn pk_functional(sp: &FunctionSpaces, p: &FluidParams, f: &Forcing, state: &State) -> (Vec<f64>, Vec<f64>) {
    let r = p.r();
    let stokes = assemble_stokes_blocks(sp, p);
    let mut fu = stokes.viscous.matvec(&state.u);
    fu = axpy(&fu, 1.0, &stokes.coupling.matvec(&state.s));
    if p.re() != 0.0 {
        fu = axpy(&fu, p.re(), &assemble_convection(sp, &state.u).matvec(&state.u));
    }
    fu = axpy(&fu, -1.0, &forcing_load(sp, f));
    let n = sp.n_scalar();
    for (i, v) in fu.iter_mut().enumerate() {
        *v = if sp.is_boundary_node(i % n) { 0.0 } else { 2.0 * r * *v };
    }
    let stress = assemble_stress_blocks(sp, p, &state.u);
    let fs = axpy(&stress.operator().matvec(&state.s), -1.0, &stress.source.matvec(&state.u));
    (fu, fs)
}

/// Riesz representative of the `P_k` functional in X, with the velocity
/// part taken in the weakly divergence-free subspace. The returned pressure
/// is zero.
pub fn apply_pk(sp: &FunctionSpaces, p: &FluidParams, f: &Forcing, state: &State) -> Result<State> {
    let (fu, fs) = pk_functional(sp, p, f, state);
    let nf = sp.n_velocity_free();
    let mut rhs = sp.restrict_velocity(&fu);
    rhs.resize(nf + sp.n_pressure() + 1, 0.0);
    let x = stokes_solver(sp)?.solve(&rhs)?;
    let u = sp.extend_velocity(&x[..nf].iter().map(|v| v / (2.0 * p.r())).collect::<Vec<_>>());
    let n = sp.n_scalar();
    let h1 = super::norms::h1_solver(sp)?;
    let mut s = vec![0.0; sp.n_stress()];
    for (c, w) in SymMat2::WEIGHTS.iter().enumerate() {
        let sol = h1.solve(&fs[c * n..(c + 1) * n])?;
        for (dst, v) in s[c * n..(c + 1) * n].iter_mut().zip(sol) {
            *dst = v / w;
        }
    }
    Ok(State { u, p: vec![0.0; sp.n_pressure()], s })
}

/// `(P_k(xi), xi)_X` through the Riesz representative. Equals the energy
/// expansion when `u` is weakly divergence-free.
pub fn pk_pairing(sp: &FunctionSpaces, p: &FluidParams, f: &Forcing, state: &State) -> Result<f64> {
    Ok(inner_x(sp, p.r(), &apply_pk(sp, p, f, state)?, state))
}

/// Momentum and stress residual vectors of the weak problem, pressure
/// included. An optional stress source enters the stress right side.
pub(crate) fn residual_vectors(
    sp: &FunctionSpaces,
    p: &FluidParams,
    f: &Forcing,
    g: Option<&StressSource>,
    state: &State,
) -> (Vec<f64>, Vec<f64>) {
    let stokes = assemble_stokes_blocks(sp, p);
    let mut rm = stokes.viscous.matvec(&state.u);
    rm = axpy(&rm, 1.0, &stokes.coupling.matvec(&state.s));
    rm = axpy(&rm, -1.0, &divergence(sp).matvec_transpose(&state.p));
    if p.re() != 0.0 {
        rm = axpy(&rm, p.re(), &assemble_convection(sp, &state.u).matvec(&state.u));
    }
    rm = axpy(&rm, -1.0, &forcing_load(sp, f));
    let stress = assemble_stress_blocks(sp, p, &state.u);
    let mut rs = axpy(&stress.operator().matvec(&state.s), -1.0, &stress.source.matvec(&state.u));
    if let Some(g) = g {
        rs = axpy(&rs, -1.0, &stress_source_load(sp, g));
    }
    (rm, rs)
}

/// Dual norms of the momentum residual (in V') and the stress residual
/// (in W') over the discrete test spaces.
pub fn weak_residual(sp: &FunctionSpaces, p: &FluidParams, f: &Forcing, state: &State) -> Result<(f64, f64)> {
    weak_residual_with_source(sp, p, f, None, state)
}

pub(crate) fn weak_residual_with_source(
    sp: &FunctionSpaces,
    p: &FluidParams,
    f: &Forcing,
    g: Option<&StressSource>,
    state: &State,
) -> Result<(f64, f64)> {
    let (rm, rs) = residual_vectors(sp, p, f, g, state);
    Ok((velocity_dual_norm(sp, &rm)?, stress_dual_norm(sp, &rs)?))
}

/// Dual norm of the momentum residual over weakly divergence-free test
/// functions only; the pressure drops out up to the discrete constraint.
pub fn momentum_residual_div_free(sp: &FunctionSpaces, p: &FluidParams, f: &Forcing, state: &State) -> Result<f64> {
    let (rm, _) = residual_vectors(sp, p, f, None, state);
    let nf = sp.n_velocity_free();
    let mut rhs = sp.restrict_velocity(&rm);
    rhs.resize(nf + sp.n_pressure() + 1, 0.0);
    let x = stokes_solver(sp)?.solve(&rhs)?;
    Ok(dot(&rhs[..nf], &x[..nf]).max(0.0).sqrt())
}
