//! Picard iteration for the discrete stationary problem.
//!
//! Each sweep freezes the velocity that enters the convection, stress
//! transport and `g_a` coefficients at the current iterate and solves the
//! resulting linear coupled system for `(u, p, sigma)` at once. With
//! `Re = We = 0` the system is linear and one sweep is exact.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::assembly::{assemble_convection, assemble_stokes_blocks, assemble_stress_blocks, forcing_load, pressure_mean_weights, stress_source_load};
use crate::fem::norms::{norm_v, norm_w, norm_x};
use crate::fem::pk::weak_residual_with_source;
use crate::fem::sparse::{gmres, CsrMatrix, LuSolver, TripletBuilder};
use crate::fem::spaces::StressSource;
use crate::fem::{Forcing, FunctionSpaces, State};
use crate::model::FluidParams;

/// Starting point of the iteration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    #[default]
    Zero,
    Given(State),
    /// Uniform random entries in `[-scale, scale]`, boundary velocity zero.
    Random { seed: u64, scale: f64 },
}

/// Inner linear solver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearSolver {
    /// Fresh sparse LU every sweep.
    #[default]
    Direct,
    /// GMRES preconditioned by the LU of the previous sweep, relative
    /// tolerance `1e-10`.
    Lagged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Damping `theta` in `(0, 1]`.
    pub relaxation: f64,
    /// Threshold on both weak residual norms.
    pub tol: f64,
    pub max_iter: usize,
    pub initial: InitialGuess,
    pub linear: LinearSolver,
    /// Radius used by divergence detection, usually `C_(II),h`.
    pub reference_radius: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            relaxation: 1.0,
            tol: 1e-10,
            max_iter: 200,
            initial: InitialGuess::Zero,
            linear: LinearSolver::Direct,
            reference_radius: 1.0,
        }
    }
}

impl SolverOptions {
    /// `theta = 1` when `C_(I),h <= 0.5`, else `0.5`.
    pub fn default_relaxation(c1: f64) -> f64 {
        if c1 <= 0.5 {
            1.0
        } else {
            0.5
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::InvalidParams(format!("relaxation must lie in (0, 1], got {}", self.relaxation)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParams(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParams("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalNorms {
    pub u_v: f64,
    pub sigma_w: f64,
    pub xi_x: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `(momentum, stress)` dual residual norms after each sweep.
    pub residual_history: Vec<(f64, f64)>,
    pub converged: bool,
    pub final_norms: FinalNorms,
    pub relaxation: f64,
}

/// Constant `C` with `||P_k(xi)||_X <= C tol` at a converged state:
/// the momentum part contributes `sqrt(2r)` times its dual residual and the
/// stress part its own, so `C = sqrt(1 + 2r)`.
pub fn pk_consistency_constant(r: f64) -> f64 {
    (1.0 + 2.0 * r).sqrt()
}

/// Subtracts the mean pressure; velocity and stress are untouched.
pub fn fix_pressure_mean(state: &State, sp: &FunctionSpaces) -> State {
    let m = pressure_mean_weights(sp);
    let area: f64 = m.iter().sum();
    let mean = m.iter().zip(&state.p).map(|(w, p)| w * p).sum::<f64>() / area;
    let mut out = state.clone();
    out.p.iter_mut().for_each(|p| *p -= mean);
    out
}

/// Linearized system around a frozen velocity, ordered
/// `[u_free | p | sigma | lambda]`.
struct Linearized {
    matrix: CsrMatrix,
    rhs: Vec<f64>,
}

struct Layout {
    nf: usize,
    np: usize,
    ns: usize,
}

impl Layout {
    fn new(sp: &FunctionSpaces) -> Self {
        Layout { nf: sp.n_velocity_free(), np: sp.n_pressure(), ns: sp.n_stress() }
    }

    fn dim(&self) -> usize {
        self.nf + self.np + self.ns + 1
    }

    fn pack(&self, sp: &FunctionSpaces, st: &State) -> Vec<f64> {
        let mut x = sp.restrict_velocity(&st.u);
        x.extend_from_slice(&st.p);
        x.extend_from_slice(&st.s);
        x.push(0.0);
        x
    }

    fn unpack(&self, sp: &FunctionSpaces, x: &[f64]) -> State {
        let (nf, np, ns) = (self.nf, self.np, self.ns);
        State { u: sp.extend_velocity(&x[..nf]), p: x[nf..nf + np].to_vec(), s: x[nf + np..nf + np + ns].to_vec() }
    }
}

fn linearize(
    sp: &FunctionSpaces,
    p: &FluidParams,
    b_f: &[f64],
    g_load: Option<&[f64]>,
    u_frozen: &[f64],
    lay: &Layout,
) -> Linearized {
    let (nf, np, ns) = (lay.nf, lay.np, lay.ns);
    let stokes = assemble_stokes_blocks(sp, p);
    let stress = assemble_stress_blocks(sp, p, u_frozen);
    let mut momentum = stokes.viscous.clone();
    if p.re() != 0.0 {
        momentum = momentum.add_scaled(&assemble_convection(sp, u_frozen), p.re());
    }
    let dim = lay.dim();
    let vf = |i: usize| sp.velocity_free_index(i);
    let mut b = TripletBuilder::new(dim, dim);
    b.add_block(&momentum, 1.0, vf, vf);
    b.add_block(&stokes.coupling, 1.0, vf, |j| Some(nf + np + j));
    b.add_block(&stokes.divergence.transpose(), -1.0, vf, |j| Some(nf + j));
    b.add_block(&stokes.divergence, -1.0, |i| Some(nf + i), vf);
    b.add_block(&stress.operator(), 1.0, |i| Some(nf + np + i), |j| Some(nf + np + j));
    b.add_block(&stress.source, -1.0, |i| Some(nf + np + i), vf);
    for (k, &m) in pressure_mean_weights(sp).iter().enumerate() {
        b.push(nf + k, dim - 1, m);
        b.push(dim - 1, nf + k, m);
    }
    let mut rhs = sp.restrict_velocity(b_f);
    rhs.resize(nf + np, 0.0);
    match g_load {
        Some(g) => rhs.extend_from_slice(g),
        None => rhs.resize(nf + np + ns, 0.0),
    }
    rhs.push(0.0);
    Linearized { matrix: b.build(), rhs }
}

fn initial_state(sp: &FunctionSpaces, init: &InitialGuess) -> Result<State> {
    match init {
        InitialGuess::Zero => Ok(State::zeros(sp)),
        InitialGuess::Given(st) => {
            if !st.is_admissible(sp) {
                return Err(Error::InvalidParams("initial state does not match the discrete spaces".into()));
            }
            Ok(st.clone())
        }
        InitialGuess::Random { seed, scale } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok(State::random(sp, &mut rng).scaled(*scale))
        }
    }
}

/// Solves the discrete problem by relaxed Picard iteration.
pub fn solve_picard(p: &FluidParams, f: &Forcing, sp: &FunctionSpaces, opts: &SolverOptions) -> Result<(State, SolveReport)> {
    solve_with_source(p, f, None, sp, opts)
}

/// One undamped sweep from `state`: the solution of the system linearized
/// at `state.u`.
pub fn picard_sweep(p: &FluidParams, f: &Forcing, sp: &FunctionSpaces, state: &State) -> Result<State> {
    let lay = Layout::new(sp);
    let b_f = forcing_load(sp, f);
    let sys = linearize(sp, p, &b_f, None, &state.u, &lay);
    Ok(lay.unpack(sp, &LuSolver::factor(&sys.matrix)?.solve(&sys.rhs)?))
}

pub(crate) fn solve_with_source(
    p: &FluidParams,
    f: &Forcing,
    g: Option<&StressSource>,
    sp: &FunctionSpaces,
    opts: &SolverOptions,
) -> Result<(State, SolveReport)> {
    opts.validate()?;
    let lay = Layout::new(sp);
    let b_f = forcing_load(sp, f);
    let g_load = g.map(|g| stress_source_load(sp, g));
    let theta = opts.relaxation;
    let blowup = 10.0 * opts.reference_radius.max(1.0);

    let mut state = initial_state(sp, &opts.initial)?;
    let mut history = Vec::new();
    let mut lagged: Option<LuSolver> = None;
    let mut growth = 0usize;
    let mut last = f64::INFINITY;

    for it in 1..=opts.max_iter {
        let sys = linearize(sp, p, &b_f, g_load.as_deref(), &state.u, &lay);
        let x = match (opts.linear, &lagged) {
            (LinearSolver::Lagged, Some(pre)) => {
                let x0 = lay.pack(sp, &state);
                let (x, rel) = gmres(&sys.matrix, &sys.rhs, &x0, |v| pre.solve(v), 1e-10, 60, 30)?;
                if rel > 1e-10 {
                    return Err(Error::LinearSolveFailure(format!("GMRES stalled at relative residual {rel:.2e}")));
                }
                x
            }
            _ => {
                let lu = LuSolver::factor(&sys.matrix)?;
                let x = lu.solve(&sys.rhs)?;
                if opts.linear == LinearSolver::Lagged {
                    lagged = Some(lu);
                }
                x
            }
        };
        let next = lay.unpack(sp, &x);
        state = if theta == 1.0 { next } else { state.blend(&next, theta) };

        let (rm, rs) = weak_residual_with_source(sp, p, f, g, &state)?;
        history.push((rm, rs));
        if !(rm.is_finite() && rs.is_finite()) {
            return Err(Error::Diverged { iterations: it, norm: f64::INFINITY });
        }
        if rm <= opts.tol && rs <= opts.tol {
            let report = SolveReport {
                iterations: it,
                residual_history: history,
                converged: true,
                final_norms: final_norms(sp, p, &state),
                relaxation: theta,
            };
            return Ok((state, report));
        }
        let combined = rm.hypot(rs);
        growth = if combined > last { growth + 1 } else { 0 };
        last = combined;
        let xi = norm_x(sp, &state, p.r());
        if growth >= 5 && xi > blowup {
            return Err(Error::Diverged { iterations: it, norm: xi });
        }
    }
    Err(Error::MaxIterExceeded { iterations: opts.max_iter, residual: last })
}

fn final_norms(sp: &FunctionSpaces, p: &FluidParams, st: &State) -> FinalNorms {
    FinalNorms { u_v: norm_v(sp, &st.u), sigma_w: norm_w(sp, &st.s), xi_x: norm_x(sp, st, p.r()) }
}
