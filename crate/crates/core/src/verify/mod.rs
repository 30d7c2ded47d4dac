//! Verification: manufactured solutions, convergence studies and the
//! multi-start uniqueness probe.

pub mod mms;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use mms::{mms_forcing, momentum_forcing_at, stress_forcing_at, Benchmark, CosineMode, ManufacturedSolution};

use crate::certify::sample_rng;
use crate::error::{Error, Result};
use crate::fem::norms::{norm_pressure, norm_v, norm_w, norm_x};
use crate::fem::assembly::pressure_mean_weights;
use crate::fem::{Forcing, FunctionSpaces, State};
use crate::mesh::unit_square_mesh;
use crate::model::FluidParams;
use crate::solver::{solve_picard, solve_with_source, InitialGuess, SolverOptions};

/// Nodal interpolant of the manufactured fields; boundary velocity is set
/// from the field itself, which vanishes there.
pub fn interpolate(sp: &FunctionSpaces, ms: &dyn ManufacturedSolution) -> State {
    let n = sp.n_scalar();
    let mut st = State::zeros(sp);
    for (i, &[x, y]) in sp.nodes().iter().enumerate() {
        if !sp.is_boundary_node(i) {
            let u = ms.velocity(x, y);
            st.u[i] = u[0];
            st.u[n + i] = u[1];
        }
        let s = ms.stress(x, y).components();
        for c in 0..3 {
            st.s[c * n + i] = s[c];
        }
    }
    for (v, &[x, y]) in sp.mesh().vertices().iter().enumerate() {
        st.p[v] = ms.pressure(x, y);
    }
    st
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub u_h1: f64,
    pub p_l2: f64,
    pub s_h1: f64,
}

/// Distances from `state` to the interpolant of `ms` in V, L2 (pressure,
/// after removing the mean of the difference) and W.
pub fn error_norms(state: &State, ms: &dyn ManufacturedSolution, sp: &FunctionSpaces) -> ErrorNorms {
    let d = state.difference(&interpolate(sp, ms));
    let m = pressure_mean_weights(sp);
    let mean = m.iter().zip(&d.p).map(|(w, v)| w * v).sum::<f64>() / m.iter().sum::<f64>();
    let dp: Vec<f64> = d.p.iter().map(|v| v - mean).collect();
    ErrorNorms { u_h1: norm_v(sp, &d.u), p_l2: norm_pressure(sp, &dp), s_h1: norm_w(sp, &d.s) }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub n: usize,
    pub h: f64,
    pub iterations: usize,
    pub errors: ErrorNorms,
}

/// Observed orders between consecutive levels; `None` when both errors sit
/// at roundoff level (the solution is already in the discrete space).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orders {
    pub u_h1: Option<f64>,
    pub p_l2: Option<f64>,
    pub s_h1: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub levels: Vec<LevelResult>,
    pub orders: Vec<Orders>,
}

const SATURATED: f64 = 1e-11;

fn order(e0: f64, e1: f64, h0: f64, h1: f64) -> Option<f64> {
    (e0 > SATURATED || e1 > SATURATED).then(|| (e0 / e1).ln() / (h0 / h1).ln())
}

impl RateTable {
    /// Orders of the last pair of levels.
    pub fn last_orders(&self) -> Option<Orders> {
        self.orders.last().copied()
    }

    pub fn to_csv(&self) -> String {
        let fmt = |o: Option<f64>| o.map_or("saturated".to_string(), |v| format!("{v:.4}"));
        let mut out = String::from("n,h,iterations,u_h1_err,p_l2_err,s_h1_err,u_order,p_order,s_order\n");
        for (k, l) in self.levels.iter().enumerate() {
            let (a, b, c) = match k.checked_sub(1).map(|j| self.orders[j]) {
                Some(o) => (fmt(o.u_h1), fmt(o.p_l2), fmt(o.s_h1)),
                None => (String::new(), String::new(), String::new()),
            };
            out += &format!(
                "{},{:.6e},{},{:.6e},{:.6e},{:.6e},{a},{b},{c}\n",
                l.n, l.h, l.iterations, l.errors.u_h1, l.errors.p_l2, l.errors.s_h1
            );
        }
        out
    }
}

/// Solves the manufactured problem on unit-square meshes `n0, 2 n0, ...`
/// (`levels` of them) and measures the error against the interpolant.
pub fn convergence_study<M>(ms: &M, p: &FluidParams, n0: usize, levels: usize, opts: &SolverOptions) -> Result<RateTable>
where
    M: ManufacturedSolution + Clone + 'static,
{
    if levels < 2 {
        return Err(Error::InvalidParams("a convergence study needs at least two levels".into()));
    }
    let (f, g) = mms_forcing(ms, p);
    let results: Vec<Result<LevelResult>> = (0..levels)
        .into_par_iter()
        .map(|k| {
            let n = n0 << k;
            let wrap = |e: Error| Error::SolveFailed { level: k, source: Box::new(e) };
            let sp = FunctionSpaces::new(unit_square_mesh(n).map_err(wrap)?);
            let (st, rep) = solve_with_source(p, &f, Some(&g), &sp, opts).map_err(wrap)?;
            Ok(LevelResult { n, h: sp.mesh().h(), iterations: rep.iterations, errors: error_norms(&st, ms, &sp) })
        })
        .collect();
    let levels = results.into_iter().collect::<Result<Vec<_>>>()?;
    let orders = levels
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            Orders {
                u_h1: order(a.errors.u_h1, b.errors.u_h1, a.h, b.h),
                p_l2: order(a.errors.p_l2, b.errors.p_l2, a.h, b.h),
                s_h1: order(a.errors.s_h1, b.errors.s_h1, a.h, b.h),
            }
        })
        .collect();
    Ok(RateTable { levels, orders })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeStart {
    pub seed_index: u64,
    pub start_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_norm: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub starts: Vec<ProbeStart>,
    /// Largest X-distance between any two converged solutions.
    pub max_distance: f64,
    /// Largest X-norm among converged solutions.
    pub max_norm: f64,
    /// Some start failed and was excluded from the distances.
    pub excluded: bool,
    /// Converged states with `||xi||_X` above the given small-root radius.
    pub off_small_root: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub n_starts: usize,
    pub seed: u64,
    /// Starts are drawn with `||xi||_X` in `[0.2, 1] * radius`.
    pub radius: f64,
    /// `C_(II),h`, used to flag converged states on another branch.
    pub small_root: Option<f64>,
    pub solver: SolverOptions,
}

/// Runs the solver from several random states inside a ball and compares
/// the converged solutions.
pub fn multistart_uniqueness_probe(p: &FluidParams, f: &Forcing, sp: &FunctionSpaces, cfg: &ProbeConfig) -> Result<ProbeReport> {
    let ProbeConfig { n_starts, seed, radius, small_root, solver: opts } = cfg;
    let (n_starts, seed, radius) = (*n_starts, *seed, *radius);
    if n_starts < 2 {
        return Err(Error::InvalidParams("the probe needs at least two starts".into()));
    }
    let mut runs = Vec::with_capacity(n_starts);
    for k in 0..n_starts as u64 {
        let mut rng = sample_rng(seed, k);
        let raw = State::random(sp, &mut rng);
        let t: f64 = rand::Rng::random_range(&mut rng, 0.2..1.0);
        let norm = norm_x(sp, &raw, p.r());
        let start = raw.scaled(t * radius / norm);
        let start_norm = norm_x(sp, &start, p.r());
        let o = SolverOptions { initial: InitialGuess::Given(start), ..opts.clone() };
        let out = solve_picard(p, f, sp, &o);
        runs.push((k, start_norm, out));
    }
    let mut starts = Vec::new();
    let mut states = Vec::new();
    for (k, start_norm, out) in runs {
        match out {
            Ok((st, rep)) => {
                let final_norm = norm_x(sp, &st, p.r());
                starts.push(ProbeStart { seed_index: k, start_norm, converged: true, iterations: rep.iterations, final_norm, error: None });
                states.push(st);
            }
            Err(e) => starts.push(ProbeStart {
                seed_index: k,
                start_norm,
                converged: false,
                iterations: 0,
                final_norm: f64::NAN,
                error: Some(e.to_string()),
            }),
        }
    }
    let mut max_distance = 0.0f64;
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            // velocity and stress only: the pressure is not part of X
            max_distance = max_distance.max(norm_x(sp, &states[i].difference(&states[j]), p.r()));
        }
    }
    let max_norm = starts.iter().filter(|s| s.converged).map(|s| s.final_norm).fold(0.0, f64::max);
    let off_small_root = match small_root {
        Some(c2) => starts.iter().filter(|s| s.converged && s.final_norm > c2 * (1.0 + 1e-8) + 1e-14).count(),
        None => 0,
    };
    Ok(ProbeReport { excluded: starts.iter().any(|s| !s.converged), starts, max_distance, max_norm, off_small_root })
}
