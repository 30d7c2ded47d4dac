//! Discrete well-posedness certificates: the Sobolev constant of the
//! stress space, existence and energy-bound checks, the sign of the
//! Galerkin map on the Brouwer sphere, and the uniqueness coefficients.
//!
//! Every constant here is discrete (computed on the finite element space),
//! so the certified inequalities are statements about the discrete problem.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::norms::{h1_solver, norm_l4, norm_w, norm_x, project_div_free, scalar_norm_h1, scalar_norm_l4};
use crate::fem::pk::pk_pairing;
use crate::fem::{Forcing, FunctionSpaces, State};
use crate::model::{uniqueness_ab, Constants, FluidParams, UniquenessSplit};

/// Generator for sample `index` of a run seeded with `seed`; independent of
/// scheduling.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct COmegaOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Relative stagnation threshold of the ascent.
    pub tol: f64,
    pub audit_samples: usize,
    pub seed: u64,
}

impl Default for COmegaOptions {
    fn default() -> Self {
        COmegaOptions { restarts: 5, max_iter: 2000, tol: 1e-12, audit_samples: 1000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct COmegaEstimate {
    /// Value to use in the certificates.
    pub value: f64,
    /// Best ratio found by the scalar ascent.
    pub scalar_ratio: f64,
    /// Largest `||tau||_L4 / ||tau||_W` over the tensor audit.
    pub audit_max_ratio: f64,
    /// Set when the audit exceeded the scalar value and raised it.
    pub raised_by_audit: bool,
    pub ascent_iterations: Vec<usize>,
}

/// `tau -> H^{-1} (tau^3, phi_i)`, the Riesz map of the derivative of
/// `||tau||_L4^4 / 4` in H1.
fn ascent_step(sp: &FunctionSpaces, tau: &[f64]) -> Result<Vec<f64>> {
    let mut load = vec![0.0; sp.n_scalar()];
    for (t, el) in sp.elements().iter().enumerate() {
        let cell = &sp.cells()[t];
        let c = cell.map(|i| tau[i]);
        for q in 0..el.num_points() {
            let v = el.eval(q, &c);
            let w = el.weights[q] * v * v * v;
            for (i, &node) in cell.iter().enumerate() {
                load[node] += w * el.phi[q][i];
            }
        }
    }
    h1_solver(sp)?.solve(&load)
}

fn normalized(sp: &FunctionSpaces, v: Vec<f64>) -> Vec<f64> {
    let n = scalar_norm_h1(sp, &v);
    v.into_iter().map(|x| x / n).collect()
}

/// Normalized fixed-point ascent for `max ||tau||_L4 / ||tau||_H1`. The
/// ratio is nondecreasing along the iteration because the L4 functional is
/// convex.
fn ascend(sp: &FunctionSpaces, start: Vec<f64>, opts: &COmegaOptions) -> Result<(f64, usize)> {
    let mut tau = normalized(sp, start);
    let mut ratio = scalar_norm_l4(sp, &tau);
    for it in 1..=opts.max_iter {
        tau = normalized(sp, ascent_step(sp, &tau)?);
        let next = scalar_norm_l4(sp, &tau);
        let done = (next - ratio).abs() <= opts.tol * next;
        ratio = ratio.max(next);
        if done {
            return Ok((ratio, it));
        }
    }
    Err(Error::NoConvergence(format!("Sobolev ratio ascent did not settle in {} iterations", opts.max_iter)))
}

/// Random symmetric tensor field: a random constant part plus noise of
/// random amplitude, so both smooth and rough fields are audited.
fn audit_field(sp: &FunctionSpaces, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = sp.n_scalar();
    let base: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let amp: f64 = rng.random_range(0.0..1.0);
    (0..3 * n).map(|k| base[k / n] + amp * rng.random_range(-1.0..1.0)).collect()
}

/// Estimates the discrete constant `C` in `||tau||_L4 <= C ||tau||_W`.
pub fn estimate_c_omega(sp: &FunctionSpaces, opts: &COmegaOptions) -> Result<COmegaEstimate> {
    let n = sp.n_scalar();
    let mut starts = vec![vec![1.0; n]];
    for k in 0..opts.restarts {
        let mut rng = sample_rng(opts.seed, k as u64);
        starts.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    let runs: Vec<Result<(f64, usize)>> = starts.into_par_iter().map(|s| ascend(sp, s, opts)).collect();
    let mut scalar_ratio = 0.0f64;
    let mut ascent_iterations = Vec::new();
    for r in runs {
        let (ratio, it) = r?;
        scalar_ratio = scalar_ratio.max(ratio);
        ascent_iterations.push(it);
    }
    let audit_max_ratio = (0..opts.audit_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(opts.seed ^ 0xA0D1_7000, k as u64);
            let s = audit_field(sp, &mut rng);
            norm_l4(sp, &s) / norm_w(sp, &s)
        })
        .reduce(|| 0.0, f64::max);
    let raised_by_audit = audit_max_ratio > scalar_ratio;
    Ok(COmegaEstimate {
        value: scalar_ratio.max(audit_max_ratio),
        scalar_ratio,
        audit_max_ratio,
        raised_by_audit,
        ascent_iterations,
    })
}

/// Position of a state relative to the two roots of
/// `alpha x^2 - beta x + gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    SmallRoot,
    LargeRoot,
    Degenerate,
}

/// Which sufficient uniqueness condition the point exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UniquenessRegime {
    /// `f = 0`: `C_(II) = 0` and both coefficients are at their maxima.
    ZeroData,
    /// `C_Omega^2 C_(II) / sqrt(2r) <= 1`: the data factor is small.
    SmallForcing,
    /// The data factor exceeds one; positivity comes from small Re and We.
    SmallReWe,
    NotCertified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessFragment {
    pub a_coef: f64,
    pub b_coef: f64,
    pub split: UniquenessSplit,
    pub uniqueness_ok: bool,
    pub regime: UniquenessRegime,
}

pub fn uniqueness_certificate(p: &FluidParams, c_omega_h: f64, c2: f64) -> UniquenessFragment {
    let ab = uniqueness_ab(p, c_omega_h, c2);
    let ok = ab.certifies();
    let factor = c_omega_h * c_omega_h * c2 / (2.0 * p.r()).sqrt();
    let regime = match (ok, c2 == 0.0, factor <= 1.0) {
        (false, _, _) => UniquenessRegime::NotCertified,
        (true, true, _) => UniquenessRegime::ZeroData,
        (true, false, true) => UniquenessRegime::SmallForcing,
        (true, false, false) => UniquenessRegime::SmallReWe,
    };
    UniquenessFragment { a_coef: ab.a, b_coef: ab.b, split: ab.split, uniqueness_ok: ok, regime }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub c_omega_h: f64,
    pub f_norm_h: f64,
    pub constants: Constants,
    pub existence_ok: bool,
    pub bound_ok: bool,
    pub uniqueness_ok: bool,
    pub uniqueness: UniquenessFragment,
    pub branch: Branch,
    /// `||xi||_X` of the certified state.
    pub xi_norm: f64,
    /// `||xi||_X^2 - C_(II)^2`; nonpositive when the bound holds strictly.
    pub bound_gap: f64,
    /// Tolerance granted to `bound_gap`.
    pub slack: f64,
    pub mesh_h: f64,
    pub seed: Option<u64>,
    pub notes: Vec<String>,
}

/// Checks `2r ||u||_V^2 + ||sigma||_W^2 <= C_(II)^2` for a converged state.
pub fn energy_certificate(
    sp: &FunctionSpaces,
    p: &FluidParams,
    state: &State,
    c_omega_h: f64,
    f_norm_h: f64,
) -> Result<Certificate> {
    let constants = Constants::evaluate(p, c_omega_h, f_norm_h)?;
    let xi = norm_x(sp, state, p.r());
    let c2 = constants.c2;
    let slack = 1e-8 * c2 * c2;
    let bound_gap = xi * xi - c2 * c2;
    let bound_ok = bound_gap <= slack;
    let branch = if xi <= c2 * (1.0 + 1e-8) {
        Branch::SmallRoot
    } else if xi >= constants.large_root() {
        Branch::LargeRoot
    } else {
        Branch::Degenerate
    };
    let uniqueness = uniqueness_certificate(p, c_omega_h, c2);
    let mut notes = vec!["constants use the discrete Sobolev constant and the discrete H^-1 norm of f".to_string()];
    if constants.c2_degenerate {
        notes.push("C_(I) = 1: double root, C_(II) = beta / (2 alpha)".into());
    }
    if uniqueness.split == UniquenessSplit::ReZeroFallback {
        notes.push("Re = 0: uniqueness coefficients from the Re-free split".into());
    }
    Ok(Certificate {
        c_omega_h,
        f_norm_h,
        existence_ok: constants.c1 <= 1.0,
        bound_ok,
        uniqueness_ok: uniqueness.uniqueness_ok,
        uniqueness,
        constants,
        branch,
        xi_norm: xi,
        bound_gap,
        slack,
        mesh_h: sp.mesh().h(),
        seed: None,
        notes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereReport {
    pub radius: f64,
    pub samples: usize,
    pub min_pairing: f64,
    pub epsilon: f64,
    pub passed: bool,
}

/// Random state with weakly divergence-free velocity on the X-sphere of
/// the given radius.
pub fn random_sphere_state(sp: &FunctionSpaces, r: f64, radius: f64, rng: &mut ChaCha8Rng) -> Result<State> {
    let mut st = State::random(sp, rng);
    st.u = project_div_free(sp, &st.u)?;
    st.p.iter_mut().for_each(|v| *v = 0.0);
    let norm = norm_x(sp, &st, r);
    Ok(st.scaled(radius / norm))
}

/// Evaluates `(P_k(xi), xi)_X` on `n_samples` random states with
/// `||xi||_X = C_(II),h`.
pub fn sphere_sign_test(
    sp: &FunctionSpaces,
    p: &FluidParams,
    f: &Forcing,
    constants: &Constants,
    n_samples: usize,
    seed: u64,
) -> Result<SphereReport> {
    if constants.c1 > 1.0 {
        return Err(Error::C1ExceedsOne { c1: constants.c1 });
    }
    sphere_sign_test_at(sp, p, f, constants.c2, n_samples, seed)
}

/// Same test on an arbitrary radius.
pub fn sphere_sign_test_at(
    sp: &FunctionSpaces,
    p: &FluidParams,
    f: &Forcing,
    radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<SphereReport> {
    // warm the shared factorizations before going parallel
    crate::fem::norms::stokes_solver(sp)?;
    h1_solver(sp)?;
    let values: Vec<Result<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, k as u64);
            let st = random_sphere_state(sp, p.r(), radius, &mut rng)?;
            pk_pairing(sp, p, f, &st)
        })
        .collect();
    let mut min_pairing = f64::INFINITY;
    for v in values {
        min_pairing = min_pairing.min(v?);
    }
    let epsilon = 1e-10 * (1.0 + radius.powi(3));
    Ok(SphereReport { radius, samples: n_samples, min_pairing, epsilon, passed: min_pairing >= -epsilon })
}
