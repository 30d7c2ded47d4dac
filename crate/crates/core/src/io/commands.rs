//! The four driver commands. Each writes its artifacts into a fresh
//! timestamped directory under `output.dir`, starting with `config.txt`.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{InitialKind, MeshSpec, Relaxation, RunConfig, SweepAxis, SweepKey};
use super::export::{write_csv, write_vtk};
use crate::certify::{
    energy_certificate, estimate_c_omega, sphere_sign_test, uniqueness_certificate, COmegaEstimate, COmegaOptions,
    SphereReport, UniquenessFragment,
};
use crate::error::{Error, Result};
use crate::fem::norms::h_minus1_norm;
use crate::fem::{Forcing, FunctionSpaces};
use crate::mesh::{read_mesh, unit_square_mesh, Mesh};
use crate::model::{compute_c1, Constants, FluidParams};
use crate::solver::{fix_pressure_mean, solve_picard, InitialGuess, SolverOptions};
use crate::verify::{convergence_study, multistart_uniqueness_probe, Benchmark, ProbeConfig, ProbeReport};

/// Minimum observed order accepted by `mms`.
pub const MIN_ORDER: f64 = 1.8;

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub run_dir: PathBuf,
    pub summary: String,
}

/// Mesh, spaces, forcing and the two discrete data constants.
pub struct Prepared {
    pub sp: FunctionSpaces,
    pub forcing: Forcing,
    pub c_omega: COmegaEstimate,
    pub f_norm_h: f64,
}

pub fn load_mesh(spec: &MeshSpec) -> Result<Mesh> {
    match spec {
        MeshSpec::UnitSquare(n) => unit_square_mesh(*n),
        MeshSpec::File(path) => {
            let file = File::open(path).map_err(|e| Error::Config(format!("cannot open mesh {}: {e}", path.display())))?;
            read_mesh(BufReader::new(file))
        }
    }
}

/// Builds the forcing and rescales it to `forcing.target_norm` if set.
pub fn scaled_forcing(cfg: &RunConfig, sp: &FunctionSpaces) -> Result<(Forcing, f64)> {
    let f = cfg.forcing.build()?;
    let norm = h_minus1_norm(sp, &f)?;
    match cfg.forcing.target_norm {
        None => Ok((f, norm)),
        Some(0.0) => Ok((Forcing::zero(), 0.0)),
        Some(_) if norm == 0.0 => Err(Error::Config("forcing.target_norm > 0 but the forcing vanishes".into())),
        Some(t) => {
            let f = f.scaled(t / norm);
            let norm = h_minus1_norm(sp, &f)?;
            Ok((f, norm))
        }
    }
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let sp = FunctionSpaces::new(load_mesh(&cfg.mesh)?);
    let (forcing, f_norm_h) = scaled_forcing(cfg, &sp)?;
    let c_omega = estimate_c_omega(&sp, &COmegaOptions { seed: cfg.seed, ..Default::default() })?;
    Ok(Prepared { sp, forcing, c_omega, f_norm_h })
}

/// Solver options from the config; `Auto` relaxation uses `c1`.
pub fn solver_options(cfg: &RunConfig, c1: f64, radius: f64) -> SolverOptions {
    let s = &cfg.solver;
    SolverOptions {
        relaxation: match s.relaxation {
            Relaxation::Auto => SolverOptions::default_relaxation(c1),
            Relaxation::Fixed(t) => t,
        },
        tol: s.tol,
        max_iter: s.max_iter,
        initial: match s.initial {
            InitialKind::Zero => InitialGuess::Zero,
            InitialKind::Random { scale } => InitialGuess::Random { seed: cfg.seed, scale },
        },
        linear: s.linear,
        reference_radius: radius,
    }
}

fn create_run_dir(base: &Path, command: &str) -> Result<PathBuf> {
    fs::create_dir_all(base)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.6fZ");
    let mut dir = base.join(format!("{command}-{stamp}"));
    let mut k = 1;
    while dir.exists() {
        dir = base.join(format!("{command}-{stamp}-{k}"));
        k += 1;
    }
    fs::create_dir(&dir)?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Creates the run directory, echoes the config and runs `body`. Errors
/// raised by `body` are recorded in `error.txt` and mapped to exit codes.
fn run<F>(cfg: &RunConfig, command: &str, body: F) -> Result<RunOutcome>
where
    F: FnOnce(&Path) -> Result<(i32, String)>,
{
    let run_dir = create_run_dir(&cfg.output.dir, command)?;
    fs::write(run_dir.join("config.txt"), cfg.to_text())?;
    let (exit_code, summary) = match body(&run_dir) {
        Ok(v) => v,
        Err(e) => {
            fs::write(run_dir.join("error.txt"), format!("{e}\n"))?;
            (e.exit_code(), format!("error: {e}"))
        }
    };
    Ok(RunOutcome { exit_code, run_dir, summary })
}

/// mesh, spaces, Picard solve, pressure normalization, energy certificate.
pub fn cmd_solve(cfg: &RunConfig) -> Result<RunOutcome> {
    run(cfg, "solve", |dir| {
        let pr = prepare(cfg)?;
        let p = &cfg.params;
        let c1 = compute_c1(p, pr.c_omega.value, pr.f_norm_h);
        let radius = Constants::evaluate(p, pr.c_omega.value, pr.f_norm_h).map_or(1.0, |c| c.c2);
        let opts = solver_options(cfg, c1, radius);
        let (state, report) = solve_picard(p, &pr.forcing, &pr.sp, &opts)?;
        let state = fix_pressure_mean(&state, &pr.sp);
        write_json(&dir.join("report.json"), &report)?;
        write_csv(&pr.sp, &state, BufWriter::new(File::create(dir.join("fields.csv"))?))?;
        if cfg.output.vtk {
            write_vtk(&pr.sp, &state, BufWriter::new(File::create(dir.join("fields.vtk"))?))?;
        }
        let mut cert = energy_certificate(&pr.sp, p, &state, pr.c_omega.value, pr.f_norm_h)?;
        cert.seed = Some(cfg.seed);
        if pr.c_omega.raised_by_audit {
            cert.notes.push("C_Omega,h raised by the tensor audit".into());
        }
        write_json(&dir.join("certificate.json"), &cert)?;
        let summary = format!(
            "iterations {} | C_I,h {:.6e} | C_II,h {:.6e} | |xi|_X {:.6e} | bound_ok {} | uniqueness_ok {}",
            report.iterations, cert.constants.c1, cert.constants.c2, cert.xi_norm, cert.bound_ok, cert.uniqueness_ok
        );
        Ok((if cert.bound_ok { 0 } else { 4 }, summary))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub c_omega: COmegaEstimate,
    pub f_norm_h: f64,
    pub c1: f64,
    pub existence_ok: bool,
    /// Absent past the existence threshold.
    pub constants: Option<Constants>,
    pub uniqueness: Option<UniquenessFragment>,
    pub sphere: Option<SphereReport>,
    pub mesh_h: f64,
    pub seed: u64,
}

/// Constants and verdicts without solving.
pub fn certify(cfg: &RunConfig, pr: &Prepared) -> Result<CertifyReport> {
    let p = &cfg.params;
    let c1 = compute_c1(p, pr.c_omega.value, pr.f_norm_h);
    let (constants, uniqueness, sphere) = if c1 <= 1.0 {
        let c = Constants::evaluate(p, pr.c_omega.value, pr.f_norm_h)?;
        let u = uniqueness_certificate(p, pr.c_omega.value, c.c2);
        let s = if cfg.sphere_samples > 0 {
            Some(sphere_sign_test(&pr.sp, p, &pr.forcing, &c, cfg.sphere_samples, cfg.seed)?)
        } else {
            None
        };
        (Some(c), Some(u), s)
    } else {
        (None, None, None)
    };
    Ok(CertifyReport {
        c_omega: pr.c_omega.clone(),
        f_norm_h: pr.f_norm_h,
        c1,
        existence_ok: c1 <= 1.0,
        constants,
        uniqueness,
        sphere,
        mesh_h: pr.sp.mesh().h(),
        seed: cfg.seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub re: f64,
    pub we: f64,
    pub scale: f64,
    pub f_norm_h: f64,
    pub c1: f64,
    pub c2: Option<f64>,
    pub a_coef: Option<f64>,
    pub b_coef: Option<f64>,
    pub existence_ok: bool,
    pub uniqueness_ok: bool,
}

/// Evaluates the verdicts on the tensor grid of `axes`. The forcing scale
/// multiplies `f_norm_h` (the norm is linear in `f`).
pub fn region_sweep(p: &FluidParams, c_omega: f64, f_norm_h: f64, axes: &[SweepAxis]) -> Result<Vec<SweepRow>> {
    let mut grid: Vec<(FluidParams, f64)> = vec![(*p, 1.0)];
    for axis in axes {
        let mut next = Vec::with_capacity(grid.len() * axis.count);
        for (q, s) in &grid {
            for v in axis.values() {
                next.push(match axis.key {
                    SweepKey::Re => (q.with_re(v)?, *s),
                    SweepKey::We => (q.with_we(v)?, *s),
                    SweepKey::Scale => (*q, v),
                });
            }
        }
        grid = next;
    }
    Ok(grid
        .into_iter()
        .map(|(q, s)| {
            let f = f_norm_h * s.abs();
            let c1 = compute_c1(&q, c_omega, f);
            let c = Constants::evaluate(&q, c_omega, f).ok();
            let u = c.map(|c| uniqueness_certificate(&q, c_omega, c.c2));
            SweepRow {
                re: q.re(),
                we: q.we(),
                scale: s,
                f_norm_h: f,
                c1,
                c2: c.map(|c| c.c2),
                a_coef: u.as_ref().map(|u| u.a_coef),
                b_coef: u.as_ref().map(|u| u.b_coef),
                existence_ok: c1 <= 1.0,
                uniqueness_ok: u.is_some_and(|u| u.uniqueness_ok),
            }
        })
        .collect())
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.10e}"));
    let mut out = String::from("re,we,scale,f_norm_h,c1,c2,a_coef,b_coef,existence_ok,uniqueness_ok\n");
    for r in rows {
        out += &format!(
            "{:?},{:?},{:?},{:.10e},{:.10e},{},{},{},{},{}\n",
            r.re,
            r.we,
            r.scale,
            r.f_norm_h,
            r.c1,
            opt(r.c2),
            opt(r.a_coef),
            opt(r.b_coef),
            r.existence_ok,
            r.uniqueness_ok
        );
    }
    out
}

pub fn cmd_certify(cfg: &RunConfig) -> Result<RunOutcome> {
    run(cfg, "certify", |dir| {
        let pr = prepare(cfg)?;
        let rep = certify(cfg, &pr)?;
        write_json(&dir.join("certificate.json"), &rep)?;
        if let Some(axes) = &cfg.sweep {
            let rows = region_sweep(&cfg.params, pr.c_omega.value, pr.f_norm_h, axes)?;
            fs::write(dir.join("sweep.csv"), sweep_csv(&rows))?;
        }
        let sphere_ok = rep.sphere.as_ref().is_none_or(|s| s.passed);
        let summary = format!(
            "C_Omega,h {:.6} | f_norm_h {:.6e} | C_I,h {:.6e} | existence_ok {} | uniqueness_ok {} | sphere {}",
            rep.c_omega.value,
            rep.f_norm_h,
            rep.c1,
            rep.existence_ok,
            rep.uniqueness.as_ref().is_some_and(|u| u.uniqueness_ok),
            match &rep.sphere {
                Some(s) => format!("min {:.3e}", s.min_pairing),
                None => "skipped".into(),
            }
        );
        Ok((if sphere_ok { 0 } else { 4 }, summary))
    })
}

/// Convergence study of the default manufactured solution starting at
/// `mesh.n`.
pub fn cmd_mms(cfg: &RunConfig) -> Result<RunOutcome> {
    run(cfg, "mms", |dir| {
        let MeshSpec::UnitSquare(n0) = cfg.mesh else {
            return Err(Error::Config("mms needs a unit-square mesh (mesh.n)".into()));
        };
        let opts = solver_options(cfg, 0.0, 1.0);
        let table = convergence_study(&Benchmark::default(), &cfg.params, n0, cfg.mms_levels, &opts)?;
        fs::write(dir.join("rates.csv"), table.to_csv())?;
        write_json(&dir.join("rates.json"), &table)?;
        let o = table.last_orders().expect("at least two levels");
        let ok = [o.u_h1, o.p_l2, o.s_h1].iter().all(|v| v.is_none_or(|v| v >= MIN_ORDER));
        let fmt = |v: Option<f64>| v.map_or("saturated".into(), |v| format!("{v:.3}"));
        let summary = format!("orders u_H1 {} | p_L2 {} | s_H1 {}", fmt(o.u_h1), fmt(o.p_l2), fmt(o.s_h1));
        Ok((if ok { 0 } else { 4 }, summary))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutput {
    pub constants: Constants,
    pub uniqueness: UniquenessFragment,
    pub probe: ProbeReport,
    /// Pairwise distance accepted as coincident.
    pub tolerance: f64,
    pub coincident: bool,
}

pub fn cmd_probe(cfg: &RunConfig) -> Result<RunOutcome> {
    run(cfg, "probe", |dir| {
        let pr = prepare(cfg)?;
        let p = &cfg.params;
        let constants = Constants::evaluate(p, pr.c_omega.value, pr.f_norm_h)?;
        let uniqueness = uniqueness_certificate(p, pr.c_omega.value, constants.c2);
        // with f = 0 the ball collapses to a point; probe a small one instead
        let radius = cfg.probe_radius.unwrap_or(if constants.c2 > 0.0 { constants.c2 } else { 0.1 });
        let pc = ProbeConfig {
            n_starts: cfg.probe_starts,
            seed: cfg.seed,
            radius,
            small_root: Some(constants.c2),
            solver: solver_options(cfg, constants.c1, constants.c2),
        };
        let probe = multistart_uniqueness_probe(p, &pr.forcing, &pr.sp, &pc)?;
        let tolerance = if pr.forcing.is_zero() { 1e-12 } else { 1e-8 * (1.0 + probe.max_norm) };
        let coincident = !probe.excluded && probe.max_distance <= tolerance;
        let summary = format!(
            "starts {} | max distance {:.3e} (tol {:.1e}) | uniqueness_ok {} | coincident {}",
            probe.starts.len(),
            probe.max_distance,
            tolerance,
            uniqueness.uniqueness_ok,
            coincident
        );
        let violated = uniqueness.uniqueness_ok && !coincident;
        write_json(&dir.join("probe.json"), &ProbeOutput { constants, uniqueness, probe, tolerance, coincident })?;
        Ok((if violated { 4 } else { 0 }, summary))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::config::{ForcingSpec, Preset};

    fn config(dir: &Path) -> RunConfig {
        let mut cfg = RunConfig { mesh: MeshSpec::UnitSquare(3), sphere_samples: 10, ..Default::default() };
        cfg.output.dir = dir.to_path_buf();
        cfg
    }

    #[test]
    fn sweep_over_we_switches_once() {
        let p = FluidParams::new(1.0, 0.0, 0.5, 1.0, 0.1).unwrap();
        let axes = crate::io::config::parse_sweep("we=0:20:41").unwrap();
        let rows = region_sweep(&p, 1.0, 0.1, &axes).unwrap();
        assert_eq!(rows.len(), 41);
        let flips = rows.windows(2).filter(|w| w[0].existence_ok != w[1].existence_ok).count();
        assert_eq!(flips, 1);
        assert!(rows[0].existence_ok && !rows[40].existence_ok);
        assert!(rows.iter().all(|r| r.existence_ok == (r.c1 <= 1.0) && r.existence_ok == r.c2.is_some()));
        assert_eq!(sweep_csv(&rows).lines().count(), 42);
    }

    #[test]
    fn zero_target_norm_gives_zero_forcing() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config(dir.path());
        cfg.forcing.target_norm = Some(0.0);
        let sp = FunctionSpaces::new(unit_square_mesh(2).unwrap());
        let (f, n) = scaled_forcing(&cfg, &sp).unwrap();
        assert!(f.is_zero() && n == 0.0);
        cfg.forcing.spec = ForcingSpec::Preset(Preset::Zero);
        cfg.forcing.target_norm = Some(0.1);
        assert!(matches!(scaled_forcing(&cfg, &sp), Err(Error::Config(_))));
    }

    #[test]
    fn solve_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config(dir.path());
        cfg.output.vtk = true;
        let out = cmd_solve(&cfg).unwrap();
        assert_eq!(out.exit_code, 0, "{}", out.summary);
        for f in ["config.txt", "report.json", "certificate.json", "fields.csv", "fields.vtk"] {
            assert!(out.run_dir.join(f).is_file(), "{f}");
        }
        let echoed = RunConfig::parse(&fs::read_to_string(out.run_dir.join("config.txt")).unwrap()).unwrap();
        assert_eq!(echoed, cfg);
    }

    #[test]
    fn solve_failure_maps_to_exit_three() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config(dir.path());
        cfg.solver.max_iter = 1;
        cfg.solver.tol = 1e-300;
        let out = cmd_solve(&cfg).unwrap();
        assert_eq!(out.exit_code, 3, "{}", out.summary);
        assert!(out.run_dir.join("error.txt").is_file());
    }
}
