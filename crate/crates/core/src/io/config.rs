//! Run configuration: flat `key = value` text with dotted keys.
//!
//! ```text
//! # small-data cavity
//! params.re = 1
//! params.we = 0.05
//! forcing.preset = rotation
//! forcing.target_norm = 0.1
//! mesh.n = 16
//! ```
//!
//! Unknown keys are rejected. Missing keys keep their defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::expr::Expr;
use crate::error::{Error, Result};
use crate::fem::Forcing;
use crate::model::FluidParams;
use crate::solver::LinearSolver;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Zero,
    /// `f = (-(y - 1/2), x - 1/2)`, a rigid rotation about the centre.
    Rotation,
    /// `f = (1, 0)`.
    Constant,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::Zero => "zero",
            Preset::Rotation => "rotation",
            Preset::Constant => "constant",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingSpec {
    Preset(Preset),
    Expr { fx: String, fy: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForcingConfig {
    pub spec: ForcingSpec,
    pub scale: f64,
    /// When set, the forcing is rescaled so that its discrete H^-1 norm
    /// equals this value (after `scale`).
    pub target_norm: Option<f64>,
}

impl ForcingConfig {
    /// The forcing with `scale` applied; `target_norm` needs a mesh and is
    /// handled by the command pipeline.
    pub fn build(&self) -> Result<Forcing> {
        let f = match &self.spec {
            ForcingSpec::Preset(Preset::Zero) => Forcing::zero(),
            ForcingSpec::Preset(Preset::Rotation) => Forcing::from_fn(|x, y| [-(y - 0.5), x - 0.5]),
            ForcingSpec::Preset(Preset::Constant) => Forcing::constant(1.0, 0.0),
            ForcingSpec::Expr { fx, fy } => {
                let (ex, ey) = (Expr::parse(fx)?, Expr::parse(fy)?);
                Forcing::from_fn(move |x, y| [ex.eval(x, y), ey.eval(x, y)])
            }
        };
        Ok(f.scaled(self.scale))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshSpec {
    UnitSquare(usize),
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relaxation {
    /// Picked from `C_(I),h`.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Zero,
    Random { scale: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub relaxation: Relaxation,
    pub tol: f64,
    pub max_iter: usize,
    pub initial: InitialKind,
    pub linear: LinearSolver,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { relaxation: Relaxation::Auto, tol: 1e-10, max_iter: 200, initial: InitialKind::Zero, linear: LinearSolver::Direct }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub vtk: bool,
}

/// One axis of a certificate sweep: `count` values from `start` to `stop`
/// inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub key: SweepKey,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKey {
    Re,
    We,
    /// Multiplier on the forcing.
    Scale,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        (0..self.count).map(|k| self.start + (self.stop - self.start) * k as f64 / (self.count - 1) as f64).collect()
    }
}

/// Parses `we=0.01:0.2:20` or a comma-separated list of such axes.
pub fn parse_sweep(s: &str) -> Result<Vec<SweepAxis>> {
    let bad = || Error::Config(format!("bad sweep {s:?}, expected e.g. we=0.01:0.2:20"));
    let mut axes = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, range) = part.split_once('=').ok_or_else(bad)?;
        let key = match key.trim() {
            "re" => SweepKey::Re,
            "we" => SweepKey::We,
            "scale" => SweepKey::Scale,
            other => return Err(Error::Config(format!("unknown sweep key {other:?}, expected re, we or scale"))),
        };
        let bits: Vec<&str> = range.split(':').map(str::trim).collect();
        let [a, b, c] = bits[..] else { return Err(bad()) };
        let start: f64 = a.parse().map_err(|_| bad())?;
        let stop: f64 = b.parse().map_err(|_| bad())?;
        let count: usize = c.parse().map_err(|_| bad())?;
        if count == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        if axes.iter().any(|x: &SweepAxis| x.key == key) {
            return Err(Error::Config(format!("sweep key repeated in {s:?}")));
        }
        axes.push(SweepAxis { key, start, stop, count });
    }
    if axes.is_empty() {
        return Err(bad());
    }
    Ok(axes)
}

fn format_sweep(axes: &[SweepAxis]) -> String {
    axes.iter()
        .map(|a| {
            let k = match a.key {
                SweepKey::Re => "re",
                SweepKey::We => "we",
                SweepKey::Scale => "scale",
            };
            format!("{k}={:?}:{:?}:{}", a.start, a.stop, a.count)
        })
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: FluidParams,
    pub forcing: ForcingConfig,
    pub mesh: MeshSpec,
    pub solver: SolverConfig,
    pub output: OutputConfig,
    pub seed: u64,
    /// Refinement levels of `mms`, starting at `mesh.n`.
    pub mms_levels: usize,
    pub probe_starts: usize,
    /// Start radius of the probe; defaults to `C_(II),h` (or 0.1 when that
    /// is zero).
    pub probe_radius: Option<f64>,
    pub sphere_samples: usize,
    pub sweep: Option<Vec<SweepAxis>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: FluidParams::new(1.0, 0.05, 0.5, 1.0, 1.0).expect("valid defaults"),
            forcing: ForcingConfig { spec: ForcingSpec::Preset(Preset::Rotation), scale: 1.0, target_norm: Some(0.1) },
            mesh: MeshSpec::UnitSquare(8),
            solver: SolverConfig::default(),
            output: OutputConfig { dir: PathBuf::from("runs"), vtk: false },
            seed: 0,
            mms_levels: 3,
            probe_starts: 5,
            probe_radius: None,
            sphere_samples: 100,
            sweep: None,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got {v:?}"))),
    }
}

fn optional(v: &str) -> Option<&str> {
    (v != "none").then_some(v)
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let d = cfg.params;
        let (mut re, mut we, mut r, mut a, mut diff) = (d.re(), d.we(), d.r(), d.a(), d.diff());
        let (mut preset, mut fx, mut fy) = (None, None, None);
        let (mut mesh_n, mut mesh_file) = (None, None);
        let mut random_scale = None;
        let mut initial = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got {raw:?}", lineno + 1)))?;
            let (key, v) = (key.trim(), value.trim());
            match key {
                "params.re" => re = num(key, v)?,
                "params.we" => we = num(key, v)?,
                "params.r" => r = num(key, v)?,
                "params.a" => a = num(key, v)?,
                "params.diff" => diff = num(key, v)?,
                "forcing.preset" => {
                    preset = Some(match v {
                        "zero" => Preset::Zero,
                        "rotation" => Preset::Rotation,
                        "constant" => Preset::Constant,
                        _ => return Err(Error::Config(format!("unknown forcing preset {v:?}"))),
                    })
                }
                "forcing.fx" => fx = Some(v.to_string()),
                "forcing.fy" => fy = Some(v.to_string()),
                "forcing.scale" => cfg.forcing.scale = num(key, v)?,
                "forcing.target_norm" => cfg.forcing.target_norm = optional(v).map(|v| num(key, v)).transpose()?,
                "mesh.n" => mesh_n = Some(num::<usize>(key, v)?),
                "mesh.file" => mesh_file = Some(PathBuf::from(v)),
                "solver.relaxation" => {
                    cfg.solver.relaxation = if v == "auto" { Relaxation::Auto } else { Relaxation::Fixed(num(key, v)?) };
                }
                "solver.tol" => cfg.solver.tol = num(key, v)?,
                "solver.max_iter" => cfg.solver.max_iter = num(key, v)?,
                "solver.initial" => initial = Some(v.to_string()),
                "solver.initial_scale" => random_scale = Some(num::<f64>(key, v)?),
                "solver.linear" => {
                    cfg.solver.linear = match v {
                        "direct" => LinearSolver::Direct,
                        "lagged" => LinearSolver::Lagged,
                        _ => return Err(Error::Config(format!("solver.linear: expected direct or lagged, got {v:?}"))),
                    }
                }
                "output.dir" => cfg.output.dir = PathBuf::from(v),
                "output.vtk" => cfg.output.vtk = boolean(key, v)?,
                "seed" => cfg.seed = num(key, v)?,
                "mms.levels" => cfg.mms_levels = num(key, v)?,
                "probe.starts" => cfg.probe_starts = num(key, v)?,
                "probe.radius" => cfg.probe_radius = optional(v).map(|v| num(key, v)).transpose()?,
                "certify.samples" => cfg.sphere_samples = num(key, v)?,
                "certify.sweep" => cfg.sweep = optional(v).map(parse_sweep).transpose()?,
                _ => return Err(Error::Config(format!("line {}: unknown key {key:?}", lineno + 1))),
            }
        }
        cfg.params = FluidParams::new(re, we, r, a, diff)?;
        cfg.forcing.spec = match (preset, fx, fy) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(Error::Config("give either forcing.preset or forcing.fx/fy, not both".into()))
            }
            (_, Some(fx), Some(fy)) => ForcingSpec::Expr { fx, fy },
            (_, Some(_), None) | (_, None, Some(_)) => {
                return Err(Error::Config("forcing.fx and forcing.fy must be given together".into()))
            }
            (Some(p), None, None) => ForcingSpec::Preset(p),
            (None, None, None) => cfg.forcing.spec,
        };
        cfg.mesh = match (mesh_n, mesh_file) {
            (Some(_), Some(_)) => return Err(Error::Config("give either mesh.n or mesh.file, not both".into())),
            (Some(n), None) => MeshSpec::UnitSquare(n),
            (None, Some(f)) => MeshSpec::File(f),
            (None, None) => cfg.mesh,
        };
        cfg.solver.initial = match (initial.as_deref(), random_scale) {
            (None | Some("zero"), None) => InitialKind::Zero,
            (Some("random"), s) => InitialKind::Random { scale: s.unwrap_or(1.0) },
            (Some("zero") | None, Some(_)) => {
                return Err(Error::Config("solver.initial_scale needs solver.initial = random".into()))
            }
            (Some(v), _) => return Err(Error::Config(format!("solver.initial: expected zero or random, got {v:?}"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks value ranges and that referenced files exist.
    pub fn validate(&self) -> Result<()> {
        if let ForcingSpec::Expr { fx, fy } = &self.forcing.spec {
            Expr::parse(fx)?;
            Expr::parse(fy)?;
        }
        if !self.forcing.scale.is_finite() {
            return Err(Error::Config("forcing.scale must be finite".into()));
        }
        if let Some(t) = self.forcing.target_norm {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Config(format!("forcing.target_norm must be >= 0, got {t}")));
            }
        }
        match &self.mesh {
            MeshSpec::UnitSquare(0) => return Err(Error::Config("mesh.n must be positive".into())),
            MeshSpec::File(p) if !p.is_file() => {
                return Err(Error::Config(format!("mesh file {} does not exist", p.display())))
            }
            _ => {}
        }
        if let Relaxation::Fixed(t) = self.solver.relaxation {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Config(format!("solver.relaxation must lie in (0, 1], got {t}")));
            }
        }
        if !(self.solver.tol.is_finite() && self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return Err(Error::Config("solver.tol and solver.max_iter must be positive".into()));
        }
        if self.mms_levels < 2 {
            return Err(Error::Config("mms.levels must be at least 2".into()));
        }
        if self.probe_starts < 2 {
            return Err(Error::Config("probe.starts must be at least 2".into()));
        }
        if let Some(r) = self.probe_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("probe.radius must be positive, got {r}")));
            }
        }
        Ok(())
    }

    /// Text form accepted by [`RunConfig::parse`]; floats are written in
    /// shortest round-trip form.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut lines = vec![
            format!("params.re = {:?}", p.re()),
            format!("params.we = {:?}", p.we()),
            format!("params.r = {:?}", p.r()),
            format!("params.a = {:?}", p.a()),
            format!("params.diff = {:?}", p.diff()),
        ];
        match &self.forcing.spec {
            ForcingSpec::Preset(pr) => lines.push(format!("forcing.preset = {}", pr.name())),
            ForcingSpec::Expr { fx, fy } => {
                lines.push(format!("forcing.fx = {fx}"));
                lines.push(format!("forcing.fy = {fy}"));
            }
        }
        lines.push(format!("forcing.scale = {:?}", self.forcing.scale));
        lines.push(match self.forcing.target_norm {
            Some(t) => format!("forcing.target_norm = {t:?}"),
            None => "forcing.target_norm = none".into(),
        });
        lines.push(match &self.mesh {
            MeshSpec::UnitSquare(n) => format!("mesh.n = {n}"),
            MeshSpec::File(f) => format!("mesh.file = {}", f.display()),
        });
        let s = &self.solver;
        lines.push(match s.relaxation {
            Relaxation::Auto => "solver.relaxation = auto".into(),
            Relaxation::Fixed(t) => format!("solver.relaxation = {t:?}"),
        });
        lines.push(format!("solver.tol = {:?}", s.tol));
        lines.push(format!("solver.max_iter = {}", s.max_iter));
        match s.initial {
            InitialKind::Zero => lines.push("solver.initial = zero".into()),
            InitialKind::Random { scale } => {
                lines.push("solver.initial = random".into());
                lines.push(format!("solver.initial_scale = {scale:?}"));
            }
        }
        lines.push(format!(
            "solver.linear = {}",
            match s.linear {
                LinearSolver::Direct => "direct",
                LinearSolver::Lagged => "lagged",
            }
        ));
        lines.push(format!("output.dir = {}", self.output.dir.display()));
        lines.push(format!("output.vtk = {}", self.output.vtk));
        lines.push(format!("seed = {}", self.seed));
        lines.push(format!("mms.levels = {}", self.mms_levels));
        lines.push(format!("probe.starts = {}", self.probe_starts));
        lines.push(match self.probe_radius {
            Some(r) => format!("probe.radius = {r:?}"),
            None => "probe.radius = none".into(),
        });
        lines.push(format!("certify.samples = {}", self.sphere_samples));
        lines.push(match &self.sweep {
            Some(axes) => format!("certify.sweep = {}", format_sweep(axes)),
            None => "certify.sweep = none".into(),
        });
        lines.join("\n") + "\n"
    }
}
