//! Drives a full `solve` from a configuration text, the same path the
//! `oldroyd` binary takes.

use oldroyd::io::{cmd_solve, RunConfig};

const CONFIG: &str = "\
params.re = 1
params.we = 0.05
params.a = 1
params.diff = 0.5
forcing.fx = sin(pi * y) * x
forcing.fy = -cos(pi * x) * y^2
forcing.target_norm = 0.05
mesh.n = 8
output.vtk = true
";

fn main() -> oldroyd::Result<()> {
    let mut cfg = RunConfig::parse(CONFIG)?;
    cfg.output.dir = std::env::temp_dir().join("oldroyd-runs");
    let out = cmd_solve(&cfg)?;
    println!("{}", out.summary);
    println!("exit code {}, artifacts in {}", out.exit_code, out.run_dir.display());
    Ok(())
}
