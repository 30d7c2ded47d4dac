//! Existence and uniqueness verdicts over a grid of Weissenberg numbers
//! and forcing scales, without solving.

use oldroyd::certify::{estimate_c_omega, COmegaOptions};
use oldroyd::fem::norms::h_minus1_norm;
use oldroyd::fem::{Forcing, FunctionSpaces};
use oldroyd::io::commands::{region_sweep, sweep_csv};
use oldroyd::io::config::parse_sweep;
use oldroyd::mesh::unit_square_mesh;
use oldroyd::model::FluidParams;

fn main() -> oldroyd::Result<()> {
    let sp = FunctionSpaces::new(unit_square_mesh(8)?);
    let f_norm = h_minus1_norm(&sp, &Forcing::from_fn(|x, y| [-(y - 0.5), x - 0.5]))?;
    let c = estimate_c_omega(&sp, &COmegaOptions::default())?.value;
    let p = FluidParams::new(0.5, 0.0, 0.5, 1.0, 0.5)?;
    let rows = region_sweep(&p, c, f_norm, &parse_sweep("we=0:2:9,scale=0.5:4:3")?)?;
    print!("{}", sweep_csv(&rows));
    Ok(())
}
