//! Estimates the discrete Sobolev constant `||tau||_L4 <= C ||tau||_W` on
//! a sequence of unit-square meshes.

use oldroyd::certify::{estimate_c_omega, COmegaOptions};
use oldroyd::fem::FunctionSpaces;
use oldroyd::mesh::unit_square_mesh;

fn main() -> oldroyd::Result<()> {
    println!("{:>4} {:>14} {:>14} {:>14}  iterations", "n", "C_omega_h", "scalar", "audit");
    for n in [2, 4, 8, 16] {
        let sp = FunctionSpaces::new(unit_square_mesh(n)?);
        let est = estimate_c_omega(&sp, &COmegaOptions::default())?;
        println!(
            "{n:>4} {:>14.10} {:>14.10} {:>14.10}  {:?}",
            est.value, est.scalar_ratio, est.audit_max_ratio, est.ascent_iterations
        );
    }
    Ok(())
}
