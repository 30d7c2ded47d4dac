//! Manufactured-solution convergence study on the unit square in the
//! nonlinear small-data regime.

use oldroyd::model::FluidParams;
use oldroyd::solver::SolverOptions;
use oldroyd::verify::{convergence_study, Benchmark};

fn main() -> oldroyd::Result<()> {
    let p = FluidParams::new(1.0, 0.05, 0.5, 1.0, 0.1)?;
    let opts = SolverOptions { tol: 1e-11, ..Default::default() };
    let table = convergence_study(&Benchmark::default(), &p, 8, 3, &opts)?;
    print!("{}", table.to_csv());
    Ok(())
}
