//! Discrete dual norm of a constant body force against its sine-series
//! value under refinement.

use std::f64::consts::PI;

use oldroyd::fem::norms::h_minus1_norm;
use oldroyd::fem::{Forcing, FunctionSpaces};
use oldroyd::mesh::unit_square_mesh;

fn main() -> oldroyd::Result<()> {
    // inner odd sum in closed form, see the acceptance test
    let series: f64 = (1..100_001)
        .step_by(2)
        .map(|m| {
            let m = m as f64;
            64.0 / (PI.powi(6) * m.powi(4)) * (PI * PI / 8.0 - PI * (PI * m / 2.0).tanh() / (4.0 * m))
        })
        .sum::<f64>()
        .sqrt();
    println!("series value {series:.10}");
    for n in [4, 8, 16, 32, 64] {
        let sp = FunctionSpaces::new(unit_square_mesh(n)?);
        let h = h_minus1_norm(&sp, &Forcing::constant(1.0, 0.0))?;
        println!("n = {n:>3}: {h:.10}  rel. gap {:.3e}", (series - h) / series);
    }
    Ok(())
}
