//! Solves the rotation-driven cavity in the small-data regime and checks
//! the computed state against the energy bound.

use oldroyd::certify::{energy_certificate, estimate_c_omega, COmegaOptions};
use oldroyd::fem::norms::h_minus1_norm;
use oldroyd::fem::{Forcing, FunctionSpaces};
use oldroyd::mesh::unit_square_mesh;
use oldroyd::model::{compute_c1, Constants, FluidParams};
use oldroyd::solver::{fix_pressure_mean, solve_picard, SolverOptions};

fn main() -> oldroyd::Result<()> {
    let sp = FunctionSpaces::new(unit_square_mesh(16)?);
    let p = FluidParams::new(1.0, 0.05, 0.5, 1.0, 0.5)?;
    let rotation = Forcing::from_fn(|x, y| [-(y - 0.5), x - 0.5]);
    let f = rotation.scaled(0.1 / h_minus1_norm(&sp, &rotation)?);
    let f_norm = h_minus1_norm(&sp, &f)?;
    let c = estimate_c_omega(&sp, &COmegaOptions::default())?.value;
    let c1 = compute_c1(&p, c, f_norm);
    let k = Constants::evaluate(&p, c, f_norm)?;

    let opts = SolverOptions {
        relaxation: SolverOptions::default_relaxation(c1),
        reference_radius: k.c2,
        ..Default::default()
    };
    let (state, report) = solve_picard(&p, &f, &sp, &opts)?;
    let state = fix_pressure_mean(&state, &sp);
    println!("iteration  momentum residual  stress residual");
    for (i, (m, s)) in report.residual_history.iter().enumerate() {
        println!("{:>9}  {m:>17.3e}  {s:>15.3e}", i + 1);
    }
    let cert = energy_certificate(&sp, &p, &state, c, f_norm)?;
    println!("C_I,h = {:.4e}, C_II,h = {:.6}", cert.constants.c1, cert.constants.c2);
    println!("|xi|_X = {:.6} ({:?}), bound_ok = {}", cert.xi_norm, cert.branch, cert.bound_ok);
    println!("|u|_V = {:.6}, |sigma|_W = {:.6}", report.final_norms.u_v, report.final_norms.sigma_w);
    Ok(())
}
