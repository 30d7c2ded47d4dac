//! Multi-start probe: random initial states inside the ball of radius
//! C_(II),h all converge to the same discrete solution when A, B > 0.

use oldroyd::certify::{estimate_c_omega, uniqueness_certificate, COmegaOptions};
use oldroyd::fem::norms::h_minus1_norm;
use oldroyd::fem::{Forcing, FunctionSpaces};
use oldroyd::mesh::unit_square_mesh;
use oldroyd::model::{Constants, FluidParams};
use oldroyd::solver::SolverOptions;
use oldroyd::verify::{multistart_uniqueness_probe, ProbeConfig};

fn main() -> oldroyd::Result<()> {
    let sp = FunctionSpaces::new(unit_square_mesh(8)?);
    let p = FluidParams::new(0.0, 0.05, 0.5, 1.0, 1.0)?;
    let base = Forcing::from_fn(|x, y| [-(y - 0.5), x - 0.5]);
    let f = base.scaled(0.1 / h_minus1_norm(&sp, &base)?);
    let c = estimate_c_omega(&sp, &COmegaOptions::default())?.value;
    let k = Constants::evaluate(&p, c, 0.1)?;
    let u = uniqueness_certificate(&p, c, k.c2);
    println!("A = {:.4}, B = {:.4}, regime {:?}", u.a_coef, u.b_coef, u.regime);

    let cfg = ProbeConfig { n_starts: 6, seed: 1, radius: k.c2, small_root: Some(k.c2), solver: SolverOptions::default() };
    let rep = multistart_uniqueness_probe(&p, &f, &sp, &cfg)?;
    for s in &rep.starts {
        println!("start {} |xi0| = {:.4} -> {} iterations, |xi| = {:.8}", s.seed_index, s.start_norm, s.iterations, s.final_norm);
    }
    println!("max pairwise distance {:.3e}, off small root {}", rep.max_distance, rep.off_small_root);
    Ok(())
}
