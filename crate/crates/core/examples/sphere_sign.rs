//! Sign of the Galerkin pairing on spheres of growing radius: nonnegative
//! on the sphere of radius C_(II),h, possibly negative inside it.

use oldroyd::certify::{estimate_c_omega, sphere_sign_test_at, COmegaOptions};
use oldroyd::fem::norms::h_minus1_norm;
use oldroyd::fem::{Forcing, FunctionSpaces};
use oldroyd::mesh::unit_square_mesh;
use oldroyd::model::{Constants, FluidParams};

fn main() -> oldroyd::Result<()> {
    let sp = FunctionSpaces::new(unit_square_mesh(6)?);
    let p = FluidParams::new(1.0, 0.05, 0.5, 1.0, 0.5)?;
    let base = Forcing::from_fn(|x, y| [-(y - 0.5), x - 0.5]);
    let f = base.scaled(0.1 / h_minus1_norm(&sp, &base)?);
    let c = estimate_c_omega(&sp, &COmegaOptions::default())?.value;
    let k = Constants::evaluate(&p, c, 0.1)?;
    println!("C_II,h = {:.6}, large root {:.4}", k.c2, k.large_root());
    println!("{:>10} {:>14} {:>14}", "radius", "min pairing", "lower bound");
    for t in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let radius = t * k.c2;
        let rep = sphere_sign_test_at(&sp, &p, &f, radius, 50, 4)?;
        println!("{radius:>10.5} {:>14.6e} {:>14.6e}", rep.min_pairing, k.pairing_lower_bound(radius));
    }
    Ok(())
}
