//! Builds the structured unit-square mesh, refines it uniformly and writes
//! the finest level in the plain-text mesh format.

use oldroyd::fem::FunctionSpaces;
use oldroyd::mesh::{unit_square_mesh, write_mesh};

fn main() -> oldroyd::Result<()> {
    let mut mesh = unit_square_mesh(2)?;
    println!("{:>6} {:>10} {:>10} {:>12} {:>12}  area", "level", "triangles", "P2 nodes", "h", "min angle");
    for level in 0..5 {
        let sp = FunctionSpaces::new(mesh.clone());
        println!(
            "{level:>6} {:>10} {:>10} {:>12.6} {:>12.4}  {:.15}",
            mesh.num_triangles(),
            sp.n_scalar(),
            mesh.h(),
            mesh.min_angle().to_degrees(),
            mesh.total_area()
        );
        mesh = mesh.refine_uniform();
    }
    let path = std::env::temp_dir().join("unit_square_refined.mesh");
    write_mesh(&mesh, std::fs::File::create(&path)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
