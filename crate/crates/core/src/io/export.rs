//! Field export at the P2 nodes: CSV always, legacy VTK text optionally.

use std::io::Write;

use crate::error::Result;
use crate::fem::{FunctionSpaces, State};

/// Pressure at every P2 node: vertex values as stored, midpoint values as
/// the average of the edge endpoints (exact for P1).
pub fn pressure_at_nodes(sp: &FunctionSpaces, state: &State) -> Vec<f64> {
    let nv = sp.mesh().num_vertices();
    let mut out = vec![0.0; sp.n_scalar()];
    out[..nv].copy_from_slice(&state.p[..nv]);
    for cell in sp.cells() {
        for k in 0..3 {
            // local midpoint 3 + k sits opposite vertex k
            let (a, b) = (cell[(k + 1) % 3], cell[(k + 2) % 3]);
            out[cell[3 + k]] = 0.5 * (state.p[a] + state.p[b]);
        }
    }
    out
}

pub fn write_csv<W: Write>(sp: &FunctionSpaces, state: &State, mut w: W) -> Result<()> {
    let n = sp.n_scalar();
    let p = pressure_at_nodes(sp, state);
    writeln!(w, "x,y,u1,u2,p,s11,s12,s22")?;
    for (i, &[x, y]) in sp.nodes().iter().enumerate() {
        writeln!(
            w,
            "{x:.17e},{y:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            state.u[i],
            state.u[n + i],
            p[i],
            state.s[i],
            state.s[n + i],
            state.s[2 * n + i]
        )?;
    }
    Ok(())
}

/// Legacy VTK unstructured grid with quadratic triangles (cell type 22).
pub fn write_vtk<W: Write>(sp: &FunctionSpaces, state: &State, mut w: W) -> Result<()> {
    let n = sp.n_scalar();
    let p = pressure_at_nodes(sp, state);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "oldroyd solution")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {n} double")?;
    for &[x, y] in sp.nodes() {
        writeln!(w, "{x:e} {y:e} 0")?;
    }
    let cells = sp.cells();
    writeln!(w, "CELLS {} {}", cells.len(), 7 * cells.len())?;
    for c in cells {
        // VTK order: vertices, then midpoints of edges 01, 12, 20
        writeln!(w, "6 {} {} {} {} {} {}", c[0], c[1], c[2], c[5], c[3], c[4])?;
    }
    writeln!(w, "CELL_TYPES {}", cells.len())?;
    for _ in cells {
        writeln!(w, "22")?;
    }
    writeln!(w, "POINT_DATA {n}")?;
    writeln!(w, "VECTORS velocity double")?;
    for i in 0..n {
        writeln!(w, "{:e} {:e} 0", state.u[i], state.u[n + i])?;
    }
    let scalar = |w: &mut W, name: &str, vals: &[f64]| -> Result<()> {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in vals {
            writeln!(w, "{v:e}")?;
        }
        Ok(())
    };
    scalar(&mut w, "pressure", &p)?;
    scalar(&mut w, "s11", &state.s[..n])?;
    scalar(&mut w, "s12", &state.s[n..2 * n])?;
    scalar(&mut w, "s22", &state.s[2 * n..])?;
    Ok(())
}
