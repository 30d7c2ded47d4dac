//! Finite element discretization: quadrature, shape functions, sparse
//! algebra, spaces, assembly, norms and the discrete residual maps.

pub mod assembly;
pub mod element;
pub mod norms;
pub mod pk;
pub mod quadrature;
pub mod sparse;
pub mod spaces;

pub use assembly::{assemble_convection, assemble_g_a, assemble_stokes_blocks, assemble_stress_blocks, forcing_load, StokesBlocks, StressBlocks};
pub use spaces::{Forcing, FunctionSpaces, State, StressSource};
pub use sparse::{CsrMatrix, LuSolver, TripletBuilder};
