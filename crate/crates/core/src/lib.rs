//! Galerkin solver and well-posedness certificates for the stationary
//! Oldroyd model with diffusive stress on 2D polygonal domains.

#![allow(clippy::needless_range_loop)]

pub mod certify;
pub mod error;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod model;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
