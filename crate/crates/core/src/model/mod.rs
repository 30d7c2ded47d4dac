//! Parameters, pointwise tensor algebra and the closed-form constants.

mod constants;
mod params;
mod tensor;

pub use constants::{
    c2_closed_form, c2_quadratic_root, compute_c1, compute_c2, constants_abc, uniqueness_ab, Constants,
    SecondConstant, UniquenessCoefficients, UniquenessSplit, RE_ZERO_THRESHOLD,
};
pub use params::FluidParams;
pub use tensor::{eval_g_a, sym_skew_parts, Mat2, SymMat2};
