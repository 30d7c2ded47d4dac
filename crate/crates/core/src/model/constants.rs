//! Closed-form constants of the existence and uniqueness theory.
//!
//! With `X`-norm `|xi|_X^2 = 2r |u|_V^2 + |sigma|_W^2` the energy pairing of
//! the Galerkin map satisfies
//! `(P(xi), xi) >= |xi| (-alpha |xi|^2 + beta |xi| - gamma)` and everything
//! here is read off that cubic.

use serde::{Deserialize, Serialize};

use super::params::FluidParams;
use crate::error::{Error, Result};

/// Below this Reynolds number the uniqueness split switches to the
/// Re-free Young inequality.
pub const RE_ZERO_THRESHOLD: f64 = 1e-12;

/// Returns `(alpha, beta, gamma)`.
pub fn constants_abc(p: &FluidParams, c_omega: f64, f_norm: f64) -> (f64, f64, f64) {
    let alpha = std::f64::consts::SQRT_2 * p.a().abs() * c_omega * c_omega * p.we() / p.r().sqrt();
    let beta = p.beta();
    let gamma = (2.0 * p.r()).sqrt() * f_norm;
    (alpha, beta, gamma)
}

/// `C_(I) = 8 |a| C^2 We |f| / min(1 - r, D)^2`.
pub fn compute_c1(p: &FluidParams, c_omega: f64, f_norm: f64) -> f64 {
    let m = p.beta();
    8.0 * p.a().abs() * c_omega * c_omega * p.we() * f_norm / (m * m)
}

/// Value of `C_(II)` together with a flag for the zero-forcing case, where
/// any radius in `(0, beta/alpha)` would do and zero is returned.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondConstant {
    pub value: f64,
    pub degenerate: bool,
}

/// Smaller root of `alpha x^2 - beta x + gamma`, or `gamma / beta` when
/// `alpha = 0`. `None` when the discriminant is negative.
pub fn c2_quadratic_root(alpha: f64, beta: f64, gamma: f64) -> Option<f64> {
    if alpha == 0.0 {
        return Some(gamma / beta);
    }
    let disc = beta * beta - 4.0 * alpha * gamma;
    if disc < 0.0 {
        return None;
    }
    // (beta - sqrt(disc)) / (2 alpha) rationalized
    Some(2.0 * gamma / (beta + disc.sqrt()))
}

/// The closed form `sqrt(2r) min(1-r,D) / (4|a| C^2 We) * (1 - sqrt(1 - C_(I)))`,
/// with its `a = 0` limit `sqrt(2r) |f| / min(1-r,D)`.
pub fn c2_closed_form(p: &FluidParams, c_omega: f64, f_norm: f64) -> Option<f64> {
    let c1 = compute_c1(p, c_omega, f_norm);
    if c1 > 1.0 {
        return None;
    }
    let m = p.beta();
    let denom = 4.0 * p.a().abs() * c_omega * c_omega * p.we();
    if denom == 0.0 {
        return Some((2.0 * p.r()).sqrt() * f_norm / m);
    }
    let one_minus_root = c1 / (1.0 + (1.0 - c1).sqrt());
    Some((2.0 * p.r()).sqrt() * m / denom * one_minus_root)
}

pub fn compute_c2(p: &FluidParams, c_omega: f64, f_norm: f64) -> Result<SecondConstant> {
    let c1 = compute_c1(p, c_omega, f_norm);
    if c1 > 1.0 {
        return Err(Error::C1ExceedsOne { c1 });
    }
    if f_norm == 0.0 {
        return Ok(SecondConstant { value: 0.0, degenerate: true });
    }
    let (alpha, beta, gamma) = constants_abc(p, c_omega, f_norm);
    // c1 <= 1 is equivalent to a nonnegative discriminant; clamp roundoff at c1 = 1
    let value = c2_quadratic_root(alpha, beta, gamma).unwrap_or(beta / (2.0 * alpha));
    Ok(SecondConstant { value, degenerate: false })
}

/// Which Young split produced the uniqueness coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UniquenessSplit {
    /// `3 We sqrt(2r) |u| |s| <= 2r Re |u|^2 + 9 We^2/(4 Re) |s|^2`.
    Reynolds,
    /// Re = 0: the cross term is split against half of the viscous term.
    ReZeroFallback,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessCoefficients {
    pub a: f64,
    pub b: f64,
    pub split: UniquenessSplit,
}

impl UniquenessCoefficients {
    pub fn certifies(&self) -> bool {
        self.a > 0.0 && self.b > 0.0
    }
}

/// Coefficients `A`, `B` of `2r A |u|^2 + B |sigma|^2 <= 0` for the
/// difference of two solutions.
pub fn uniqueness_ab(p: &FluidParams, c_omega: f64, c2: f64) -> UniquenessCoefficients {
    let r = p.r();
    let we = p.we();
    let prefactor = c_omega * c_omega * c2 / (2.0 * r).sqrt();
    let min1d = p.diff().min(1.0);
    if p.re() < RE_ZERO_THRESHOLD {
        let a = 0.5 * (1.0 - r);
        let b = min1d - prefactor * (9.0 * we * we * prefactor / (2.0 * (1.0 - r)) + 2.0 * p.a().abs() * we);
        return UniquenessCoefficients { a, b, split: UniquenessSplit::ReZeroFallback };
    }
    let a = (1.0 - r) - 4.0 * p.re() * prefactor;
    let b = min1d - prefactor * (9.0 * we * we / (4.0 * p.re()) + 2.0 * p.a().abs() * we);
    UniquenessCoefficients { a, b, split: UniquenessSplit::Reynolds }
}

/// All scalar constants of the theory for one parameter point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c_omega: f64,
    pub f_norm: f64,
    pub c1: f64,
    pub c2: f64,
    pub c2_degenerate: bool,
    pub a_coef: f64,
    pub b_coef: f64,
    pub split: UniquenessSplit,
}

impl Constants {
    /// Fails with [`Error::C1ExceedsOne`] past the existence threshold.
    pub fn evaluate(p: &FluidParams, c_omega: f64, f_norm: f64) -> Result<Self> {
        let (alpha, beta, gamma) = constants_abc(p, c_omega, f_norm);
        let c1 = compute_c1(p, c_omega, f_norm);
        let c2 = compute_c2(p, c_omega, f_norm)?;
        let ab = uniqueness_ab(p, c_omega, c2.value);
        Ok(Constants {
            alpha,
            beta,
            gamma,
            c_omega,
            f_norm,
            c1,
            c2: c2.value,
            c2_degenerate: c2.degenerate,
            a_coef: ab.a,
            b_coef: ab.b,
            split: ab.split,
        })
    }

    /// Larger root of the cubic bound; `+inf` when `alpha = 0`.
    pub fn large_root(&self) -> f64 {
        if self.alpha == 0.0 {
            return f64::INFINITY;
        }
        let disc = (self.beta * self.beta - 4.0 * self.alpha * self.gamma).max(0.0);
        (self.beta + disc.sqrt()) / (2.0 * self.alpha)
    }

    /// Lower bound on the energy pairing at radius `x`.
    pub fn pairing_lower_bound(&self, x: f64) -> f64 {
        x * (-self.alpha * x * x + self.beta * x - self.gamma)
    }
}
