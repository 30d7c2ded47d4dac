use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the diffusive Oldroyd model.
///
/// Fields are private so that every value in circulation satisfies
/// `re >= 0`, `we >= 0`, `0 < r < 1`, `|a| <= 1` and `diff > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct FluidParams {
    re: f64,
    we: f64,
    r: f64,
    a: f64,
    diff: f64,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
struct RawParams {
    re: f64,
    we: f64,
    r: f64,
    a: f64,
    diff: f64,
}

impl TryFrom<RawParams> for FluidParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        FluidParams::new(raw.re, raw.we, raw.r, raw.a, raw.diff)
    }
}

impl From<FluidParams> for RawParams {
    fn from(p: FluidParams) -> Self {
        RawParams {
            re: p.re,
            we: p.we,
            r: p.r,
            a: p.a,
            diff: p.diff,
        }
    }
}

impl FluidParams {
    pub fn new(re: f64, we: f64, r: f64, a: f64, diff: f64) -> Result<Self> {
        let check = |ok: bool, msg: String| if ok { Ok(()) } else { Err(Error::InvalidParams(msg)) };
        check(re.is_finite() && re >= 0.0, format!("Reynolds number must be >= 0, got {re}"))?;
        check(we.is_finite() && we >= 0.0, format!("Weissenberg number must be >= 0, got {we}"))?;
        check(r > 0.0 && r < 1.0, format!("r must lie in (0, 1), got {r}"))?;
        check((-1.0..=1.0).contains(&a), format!("a must lie in [-1, 1], got {a}"))?;
        check(diff.is_finite() && diff > 0.0, format!("stress diffusivity must be > 0, got {diff}"))?;
        Ok(FluidParams { re, we, r, a, diff })
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn we(&self) -> f64 {
        self.we
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn diff(&self) -> f64 {
        self.diff
    }

    /// min(1 - r, D), the coercivity constant of the energy pairing.
    pub fn beta(&self) -> f64 {
        (1.0 - self.r).min(self.diff)
    }

    pub fn with_re(self, re: f64) -> Result<Self> {
        Self::new(re, self.we, self.r, self.a, self.diff)
    }

    pub fn with_we(self, we: f64) -> Result<Self> {
        Self::new(self.re, we, self.r, self.a, self.diff)
    }

    pub fn with_a(self, a: f64) -> Result<Self> {
        Self::new(self.re, self.we, self.r, a, self.diff)
    }

    pub fn with_diff(self, diff: f64) -> Result<Self> {
        Self::new(self.re, self.we, self.r, self.a, diff)
    }
}
