//! Pointwise 2x2 tensor algebra: velocity gradients, their symmetric and
//! skew parts, symmetric stresses and the objective coupling `g_a`.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// General 2x2 matrix, row-major. Used for velocity gradients `G[i][j] = d u_i / d x_j`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0; 2]; 2]);
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Mat2([[m11, m12], [m21, m22]])
    }

    pub fn transpose(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let m = &self.0;
        Mat2([[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]])
    }

    /// Frobenius contraction `A : B`.
    pub fn contract(&self, other: &Mat2) -> f64 {
        let (a, b) = (&self.0, &other.0);
        a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.contract(self).sqrt()
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        let mut c = [[0.0; 2]; 2];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, cij) in row.iter_mut().enumerate() {
                *cij = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(c)
    }
}

/// Symmetric 2x2 tensor, the off-diagonal entry stored once.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMat2 {
    pub const ZERO: SymMat2 = SymMat2 { xx: 0.0, xy: 0.0, yy: 0.0 };
    pub const IDENTITY: SymMat2 = SymMat2 { xx: 1.0, xy: 0.0, yy: 1.0 };

    /// Frobenius weights of the stored components `(xx, xy, yy)`.
    pub const WEIGHTS: [f64; 3] = [1.0, 2.0, 1.0];

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        SymMat2 { xx, xy, yy }
    }

    pub fn from_components(c: [f64; 3]) -> Self {
        SymMat2 { xx: c[0], xy: c[1], yy: c[2] }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.xx, self.xy, self.yy]
    }

    /// Unit basis tensor for stored component `c` (0 = xx, 1 = xy, 2 = yy).
    pub fn basis(c: usize) -> SymMat2 {
        let mut v = [0.0; 3];
        v[c] = 1.0;
        SymMat2::from_components(v)
    }

    pub fn to_mat(&self) -> Mat2 {
        Mat2::new(self.xx, self.xy, self.xy, self.yy)
    }

    pub fn contract(&self, o: &SymMat2) -> f64 {
        self.xx * o.xx + 2.0 * self.xy * o.xy + self.yy * o.yy
    }

    pub fn contract_mat(&self, m: &Mat2) -> f64 {
        let g = &m.0;
        self.xx * g[0][0] + self.xy * (g[0][1] + g[1][0]) + self.yy * g[1][1]
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.contract(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> SymMat2 {
        SymMat2 { xx: s * self.xx, xy: s * self.xy, yy: s * self.yy }
    }
}

impl Add for SymMat2 {
    type Output = SymMat2;
    fn add(self, o: SymMat2) -> SymMat2 {
        SymMat2 { xx: self.xx + o.xx, xy: self.xy + o.xy, yy: self.yy + o.yy }
    }
}

impl Sub for SymMat2 {
    type Output = SymMat2;
    fn sub(self, o: SymMat2) -> SymMat2 {
        SymMat2 { xx: self.xx - o.xx, xy: self.xy - o.xy, yy: self.yy - o.yy }
    }
}

/// Splits `G` into its symmetric part `D = (G + G^T)/2` and skew part
/// `W = (G - G^T)/2`.
pub fn sym_skew_parts(g: &Mat2) -> (SymMat2, Mat2) {
    let m = &g.0;
    let off_sym = 0.5 * (m[0][1] + m[1][0]);
    let off_skew = 0.5 * (m[0][1] - m[1][0]);
    (
        SymMat2::new(m[0][0], off_sym, m[1][1]),
        Mat2::new(0.0, off_skew, -off_skew, 0.0),
    )
}

/// `g_a(G, S) = W S - S W + a (D S + S D)` with `D`, `W` the symmetric and
/// skew parts of `G`.
///
/// Evaluated in closed form on the stored components so the result is
/// symmetric by construction.
pub fn eval_g_a(g: &Mat2, s: &SymMat2, a: f64) -> SymMat2 {
    let (d, w) = sym_skew_parts(g);
    let w = w.0[0][1];
    let (p, q, t) = (s.xx, s.xy, s.yy);
    SymMat2 {
        xx: 2.0 * w * q + 2.0 * a * (d.xx * p + d.xy * q),
        xy: w * (t - p) + a * ((d.xx + d.yy) * q + d.xy * (p + t)),
        yy: -2.0 * w * q + 2.0 * a * (d.xy * q + d.yy * t),
    }
}
