//! Triangle quadrature exact for polynomials of total degree 9, built as
//! a collapsed (Duffy) product of Gauss-Legendre rules: 6 points along the
//! collapsed direction (the Jacobian adds one degree) and 5 across it.

use std::sync::OnceLock;

/// Point in barycentric coordinates `(l0, l1, l2)` with weight scaled so
/// the weights sum to one (multiply by the triangle area).
#[derive(Clone, Copy, Debug)]
pub struct QuadPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

/// Gauss-Legendre nodes and weights on [0, 1].
fn gauss_legendre_5() -> ([f64; 5], [f64; 5]) {
    let s = (10.0f64 / 7.0).sqrt();
    let x1 = (5.0 - 2.0 * s).sqrt() / 3.0;
    let x2 = (5.0 + 2.0 * s).sqrt() / 3.0;
    let w0 = 128.0 / 225.0;
    let w1 = (322.0 + 13.0 * 70f64.sqrt()) / 900.0;
    let w2 = (322.0 - 13.0 * 70f64.sqrt()) / 900.0;
    let xs = [-x2, -x1, 0.0, x1, x2];
    let ws = [w2, w1, w0, w1, w2];
    (xs.map(|x| 0.5 * (x + 1.0)), ws.map(|w| 0.5 * w))
}

/// 6-point Gauss-Legendre on [0, 1].
fn gauss_legendre_6() -> ([f64; 6], [f64; 6]) {
    let xs = [0.238_619_186_083_196_9, 0.661_209_386_466_264_5, 0.932_469_514_203_152];
    let ws = [0.467_913_934_572_691, 0.360_761_573_048_138_6, 0.171_324_492_379_170_3];
    let x = [-xs[2], -xs[1], -xs[0], xs[0], xs[1], xs[2]];
    let w = [ws[2], ws[1], ws[0], ws[0], ws[1], ws[2]];
    (x.map(|v| 0.5 * (v + 1.0)), w.map(|v| 0.5 * v))
}

fn build() -> Vec<QuadPoint> {
    let (xs, ws) = gauss_legendre_6();
    let (x, w) = gauss_legendre_5();
    let mut pts = Vec::with_capacity(30);
    for i in 0..6 {
        for j in 0..5 {
            // (s, t) in the unit square -> (xi, eta) = (s, t (1 - s)), jacobian (1 - s)
            let xi = xs[i];
            let eta = x[j] * (1.0 - xs[i]);
            // reference triangle area 1/2, normalize to weights summing to one
            let weight = 2.0 * ws[i] * w[j] * (1.0 - xs[i]);
            pts.push(QuadPoint { bary: [1.0 - xi - eta, xi, eta], weight });
        }
    }
    pts
}

pub fn triangle_rule() -> &'static [QuadPoint] {
    static RULE: OnceLock<Vec<QuadPoint>> = OnceLock::new();
    RULE.get_or_init(build)
}
