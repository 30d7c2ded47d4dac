//! Quadratic (P2) and linear (P1) Lagrange shape functions on affine
//! triangles.
//!
//! Local P2 numbering: nodes 0..3 are the vertices, node `3 + k` is the
//! midpoint of the edge opposite vertex `k`.

use std::sync::OnceLock;

use super::quadrature::{triangle_rule, QuadPoint};

pub const P2_NODES: usize = 6;

/// Values of the six P2 shape functions at barycentric point `l`.
pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
        4.0 * l[0] * l[1],
    ]
}

/// Derivatives of the P2 shape functions with respect to the barycentric
/// coordinates: `d phi_i / d l_k`.
fn p2_bary_derivs(l: [f64; 3]) -> [[f64; 3]; 6] {
    [
        [4.0 * l[0] - 1.0, 0.0, 0.0],
        [0.0, 4.0 * l[1] - 1.0, 0.0],
        [0.0, 0.0, 4.0 * l[2] - 1.0],
        [0.0, 4.0 * l[2], 4.0 * l[1]],
        [4.0 * l[2], 0.0, 4.0 * l[0]],
        [4.0 * l[1], 4.0 * l[0], 0.0],
    ]
}

struct Tabulation {
    values: Vec<[f64; 6]>,
    bary_derivs: Vec<[[f64; 3]; 6]>,
}

fn tabulation() -> &'static Tabulation {
    static TAB: OnceLock<Tabulation> = OnceLock::new();
    TAB.get_or_init(|| {
        let rule = triangle_rule();
        Tabulation {
            values: rule.iter().map(|q| p2_values(q.bary)).collect(),
            bary_derivs: rule.iter().map(|q| p2_bary_derivs(q.bary)).collect(),
        }
    })
}

/// Geometry and tabulated basis data of one element at the quadrature
/// points of [`triangle_rule`].
pub struct ElementData {
    pub area: f64,
    pub coords: [[f64; 2]; 3],
    /// Gradients of the barycentric coordinates (constant on the element).
    pub grad_bary: [[f64; 2]; 3],
    /// Physical quadrature points.
    pub points: Vec<[f64; 2]>,
    /// Quadrature weights including the element area.
    pub weights: Vec<f64>,
    pub phi: &'static [[f64; 6]],
    pub grad_phi: Vec<[[f64; 2]; 6]>,
}

impl ElementData {
    pub fn new(coords: [[f64; 2]; 3]) -> Self {
        let [p0, p1, p2] = coords;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let area = 0.5 * det;
        let grad_bary = [
            [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
            [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
            [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
        ];
        let rule: &[QuadPoint] = triangle_rule();
        let tab = tabulation();
        let points = rule
            .iter()
            .map(|q| {
                let l = q.bary;
                [
                    l[0] * p0[0] + l[1] * p1[0] + l[2] * p2[0],
                    l[0] * p0[1] + l[1] * p1[1] + l[2] * p2[1],
                ]
            })
            .collect();
        let weights = rule.iter().map(|q| q.weight * area).collect();
        let grad_phi = tab
            .bary_derivs
            .iter()
            .map(|d| {
                let mut g = [[0.0; 2]; 6];
                for (i, gi) in g.iter_mut().enumerate() {
                    for (k, gb) in grad_bary.iter().enumerate() {
                        gi[0] += d[i][k] * gb[0];
                        gi[1] += d[i][k] * gb[1];
                    }
                }
                g
            })
            .collect();
        ElementData { area, coords, grad_bary, points, weights, phi: &tab.values, grad_phi }
    }

    pub fn num_points(&self) -> usize {
        self.weights.len()
    }

    /// P1 shape function values at quadrature point `q` (the barycentrics).
    pub fn p1_values(&self, q: usize) -> [f64; 3] {
        triangle_rule()[q].bary
    }

    /// Value of a P2 field with local coefficients `c` at point `q`.
    pub fn eval(&self, q: usize, c: &[f64; 6]) -> f64 {
        self.phi[q].iter().zip(c).map(|(p, v)| p * v).sum()
    }

    /// Gradient of a P2 field with local coefficients `c` at point `q`.
    pub fn eval_grad(&self, q: usize, c: &[f64; 6]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (gp, v) in self.grad_phi[q].iter().zip(c) {
            g[0] += gp[0] * v;
            g[1] += gp[1] * v;
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodal_interpolation() {
        let nodes = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
            [0.5, 0.5, 0.0],
        ];
        for (j, l) in nodes.iter().enumerate() {
            let v = p2_values(*l);
            for (i, vi) in v.iter().enumerate() {
                assert!((vi - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn reproduces_quadratics() {
        let coords = [[0.2, 0.1], [1.1, 0.3], [0.4, 0.9]];
        let el = ElementData::new(coords);
        let f = |x: f64, y: f64| 1.0 + 2.0 * x - y + 0.5 * x * x + 3.0 * x * y - y * y;
        let df = |x: f64, y: f64| [2.0 + x + 3.0 * y, -1.0 + 3.0 * x - 2.0 * y];
        let mid = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let pts = [coords[0], coords[1], coords[2], mid(coords[1], coords[2]), mid(coords[2], coords[0]), mid(coords[0], coords[1])];
        let c = pts.map(|p| f(p[0], p[1]));
        for q in 0..el.num_points() {
            let [x, y] = el.points[q];
            assert!((el.eval(q, &c) - f(x, y)).abs() < 1e-13);
            let g = el.eval_grad(q, &c);
            let e = df(x, y);
            assert!((g[0] - e[0]).abs() < 1e-12 && (g[1] - e[1]).abs() < 1e-12);
        }
        let total: f64 = el.weights.iter().sum();
        assert!((total - el.area).abs() < 1e-15);
    }
}
