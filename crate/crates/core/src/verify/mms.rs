//! Manufactured solutions and the forcings that make them exact.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::fem::{Forcing, StressSource};
use crate::model::{eval_g_a, sym_skew_parts, FluidParams, Mat2, SymMat2};

/// Closed-form fields with the derivatives the strong form needs.
/// `velocity_grad` returns `G[a][b] = d_b u_a`; `stress_grad` returns
/// `[d_x sigma, d_y sigma]`.
pub trait ManufacturedSolution: Send + Sync {
    fn velocity(&self, x: f64, y: f64) -> [f64; 2];
    fn velocity_grad(&self, x: f64, y: f64) -> Mat2;
    fn velocity_laplacian(&self, x: f64, y: f64) -> [f64; 2];
    fn pressure(&self, x: f64, y: f64) -> f64;
    fn pressure_grad(&self, x: f64, y: f64) -> [f64; 2];
    fn stress(&self, x: f64, y: f64) -> SymMat2;
    fn stress_grad(&self, x: f64, y: f64) -> [SymMat2; 2];
    fn stress_laplacian(&self, x: f64, y: f64) -> SymMat2;
}

/// `c cos(a pi x) cos(b pi y)`; zero normal derivative on the unit square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CosineMode {
    pub amp: f64,
    pub kx: f64,
    pub ky: f64,
}

impl CosineMode {
    pub const fn new(amp: f64, kx: f64, ky: f64) -> Self {
        CosineMode { amp, kx, ky }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.amp * (self.kx * PI * x).cos() * (self.ky * PI * y).cos()
    }

    pub fn grad(&self, x: f64, y: f64) -> [f64; 2] {
        let (cx, sx) = ((self.kx * PI * x).cos(), (self.kx * PI * x).sin());
        let (cy, sy) = ((self.ky * PI * y).cos(), (self.ky * PI * y).sin());
        [-self.amp * self.kx * PI * sx * cy, -self.amp * self.ky * PI * cx * sy]
    }

    pub fn laplacian(&self, x: f64, y: f64) -> f64 {
        -(self.kx * self.kx + self.ky * self.ky) * PI * PI * self.value(x, y)
    }
}

fn bump(t: f64) -> [f64; 4] {
    // P, P', P'', P''' for P(t) = t^2 (1 - t)^2
    [
        t * t * (1.0 - t) * (1.0 - t),
        2.0 * t - 6.0 * t * t + 4.0 * t * t * t,
        2.0 - 12.0 * t + 12.0 * t * t,
        -12.0 + 24.0 * t,
    ]
}

/// Default benchmark on the unit square:
/// `u = curl(P(x) P(y))` with `P(t) = t^2 (1 - t)^2`,
/// `p = sin(pi x) cos(pi y)` and a stress built from cosine modes.
#[derive(Clone, Debug, PartialEq)]
pub struct Benchmark {
    pub velocity_scale: f64,
    pub pressure_scale: f64,
    pub stress: [CosineMode; 3],
}

impl Default for Benchmark {
    fn default() -> Self {
        Benchmark {
            velocity_scale: 10.0,
            pressure_scale: 0.1,
            stress: [CosineMode::new(0.1, 1.0, 1.0), CosineMode::new(0.05, 1.0, 2.0), CosineMode::new(0.1, 2.0, 1.0)],
        }
    }
}

impl Benchmark {
    pub fn with_stress_scale(mut self, s: f64) -> Self {
        for m in &mut self.stress {
            m.amp *= s;
        }
        self
    }
}

impl ManufacturedSolution for Benchmark {
    fn velocity(&self, x: f64, y: f64) -> [f64; 2] {
        let (px, py) = (bump(x), bump(y));
        [self.velocity_scale * px[0] * py[1], -self.velocity_scale * px[1] * py[0]]
    }

    fn velocity_grad(&self, x: f64, y: f64) -> Mat2 {
        let (px, py) = (bump(x), bump(y));
        Mat2::new(px[1] * py[1], px[0] * py[2], -px[2] * py[0], -px[1] * py[1]).scale(self.velocity_scale)
    }

    fn velocity_laplacian(&self, x: f64, y: f64) -> [f64; 2] {
        let (px, py) = (bump(x), bump(y));
        let s = self.velocity_scale;
        [s * (px[2] * py[1] + px[0] * py[3]), -s * (px[3] * py[0] + px[1] * py[2])]
    }

    fn pressure(&self, x: f64, y: f64) -> f64 {
        self.pressure_scale * (PI * x).sin() * (PI * y).cos()
    }

    fn pressure_grad(&self, x: f64, y: f64) -> [f64; 2] {
        let s = self.pressure_scale * PI;
        [s * (PI * x).cos() * (PI * y).cos(), -s * (PI * x).sin() * (PI * y).sin()]
    }

    fn stress(&self, x: f64, y: f64) -> SymMat2 {
        SymMat2::from_components(self.stress.map(|m| m.value(x, y)))
    }

    fn stress_grad(&self, x: f64, y: f64) -> [SymMat2; 2] {
        let g = self.stress.map(|m| m.grad(x, y));
        [SymMat2::new(g[0][0], g[1][0], g[2][0]), SymMat2::new(g[0][1], g[1][1], g[2][1])]
    }

    fn stress_laplacian(&self, x: f64, y: f64) -> SymMat2 {
        SymMat2::from_components(self.stress.map(|m| m.laplacian(x, y)))
    }
}

/// Strong-form momentum residual
/// `Re (u . grad) u - (1 - r) Lap u + grad p - div sigma`.
pub fn momentum_forcing_at(ms: &dyn ManufacturedSolution, p: &FluidParams, x: f64, y: f64) -> [f64; 2] {
    let u = ms.velocity(x, y);
    let g = ms.velocity_grad(x, y).0;
    let lap = ms.velocity_laplacian(x, y);
    let gp = ms.pressure_grad(x, y);
    let [sx, sy] = ms.stress_grad(x, y);
    let div = [sx.xx + sy.xy, sx.xy + sy.yy];
    std::array::from_fn(|i| {
        let conv = u[0] * g[i][0] + u[1] * g[i][1];
        p.re() * conv - (1.0 - p.r()) * lap[i] + gp[i] - div[i]
    })
}

/// Strong-form stress residual
/// `We (u . grad sigma + g_a(grad u, sigma)) + sigma - D Lap sigma - 2r D(u)`.
pub fn stress_forcing_at(ms: &dyn ManufacturedSolution, p: &FluidParams, x: f64, y: f64) -> SymMat2 {
    let u = ms.velocity(x, y);
    let grad_u = ms.velocity_grad(x, y);
    let s = ms.stress(x, y);
    let [sx, sy] = ms.stress_grad(x, y);
    let transport = sx.scale(u[0]) + sy.scale(u[1]);
    let (d, _) = sym_skew_parts(&grad_u);
    (transport + eval_g_a(&grad_u, &s, p.a())).scale(p.we()) + s - ms.stress_laplacian(x, y).scale(p.diff()) - d.scale(2.0 * p.r())
}

/// Forcings `(f, g)` that make `ms` an exact solution.
pub fn mms_forcing<M: ManufacturedSolution + Clone + 'static>(ms: &M, p: &FluidParams) -> (Forcing, StressSource) {
    let (m1, m2) = (Arc::new(ms.clone()), Arc::new(ms.clone()));
    let (p1, p2) = (*p, *p);
    let f = Forcing::from_fn(move |x, y| momentum_forcing_at(m1.as_ref(), &p1, x, y));
    let g = StressSource::from_fn(move |x, y| stress_forcing_at(m2.as_ref(), &p2, x, y));
    (f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Values only; every derivative comes from central differences.
    struct Numeric<'a>(&'a dyn ManufacturedSolution, f64);

    impl Numeric<'_> {
        fn d<T>(&self, f: impl Fn(f64, f64) -> T, x: f64, y: f64, dir: usize) -> [T; 2] {
            let h = self.1;
            let (dx, dy) = if dir == 0 { (h, 0.0) } else { (0.0, h) };
            [f(x + dx, y + dy), f(x - dx, y - dy)]
        }

        fn momentum(&self, p: &FluidParams, x: f64, y: f64) -> [f64; 2] {
            let ms = self.0;
            let h = self.1;
            let u = ms.velocity(x, y);
            let du = |dir| {
                let [a, b] = self.d(|x, y| ms.velocity(x, y), x, y, dir);
                [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
            };
            let lap = {
                let c = ms.velocity(x, y);
                let [ax, bx] = self.d(|x, y| ms.velocity(x, y), x, y, 0);
                let [ay, by] = self.d(|x, y| ms.velocity(x, y), x, y, 1);
                [0, 1].map(|i| (ax[i] + bx[i] + ay[i] + by[i] - 4.0 * c[i]) / (h * h))
            };
            let dp = |dir| {
                let [a, b] = self.d(|x, y| ms.pressure(x, y), x, y, dir);
                (a - b) / (2.0 * h)
            };
            let ds = |dir| {
                let [a, b] = self.d(|x, y| ms.stress(x, y), x, y, dir);
                (a - b).scale(0.5 / h)
            };
            let (ux, uy) = (du(0), du(1));
            let (sx, sy) = (ds(0), ds(1));
            let div = [sx.xx + sy.xy, sx.xy + sy.yy];
            let gp = [dp(0), dp(1)];
            [0, 1].map(|i| p.re() * (u[0] * ux[i] + u[1] * uy[i]) - (1.0 - p.r()) * lap[i] + gp[i] - div[i])
        }

        fn stress(&self, p: &FluidParams, x: f64, y: f64) -> SymMat2 {
            let ms = self.0;
            let h = self.1;
            let u = ms.velocity(x, y);
            let [ax, bx] = self.d(|x, y| ms.velocity(x, y), x, y, 0);
            let [ay, by] = self.d(|x, y| ms.velocity(x, y), x, y, 1);
            let grad = Mat2::new(ax[0] - bx[0], ay[0] - by[0], ax[1] - bx[1], ay[1] - by[1]).scale(0.5 / h);
            let s = ms.stress(x, y);
            let [sxa, sxb] = self.d(|x, y| ms.stress(x, y), x, y, 0);
            let [sya, syb] = self.d(|x, y| ms.stress(x, y), x, y, 1);
            let sx = (sxa - sxb).scale(0.5 / h);
            let sy = (sya - syb).scale(0.5 / h);
            let lap = (sxa + sxb + sya + syb - s.scale(4.0)).scale(1.0 / (h * h));
            let (d, _) = sym_skew_parts(&grad);
            (sx.scale(u[0]) + sy.scale(u[1]) + eval_g_a(&grad, &s, p.a())).scale(p.we()) + s - lap.scale(p.diff())
                - d.scale(2.0 * p.r())
        }
    }

    fn err_at_step(h: f64) -> f64 {
        let ms = Benchmark::default();
        let p = FluidParams::new(1.0, 0.3, 0.5, 0.7, 0.2).unwrap();
        let num = Numeric(&ms, h);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(50);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let (x, y) = (rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
            let f = momentum_forcing_at(&ms, &p, x, y);
            let fd = num.momentum(&p, x, y);
            let g = stress_forcing_at(&ms, &p, x, y);
            let gd = num.stress(&p, x, y);
            worst = worst.max((f[0] - fd[0]).abs()).max((f[1] - fd[1]).abs()).max((g - gd).norm_frobenius());
        }
        worst
    }

    #[test]
    fn forcings_match_finite_differences() {
        let (e1, e2) = (err_at_step(1e-2), err_at_step(5e-3));
        assert!(e1 < 1e-2, "{e1}");
        // second order: halving the step divides the error by about four
        assert!(e2 < e1 / 3.0, "{e1} {e2}");
    }

    #[derive(Clone)]
    struct Zero;

    impl ManufacturedSolution for Zero {
        fn velocity(&self, _: f64, _: f64) -> [f64; 2] {
            [0.0; 2]
        }
        fn velocity_grad(&self, _: f64, _: f64) -> Mat2 {
            Mat2::ZERO
        }
        fn velocity_laplacian(&self, _: f64, _: f64) -> [f64; 2] {
            [0.0; 2]
        }
        fn pressure(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn pressure_grad(&self, _: f64, _: f64) -> [f64; 2] {
            [0.0; 2]
        }
        fn stress(&self, _: f64, _: f64) -> SymMat2 {
            SymMat2::ZERO
        }
        fn stress_grad(&self, _: f64, _: f64) -> [SymMat2; 2] {
            [SymMat2::ZERO; 2]
        }
        fn stress_laplacian(&self, _: f64, _: f64) -> SymMat2 {
            SymMat2::ZERO
        }
    }

    #[test]
    fn zero_solution_has_zero_forcing() {
        let p = FluidParams::new(1.0, 0.3, 0.5, 0.7, 0.2).unwrap();
        let (f, g) = mms_forcing(&Zero, &p);
        assert_eq!(f.eval(0.3, 0.4), [0.0, 0.0]);
        assert_eq!(g.eval(0.3, 0.4), SymMat2::ZERO);
    }

    #[test]
    fn linear_case_forcings() {
        let ms = Benchmark::default().with_stress_scale(0.0);
        let p = FluidParams::new(0.0, 0.0, 0.4, 0.5, 0.3).unwrap();
        for (x, y) in [(0.1, 0.2), (0.5, 0.7), (0.9, 0.33)] {
            let f = momentum_forcing_at(&ms, &p, x, y);
            let lap = ms.velocity_laplacian(x, y);
            let gp = ms.pressure_grad(x, y);
            for i in 0..2 {
                assert!((f[i] - (-(1.0 - p.r()) * lap[i] + gp[i])).abs() < 1e-14);
            }
            let g = stress_forcing_at(&ms, &p, x, y);
            let (d, _) = sym_skew_parts(&ms.velocity_grad(x, y));
            assert!((g - d.scale(-2.0 * p.r())).norm_frobenius() < 1e-14);
        }
    }

    #[test]
    fn stress_divergence_is_linear_in_sigma() {
        let p = FluidParams::new(1.0, 0.3, 0.5, 0.7, 0.2).unwrap();
        let base = Benchmark::default();
        let zero = base.clone().with_stress_scale(0.0);
        let twice = base.clone().with_stress_scale(2.0);
        for (x, y) in [(0.2, 0.8), (0.6, 0.1)] {
            let f0 = momentum_forcing_at(&zero, &p, x, y);
            let f1 = momentum_forcing_at(&base, &p, x, y);
            let f2 = momentum_forcing_at(&twice, &p, x, y);
            for i in 0..2 {
                assert!((f2[i] - f0[i] - 2.0 * (f1[i] - f0[i])).abs() <= 1e-14 * f0[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn benchmark_boundary_and_divergence() {
        let ms = Benchmark::default();
        for t in [0.0, 0.25, 0.5, 1.0] {
            for (x, y) in [(0.0, t), (1.0, t), (t, 0.0), (t, 1.0)] {
                assert!(ms.velocity(x, y).iter().all(|v| v.abs() < 1e-15));
                let [gx, gy] = ms.stress_grad(x, y);
                let normal = if x == 0.0 || x == 1.0 { gx } else { gy };
                assert!(normal.norm_frobenius() < 1e-14);
            }
        }
        for (x, y) in [(0.3, 0.6), (0.8, 0.15)] {
            let g = ms.velocity_grad(x, y).0;
            assert!((g[0][0] + g[1][1]).abs() < 1e-15);
        }
    }

    /// `u = (pi sin(pi x) cos(pi y), -pi cos(pi x) sin(pi y))`,
    /// `sigma = 2r / (1 + 2 pi^2 D) D(u)` solves the stress equation at We = 0.
    #[derive(Clone)]
    struct Consistent {
        coef: f64,
    }

    impl ManufacturedSolution for Consistent {
        fn velocity(&self, x: f64, y: f64) -> [f64; 2] {
            [PI * (PI * x).sin() * (PI * y).cos(), -PI * (PI * x).cos() * (PI * y).sin()]
        }
        fn velocity_grad(&self, x: f64, y: f64) -> Mat2 {
            let (sx, cx, sy, cy) = ((PI * x).sin(), (PI * x).cos(), (PI * y).sin(), (PI * y).cos());
            Mat2::new(PI * PI * cx * cy, -PI * PI * sx * sy, PI * PI * sx * sy, -PI * PI * cx * cy)
        }
        fn velocity_laplacian(&self, x: f64, y: f64) -> [f64; 2] {
            self.velocity(x, y).map(|v| -2.0 * PI * PI * v)
        }
        fn pressure(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn pressure_grad(&self, _: f64, _: f64) -> [f64; 2] {
            [0.0; 2]
        }
        fn stress(&self, x: f64, y: f64) -> SymMat2 {
            let m = CosineMode::new(self.coef * PI * PI, 1.0, 1.0);
            SymMat2::new(m.value(x, y), 0.0, -m.value(x, y))
        }
        fn stress_grad(&self, x: f64, y: f64) -> [SymMat2; 2] {
            let g = CosineMode::new(self.coef * PI * PI, 1.0, 1.0).grad(x, y);
            [SymMat2::new(g[0], 0.0, -g[0]), SymMat2::new(g[1], 0.0, -g[1])]
        }
        fn stress_laplacian(&self, x: f64, y: f64) -> SymMat2 {
            self.stress(x, y).scale(-2.0 * PI * PI)
        }
    }

    #[test]
    fn consistent_pair_needs_no_stress_source() {
        for (r, d) in [(0.5, 1.0), (0.2, 0.01), (0.9, 3.0)] {
            let p = FluidParams::new(1.0, 0.0, r, 0.4, d).unwrap();
            let ms = Consistent { coef: 2.0 * r / (1.0 + 2.0 * PI * PI * d) };
            for (x, y) in [(0.1, 0.9), (0.45, 0.3), (0.77, 0.61)] {
                assert!(stress_forcing_at(&ms, &p, x, y).norm_frobenius() < 1e-13);
            }
        }
    }
}
