//! Pointwise algebra of the stress tensor: the `g_a` family of objective
//! derivative terms and their contraction with the stress.

use oldroyd::model::{eval_g_a, sym_skew_parts, Mat2, SymMat2};

fn main() {
    let g = Mat2::new(0.3, -1.2, 0.8, -0.3);
    let s = SymMat2::new(2.0, 0.5, -1.0);
    let (d, w) = sym_skew_parts(&g);
    println!("grad u = {g:?}");
    println!("D = {d:?}\nW = {w:?}");
    println!("sigma = {s:?}, |sigma|_F = {:.6}", s.norm_frobenius());
    println!("{:>6} {:>12} {:>12} {:>12} {:>14}", "a", "g_xx", "g_xy", "g_yy", "g_a : sigma");
    for a in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let r = eval_g_a(&g, &s, a);
        // only the D part survives the contraction: g_a : sigma = 2a (D sigma) : sigma
        println!("{a:>6} {:>12.6} {:>12.6} {:>12.6} {:>14.6e}", r.xx, r.xy, r.yy, r.contract(&s));
    }
}
