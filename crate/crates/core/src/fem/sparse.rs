//! Compressed sparse row matrices, triplet assembly and sparse direct
//! solves.

use std::io::Write;

use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

/// Triplet accumulator. Duplicates are summed in insertion order, so the
/// assembled matrix does not depend on how the triplets were produced as
/// long as their order is fixed.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuilder { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        TripletBuilder { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.entries.push((i, j, v));
    }

    pub fn extend<I: IntoIterator<Item = (usize, usize, f64)>>(&mut self, it: I) {
        self.entries.extend(it);
    }

    /// Adds `scale * m` with its rows and columns relabelled; `None` drops
    /// the row or column.
    pub fn add_block(&mut self, m: &CsrMatrix, scale: f64, row_map: impl Fn(usize) -> Option<usize>, col_map: impl Fn(usize) -> Option<usize>) {
        for i in 0..m.nrows {
            let Some(ri) = row_map(i) else { continue };
            for k in m.indptr[i]..m.indptr[i + 1] {
                if let Some(cj) = col_map(m.indices[k]) {
                    self.entries.push((ri, cj, scale * m.data[k]));
                }
            }
        }
    }

    pub fn build(mut self) -> CsrMatrix {
        // stable sort keeps insertion order among duplicates
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut data: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                data.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, indptr, indices, data }
    }
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        TripletBuilder::new(nrows, ncols).build()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.indices[self.indptr[i]..self.indptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.data[self.indptr[i] + k],
            Err(_) => 0.0,
        }
    }

    /// Iterates the stored entries `(i, j, value)` row by row.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| (self.indptr[i]..self.indptr[i + 1]).map(move |k| (i, self.indices[k], self.data[k])))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        (0..self.nrows)
            .map(|i| (self.indptr[i]..self.indptr[i + 1]).map(|k| self.data[k] * x[self.indices[k]]).sum())
            .collect()
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "matvec dimension mismatch");
        let mut y = vec![0.0; self.ncols];
        for (i, xi) in x.iter().enumerate() {
            for k in self.indptr[i]..self.indptr[i + 1] {
                y[self.indices[k]] += self.data[k] * xi;
            }
        }
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut b = TripletBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        b.extend(self.iter().map(|(i, j, v)| (j, i, v)));
        b.build()
    }

    pub fn scaled(&self, s: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// `self + s * other` (arbitrary patterns).
    pub fn add_scaled(&self, other: &CsrMatrix, s: f64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut b = TripletBuilder::with_capacity(self.nrows, self.ncols, self.nnz() + other.nnz());
        b.add_block(self, 1.0, Some, Some);
        b.add_block(other, s, Some, Some);
        b.build()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Coordinate text dump: one `i j value` line per stored entry.
    pub fn write_coo<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "% {} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(w, "{i} {j} {v:?}")?;
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.iter() {
            d[i][j] += v;
        }
        d
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let triplets: Vec<Triplet<usize, usize, f64>> = self.iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &triplets)
            .map_err(|e| Error::LinearSolveFailure(format!("cannot build sparse matrix: {e:?}")))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `a + s * b`.
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Sparse LU factorization with partial pivoting.
pub struct LuSolver {
    lu: Lu<usize, f64>,
    n: usize,
}

impl std::fmt::Debug for LuSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LuSolver").field("n", &self.n).finish()
    }
}

impl LuSolver {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::LinearSolveFailure(format!("matrix is {}x{}", a.nrows, a.ncols)));
        }
        let lu = a.to_faer()?.sp_lu().map_err(|e| Error::LinearSolveFailure(format!("LU factorization failed: {e:?}")))?;
        Ok(LuSolver { lu, n: a.nrows })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        use faer::prelude::Solve;
        assert_eq!(b.len(), self.n);
        let rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        let out: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolveFailure("non-finite solution (singular matrix?)".into()));
        }
        Ok(out)
    }
}

/// Restarted GMRES with a right preconditioner given as a closure.
/// Returns the iterate and the achieved relative residual.
pub fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    precond: impl Fn(&[f64]) -> Result<Vec<f64>>,
    rel_tol: f64,
    restart: usize,
    max_restarts: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = b.len();
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    let mut x = x0.to_vec();
    let mut rel = f64::INFINITY;
    for _ in 0..=max_restarts {
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        rel = beta / bnorm;
        if rel <= rel_tol {
            return Ok((x, rel));
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(restart);
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            let zk = precond(&v[k])?;
            let mut w = a.matvec(&zk);
            z.push(zk);
            for (j, vj) in v.iter().enumerate() {
                h[j][k] = dot(&w, vj);
                w.iter_mut().zip(vj).for_each(|(wi, vi)| *wi -= h[j][k] * vi);
            }
            h[k + 1][k] = norm2(&w);
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            let hk1 = h[k + 1][k];
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            if g[k + 1].abs() / bnorm <= rel_tol || hk1 == 0.0 {
                break;
            }
            v.push(w.iter().map(|wi| wi / hk1).collect());
        }
        // back substitution
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in (i + 1)..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            x.iter_mut().zip(&z[j]).for_each(|(xi, zi)| *xi += yj * zi);
        }
        if n == 0 {
            return Ok((x, 0.0));
        }
    }
    let ax = a.matvec(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    rel = rel.min(norm2(&r) / bnorm);
    Ok((x, rel))
}
