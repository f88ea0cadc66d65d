//! Sparse complex matrices in compressed-column form, plus dense helpers on
//! top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    /// Per column: `(row, value)` sorted by row, no explicit zeros.
    cols: Vec<Vec<(usize, Complex64)>>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, cols: vec![Vec::new(); ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let cols = (0..n).map(|j| vec![(j, Complex64::new(1.0, 0.0))]).collect();
        Self { nrows: n, ncols: n, cols }
    }

    pub fn from_diagonal(d: &[Complex64]) -> Self {
        let cols = d
            .iter()
            .enumerate()
            .map(|(j, &v)| if v == Complex64::default() { vec![] } else { vec![(j, v)] })
            .collect();
        Self { nrows: d.len(), ncols: d.len(), cols }
    }

    /// Columns may be unsorted; duplicates are summed.
    pub fn from_columns(nrows: usize, mut cols: Vec<Vec<(usize, Complex64)>>) -> Self {
        for col in &mut cols {
            col.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(col.len());
            for &(r, v) in col.iter() {
                debug_assert!(r < nrows);
                match merged.last_mut() {
                    Some(last) if last.0 == r => last.1 += v,
                    _ => merged.push((r, v)),
                }
            }
            merged.retain(|e| e.1 != Complex64::default());
            *col = merged;
        }
        Self { nrows, ncols: cols.len(), cols }
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let cols = (0..m.ncols())
            .map(|j| {
                (0..m.nrows())
                    .filter_map(|i| {
                        let v = m[(i, j)];
                        (v != Complex64::default()).then_some((i, v))
                    })
                    .collect()
            })
            .collect();
        Self { nrows: m.nrows(), ncols: m.ncols(), cols }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn column(&self, j: usize) -> &[(usize, Complex64)] {
        &self.cols[j]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let col = &self.cols[j];
        match col.binary_search_by_key(&i, |e| e.0) {
            Ok(p) => col[p].1,
            Err(_) => Complex64::default(),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |&(i, v)| (i, j, v)))
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.cols.iter().enumerate().all(|(j, col)| col.iter().all(|e| e.0 == j))
    }

    pub fn adjoint(&self) -> Self {
        let mut cols = vec![Vec::new(); self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                cols[i].push((j, v.conj()));
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, cols }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let cols = self
            .cols
            .iter()
            .map(|col| col.iter().map(|&(i, v)| (i, v * s)).collect())
            .collect();
        Self::from_columns(self.nrows, cols)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &Self, s: Complex64) -> Result<Self> {
        self.check_same_shape(other)?;
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| {
                let mut c = a.clone();
                c.extend(b.iter().map(|&(i, v)| (i, v * s)));
                c
            })
            .collect();
        Ok(Self::from_columns(self.nrows, cols))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.nrows != other.nrows {
            return Err(Error::DimensionMismatch { expected: self.nrows, got: other.nrows });
        }
        if self.ncols != other.ncols {
            return Err(Error::DimensionMismatch { expected: self.ncols, got: other.ncols });
        }
        Ok(())
    }

    /// `self · other`, parallel over the columns of `other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch { expected: self.ncols, got: other.nrows });
        }
        let nrows = self.nrows;
        let cols: Vec<Vec<(usize, Complex64)>> = other
            .cols
            .par_iter()
            .map(|bcol| {
                let mut acc: Vec<(usize, Complex64)> = Vec::new();
                for &(k, b) in bcol {
                    acc.extend(self.cols[k].iter().map(|&(i, a)| (i, a * b)));
                }
                acc
            })
            .collect();
        Ok(Self::from_columns(nrows, cols))
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::default(); self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            let xj = x[j];
            if xj == Complex64::default() {
                continue;
            }
            for &(i, v) in col {
                y[i] += v * xj;
            }
        }
        y
    }

    /// Submatrix on the given row and column index lists, renumbered in the
    /// order given.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut row_map = vec![usize::MAX; self.nrows];
        for (new, &old) in rows.iter().enumerate() {
            row_map[old] = new;
        }
        let out = cols
            .iter()
            .map(|&j| {
                self.cols[j]
                    .iter()
                    .filter_map(|&(i, v)| {
                        let r = row_map[i];
                        (r != usize::MAX).then_some((r, v))
                    })
                    .collect()
            })
            .collect();
        Self::from_columns(rows.len(), out)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.triplets().map(|(_, _, v)| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.triplets().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    /// `max |A - A^†|`, zero for Hermitian matrices.
    pub fn hermitian_defect(&self) -> f64 {
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Connected components of the symmetrized sparsity graph of a square
    /// matrix. Each component is sorted; components are ordered by their
    /// smallest index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.nrows.max(self.ncols);
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (i, j, _) in self.triplets() {
            let a = find(&mut parent, i);
            let b = find(&mut parent, j);
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi] = lo;
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for x in 0..n {
            let r = find(&mut parent, x);
            groups.entry(r).or_default().push(x);
        }
        groups.into_values().collect()
    }
}

/// Solves `A x = b` by dense LU on each connected block of `A`.
pub fn block_solve(a: &SparseMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    let blocks = a.components();
    let solved: Vec<Result<Vec<(usize, Complex64)>>> = blocks
        .par_iter()
        .map(|idx| {
            if idx.iter().all(|&i| b[i] == Complex64::default()) {
                return Ok(Vec::new());
            }
            let dense = a.restrict(idx, idx).to_dense();
            let rhs = nalgebra::DVector::from_iterator(idx.len(), idx.iter().map(|&i| b[i]));
            let lu = dense.lu();
            let x = lu
                .solve(&rhs)
                .ok_or_else(|| Error::Singular { value: 0.0, gap: 0.0 })?;
            Ok(idx.iter().copied().zip(x.iter().copied()).collect())
        })
        .collect();
    let mut x = vec![Complex64::default(); a.ncols()];
    for block in solved {
        for (i, v) in block? {
            x[i] = v;
        }
    }
    Ok(x)
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Restarted-free GMRES with optional right preconditioner `M`:
/// solves `A M y = b` and returns `x = M y` together with the relative
/// residual history `‖b − A x_j‖ / ‖b‖`.
pub fn gmres(
    a: &SparseMatrix,
    b: &[Complex64],
    precond: Option<&SparseMatrix>,
    tol: f64,
    max_iter: usize,
) -> (Vec<Complex64>, Vec<f64>) {
    let n = b.len();
    let bnorm = vec_norm(b);
    if bnorm == 0.0 {
        return (vec![Complex64::default(); n], vec![0.0]);
    }
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        match precond {
            Some(m) => a.matvec(&m.matvec(v)),
            None => a.matvec(v),
        }
    };
    let mut basis: Vec<Vec<Complex64>> = vec![b.iter().map(|c| c / bnorm).collect()];
    let mut h: Vec<Vec<Complex64>> = Vec::new();
    let mut cs: Vec<Complex64> = Vec::new();
    let mut sn: Vec<Complex64> = Vec::new();
    let mut g = vec![Complex64::new(bnorm, 0.0)];
    let mut history = vec![1.0];
    for j in 0..max_iter.min(n) {
        let mut w = apply(&basis[j]);
        let mut col = vec![Complex64::default(); j + 2];
        for (i, q) in basis.iter().enumerate() {
            let hij: Complex64 = q.iter().zip(&w).map(|(qi, wi)| qi.conj() * wi).sum();
            col[i] = hij;
            for (wk, qk) in w.iter_mut().zip(q) {
                *wk -= hij * qk;
            }
        }
        let wn = vec_norm(&w);
        col[j + 1] = Complex64::new(wn, 0.0);
        for i in 0..j {
            let t = cs[i].conj() * col[i] + sn[i].conj() * col[i + 1];
            col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
            col[i] = t;
        }
        let r = (col[j].norm_sqr() + col[j + 1].norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (Complex64::new(1.0, 0.0), Complex64::default())
        } else {
            (col[j] / r, col[j + 1] / r)
        };
        col[j] = Complex64::new(r, 0.0);
        col[j + 1] = Complex64::default();
        cs.push(c);
        sn.push(s);
        let gj = g[j];
        g[j] = c.conj() * gj;
        g.push(-s * gj);
        h.push(col);
        history.push(g[j + 1].norm() / bnorm);
        if wn == 0.0 || g[j + 1].norm() / bnorm < tol {
            break;
        }
        basis.push(w.iter().map(|c| c / wn).collect());
    }
    let m = h.len();
    let mut y = vec![Complex64::default(); m];
    for i in (0..m).rev() {
        let mut acc = g[i];
        for k in i + 1..m {
            acc -= h[k][i] * y[k];
        }
        y[i] = acc / h[i][i];
    }
    let mut z = vec![Complex64::default(); n];
    for (k, yk) in y.iter().enumerate() {
        for (zi, qi) in z.iter_mut().zip(&basis[k]) {
            *zi += yk * qi;
        }
    }
    let x = match precond {
        Some(mat) => mat.matvec(&z),
        None => z,
    };
    (x, history)
}
