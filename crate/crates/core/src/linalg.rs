//! Sparse storage, a sparse direct solver, and small dense helpers.
//!
//! The sparse LU is backed by `faer` (supernodal LU with partial row
//! pivoting and a fill-reducing column ordering). The crate is built without
//! its `rayon` feature so factorizations are single-threaded and bit-stable.

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Mat, Side};

use crate::error::{Error, Result};

/// Relative residual every successful solve must meet.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// Compressed sparse row matrix with sorted, duplicate-free columns per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed in insertion order, so the result is deterministic.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let ncols = a.first().map_or(0, Vec::len);
        let mut t = Vec::new();
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(a.len(), ncols, t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `y += alpha * A x`
    pub fn matvec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let s: f64 = self.row(i).map(|(j, v)| v * x[j]).sum();
            *yi += alpha * s;
        }
    }

    /// `y += alpha * A^T x`
    pub fn matvec_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (j, v) in self.row(i) {
                y[j] += alpha * v * xi;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(i, j, v)| (j, i, v)).collect(),
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets().chain(other.triplets()).collect(),
        )
    }

    /// Selects the submatrix `A[rows, cols]`.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut t = Vec::new();
        for (new_i, &old_i) in rows.iter().enumerate() {
            for (j, v) in self.row(old_i) {
                if col_map[j] != usize::MAX {
                    t.push((new_i, col_map[j], v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), t)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A - A^T|`, zero for non-square matrices is not meaningful.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.nrows, self.ncols);
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }
}

/// A square sparse system `A x = b`. Constraint rows (such as a zero-mean
/// multiplier) are stored as ordinary rows of `A`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: Arc<SparseMatrix>,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn new(matrix: Arc<SparseMatrix>, rhs: Vec<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() != rhs.len() {
            return Err(Error::Assembly(format!(
                "inconsistent system dimensions: {}x{} matrix, rhs of length {}",
                matrix.nrows(),
                matrix.ncols(),
                rhs.len()
            )));
        }
        Ok(Self { matrix, rhs })
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        relative_residual(&self.matrix, x, &self.rhs)
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖Ax − b‖ / ‖b‖`, or `‖x‖` when `b = 0`.
pub fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let bn = norm2(b);
    if bn == 0.0 {
        return norm2(x);
    }
    let mut r = a.matvec(x);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= bi);
    norm2(&r) / bn
}

/// A reusable sparse LU factorization of the row-equilibrated matrix.
pub struct LuFactorization {
    matrix: Arc<SparseMatrix>,
    row_scale: Vec<f64>,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl std::fmt::Debug for LuFactorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LuFactorization")
            .field("n", &self.matrix.nrows())
            .field("nnz", &self.matrix.nnz())
            .finish()
    }
}

impl LuFactorization {
    pub fn new(matrix: Arc<SparseMatrix>) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(Error::Solver(format!(
                "cannot factor a non-square {}x{} matrix",
                n,
                matrix.ncols()
            )));
        }
        let mut row_scale = vec![0.0f64; n];
        for (i, _, v) in matrix.triplets() {
            row_scale[i] = row_scale[i].max(v.abs());
        }
        if let Some(row) = row_scale.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::Singular { row });
        }
        row_scale.iter_mut().for_each(|m| *m = 1.0 / *m);
        let triplets: Vec<Triplet<usize, usize, f64>> = matrix
            .triplets()
            .map(|(i, j, v)| Triplet::new(i, j, row_scale[i] * v))
            .collect();
        let csc = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::Solver(format!("{e:?}")))?;
        let lu = csc.sp_lu().map_err(|e| match e {
            LuError::SymbolicSingular { index } => Error::Singular { row: index },
            LuError::Generic(g) => Error::Solver(format!("{g:?}")),
        })?;
        Ok(Self { matrix, row_scale, lu })
    }

    pub fn matrix(&self) -> &Arc<SparseMatrix> {
        &self.matrix
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Col::<f64>::from_fn(b.len(), |i| self.row_scale[i] * b[i]);
        let x = self.lu.solve(&rhs);
        (0..b.len()).map(|i| x[i]).collect()
    }

    /// Scaled residual `D(b − Ax)` and its norm relative to `‖Db‖`.
    fn scaled_residual(&self, x: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
        let mut r = b.to_vec();
        self.matrix.matvec_add(-1.0, x, &mut r);
        let num = norm2(&r.iter().zip(&self.row_scale).map(|(a, d)| a * d).collect::<Vec<_>>());
        let den = norm2(&b.iter().zip(&self.row_scale).map(|(a, d)| a * d).collect::<Vec<_>>());
        (r, if den > 0.0 { num / den } else { num })
    }

    /// Solves with up to three steps of iterative refinement and enforces
    /// the residual contract.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(b.len(), self.matrix.nrows());
        let mut x = self.raw_solve(b);
        if let Some(row) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Singular { row });
        }
        let (mut r, mut scaled) = self.scaled_residual(&x, b);
        for _ in 0..3 {
            if scaled <= 1e-15 {
                break;
            }
            let dx = self.raw_solve(&r);
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(xi, di)| xi + di).collect();
            let (r_new, s_new) = self.scaled_residual(&trial, b);
            if !(s_new < scaled) {
                break;
            }
            (x, r, scaled) = (trial, r_new, s_new);
        }
        let res = relative_residual(&self.matrix, &x, b);
        if !(res <= SOLVE_TOLERANCE) {
            return Err(Error::Solver(format!(
                "relative residual {res:.3e} exceeds {SOLVE_TOLERANCE:e}"
            )));
        }
        Ok(x)
    }
}

/// Factors and solves a single system.
pub fn lu_solve(system: &LinearSystem) -> Result<Vec<f64>> {
    LuFactorization::new(system.matrix.clone())?.solve(&system.rhs)
}

fn to_faer(a: &[Vec<f64>]) -> Mat<f64> {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    Mat::from_fn(n, m, |i, j| a[i][j])
}

/// Smallest eigenvalue of the symmetric part of a square dense matrix.
pub fn dense_min_eig_sym(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 0 {
        return f64::NAN;
    }
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (a[i][j] + a[j][i]));
    let eig = sym
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("symmetric eigensolver failed");
    eig.into_iter().fold(f64::INFINITY, f64::min)
}

/// Numerical rank: singular values above `rel_tol * σ_max`.
pub fn dense_rank(a: &[Vec<f64>], rel_tol: f64) -> usize {
    if a.is_empty() || a[0].is_empty() {
        return 0;
    }
    let sv = to_faer(a).singular_values().expect("svd failed");
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Gaussian elimination with partial pivoting for small dense systems.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    assert_eq!(b.len(), n);
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            assert_eq!(row.len(), n);
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col] == 0.0 || !m[piv][col].is_finite() {
            return Err(Error::Singular { row: col });
        }
        m.swap(col, piv);
        for i in col + 1..n {
            let f = m[i][col] / m[col][col];
            if f != 0.0 {
                for j in col..=n {
                    m[i][j] -= f * m[col][j];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    Ok(x)
}

/// Inverse of a small dense matrix, column by column.
pub fn invert_dense(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = solve_dense(a, &e)?;
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn system(a: Vec<Vec<f64>>, b: Vec<f64>) -> LinearSystem {
        LinearSystem::new(Arc::new(SparseMatrix::from_dense(&a)), b).unwrap()
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let s = LinearSystem::new(Arc::new(SparseMatrix::identity(4)), vec![1.0, -2.0, 3.0, 0.5])
            .unwrap();
        assert_eq!(lu_solve(&s).unwrap(), vec![1.0, -2.0, 3.0, 0.5]);
    }

    #[test]
    fn two_by_two() {
        let s = system(vec![vec![2.0, 1.0], vec![1.0, 2.0]], vec![3.0, 3.0]);
        let x = lu_solve(&s).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn structurally_singular_reports_row() {
        let s = system(vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![1.0, 1.0]);
        assert!(matches!(lu_solve(&s), Err(Error::Singular { .. })));
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let s = system(vec![vec![4.0, 1.0], vec![1.0, 3.0]], vec![0.0, 0.0]);
        let x = lu_solve(&s).unwrap();
        assert!(norm2(&x) <= 1e-12);
    }

    #[test]
    fn random_spd_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let g: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (0..n).map(|k| g[i][k] * g[j][k]).sum::<f64>();
            }
            a[i][i] += n as f64;
        }
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = system(a, b);
        let x = lu_solve(&s).unwrap();
        assert!(s.relative_residual(&x) <= 1e-10);
    }

    #[test]
    fn random_nonsymmetric_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.random_range(2..30);
            let mut t = Vec::new();
            for i in 0..n {
                t.push((i, i, 4.0 + rng.random_range(0.0..1.0)));
                for _ in 0..3 {
                    t.push((i, rng.random_range(0..n), rng.random_range(-1.0..1.0)));
                }
            }
            let a = Arc::new(SparseMatrix::from_triplets(n, n, t));
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = LinearSystem::new(a, b).unwrap();
            let x = lu_solve(&s).unwrap();
            assert!(s.relative_residual(&x) <= 1e-10);
        }
    }

    #[test]
    fn deterministic_solution() {
        let s = system(
            vec![vec![3.0, 1.0, 0.0], vec![1.0, 5.0, 2.0], vec![0.0, 2.0, 7.0]],
            vec![1.0, 2.0, 3.0],
        );
        let x1 = lu_solve(&s).unwrap();
        let x2 = lu_solve(&s).unwrap();
        assert_eq!(
            x1.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            x2.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn min_eigenvalues() {
        assert!((dense_min_eig_sym(&[vec![1.0, 0.0], vec![0.0, 1.0]]) - 1.0).abs() < 1e-12);
        assert!((dense_min_eig_sym(&[vec![3.0, 0.0], vec![0.0, -2.0]]) + 2.0).abs() < 1e-12);
        assert!((dense_min_eig_sym(&[vec![2.0, 1.0], vec![1.0, 2.0]]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csr_sums_duplicates_and_sorts() {
        let m = SparseMatrix::from_triplets(2, 3, vec![(1, 2, 1.0), (0, 1, 2.0), (1, 2, 0.5), (1, 0, 3.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.row(1).map(|(j, _)| j).collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(m.transpose().get(2, 1), 1.5);
    }

    #[test]
    fn rank_of_rank_one() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(dense_rank(&a, 1e-12), 1);
    }

    #[test]
    fn dense_solve_matches() {
        let a = vec![vec![0.0, 2.0], vec![1.0, 1.0]];
        let x = solve_dense(&a, &[2.0, 3.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }
}
