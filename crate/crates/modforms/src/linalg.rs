//! Exact dense linear algebra over any `Field`: reduced row echelon form,
//! rank, kernels, linear solves, inverses, and characteristic polynomials.
//!
//! Matrices are small (dimensions = dimensions of spaces of forms, at most a
//! few hundred), so classical O(n^3) eliminations with exact arithmetic are the
//! right tool.  Pivoting is leftmost-first: the echelon basis of a space of
//! q-expansions therefore has pivots at the lowest possible q-valuations.

use crate::poly::{Field, Poly};

/// Dense matrix, row major.
#[derive(Clone, PartialEq, Debug)]
pub struct Mat<F: Field> {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<Vec<F>>,
}

impl<F: Field> Mat<F> {
    pub fn new(a: Vec<Vec<F>>) -> Self {
        let rows = a.len();
        let cols = a.first().map_or(0, |r| r.len());
        assert!(a.iter().all(|r| r.len() == cols), "ragged matrix");
        Mat { rows, cols, a }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, a: vec![vec![F::zero(); cols]; rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            m.a[i][i] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> F) -> Self {
        Mat::new((0..rows).map(|i| (0..cols).map(|j| f(i, j)).collect()).collect())
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self.a[j][i].clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows);
        Mat::from_fn(self.rows, o.cols, |i, j| {
            let mut s = F::zero();
            for k in 0..self.cols {
                if !self.a[i][k].is_zero() && !o.a[k][j].is_zero() {
                    s = s.add(&self.a[i][k].mul(&o.a[k][j]));
                }
            }
            s
        })
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        self.a
            .iter()
            .map(|row| {
                let mut s = F::zero();
                for (x, y) in row.iter().zip(v) {
                    if !x.is_zero() && !y.is_zero() {
                        s = s.add(&x.mul(y));
                    }
                }
                s
            })
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert!(self.rows == o.rows && self.cols == o.cols);
        Mat::from_fn(self.rows, self.cols, |i, j| self.a[i][j].add(&o.a[i][j]))
    }

    pub fn scale(&self, s: &F) -> Self {
        Mat::from_fn(self.rows, self.cols, |i, j| self.a[i][j].mul(s))
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.a[i][c].is_zero()) else {
                continue;
            };
            self.a.swap(r, p);
            let inv = self.a[r][c].inv();
            for x in self.a[r].iter_mut() {
                *x = x.mul(&inv);
            }
            for i in 0..self.rows {
                if i != r && !self.a[i][c].is_zero() {
                    let f = self.a[i][c].clone();
                    for j in 0..self.cols {
                        let t = self.a[r][j].mul(&f);
                        self.a[i][j] = self.a[i][j].sub(&t);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right kernel {v : A v = 0}.
    pub fn kernel(&self) -> Vec<Vec<F>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::new();
        for &fc in &free {
            let mut v = vec![F::zero(); self.cols];
            v[fc] = F::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = m.a[r][fc].neg();
            }
            basis.push(v);
        }
        basis
    }

    /// One solution of A x = b, if any.
    pub fn solve(&self, b: &[F]) -> Option<Vec<F>> {
        assert_eq!(b.len(), self.rows);
        let mut m = Mat::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self.a[i][j].clone()
            } else {
                b[i].clone()
            }
        });
        let pivots = m.rref();
        if pivots.contains(&self.cols) {
            return None; // inconsistent: pivot in the augmented column
        }
        let mut x = vec![F::zero(); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = m.a[r][self.cols].clone();
        }
        Some(x)
    }

    /// Solve A X = B column by column; None if any column is inconsistent.
    pub fn solve_mat(&self, bm: &Mat<F>) -> Option<Mat<F>> {
        assert_eq!(bm.rows, self.rows);
        let mut cols = Vec::with_capacity(bm.cols);
        for j in 0..bm.cols {
            let b: Vec<F> = (0..bm.rows).map(|i| bm.a[i][j].clone()).collect();
            cols.push(self.solve(&b)?);
        }
        let n = self.cols;
        Some(Mat::from_fn(n, bm.cols, |i, j| cols[j][i].clone()))
    }

    pub fn inverse(&self) -> Option<Mat<F>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = Mat::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self.a[i][j].clone()
            } else if j - n == i {
                F::one()
            } else {
                F::zero()
            }
        });
        let pivots = m.rref();
        // invertible iff the left block carries all n pivots
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Mat::from_fn(n, n, |i, j| m.a[i][n + j].clone()))
    }

    /// Characteristic polynomial det(x I - A) by the Faddeev–LeVerrier
    /// recurrence (division only by small integers, valid in characteristic 0).
    pub fn charpoly(&self) -> Poly<F> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut c = vec![F::zero(); n + 1];
        c[n] = F::one();
        let mut m = Mat::zero(n, n); // M_0 = 0
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I ; c_{n-k} = -tr(A M_k)/k
            let am = self.mul(&m);
            m = am;
            for i in 0..n {
                m.a[i][i] = m.a[i][i].add(&c[n - k + 1]);
            }
            let am = self.mul(&m);
            let mut tr = F::zero();
            for i in 0..n {
                tr = tr.add(&am.a[i][i]);
            }
            c[n - k] = tr.neg().mul(&F::from_i64(k as i64).inv());
        }
        Poly::new(c)
    }

    pub fn trace(&self) -> F {
        assert_eq!(self.rows, self.cols);
        let mut t = F::zero();
        for i in 0..self.rows {
            t = t.add(&self.a[i][i]);
        }
        t
    }
}

/// Rank of a set of row vectors.
pub fn row_rank<F: Field>(rows: &[Vec<F>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    Mat::new(rows.to_vec()).rank()
}

/// Express `v` in terms of the rows of `basis` (solve x * basis = v).
pub fn in_row_span<F: Field>(basis: &[Vec<F>], v: &[F]) -> Option<Vec<F>> {
    if basis.is_empty() {
        return v.iter().all(|x| x.is_zero()).then(Vec::new);
    }
    Mat::new(basis.to_vec()).transpose().solve(v)
}
