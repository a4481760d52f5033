//! Small dense linear algebra: the matrices here are at most a dozen rows.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `vᵀ · self`, i.e. `selfᵀ v`.
    pub fn tmul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j] += v[i] * self[(i, j)];
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows);
        Matrix::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * rhs[(k, j)]).sum()
        })
    }

    /// `uᵀ · self · v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(u, &self.mul_vec(v))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(libm::fabs(*x)))
    }

    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| libm::fabs(self[(i, j)])).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest |A_ij + A_ji|.
    pub fn skew_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max(libm::fabs(self[(i, j)] + self[(j, i)]));
            }
        }
        worst
    }

    /// LU factorization with partial pivoting. `None` if a pivot vanishes
    /// relative to the matrix scale.
    pub fn lu(&self) -> Option<Lu> {
        assert_eq!(self.rows, self.cols, "LU needs a square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|i| (i, libm::fabs(a[(i, k)])))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pv <= 1e-14 * scale {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            for i in (k + 1)..n {
                let f = a[(i, k)] / a[(k, k)];
                a[(i, k)] = f;
                for j in (k + 1)..n {
                    let u = a[(k, j)];
                    a[(i, j)] -= f * u;
                }
            }
        }
        Some(Lu { lu: a, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        if self.rows == 0 {
            return Some(Vec::new());
        }
        Some(self.lu()?.solve(b))
    }

    pub fn inverse(&self) -> Option<Matrix> {
        let n = self.rows;
        let lu = self.lu()?;
        let mut inv = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = lu.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Some(inv)
    }

    /// 1-norm condition number; infinite when singular.
    pub fn cond1(&self) -> f64 {
        if self.rows == 0 {
            return 1.0;
        }
        match self.inverse() {
            Some(inv) => self.norm1() * inv.norm1(),
            None => f64::INFINITY,
        }
    }

    /// Numerical rank by Gaussian elimination with full pivoting; entries
    /// below `tol · max|A|` count as zero.
    pub fn rank(&self, tol: f64) -> usize {
        let mut a = self.clone();
        let (r, c) = (self.rows, self.cols);
        let thresh = tol * self.max_abs().max(f64::MIN_POSITIVE);
        let mut rank = 0;
        let mut used_cols = vec![false; c];
        let mut used_rows = vec![false; r];
        loop {
            let mut best = (0, 0, 0.0);
            for i in (0..r).filter(|&i| !used_rows[i]) {
                for j in (0..c).filter(|&j| !used_cols[j]) {
                    let v = libm::fabs(a[(i, j)]);
                    if v > best.2 {
                        best = (i, j, v);
                    }
                }
            }
            if best.2 <= thresh {
                return rank;
            }
            let (pi, pj, _) = best;
            used_rows[pi] = true;
            used_cols[pj] = true;
            rank += 1;
            for i in (0..r).filter(|&i| !used_rows[i]) {
                let f = a[(i, pj)] / a[(pi, pj)];
                for j in 0..c {
                    let u = a[(pi, j)];
                    a[(i, j)] -= f * u;
                }
            }
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.lu[(i, k)] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= self.lu[(i, k)] * x[k];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max(libm::fabs(x - y)))
}

pub fn norm(v: &[f64]) -> f64 {
    libm::sqrt(dot(v, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_pivoting_system() {
        let a = Matrix::from_fn(3, 3, |i, j| [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]][i][j]);
        let x = a.solve(&[3.0, 2.0, 4.0]).unwrap();
        assert!(max_abs_diff(&a.mul_vec(&x), &[3.0, 2.0, 4.0]) < 1e-14);
    }

    #[test]
    fn singular_and_rank() {
        let a = Matrix::from_fn(3, 3, |i, j| (i + 1) as f64 * (j + 1) as f64);
        assert!(a.lu().is_none());
        assert_eq!(a.rank(1e-12), 1);
        assert_eq!(Matrix::identity(4).rank(1e-12), 4);
        assert_eq!(Matrix::zeros(2, 3).rank(1e-12), 0);
        assert!(a.cond1().is_infinite());
    }

    #[test]
    fn inverse_and_condition() {
        let a = Matrix::from_fn(2, 2, |i, j| [[4.0, 1.0], [2.0, 3.0]][i][j]);
        let inv = a.inverse().unwrap();
        let p = a.matmul(&inv);
        assert!(max_abs_diff(&[p[(0, 0)], p[(0, 1)], p[(1, 0)], p[(1, 1)]], &[1.0, 0.0, 0.0, 1.0]) < 1e-15);
        assert!((Matrix::identity(3).cond1() - 1.0).abs() < 1e-15);
    }
}
