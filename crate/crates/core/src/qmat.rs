//! Exact rational dense matrices and the small amount of linear algebra the
//! identity suites need: products, inverses, determinants, rank, null spaces
//! and span membership, all over Q with no tolerances.

use crate::arith::Rat;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Sub};

#[derive(Clone, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| crate::arith::format_rat(&self[(i, j)]))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

impl QMat {
    pub fn zero(rows: usize, cols: usize) -> QMat {
        QMat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> QMat {
        let mut m = QMat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> QMat {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        assert!(rows.iter().all(|row| row.len() == c));
        QMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> QMat {
        let mut m = QMat::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &Rat> {
        self.data.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == QMat::identity(self.rows)
    }

    pub fn transpose(&self) -> QMat {
        QMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, c: &Rat) -> QMat {
        QMat::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] * c)
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Rat::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn trace(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).fold(Rat::zero(), |acc, i| acc + &self[(i, i)])
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<QMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = QMat::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] = &a[(col, j)] / &p;
                inv[(col, j)] = &inv[(col, j)] / &p;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in 0..n {
                    let t = &a[(col, j)] * &f;
                    a[(r, j)] = &a[(r, j)] - &t;
                    let t = &inv[(col, j)] * &f;
                    inv[(r, j)] = &inv[(r, j)] - &t;
                }
            }
        }
        Some(inv)
    }

    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rat::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return Rat::zero();
            };
            if pivot != col {
                a.swap_rows(pivot, col);
                det = -det;
            }
            let p = a[(col, col)].clone();
            det *= &p;
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = &a[(r, col)] / &p;
                for j in col..n {
                    let t = &a[(col, j)] * &f;
                    a[(r, j)] = &a[(r, j)] - &t;
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Row echelon form in place; returns the pivot columns.
    fn row_reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, col)].is_zero()) else {
                continue;
            };
            self.swap_rows(p, r);
            let pv = self[(r, col)].clone();
            for j in col..self.cols {
                self[(r, j)] = &self[(r, j)] / &pv;
            }
            for i in 0..self.rows {
                if i == r || self[(i, col)].is_zero() {
                    continue;
                }
                let f = self[(i, col)].clone();
                for j in col..self.cols {
                    let t = &self[(r, j)] * &f;
                    self[(i, j)] = &self[(i, j)] - &t;
                }
            }
            pivots.push(col);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        a.row_reduce().len()
    }

    /// Basis of the right null space {x : Ax = 0}.
    pub fn null_space(&self) -> Vec<Vec<Rat>> {
        let mut a = self.clone();
        let pivots = a.row_reduce();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::new();
        for &fc in &free {
            let mut v = vec![Rat::zero(); self.cols];
            v[fc] = Rat::one();
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[(ri, fc)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Whether v lies in the column span of this matrix (columns as vectors).
    pub fn spans(&self, v: &[Rat]) -> bool {
        assert_eq!(self.rows, v.len());
        let mut aug = QMat::zero(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = v[i].clone();
        }
        self.rank() == aug.rank()
    }

    /// Equality modulo a nonzero rational scalar.
    pub fn projectively_eq(&self, other: &QMat) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        let Some(k) = (0..self.data.len()).find(|&k| !self.data[k].is_zero()) else {
            return other.is_zero();
        };
        if other.data[k].is_zero() {
            return false;
        }
        let c = &other.data[k] / &self.data[k];
        if c.is_zero() {
            return false;
        }
        self.data
            .iter()
            .zip(&other.data)
            .all(|(a, b)| &(a * &c) == b)
    }

    pub fn max_abs_entry(&self) -> Rat {
        self.data
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(crate::arith::rat_to_f64).collect())
            .collect()
    }
}

impl Mul for &QMat {
    type Output = QMat;
    fn mul(self, rhs: &QMat) -> QMat {
        assert_eq!(self.cols, rhs.rows);
        let mut out = QMat::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let t = a * &rhs[(k, j)];
                    out[(i, j)] = &out[(i, j)] + &t;
                }
            }
        }
        out
    }
}

impl Add for &QMat {
    type Output = QMat;
    fn add(self, rhs: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMat::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] + &rhs[(i, j)])
    }
}

impl Sub for &QMat {
    type Output = QMat;
    fn sub(self, rhs: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMat::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] - &rhs[(i, j)])
    }
}

/// Span of a list of vectors, as a matrix whose columns are the vectors.
pub fn span_matrix(vectors: &[Vec<Rat>]) -> QMat {
    if vectors.is_empty() {
        return QMat::zero(0, 0);
    }
    let n = vectors[0].len();
    QMat::from_fn(n, vectors.len(), |i, j| vectors[j][i].clone())
}

/// Whether every vector of `sub` lies in the span of `sup`.
pub fn subspace_contained(sub: &[Vec<Rat>], sup: &[Vec<Rat>]) -> bool {
    if sub.is_empty() {
        return true;
    }
    let m = span_matrix(sup);
    sub.iter().all(|v| m.spans(v))
}
