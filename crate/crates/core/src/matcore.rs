//! Small dense complex matrices.
//!
//! Sizes here never exceed a few dozen rows (an `N x N` field matrix, or the
//! `K N x K N` deleted block of a quasideterminant), so everything is a flat
//! row-major `Vec` with LU factorization by partial pivoting.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, ONE)
    }

    /// `c * I`.
    pub fn scalar(n: usize, c: Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = c;
        }
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self> {
        let n = columns.len();
        let mut m = Self::zeros(n);
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: col.len(),
                });
            }
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[Complex64]) {
        for (i, &v) in col.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    /// Matrix product; fails when the dimensions differ.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n, "vector length must match matrix size");
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = self.data[j * n + i].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| v * c).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn max_row_norm(&self) -> f64 {
        self.data
            .chunks(self.n.max(1))
            .map(|row| row.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `[a, b] = ab - ba`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn lu(&self) -> Lu {
        Lu::factor(self)
    }

    /// Determinant by LU with partial pivoting. A zero determinant is a value,
    /// not an error.
    pub fn det(&self) -> Complex64 {
        if self.n == 0 {
            return ONE;
        }
        self.lu().det()
    }

    /// Inverse with the default pivot gate (`1e-12` of the max row norm).
    pub fn invert(&self) -> Result<Self> {
        self.invert_with(1e-12)
    }

    pub fn invert_with(&self, pivot_rel: f64) -> Result<Self> {
        self.lu().inverse(pivot_rel)
    }

    /// `||a||_1 * ||a^-1||_1`, or infinity when `a` is singular to tolerance.
    pub fn condition_estimate(&self) -> f64 {
        match self.invert() {
            Ok(inv) => self.norm_one() * inv.norm_one(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Scales every column to unit Euclidean norm and returns the scale factors.
    pub fn normalize_columns(&self) -> Result<(Self, Vec<f64>)> {
        let mut out = self.clone();
        let mut norms = Vec::with_capacity(self.n);
        for j in 0..self.n {
            let norm = (0..self.n)
                .map(|i| self[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::ZeroNormColumn(j));
            }
            for i in 0..self.n {
                out[(i, j)] = self[(i, j)] / norm;
            }
            norms.push(norm);
        }
        Ok((out, norms))
    }

    /// Distance of the matrix from `Span{I}`: `||a - (tr a / n) I||_F`.
    pub fn distance_from_identity_span(&self) -> f64 {
        let c = self.trace() / self.n as f64;
        (self - &Self::scalar(self.n, c)).frobenius_norm()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.n, self.n)?;
        for row in self.data.chunks(self.n.max(1)) {
            let cells: Vec<String> = row
                .iter()
                .map(|v| format!("{:+.6e}{:+.6e}i", v.re, v.im))
                .collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

// Operator forms panic on dimension mismatch; `multiply` is the checked route.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.multiply(rhs).expect("matrix dimensions must agree")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimensions must agree");
        ComplexMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimensions must agree");
        ComplexMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale(-ONE)
    }
}

/// LU factorization `P A = L U` with partial (row) pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    swaps: usize,
    max_row_norm: f64,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Self {
        let n = a.n;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let (p, _) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[k * n + k];
            if pivot == ZERO {
                continue;
            }
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= factor * u;
                }
            }
        }
        Self {
            n,
            lu,
            perm,
            swaps,
            max_row_norm: a.max_row_norm(),
        }
    }

    pub fn det(&self) -> Complex64 {
        let sign = if self.swaps.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        (0..self.n)
            .map(|k| self.lu[k * self.n + k])
            .product::<Complex64>()
            * sign
    }

    /// Smallest pivot magnitude.
    pub fn min_pivot(&self) -> f64 {
        (0..self.n)
            .map(|k| self.lu[k * self.n + k].norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Fails when some pivot falls below `pivot_rel * max row norm`.
    pub fn check_regular(&self, pivot_rel: f64, context: &'static str) -> Result<()> {
        let threshold = pivot_rel * self.max_row_norm;
        let pivot = self.min_pivot();
        if self.n > 0 && (pivot.is_nan() || pivot <= threshold || !pivot.is_finite()) {
            return Err(Error::Singular {
                context,
                pivot,
                threshold,
            });
        }
        Ok(())
    }

    /// Solves `A X = B` in place where `b` is an `n x ncols` row-major block.
    pub fn solve_in_place(&self, b: &mut [Complex64], ncols: usize) {
        let n = self.n;
        assert_eq!(b.len(), n * ncols, "right-hand side has wrong size");
        let mut x = vec![ZERO; n * ncols];
        for (i, &p) in self.perm.iter().enumerate() {
            x[i * ncols..(i + 1) * ncols].copy_from_slice(&b[p * ncols..(p + 1) * ncols]);
        }
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[i * n + k];
                if l == ZERO {
                    continue;
                }
                for c in 0..ncols {
                    let v = x[k * ncols + c];
                    x[i * ncols + c] -= l * v;
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[i * n + k];
                if u == ZERO {
                    continue;
                }
                for c in 0..ncols {
                    let v = x[k * ncols + c];
                    x[i * ncols + c] -= u * v;
                }
            }
            let d = self.lu[i * n + i];
            for c in 0..ncols {
                x[i * ncols + c] /= d;
            }
        }
        b.copy_from_slice(&x);
    }

    pub fn inverse(&self, pivot_rel: f64) -> Result<ComplexMatrix> {
        self.check_regular(pivot_rel, "inverse")?;
        let mut id = ComplexMatrix::identity(self.n);
        self.solve_in_place(&mut id.data, self.n);
        Ok(id)
    }
}
