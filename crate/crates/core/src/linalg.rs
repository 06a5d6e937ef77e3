//! Small dense complex linear algebra.
//!
//! Everything here operates on matrices of dimension at most 16, so the
//! routines favour clarity over blocking or SIMD.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Tolerance used when checking orthonormality of constructed bases.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance for `A · A⁻¹ = I` round trips.
pub const INVERSION_TOL: f64 = 1e-9;
/// Condition-number estimate above which a matrix is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Largest dimension the toolkit is meant for.
pub const MAX_DIM: usize = 16;

/// Draws a circularly-symmetric complex Gaussian with `E|z|² = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Unconjugated bilinear product `vᵀ h`.
pub fn dot_t(v: &[Complex64], h: &[Complex64]) -> Complex64 {
    v.iter().zip(h).map(|(a, b)| a * b).sum()
}

/// Hermitian inner product `vᴴ h`.
pub fn dot_h(v: &[Complex64], h: &[Complex64]) -> Complex64 {
    v.iter().zip(h).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Column-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidDimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = entries[r * cols + c];
            }
        }
        Ok(m)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Result<Self> {
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::InvalidDimension(format!(
                "column of length {} in a matrix with {rows} rows",
                bad.len()
            )));
        }
        Ok(ComplexMatrix {
            rows,
            cols: columns.len(),
            data: columns.concat(),
        })
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, c: usize) -> &[Complex64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn column_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// Copies the half-open column range `[start, end)` into a new matrix.
    pub fn columns(&self, start: usize, end: usize) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: end - start,
            data: self.data[start * self.rows..end * self.rows].to_vec(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::InvalidDimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for c in 0..rhs.cols {
            for k in 0..self.cols {
                let b = rhs[(k, c)];
                for r in 0..self.rows {
                    out.data[c * self.rows + r] += self.data[k * self.rows + r] * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::InvalidDimension(format!(
                "cannot multiply {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for (c, &x) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.column(c)) {
                *o += a * x;
            }
        }
        Ok(out)
    }

    /// `selfᴴ v` without materialising the adjoint.
    pub fn adjoint_mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.rows {
            return Err(Error::InvalidDimension(format!(
                "cannot multiply adjoint of {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.cols).map(|c| dot_h(self.column(c), v)).collect())
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-abs deviation of `selfᴴ self` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let gram = self.adjoint().mul(self).expect("square gram");
        gram.max_abs_diff(&ComplexMatrix::identity(self.cols))
    }

    /// Induced 1-norm (max column sum).
    fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|c| self.column(c).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[c * self.rows + r]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[c * self.rows + r]
    }
}

/// Orthonormalises the columns in place with modified Gram-Schmidt and one
/// re-orthogonalisation pass. Returns the diagonal of `R`.
fn gram_schmidt(m: &mut ComplexMatrix) -> Vec<f64> {
    let mut diag = Vec::with_capacity(m.cols);
    for c in 0..m.cols {
        for _pass in 0..2 {
            for p in 0..c {
                let (prev, cur) = m.data.split_at_mut(c * m.rows);
                let q = &prev[p * m.rows..(p + 1) * m.rows];
                let cur = &mut cur[..m.rows];
                let proj = dot_h(q, cur);
                for (x, qi) in cur.iter_mut().zip(q) {
                    *x -= qi * proj;
                }
            }
        }
        let col = m.column_mut(c);
        let norm = norm_sqr(col).sqrt();
        for x in col.iter_mut() {
            *x /= norm;
        }
        diag.push(norm);
    }
    diag
}

/// Draws a Haar-distributed `dim × dim` unitary matrix.
///
/// The columns of an i.i.d. standard complex Gaussian matrix are
/// orthonormalised by Gram-Schmidt. Gram-Schmidt yields the QR factor with a
/// real positive diagonal in `R`, which is the phase normalisation that makes
/// `Q` exactly Haar distributed.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension(
            "unitary dimension must be >= 1".into(),
        ));
    }
    if dim > MAX_DIM {
        return Err(Error::InvalidDimension(format!(
            "unitary dimension {dim} exceeds {MAX_DIM}"
        )));
    }
    loop {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for z in m.data.iter_mut() {
            *z = complex_normal(rng);
        }
        let diag = gram_schmidt(&mut m);
        // A numerically rank-deficient Gaussian draw has probability zero.
        if diag.iter().all(|&d| d > 1e-8) {
            return Ok(m);
        }
    }
}

/// Splits a random orthonormal basis of `C^m` into an interference space
/// `Q` (`m × (m − s)`) and a signal space `U = null(Q)` (`m × s`).
pub fn split_spaces<R: Rng + ?Sized>(
    m: usize,
    s: usize,
    rng: &mut R,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if s == 0 || s > m {
        return Err(Error::config(
            "S",
            format!("streams S={s} must satisfy 1 <= S <= M={m}"),
        ));
    }
    let basis = random_unitary(m, rng)?;
    Ok((basis.columns(0, m - s), basis.columns(m - s, m)))
}

/// Projects `h` onto the signal space spanned by the columns of `u`,
/// returning the coordinates `Uᴴ h`.
pub fn project_signal(u: &ComplexMatrix, h: &[Complex64]) -> Result<Vec<Complex64>> {
    u.adjoint_mul_vec(h)
}

/// Inverts a small square matrix by Gauss-Jordan elimination with partial
/// pivoting.
pub fn invert_small(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::InvalidDimension(format!(
            "cannot invert a {}x{} matrix",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    if n == 0 {
        return Err(Error::InvalidDimension(
            "cannot invert an empty matrix".into(),
        ));
    }
    let a_norm = a.norm_one();
    let singular = |condition: f64| Error::Singular { condition };
    if a_norm == 0.0 || !a_norm.is_finite() {
        return Err(singular(f64::INFINITY));
    }

    let mut work = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| work[(i, col)].norm().total_cmp(&work[(j, col)].norm()))
            .unwrap();
        if work[(pivot, col)].norm() <= a_norm * f64::EPSILON {
            return Err(singular(f64::INFINITY));
        }
        if pivot != col {
            for c in 0..n {
                let tmp = work[(col, c)];
                work[(col, c)] = work[(pivot, c)];
                work[(pivot, c)] = tmp;
                let tmp = inv[(col, c)];
                inv[(col, c)] = inv[(pivot, c)];
                inv[(pivot, c)] = tmp;
            }
        }
        let p = work[(col, col)].inv();
        for c in 0..n {
            work[(col, c)] *= p;
            inv[(col, c)] *= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = work[(r, col)];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..n {
                let wc = work[(col, c)];
                let ic = inv[(col, c)];
                work[(r, c)] -= f * wc;
                inv[(r, c)] -= f * ic;
            }
        }
    }

    let condition = a_norm * inv.norm_one();
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(singular(condition));
    }
    Ok(inv)
}
