//! Small dense complex matrices: just enough for Hermitian positive-definite
//! solves and Gaussian sampling on L×L blocks.

use core::ops::{Index, IndexMut};

use num_complex::Complex64;
use crate::prelude::*;

use crate::error::{bail, Result};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, scale: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(scale, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            bail!(Dimension, "expected {} entries for a {}x{} matrix, got {}", rows * cols, rows, cols, data.len());
        }
        Ok(Self { rows, cols, data })
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

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            bail!(Dimension, "cannot multiply {}x{} by {}x{}", self.rows, self.cols, rhs.rows, rhs.cols);
        }
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn add_diagonal(&mut self, value: f64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)].re += value;
        }
    }

    /// Forces exact Hermitian symmetry by averaging with the adjoint.
    pub fn symmetrize(&mut self) {
        for i in 0..self.rows {
            self[(i, i)].im = 0.0;
            for j in (i + 1)..self.cols {
                let avg = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                self[(i, j)] = avg;
                self[(j, i)] = avg.conj();
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for z in &mut self.data {
            *z *= factor;
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Lower-triangular Cholesky factor `L` with `L·Lᴴ = A`.
///
/// Returns `None` when a pivot is not strictly positive.
pub fn cholesky(a: &CMatrix) -> Option<CMatrix> {
    let n = a.rows;
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

const JITTER_START: f64 = 1e-12;
const JITTER_LIMIT: f64 = 1e-6;

/// Cholesky factor of a Hermitian PSD matrix, retrying with a diagonal
/// jitter of `1e-12·tr(A)/d` (escalated up to `1e-6·tr(A)/d`) on failure.
///
/// Returns `Ok(None)` for the zero matrix.
pub fn psd_factor(a: &CMatrix) -> Result<Option<CMatrix>> {
    if !a.is_square() {
        bail!(Dimension, "covariance must be square, got {}x{}", a.rows, a.cols);
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(None);
    }
    if a.hermitian_defect() > 1e-9 * scale {
        bail!(Numerical, "matrix is not Hermitian (defect {:e})", a.hermitian_defect());
    }
    if let Some(l) = cholesky(a) {
        return Ok(Some(l));
    }
    let n = a.rows as f64;
    let base = a.trace().re / n;
    if !(base > 0.0) {
        bail!(Numerical, "matrix with nonpositive trace is not positive semidefinite");
    }
    let mut rel = JITTER_START;
    while rel <= JITTER_LIMIT * 1.0001 {
        let mut jittered = a.clone();
        jittered.add_diagonal(rel * base);
        if let Some(l) = cholesky(&jittered) {
            return Ok(Some(l));
        }
        rel *= 100.0;
    }
    bail!(Numerical, "factorization failed beyond jitter tolerance; matrix is indefinite")
}

/// Solves `L·x = b` for lower-triangular `L`.
pub fn forward_substitute(l: &CMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let n = l.rows;
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves `Lᴴ·x = b` for lower-triangular `L`.
pub fn backward_substitute_adjoint(l: &CMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let n = l.rows;
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[(k, i)].conj() * x[k];
        }
        x[i] = s / l[(i, i)].re;
    }
    x
}

/// Inverse of a Hermitian positive-definite matrix.
pub fn inverse_hpd(a: &CMatrix) -> Result<CMatrix> {
    let l = match psd_factor(a)? {
        Some(l) => l,
        None => bail!(Numerical, "cannot invert the zero matrix"),
    };
    let n = a.rows;
    let mut inv = CMatrix::zeros(n, n);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        e.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        e[c] = Complex64::new(1.0, 0.0);
        let y = forward_substitute(&l, &e);
        let x = backward_substitute_adjoint(&l, &y);
        for r in 0..n {
            inv[(r, c)] = x[r];
        }
    }
    inv.symmetrize();
    Ok(inv)
}

/// `ln det A` for Hermitian positive-definite `A`.
pub fn ln_det_hpd(a: &CMatrix) -> Result<f64> {
    match psd_factor(a)? {
        Some(l) => Ok((0..a.rows).map(|i| 2.0 * l[(i, i)].re.ln()).sum()),
        None => bail!(Numerical, "determinant of the zero matrix is not positive"),
    }
}
