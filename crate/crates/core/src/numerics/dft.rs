use core::f64::consts::PI;

use num_complex::Complex64;
use crate::prelude::*;

use super::linalg::CMatrix;
use crate::error::{bail, Result};

/// First `L` columns of the unnormalized `N`-point DFT matrix:
/// `entry(n, l) = exp(-j·2π·n·l/N)`.
///
/// No `1/√N` scaling is applied; any unitary rescaling would be absorbed by
/// the channel prior anyway.
#[derive(Debug, Clone, PartialEq)]
pub struct DftSubmatrix {
    n: usize,
    l: usize,
    entries: Vec<Complex64>,
}

impl DftSubmatrix {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if n == 0 || l == 0 {
            bail!(Dimension, "DFT submatrix needs positive dimensions, got N={n}, L={l}");
        }
        if l > n {
            bail!(Dimension, "tap count L={l} exceeds subcarrier count N={n}");
        }
        let mut entries = Vec::with_capacity(n * l);
        for row in 0..n {
            for col in 0..l {
                // reduce n·l mod N before scaling so large grids keep full precision
                let phase = -2.0 * PI * ((row * col) % n) as f64 / n as f64;
                entries.push(Complex64::new(phase.cos(), phase.sin()));
            }
        }
        Ok(Self { n, l, entries })
    }

    pub fn subcarriers(&self) -> usize {
        self.n
    }

    pub fn taps(&self) -> usize {
        self.l
    }

    #[inline]
    pub fn entry(&self, n: usize, l: usize) -> Complex64 {
        self.entries[n * self.l + l]
    }

    /// Row `n` of W, i.e. `W_(n,·)`.
    #[inline]
    pub fn row(&self, n: usize) -> &[Complex64] {
        &self.entries[n * self.l..(n + 1) * self.l]
    }

    /// `W·h`, the frequency response of time-domain taps `h`.
    pub fn apply(&self, h: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(h.len(), self.l);
        (0..self.n).map(|n| self.row_dot(n, h)).collect()
    }

    /// `(W·h)[n]`.
    #[inline]
    pub fn row_dot(&self, n: usize, h: &[Complex64]) -> Complex64 {
        self.row(n).iter().zip(h).map(|(w, x)| w * x).sum()
    }

    /// `Wᴴ·Diag(weights)·W` for real nonnegative per-subcarrier weights.
    pub fn weighted_gram(&self, weights: &[f64]) -> CMatrix {
        debug_assert_eq!(weights.len(), self.n);
        let mut g = CMatrix::zeros(self.l, self.l);
        for (n, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let row = self.row(n);
            for i in 0..self.l {
                let wi = row[i].conj() * w;
                for j in 0..self.l {
                    g[(i, j)] += wi * row[j];
                }
            }
        }
        g
    }

    /// `Wᴴ·v` for an `N`-vector `v`.
    pub fn adjoint_apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(v.len(), self.n);
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); self.l];
        for (n, x) in v.iter().enumerate() {
            for (o, w) in out.iter_mut().zip(self.row(n)) {
                *o += w.conj() * x;
            }
        }
        out
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.n, self.l, |r, c| self.entry(r, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_entries() {
        let w = DftSubmatrix::new(4, 2).unwrap();
        assert_eq!(w.row(0), &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!((w.entry(1, 1) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn columns_are_orthogonal() {
        for &(n, l) in &[(4usize, 4usize), (8, 3), (64, 5), (128, 7), (128, 128)] {
            let w = DftSubmatrix::new(n, l).unwrap();
            let g = w.weighted_gram(&alloc::vec![1.0; n]);
            for i in 0..l {
                for j in 0..l {
                    let want = if i == j { n as f64 } else { 0.0 };
                    assert!((g[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-9, "N={n} L={l} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn unit_modulus() {
        let w = DftSubmatrix::new(64, 5).unwrap();
        for n in 0..64 {
            for l in 0..5 {
                assert!((w.entry(n, l).norm() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bad_dimensions() {
        assert!(matches!(DftSubmatrix::new(4, 5), Err(crate::Error::Dimension(_))));
        assert!(DftSubmatrix::new(0, 1).is_err());
        assert!(DftSubmatrix::new(4, 0).is_err());
    }

    #[test]
    fn adjoint_apply_matches_matrix() {
        let w = DftSubmatrix::new(8, 3).unwrap();
        let v: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let got = w.adjoint_apply(&v);
        let want = w.to_matrix().adjoint().mul_vec(&v);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
