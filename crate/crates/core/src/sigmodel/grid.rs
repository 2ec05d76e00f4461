use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

/// Complex samples indexed by (subcarrier n, OFDM symbol k, antenna m).
///
/// Storage is `(k, n, m)`-lexicographic, the same order the samplers sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    k: usize,
    m: usize,
    data: Vec<Complex64>,
}

/// Symbols `s[n, k, mt]` sent by each transmit antenna.
pub type TransmitGrid = Grid;
/// Samples `y[n, k, mr]` seen at each receive antenna.
pub type ReceivedGrid = Grid;

impl Grid {
    pub fn zeros(n: usize, k: usize, m: usize) -> Self {
        Self {
            n,
            k,
            m,
            data: vec![Complex64::new(0.0, 0.0); n * k * m],
        }
    }

    pub fn from_fn(n: usize, k: usize, m: usize, mut f: impl FnMut(usize, usize, usize) -> Complex64) -> Self {
        let mut g = Self::zeros(n, k, m);
        for kk in 0..k {
            for nn in 0..n {
                for mm in 0..m {
                    let i = g.offset(nn, kk, mm);
                    g.data[i] = f(nn, kk, mm);
                }
            }
        }
        g
    }

    /// `(N, K, M)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n, self.k, self.m)
    }

    #[inline]
    fn offset(&self, n: usize, k: usize, m: usize) -> usize {
        debug_assert!(n < self.n && k < self.k && m < self.m);
        (k * self.n + n) * self.m + m
    }

    #[inline]
    pub fn get(&self, n: usize, k: usize, m: usize) -> Complex64 {
        self.data[self.offset(n, k, m)]
    }

    #[inline]
    pub fn set(&mut self, n: usize, k: usize, m: usize, value: Complex64) {
        let i = self.offset(n, k, m);
        self.data[i] = value;
    }

    /// The antenna vector at `(n, k)`.
    #[inline]
    pub fn vector(&self, n: usize, k: usize) -> &[Complex64] {
        let start = self.offset(n, k, 0);
        &self.data[start..start + self.m]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Stacked per-antenna vector `[x[·,1]ᵀ, …, x[·,K]ᵀ]ᵀ` of length NK.
    pub fn antenna_stack(&self, m: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.n * self.k);
        for k in 0..self.k {
            for n in 0..self.n {
                out.push(self.get(n, k, m));
            }
        }
        out
    }
}
