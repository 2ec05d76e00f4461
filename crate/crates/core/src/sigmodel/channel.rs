
use num_complex::Complex64;
use crate::prelude::*;

use crate::error::{bail, Result};
use crate::numerics::{standard_complex_normal, CMatrix, DftSubmatrix, RandomStream};

/// Time-domain taps for every (transmit, receive) antenna pair, together with
/// the frequency responses `W·h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    mt: usize,
    mr: usize,
    taps: Vec<Vec<Complex64>>,
    freq: Vec<Vec<Complex64>>,
}

impl ChannelRealization {
    /// `taps` is indexed by `mr·Mt + mt`; every entry has length `W.taps()`.
    pub fn from_taps(mt: usize, mr: usize, taps: Vec<Vec<Complex64>>, dft: &DftSubmatrix) -> Result<Self> {
        if taps.len() != mt * mr {
            bail!(Dimension, "expected {} tap vectors, got {}", mt * mr, taps.len());
        }
        if let Some(bad) = taps.iter().find(|h| h.len() != dft.taps()) {
            bail!(Dimension, "tap vector has length {}, expected {}", bad.len(), dft.taps());
        }
        let freq = taps.iter().map(|h| dft.apply(h)).collect();
        Ok(Self { mt, mr, taps, freq })
    }

    pub fn transmit_antennas(&self) -> usize {
        self.mt
    }

    pub fn receive_antennas(&self) -> usize {
        self.mr
    }

    /// `h_{mt,mr}`.
    pub fn taps(&self, mt: usize, mr: usize) -> &[Complex64] {
        &self.taps[mr * self.mt + mt]
    }

    /// `h̃_{mt,mr} = W·h_{mt,mr}`.
    pub fn frequency(&self, mt: usize, mr: usize) -> &[Complex64] {
        &self.freq[mr * self.mt + mt]
    }

    /// `H[n]`, the Mr×Mt matrix at subcarrier `n`.
    pub fn response(&self, n: usize) -> CMatrix {
        CMatrix::from_fn(self.mr, self.mt, |r, t| self.frequency(t, r)[n])
    }

    pub fn energy(&self, mt: usize, mr: usize) -> f64 {
        self.taps(mt, mr).iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Converts a dB power profile to linear powers summing to one.
pub fn normalized_tap_powers(tap_powers_db: &[f64]) -> Vec<f64> {
    let lin: Vec<f64> = tap_powers_db.iter().map(|db| 10f64.powf(db / 10.0)).collect();
    let total: f64 = lin.iter().sum();
    lin.into_iter().map(|p| p / total).collect()
}

/// Independent Rayleigh taps `h[l] ~ 𝒞𝒩(0, p_l)` with `Σ p_l = 1`, so that
/// `E‖h_{mt,mr}‖² = 1`.
pub fn draw_taps(tap_powers_db: &[f64], mt: usize, mr: usize, rng: &mut RandomStream) -> Vec<Vec<Complex64>> {
    let powers = normalized_tap_powers(tap_powers_db);
    (0..mt * mr)
        .map(|_| powers.iter().map(|p| standard_complex_normal(rng) * p.sqrt()).collect())
        .collect()
}
