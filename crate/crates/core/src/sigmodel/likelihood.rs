use core::f64::consts::PI;

use num_complex::Complex64;

use super::channel::ChannelRealization;
use super::grid::{ReceivedGrid, TransmitGrid};
use crate::error::{bail, Result};
use crate::numerics::{CMatrix, DftSubmatrix};

/// `ln 𝒞𝒩(y; H·s, σ²I) = −Mr·ln(πσ²) − ‖y − H·s‖²/σ²`.
pub fn subcarrier_loglik(y: &[Complex64], s: &[Complex64], h: &CMatrix, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        bail!(Domain, "noise variance must be positive, got {sigma2}");
    }
    if h.rows() != y.len() || h.cols() != s.len() {
        bail!(Dimension, "H is {}x{} but y has {} and s has {} entries", h.rows(), h.cols(), y.len(), s.len());
    }
    let hs = h.mul_vec(s);
    let resid: f64 = y.iter().zip(&hs).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(-(y.len() as f64) * libm::log(PI * sigma2) - resid / sigma2)
}

/// Full log-likelihood as a product over subcarriers and OFDM symbols.
pub fn loglik_by_subcarrier(
    y: &ReceivedGrid,
    s: &TransmitGrid,
    channel: &ChannelRealization,
    sigma2: f64,
) -> Result<f64> {
    let (n, k, _) = y.shape();
    let mut total = 0.0;
    for nn in 0..n {
        let h = channel.response(nn);
        for kk in 0..k {
            total += subcarrier_loglik(y.vector(nn, kk), s.vector(nn, kk), &h, sigma2)?;
        }
    }
    Ok(total)
}

/// Full log-likelihood as a product over receive antennas, with
/// `y_mr ~ 𝒞𝒩(Σ_mt D_mt·W·h_{mt,mr}, σ²I)` on the stacked NK-vectors.
pub fn loglik_by_receive_antenna(
    y: &ReceivedGrid,
    s: &TransmitGrid,
    channel: &ChannelRealization,
    dft: &DftSubmatrix,
    sigma2: f64,
) -> Result<f64> {
    if !(sigma2 > 0.0) {
        bail!(Domain, "noise variance must be positive, got {sigma2}");
    }
    let (n, k, mr) = y.shape();
    let mt = s.shape().2;
    let mut total = 0.0;
    for r in 0..mr {
        let y_r = y.antenna_stack(r);
        let mut mean = alloc::vec![Complex64::new(0.0, 0.0); n * k];
        for t in 0..mt {
            let h_tilde = dft.apply(channel.taps(t, r));
            let d = s.antenna_stack(t);
            for kk in 0..k {
                for nn in 0..n {
                    mean[kk * n + nn] += d[kk * n + nn] * h_tilde[nn];
                }
            }
        }
        let resid: f64 = y_r.iter().zip(&mean).map(|(a, b)| (a - b).norm_sqr()).sum();
        total += -((n * k) as f64) * libm::log(PI * sigma2) - resid / sigma2;
    }
    Ok(total)
}
