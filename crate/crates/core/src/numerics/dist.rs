//! Samplers for the prior families used by the model.

use num_complex::Complex64;
use crate::prelude::*;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::linalg::{psd_factor, CMatrix};
use super::rng::RandomStream;
use crate::error::{bail, Result};

/// ln of a Gamma(shape, 1) variate. Shapes below one go through
/// `G(a) = G(a+1)·U^(1/a)` in log space, so tiny shapes never underflow.
fn ln_gamma_variate(shape: f64, rng: &mut RandomStream) -> f64 {
    if shape >= 1.0 {
        let g: f64 = Gamma::new(shape, 1.0).expect("validated shape").sample(rng);
        g.ln()
    } else {
        let g: f64 = Gamma::new(shape + 1.0, 1.0).expect("validated shape").sample(rng);
        // 1 - uniform lies in (0, 1]
        let u = 1.0 - rng.uniform();
        g.ln() + u.ln() / shape
    }
}

/// Gamma(shape, scale) draw.
pub fn sample_gamma(shape: f64, scale: f64, rng: &mut RandomStream) -> Result<f64> {
    if !(shape > 0.0 && scale > 0.0) || !shape.is_finite() || !scale.is_finite() {
        bail!(Domain, "gamma parameters must be finite and positive, got shape={shape}, scale={scale}");
    }
    Ok(scale * ln_gamma_variate(shape, rng).exp())
}

/// Dirichlet draw via normalized independent Gamma variates.
pub fn sample_dirichlet(params: &[f64], rng: &mut RandomStream) -> Result<Vec<f64>> {
    if params.is_empty() {
        bail!(Domain, "Dirichlet needs at least one parameter");
    }
    if let Some(bad) = params.iter().find(|&&p| !(p > 0.0) || !p.is_finite()) {
        bail!(Domain, "Dirichlet parameters must be positive, got {bad}");
    }
    let logs: Vec<f64> = params.iter().map(|&p| ln_gamma_variate(p, rng)).collect();
    let mut out = logs;
    normalize_log_weights(&mut out);
    Ok(out)
}

/// Inverse-gamma draw with density ∝ z^(−a−1)·exp(−b/z), as `b / Gamma(a, 1)`.
///
/// The result is clamped to the positive finite range of `f64`.
pub fn sample_inverse_gamma(shape: f64, scale: f64, rng: &mut RandomStream) -> Result<f64> {
    if !(shape > 0.0 && scale > 0.0) || !shape.is_finite() || !scale.is_finite() {
        bail!(Domain, "inverse-gamma parameters must be finite and positive, got a={shape}, b={scale}");
    }
    let ln_z = scale.ln() - ln_gamma_variate(shape, rng);
    Ok(ln_z.exp().clamp(f64::MIN_POSITIVE, f64::MAX))
}

/// Standard circular complex normal 𝒞𝒩(0, 1): real and imaginary parts
/// each carry variance 1/2.
pub fn standard_complex_normal(rng: &mut RandomStream) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// Draw from 𝒞𝒩(mean, cov) using a Hermitian square-root factor of `cov`.
pub fn sample_complex_gaussian(mean: &[Complex64], cov: &CMatrix, rng: &mut RandomStream) -> Result<Vec<Complex64>> {
    if cov.rows() != mean.len() || cov.cols() != mean.len() {
        bail!(Dimension, "covariance is {}x{} but mean has length {}", cov.rows(), cov.cols(), mean.len());
    }
    let factor = match psd_factor(cov)? {
        Some(l) => l,
        None => return Ok(mean.to_vec()),
    };
    let w: Vec<Complex64> = (0..mean.len()).map(|_| standard_complex_normal(rng)).collect();
    let mut out = factor.mul_vec(&w);
    for (o, m) in out.iter_mut().zip(mean) {
        *o += m;
    }
    Ok(out)
}

/// Turns log-weights into probabilities in place (max-shifted softmax).
pub fn normalize_log_weights(weights: &mut [f64]) {
    let max = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for w in weights.iter_mut() {
        *w = (*w - max).exp();
        total += *w;
    }
    for w in weights.iter_mut() {
        *w /= total;
    }
}

/// Inverse-CDF draw from a normalized pmf. Ties at the boundary resolve to
/// the last index with positive mass.
pub fn sample_categorical(probs: &[f64], rng: &mut RandomStream) -> usize {
    let u = rng.uniform();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last
}
