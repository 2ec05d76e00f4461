use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::gibbs::{GibbsSampler, InferenceConfig, Model, PosteriorSample};
use crate::numerics::{sample_complex_gaussian, CMatrix, RandomStream};
use crate::prelude::*;

/// The factorized approximation `q(p_A)·Π q(s)·Π q(h)·q(σ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldState {
    /// Dirichlet parameters γ̃ of q(p_A).
    pub gamma_tilde: Vec<f64>,
    /// Categorical pmfs over the candidate space, one block of
    /// `model.candidates().len()` per symbol in `(k, n, mt)` order.
    pub symbol_pmfs: Vec<f64>,
    /// Means ĥ of q(h), `(mr, mt)` order.
    pub h_mean: Vec<Vec<Complex64>>,
    /// Covariances Σ̂ of q(h), `(mr, mt)` order.
    pub h_cov: Vec<CMatrix>,
    /// Inverse-gamma shape of q(σ²).
    pub alpha: f64,
    /// Inverse-gamma scale of q(σ²).
    pub beta: f64,
}

impl MeanFieldState {
    /// Initialization consistent with the priors: γ̃ = γ, uniform symbol
    /// pmfs, Σ̂ = alpha_h·I and (α, β) = (α₀, β₀). The channel means are
    /// drawn from the prior rather than set to zero, because ĥ = 0 together
    /// with rotation-symmetric symbol pmfs is a fixed point of the updates.
    pub fn from_prior(model: &Model, config: &InferenceConfig, rng: &mut RandomStream) -> Result<Self> {
        config.validate(model.labels())?;
        let d = model.dims();
        let c = model.candidates().len();
        let scale = if config.alpha_h.is_finite() { config.alpha_h } else { 1.0 };
        let cov = CMatrix::scaled_identity(d.l_hat, scale);
        let zero = vec![Complex64::new(0.0, 0.0); d.l_hat];
        let h_mean = (0..d.mt * d.mr)
            .map(|_| sample_complex_gaussian(&zero, &cov, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            gamma_tilde: config.gamma.clone(),
            symbol_pmfs: vec![1.0 / c as f64; d.symbol_count() * c],
            h_mean,
            h_cov: vec![cov; d.mt * d.mr],
            alpha: config.alpha0,
            beta: config.beta0,
        })
    }

    /// Each factor set from the matching Gibbs full conditional at the
    /// sampler's current state: Dirichlet(γ + c), the symbol pmfs,
    /// 𝒞𝒩(ĥ, Σ̂) and 𝒢⁻¹(α′(m), β) at iteration `iteration`.
    pub fn from_gibbs(sampler: &GibbsSampler<'_>, iteration: usize) -> Result<Self> {
        let model = sampler.model();
        let d = *model.dims();
        let mut symbol_pmfs = Vec::with_capacity(d.symbol_count() * model.candidates().len());
        for k in 0..d.k {
            for n in 0..d.n {
                for mt in 0..d.mt {
                    symbol_pmfs.extend(sampler.symbol_pmf(n, k, mt));
                }
            }
        }
        let mut h_mean = Vec::with_capacity(d.mt * d.mr);
        let mut h_cov = Vec::with_capacity(d.mt * d.mr);
        for mr in 0..d.mr {
            for mt in 0..d.mt {
                let (m, c) = sampler.channel_conditional(mt, mr)?;
                h_mean.push(m);
                h_cov.push(c);
            }
        }
        let (alpha, beta) = sampler.noise_posterior_params(iteration);
        let state = Self {
            gamma_tilde: sampler.mixture_posterior_params(),
            symbol_pmfs,
            h_mean,
            h_cov,
            alpha,
            beta,
        };
        state.validate(model)?;
        Ok(state)
    }

    /// A near point mass at a joint sample: one-hot symbol pmfs, Σ̂ = 0,
    /// and Dirichlet / inverse-gamma factors scaled by `concentration` so that
    /// their log-moments approach ln p_A and 1/σ².
    pub fn point_mass(model: &Model, sample: &PosteriorSample, concentration: f64) -> Self {
        let d = model.dims();
        let c = model.candidates().len();
        let mut symbol_pmfs = vec![0.0; d.symbol_count() * c];
        for (i, &s) in sample.symbols.iter().enumerate() {
            symbol_pmfs[i * c + s as usize] = 1.0;
        }
        Self {
            gamma_tilde: sample.p_a.iter().map(|p| p * concentration).collect(),
            symbol_pmfs,
            h_mean: sample.h.clone(),
            h_cov: vec![CMatrix::zeros(d.l_hat, d.l_hat); d.mt * d.mr],
            alpha: concentration,
            beta: concentration * sample.sigma2,
        }
    }

    /// Mean of q(p_A), `γ̃ / Σγ̃`.
    pub fn mixture_mean(&self) -> Vec<f64> {
        let total: f64 = self.gamma_tilde.iter().sum();
        self.gamma_tilde.iter().map(|g| g / total).collect()
    }

    /// `E_q[σ²]` when it exists, otherwise the mode.
    pub fn noise_mean(&self) -> f64 {
        if self.alpha > 1.0 {
            self.beta / (self.alpha - 1.0)
        } else {
            self.beta / (self.alpha + 1.0)
        }
    }

    pub fn validate(&self, model: &Model) -> Result<()> {
        let d = model.dims();
        let c = model.candidates().len();
        if self.gamma_tilde.len() != model.labels()
            || self.symbol_pmfs.len() != d.symbol_count() * c
            || self.h_mean.len() != d.mt * d.mr
            || self.h_cov.len() != d.mt * d.mr
        {
            bail!(Dimension, "mean-field state does not match the model dimensions");
        }
        if self.h_mean.iter().any(|h| h.len() != d.l_hat)
            || self.h_cov.iter().any(|s| s.rows() != d.l_hat || s.cols() != d.l_hat)
        {
            bail!(Dimension, "channel factors must have {} taps", d.l_hat);
        }
        if self.gamma_tilde.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            bail!(Domain, "Dirichlet parameters must be positive and finite");
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) || !self.alpha.is_finite() || !self.beta.is_finite() {
            bail!(Domain, "inverse-gamma parameters must be positive, got ({}, {})", self.alpha, self.beta);
        }
        for (i, pmf) in self.symbol_pmfs.chunks(c).enumerate() {
            let total: f64 = pmf.iter().sum();
            if pmf.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                bail!(Domain, "symbol pmf {i} is not a probability vector (sum {total})");
            }
        }
        for s in &self.h_cov {
            if s.hermitian_defect() > 1e-9 * s.max_abs().max(1.0) {
                bail!(Domain, "channel covariance is not Hermitian");
            }
        }
        Ok(())
    }
}
