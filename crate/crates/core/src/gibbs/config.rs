

use crate::error::{bail, Result};
use crate::sigmodel::FrameDims;
use crate::prelude::*;

/// How the mixture-weight block is updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `p_A ~ Dirichlet(γ + c)`.
    LatentDirichlet,
    /// `p_A ← c / Σc` with γ = 0 (superconstellation approximation).
    Superconstellation,
}

/// Iteration-dependent tempering of the noise-variance shape:
/// `α′(m) = (1 − (1 − p0)·exp(−m/m0))·α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annealing {
    pub p0: f64,
    pub m0: f64,
}

impl Annealing {
    /// `p0 = 0.1`, `m0 = 0.3·M`.
    pub fn standard(iterations: usize) -> Self {
        Self {
            p0: 0.1,
            m0: 0.3 * iterations as f64,
        }
    }

    pub fn shape(&self, alpha: f64, iteration: usize) -> f64 {
        (1.0 - (1.0 - self.p0) * (-(iteration as f64) / self.m0).exp()) * alpha
    }
}

/// Hyperparameters and run-length settings shared by all inference methods.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceConfig {
    /// Dirichlet pseudo-counts γ, one per pool entry.
    pub gamma: Vec<f64>,
    /// Inverse-gamma prior shape α₀ for σ².
    pub alpha0: f64,
    /// Inverse-gamma prior scale β₀ for σ².
    pub beta0: f64,
    /// Channel prior variance: `h ~ 𝒞𝒩(0, alpha_h·I)`. `f64::INFINITY`
    /// drops the prior term from the channel conditional.
    pub alpha_h: f64,
    /// Sweeps per run, M.
    pub iterations: usize,
    /// Burn-in sweeps M₀ excluded from the average.
    pub burn_in: usize,
    /// Independent runs N_run; the minimum-entropy run wins.
    pub restarts: usize,
    pub annealing: Option<Annealing>,
    pub variant: Variant,
    /// Keep per-iteration `p_A` and σ² in the result.
    pub record_trace: bool,
    /// Hybrid only: the first mean-field iteration m_s. Gibbs runs for
    /// `m_s − 1` sweeps before the switch; `m_s = 1` is pure mean field.
    pub switch_iteration: usize,
    /// Mean field only: stop once the relative free-energy change of a sweep
    /// drops below this value. `None` runs the full budget M.
    pub free_energy_tolerance: Option<f64>,
}

/// `⌊0.08·N·K·Mt⌋`, at least 1 (40 for N=128, K=2, Mt=2).
pub fn default_gamma(dims: &FrameDims) -> f64 {
    (0.08 * dims.symbol_count() as f64).floor().max(1.0)
}

impl InferenceConfig {
    /// Plain latent-Dirichlet Gibbs: M = 2000, M₀ = 0.85·M, one run, no
    /// annealing, γ = ⌊0.08·N·K·Mt⌋, α₀ = β₀ = 1e-3, alpha_h = 1e3. The
    /// hybrid switch defaults to m_s = 9 (eight Gibbs sweeps first).
    pub fn new(dims: &FrameDims, pool_len: usize) -> Self {
        let iterations = 2000;
        Self {
            gamma: vec![default_gamma(dims); pool_len],
            alpha0: 1e-3,
            beta0: 1e-3,
            alpha_h: 1e3,
            iterations,
            burn_in: (0.85 * iterations as f64).round() as usize,
            restarts: 1,
            annealing: None,
            variant: Variant::LatentDirichlet,
            record_trace: false,
            switch_iteration: 9,
            free_energy_tolerance: None,
        }
    }

    /// Sets M and rescales M₀ to `fraction·M` (and m0 to 0.3·M when annealing).
    /// The hybrid switch is clamped to M.
    pub fn with_iterations(mut self, iterations: usize, burn_in_fraction: f64) -> Self {
        self.iterations = iterations;
        self.burn_in = ((burn_in_fraction * iterations as f64).round() as usize).min(iterations.saturating_sub(1));
        self.switch_iteration = self.switch_iteration.min(iterations.max(1));
        if self.annealing.is_some() {
            self.annealing = Some(Annealing::standard(iterations));
        }
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_annealing(mut self, on: bool) -> Self {
        self.annealing = on.then(|| Annealing::standard(self.iterations));
        self
    }

    pub fn with_switch(mut self, switch_iteration: usize) -> Self {
        self.switch_iteration = switch_iteration;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        if variant == Variant::Superconstellation {
            self.gamma.iter_mut().for_each(|g| *g = 0.0);
        }
        self
    }

    pub fn validate(&self, pool_len: usize) -> Result<()> {
        if self.gamma.len() != pool_len {
            bail!(Config, "gamma has {} entries for a pool of {}", self.gamma.len(), pool_len);
        }
        match self.variant {
            Variant::LatentDirichlet => {
                if self.gamma.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
                    bail!(Config, "latent-Dirichlet gamma must be positive and finite");
                }
            }
            Variant::Superconstellation => {
                if self.gamma.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
                    bail!(Config, "gamma must be nonnegative and finite");
                }
            }
        }
        if !(self.alpha0 > 0.0 && self.beta0 > 0.0) || !self.alpha0.is_finite() || !self.beta0.is_finite() {
            bail!(Config, "alpha0 and beta0 must be positive and finite");
        }
        if !(self.alpha_h > 0.0) {
            bail!(Config, "alpha_h must be positive");
        }
        if self.iterations == 0 || self.burn_in >= self.iterations {
            bail!(Config, "need 0 <= burn_in < iterations, got burn_in={} iterations={}", self.burn_in, self.iterations);
        }
        if self.restarts == 0 {
            bail!(Config, "restarts must be at least 1");
        }
        if self.switch_iteration == 0 || self.switch_iteration > self.iterations {
            bail!(Config, "switch iteration must lie in 1..=M, got {}", self.switch_iteration);
        }
        if let Some(t) = self.free_energy_tolerance {
            if !(t > 0.0) {
                bail!(Config, "free-energy tolerance must be positive");
            }
        }
        if let Some(a) = self.annealing {
            if !(a.p0 > 0.0 && a.p0 <= 1.0) || !(a.m0 > 0.0) {
                bail!(Config, "annealing needs p0 in (0, 1] and m0 > 0, got p0={} m0={}", a.p0, a.m0);
            }
        }
        Ok(())
    }
}
