
use num_complex::Complex64;
use crate::prelude::*;

use super::config::{InferenceConfig, Variant};
use super::model::Model;
use crate::error::{bail, Result};
use crate::numerics::linalg::inverse_hpd;
use crate::numerics::{
    entropy, argmax, normalize_log_weights, sample_categorical, sample_complex_gaussian, sample_dirichlet,
    sample_inverse_gamma, CMatrix, RandomStream,
};
use crate::sigmodel::{Grid, ReceivedGrid, TransmitGrid};

/// Floor applied to superconstellation counts before normalizing, so that a
/// constellation with no assigned symbols keeps a nonzero weight.
pub const SUPERCONSTELLATION_FLOOR: f64 = 1e-6;

/// Range the initial noise variance is clamped to. Very weak inverse-gamma
/// priors otherwise produce draws that overflow or underflow.
const INIT_SIGMA2_RANGE: (f64, f64) = (1e-10, 1e10);

/// One joint sample of (p_A, s, h, σ²).
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSample {
    /// Mixture weights over the pool.
    pub p_a: Vec<f64>,
    /// Candidate index per symbol, `(k, n, mt)`-lexicographic.
    pub symbols: Vec<u16>,
    /// Time-domain channel per antenna pair, `(mr, mt)` order, L̂ taps each.
    pub h: Vec<Vec<Complex64>>,
    pub sigma2: f64,
}

impl PosteriorSample {
    #[inline]
    pub fn symbol(&self, model: &Model, n: usize, k: usize, mt: usize) -> Complex64 {
        model.candidates()[self.symbols[model.symbol_offset(n, k, mt)] as usize].point
    }

    /// Per-constellation label counts, recomputed from the assignments.
    pub fn label_counts(&self, model: &Model) -> Vec<usize> {
        let mut counts = vec![0; model.labels()];
        for &s in &self.symbols {
            counts[model.candidates()[s as usize].label] += 1;
        }
        counts
    }

    pub fn transmit_grid(&self, model: &Model) -> TransmitGrid {
        let d = model.dims();
        Grid::from_fn(d.n, d.k, d.mt, |n, k, mt| self.symbol(model, n, k, mt))
    }
}

/// Diagnostics for one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub p_a: Vec<f64>,
    /// The σ² draw, or the posterior mean of q(σ²) for mean field.
    pub sigma2: f64,
    /// Mean field only.
    pub free_energy: Option<f64>,
}

/// Outcome of one chain (or the selected restart).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    /// Post-burn-in average of the p_A draws.
    pub p_a_mean: Vec<f64>,
    /// Shannon entropy (nats) of `p_a_mean`.
    pub entropy: f64,
    /// Pool index of the largest `p_a_mean` entry (lowest index on ties).
    pub decision: usize,
    pub trace: Option<Vec<TraceRow>>,
}

impl ChainResult {
    pub fn from_mean(p_a_mean: Vec<f64>, trace: Option<Vec<TraceRow>>) -> Self {
        Self {
            entropy: entropy(&p_a_mean),
            decision: argmax(&p_a_mean),
            p_a_mean,
            trace,
        }
    }
}

/// Draws the initial state from the priors: `p_A ~ Dirichlet(γ)`, symbols from
/// the p_A-mixture of uniform constellations, `h ~ 𝒞𝒩(0, alpha_h·I)` and
/// `σ² ~ 𝒢⁻¹(α₀, β₀)`.
pub fn gibbs_init(model: &Model, config: &InferenceConfig, rng: &mut RandomStream) -> Result<PosteriorSample> {
    config.validate(model.labels())?;
    let p_a = if config.gamma.iter().all(|&g| g > 0.0) {
        sample_dirichlet(&config.gamma, rng)?
    } else {
        vec![1.0 / model.labels() as f64; model.labels()]
    };
    let offsets = label_offsets(model);
    let d = *model.dims();
    let symbols = (0..d.symbol_count())
        .map(|_| {
            let label = sample_categorical(&p_a, rng);
            let size = model.pool().get(label).len();
            let idx = ((rng.uniform() * size as f64) as usize).min(size - 1);
            (offsets[label] + idx) as u16
        })
        .collect();
    let scale = if config.alpha_h.is_finite() { config.alpha_h } else { 1.0 };
    let prior_cov = CMatrix::scaled_identity(d.l_hat, scale);
    let zero = vec![Complex64::new(0.0, 0.0); d.l_hat];
    let h = (0..d.mt * d.mr)
        .map(|_| sample_complex_gaussian(&zero, &prior_cov, rng))
        .collect::<Result<_>>()?;
    let sigma2 = sample_inverse_gamma(config.alpha0, config.beta0, rng)?.clamp(INIT_SIGMA2_RANGE.0, INIT_SIGMA2_RANGE.1);
    Ok(PosteriorSample { p_a, symbols, h, sigma2 })
}

fn label_offsets(model: &Model) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(model.labels());
    let mut acc = 0;
    for c in model.pool().iter() {
        offsets.push(acc);
        acc += c.len();
    }
    offsets
}

/// A Gibbs chain over one observation. Each draw conditions on the latest
/// values of every other block.
#[derive(Debug, Clone)]
pub struct GibbsSampler<'a> {
    model: &'a Model,
    y: &'a ReceivedGrid,
    config: &'a InferenceConfig,
    state: PosteriorSample,
    counts: Vec<usize>,
    /// `W·h` per antenna pair.
    freq: Vec<Vec<Complex64>>,
    /// `ln p_A(a) − ln|a|` per candidate.
    prior_logw: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(model: &'a Model, y: &'a ReceivedGrid, config: &'a InferenceConfig, rng: &mut RandomStream) -> Result<Self> {
        model.check_observation(y)?;
        let state = gibbs_init(model, config, rng)?;
        Self::from_state(model, y, config, state)
    }

    pub fn from_state(
        model: &'a Model,
        y: &'a ReceivedGrid,
        config: &'a InferenceConfig,
        state: PosteriorSample,
    ) -> Result<Self> {
        model.check_observation(y)?;
        config.validate(model.labels())?;
        let d = model.dims();
        if state.p_a.len() != model.labels()
            || state.symbols.len() != d.symbol_count()
            || state.h.len() != d.mt * d.mr
            || state.h.iter().any(|h| h.len() != d.l_hat)
        {
            bail!(Dimension, "posterior sample does not match the model dimensions");
        }
        if state.symbols.iter().any(|&s| s as usize >= model.candidates().len()) {
            bail!(Dimension, "symbol assignment outside the candidate space");
        }
        if !(state.sigma2 > 0.0) {
            bail!(Domain, "noise variance must be positive");
        }
        let counts = state.label_counts(model);
        let freq = state.h.iter().map(|h| model.dft().apply(h)).collect();
        let mut sampler = Self {
            model,
            y,
            config,
            state,
            counts,
            freq,
            prior_logw: vec![0.0; model.candidates().len()],
            scratch: vec![0.0; model.candidates().len()],
        };
        sampler.refresh_prior();
        Ok(sampler)
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    pub fn config(&self) -> &InferenceConfig {
        self.config
    }

    pub fn state(&self) -> &PosteriorSample {
        &self.state
    }

    pub fn into_state(self) -> PosteriorSample {
        self.state
    }

    /// Label counts `c` maintained incrementally by the symbol updates.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    fn refresh_prior(&mut self) {
        for (w, c) in self.prior_logw.iter_mut().zip(self.model.candidates()) {
            *w = self.state.p_a[c.label].ln() - c.ln_size;
        }
    }

    /// Replaces `p_A` (e.g. for tests and hybrid initialization).
    pub fn set_mixture_weights(&mut self, p_a: Vec<f64>) -> Result<()> {
        if p_a.len() != self.model.labels() {
            bail!(Dimension, "expected {} mixture weights, got {}", self.model.labels(), p_a.len());
        }
        self.state.p_a = p_a;
        self.refresh_prior();
        Ok(())
    }

    /// Parameters `γ + c` of the mixture-weight conditional.
    pub fn mixture_posterior_params(&self) -> Vec<f64> {
        self.config.gamma.iter().zip(&self.counts).map(|(g, &c)| g + c as f64).collect()
    }

    /// Draws `p_A ~ Dirichlet(γ + c)`, or sets `p_A = c/Σc` for the
    /// superconstellation variant.
    pub fn sample_mixture_weights(&mut self, rng: &mut RandomStream) -> Result<()> {
        let params = self.mixture_posterior_params();
        self.state.p_a = match self.config.variant {
            Variant::LatentDirichlet => sample_dirichlet(&params, rng)?,
            Variant::Superconstellation => {
                let floored: Vec<f64> = params.iter().map(|&c| c.max(SUPERCONSTELLATION_FLOOR)).collect();
                let total: f64 = floored.iter().sum();
                floored.into_iter().map(|c| c / total).collect()
            }
        };
        self.refresh_prior();
        Ok(())
    }

    /// Unnormalized log-weights of every candidate for symbol `(n, k, mt)`.
    fn symbol_log_weights(&self, n: usize, k: usize, mt: usize, out: &mut [f64]) {
        let d = self.model.dims();
        let mut corr = Complex64::new(0.0, 0.0);
        let mut gain = 0.0;
        for r in 0..d.mr {
            let mut resid = self.y.get(n, k, r);
            for t in 0..d.mt {
                if t != mt {
                    resid -= self.freq[self.model.pair_offset(t, r)][n] * self.state.symbol(self.model, n, k, t);
                }
            }
            let col = self.freq[self.model.pair_offset(mt, r)][n];
            corr += col.conj() * resid;
            gain += col.norm_sqr();
        }
        let inv = 1.0 / self.state.sigma2;
        for ((o, c), prior) in out.iter_mut().zip(self.model.candidates()).zip(&self.prior_logw) {
            let x = c.point;
            let quad = x.norm_sqr() * gain - 2.0 * (x.conj() * corr).re;
            *o = prior - quad * inv;
        }
    }

    /// Normalized conditional pmf over the candidate space for symbol
    /// `(n, k, mt)`.
    pub fn symbol_pmf(&self, n: usize, k: usize, mt: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.model.candidates().len()];
        self.symbol_log_weights(n, k, mt, &mut w);
        normalize_log_weights(&mut w);
        w
    }

    pub fn sample_symbol(&mut self, n: usize, k: usize, mt: usize, rng: &mut RandomStream) {
        let mut w = core::mem::take(&mut self.scratch);
        self.symbol_log_weights(n, k, mt, &mut w);
        let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for x in w.iter_mut() {
            *x = (*x - max).exp();
            total += *x;
        }
        let u = rng.uniform() * total;
        let mut acc = 0.0;
        let mut pick = 0;
        for (i, &x) in w.iter().enumerate() {
            if x > 0.0 {
                pick = i;
            }
            acc += x;
            if u < acc {
                pick = i;
                break;
            }
        }
        self.scratch = w;
        let off = self.model.symbol_offset(n, k, mt);
        let old = self.state.symbols[off] as usize;
        let candidates = self.model.candidates();
        self.counts[candidates[old].label] -= 1;
        self.counts[candidates[pick].label] += 1;
        self.state.symbols[off] = pick as u16;
    }

    /// Mean and covariance of the Gaussian conditional of `h_{mt,mr}`:
    /// `Σ̂⁻¹ = I/alpha_h + Wᴴ·D_mtᴴ·D_mt·W/σ²` and
    /// `ĥ = Σ̂·Wᴴ·D_mtᴴ·(y_mr − Σ_{mt′≠mt} D_mt′·W·h_{mt′,mr})/σ²`.
    pub fn channel_conditional(&self, mt: usize, mr: usize) -> Result<(Vec<Complex64>, CMatrix)> {
        let d = self.model.dims();
        let mut energy = vec![0.0; d.n];
        let mut proj = vec![Complex64::new(0.0, 0.0); d.n];
        for k in 0..d.k {
            for n in 0..d.n {
                let s = self.state.symbol(self.model, n, k, mt);
                let mut resid = self.y.get(n, k, mr);
                for t in 0..d.mt {
                    if t != mt {
                        resid -= self.state.symbol(self.model, n, k, t) * self.freq[self.model.pair_offset(t, mr)][n];
                    }
                }
                energy[n] += s.norm_sqr();
                proj[n] += s.conj() * resid;
            }
        }
        let inv_s2 = 1.0 / self.state.sigma2;
        let mut precision = self.model.dft().weighted_gram(&energy);
        precision.scale(inv_s2);
        precision.add_diagonal(1.0 / self.config.alpha_h);
        let cov = inverse_hpd(&precision)?;
        let rhs: Vec<Complex64> = self.model.dft().adjoint_apply(&proj).into_iter().map(|z| z * inv_s2).collect();
        let mean = cov.mul_vec(&rhs);
        Ok((mean, cov))
    }

    /// Overwrites `h_{mt,mr}` and its cached frequency response.
    pub fn set_channel(&mut self, mt: usize, mr: usize, taps: Vec<Complex64>) -> Result<()> {
        if taps.len() != self.model.dims().l_hat {
            bail!(Dimension, "expected {} taps, got {}", self.model.dims().l_hat, taps.len());
        }
        let p = self.model.pair_offset(mt, mr);
        self.freq[p] = self.model.dft().apply(&taps);
        self.state.h[p] = taps;
        Ok(())
    }

    pub fn sample_channel(&mut self, mt: usize, mr: usize, rng: &mut RandomStream) -> Result<()> {
        let (mean, cov) = self.channel_conditional(mt, mr)?;
        let draw = sample_complex_gaussian(&mean, &cov, rng)?;
        self.set_channel(mt, mr, draw)
    }

    /// `Σ_mr ‖y_mr − Σ_mt D_mt·W·h_{mt,mr}‖²` at the current state.
    pub fn residual_energy(&self) -> f64 {
        let d = self.model.dims();
        let mut total = 0.0;
        for k in 0..d.k {
            for n in 0..d.n {
                for r in 0..d.mr {
                    let mut resid = self.y.get(n, k, r);
                    for t in 0..d.mt {
                        resid -= self.state.symbol(self.model, n, k, t) * self.freq[self.model.pair_offset(t, r)][n];
                    }
                    total += resid.norm_sqr();
                }
            }
        }
        total
    }

    /// Untempered shape `α = α₀ + N·K·Mr`.
    pub fn noise_shape(&self) -> f64 {
        let d = self.model.dims();
        self.config.alpha0 + (d.n * d.k * d.mr) as f64
    }

    /// `(α′(m), β)` of the noise-variance conditional at iteration `m`.
    pub fn noise_posterior_params(&self, iteration: usize) -> (f64, f64) {
        let alpha = self.noise_shape();
        let shape = match self.config.annealing {
            Some(a) => a.shape(alpha, iteration),
            None => alpha,
        };
        (shape, self.config.beta0 + self.residual_energy())
    }

    pub fn sample_noise_variance(&mut self, iteration: usize, rng: &mut RandomStream) -> Result<()> {
        let (shape, scale) = self.noise_posterior_params(iteration);
        self.state.sigma2 = sample_inverse_gamma(shape, scale, rng)?;
        Ok(())
    }

    /// Replaces σ² (tests and hybrid bookkeeping).
    pub fn set_noise_variance(&mut self, sigma2: f64) -> Result<()> {
        if !(sigma2 > 0.0) {
            bail!(Domain, "noise variance must be positive, got {sigma2}");
        }
        self.state.sigma2 = sigma2;
        Ok(())
    }

    /// One full sweep: p_A, all symbols in `(k, n, mt)` order, all channels
    /// in `(mr, mt)` order, then σ².
    pub fn sweep(&mut self, iteration: usize, rng: &mut RandomStream) -> Result<()> {
        self.sample_mixture_weights(rng)?;
        let d = *self.model.dims();
        for k in 0..d.k {
            for n in 0..d.n {
                for mt in 0..d.mt {
                    self.sample_symbol(n, k, mt, rng);
                }
            }
        }
        for mr in 0..d.mr {
            for mt in 0..d.mt {
                self.sample_channel(mt, mr, rng)?;
            }
        }
        self.sample_noise_variance(iteration, rng)
    }

    /// Runs iterations `1..=M` and averages p_A over `M₀+1..=M`.
    pub fn run(&mut self, rng: &mut RandomStream) -> Result<ChainResult> {
        let m_total = self.config.iterations;
        let burn_in = self.config.burn_in;
        let mut sum = vec![0.0; self.model.labels()];
        let mut trace = self.config.record_trace.then(|| Vec::with_capacity(m_total));
        for m in 1..=m_total {
            self.sweep(m, rng)?;
            if m > burn_in {
                for (s, p) in sum.iter_mut().zip(&self.state.p_a) {
                    *s += p;
                }
            }
            if let Some(t) = trace.as_mut() {
                t.push(TraceRow {
                    iteration: m,
                    p_a: self.state.p_a.clone(),
                    sigma2: self.state.sigma2,
                    free_energy: None,
                });
            }
        }
        let kept = (m_total - burn_in) as f64;
        let mean = sum.into_iter().map(|s| s / kept).collect();
        Ok(ChainResult::from_mean(mean, trace))
    }
}
