use core::f64::consts::{E, PI};

use num_complex::Complex64;

use super::state::MeanFieldState;
use crate::error::{bail, Result};
use crate::gibbs::{InferenceConfig, Model};
use crate::numerics::linalg::{inverse_hpd, ln_det_hpd};
use crate::numerics::{digamma_unchecked, ln_gamma, normalize_log_weights, CMatrix};
use crate::prelude::*;
use crate::sigmodel::ReceivedGrid;

/// Coordinate-ascent driver for one observation. Keeps the first and second
/// moments of every factor cached so that each update costs the same as the
/// matching Gibbs draw.
#[derive(Debug, Clone)]
pub struct MeanField<'a> {
    model: &'a Model,
    y: &'a ReceivedGrid,
    config: &'a InferenceConfig,
    state: MeanFieldState,
    /// `⟨s⟩` per symbol.
    s_mean: Vec<Complex64>,
    /// `⟨|s|²⟩` per symbol.
    s_second: Vec<f64>,
    /// `W·ĥ` per antenna pair.
    h_freq: Vec<Vec<Complex64>>,
    /// `W_n·Σ̂·W_nᴴ` per antenna pair and subcarrier.
    h_var: Vec<Vec<f64>>,
}

impl<'a> MeanField<'a> {
    pub fn new(model: &'a Model, y: &'a ReceivedGrid, config: &'a InferenceConfig, state: MeanFieldState) -> Result<Self> {
        model.check_observation(y)?;
        config.validate(model.labels())?;
        state.validate(model)?;
        let d = model.dims();
        let mut mf = Self {
            model,
            y,
            config,
            state,
            s_mean: vec![Complex64::new(0.0, 0.0); d.symbol_count()],
            s_second: vec![0.0; d.symbol_count()],
            h_freq: vec![Vec::new(); d.mt * d.mr],
            h_var: vec![Vec::new(); d.mt * d.mr],
        };
        for i in 0..d.symbol_count() {
            mf.refresh_symbol(i);
        }
        for p in 0..d.mt * d.mr {
            mf.refresh_channel(p);
        }
        Ok(mf)
    }

    pub fn state(&self) -> &MeanFieldState {
        &self.state
    }

    pub fn into_state(self) -> MeanFieldState {
        self.state
    }

    fn pmf(&self, i: usize) -> &[f64] {
        let c = self.model.candidates().len();
        &self.state.symbol_pmfs[i * c..(i + 1) * c]
    }

    /// Pmf of symbol `(n, k, mt)` over the candidate space.
    pub fn symbol_pmf(&self, n: usize, k: usize, mt: usize) -> &[f64] {
        self.pmf(self.model.symbol_offset(n, k, mt))
    }

    fn refresh_symbol(&mut self, i: usize) {
        let mut mean = Complex64::new(0.0, 0.0);
        let mut second = 0.0;
        for (p, c) in self.pmf(i).iter().zip(self.model.candidates()) {
            mean += c.point * *p;
            second += p * c.point.norm_sqr();
        }
        self.s_mean[i] = mean;
        self.s_second[i] = second;
    }

    fn refresh_channel(&mut self, p: usize) {
        let dft = self.model.dft();
        let cov = &self.state.h_cov[p];
        self.h_freq[p] = dft.apply(&self.state.h_mean[p]);
        self.h_var[p] = (0..dft.subcarriers())
            .map(|n| {
                let w = dft.row(n);
                let sw = cov.mul_vec(&w.iter().map(|x| x.conj()).collect::<Vec<_>>());
                w.iter().zip(&sw).map(|(a, b)| a * b).sum::<Complex64>().re.max(0.0)
            })
            .collect();
    }

    /// `(⟨s⟩, ⟨|s|²⟩)` of symbol `(n, k, mt)`.
    pub fn symbol_moments(&self, n: usize, k: usize, mt: usize) -> (Complex64, f64) {
        let i = self.model.symbol_offset(n, k, mt);
        (self.s_mean[i], self.s_second[i])
    }

    /// `var(s) = ⟨|s|²⟩ − |⟨s⟩|²`.
    pub fn symbol_variance(&self, n: usize, k: usize, mt: usize) -> f64 {
        let (m, s) = self.symbol_moments(n, k, mt);
        (s - m.norm_sqr()).max(0.0)
    }

    /// Diagonal of `⟨D_mtᴴ·D_mt⟩` on the stacked (k, n) vector, i.e.
    /// `⟨|s_mt[n,k]|²⟩`, listed with n varying fastest.
    pub fn expected_symbol_energy(&self, mt: usize) -> Vec<f64> {
        let d = self.model.dims();
        let mut out = Vec::with_capacity(d.n * d.k);
        for k in 0..d.k {
            for n in 0..d.n {
                out.push(self.s_second[self.model.symbol_offset(n, k, mt)]);
            }
        }
        out
    }

    /// `⟨H[n]⟩`, Mr×Mt.
    pub fn expected_response(&self, n: usize) -> CMatrix {
        let d = self.model.dims();
        CMatrix::from_fn(d.mr, d.mt, |r, t| self.h_freq[self.model.pair_offset(t, r)][n])
    }

    /// `⟨H[n]ᴴ·H[n]⟩`, Mt×Mt. Off-diagonal entries factor into products of
    /// means because different transmit antennas have independent factors.
    pub fn expected_gram(&self, n: usize) -> CMatrix {
        let d = self.model.dims();
        CMatrix::from_fn(d.mt, d.mt, |a, b| {
            (0..d.mr)
                .map(|r| {
                    let pa = self.model.pair_offset(a, r);
                    let pb = self.model.pair_offset(b, r);
                    let mut v = self.h_freq[pa][n].conj() * self.h_freq[pb][n];
                    if a == b {
                        v += self.h_var[pa][n];
                    }
                    v
                })
                .sum()
        })
    }

    /// `ψ(γ̃_a) − ψ(γ̃₀)`, the expected log mixture weights.
    pub fn expected_log_weights(&self) -> Vec<f64> {
        let total: f64 = self.state.gamma_tilde.iter().sum();
        let psi0 = digamma_unchecked(total);
        self.state.gamma_tilde.iter().map(|&g| digamma_unchecked(g) - psi0).collect()
    }

    /// Expected precision `⟨1/σ²⟩ = α/β`.
    pub fn expected_precision(&self) -> f64 {
        self.state.alpha / self.state.beta
    }

    /// Soft counts `g_a`: the total pmf mass on candidates labelled `a`.
    pub fn soft_counts(&self) -> Vec<f64> {
        let c = self.model.candidates();
        let mut g = vec![0.0; self.model.labels()];
        for pmf in self.state.symbol_pmfs.chunks(c.len()) {
            for (p, cand) in pmf.iter().zip(c) {
                g[cand.label] += p;
            }
        }
        g
    }

    /// `γ̃ = γ + g`.
    pub fn update_mixture(&mut self) {
        let g = self.soft_counts();
        self.state.gamma_tilde = self.config.gamma.iter().zip(&g).map(|(a, b)| a + b).collect();
    }

    /// Log-weights of the symbol update, before normalization.
    pub fn symbol_log_weights(&self, n: usize, k: usize, mt: usize) -> Vec<f64> {
        let d = self.model.dims();
        let mut corr = Complex64::new(0.0, 0.0);
        let mut gain = 0.0;
        for r in 0..d.mr {
            let mut resid = self.y.get(n, k, r);
            for t in 0..d.mt {
                if t != mt {
                    resid -= self.h_freq[self.model.pair_offset(t, r)][n] * self.s_mean[self.model.symbol_offset(n, k, t)];
                }
            }
            let p = self.model.pair_offset(mt, r);
            corr += self.h_freq[p][n].conj() * resid;
            gain += self.h_freq[p][n].norm_sqr() + self.h_var[p][n];
        }
        let elog = self.expected_log_weights();
        let prec = self.expected_precision();
        self.model
            .candidates()
            .iter()
            .map(|c| {
                let x = c.point;
                elog[c.label] - c.ln_size - prec * (x.norm_sqr() * gain - 2.0 * (x.conj() * corr).re)
            })
            .collect()
    }

    pub fn update_symbol(&mut self, n: usize, k: usize, mt: usize) {
        let mut w = self.symbol_log_weights(n, k, mt);
        normalize_log_weights(&mut w);
        let i = self.model.symbol_offset(n, k, mt);
        let c = w.len();
        self.state.symbol_pmfs[i * c..(i + 1) * c].copy_from_slice(&w);
        self.refresh_symbol(i);
    }

    /// New `(ĥ, Σ̂)` for pair `(mt, mr)` given the other factors.
    pub fn channel_update(&self, mt: usize, mr: usize) -> Result<(Vec<Complex64>, CMatrix)> {
        let d = self.model.dims();
        let mut energy = vec![0.0; d.n];
        let mut proj = vec![Complex64::new(0.0, 0.0); d.n];
        for k in 0..d.k {
            for n in 0..d.n {
                let i = self.model.symbol_offset(n, k, mt);
                let mut resid = self.y.get(n, k, mr);
                for t in 0..d.mt {
                    if t != mt {
                        resid -= self.s_mean[self.model.symbol_offset(n, k, t)] * self.h_freq[self.model.pair_offset(t, mr)][n];
                    }
                }
                energy[n] += self.s_second[i];
                proj[n] += self.s_mean[i].conj() * resid;
            }
        }
        let prec = self.expected_precision();
        let mut precision = self.model.dft().weighted_gram(&energy);
        precision.scale(prec);
        precision.add_diagonal(1.0 / self.config.alpha_h);
        let cov = inverse_hpd(&precision)?;
        let rhs: Vec<Complex64> = self.model.dft().adjoint_apply(&proj).into_iter().map(|z| z * prec).collect();
        Ok((cov.mul_vec(&rhs), cov))
    }

    pub fn update_channel(&mut self, mt: usize, mr: usize) -> Result<()> {
        let (mean, cov) = self.channel_update(mt, mr)?;
        let p = self.model.pair_offset(mt, mr);
        self.state.h_mean[p] = mean;
        self.state.h_cov[p] = cov;
        self.refresh_channel(p);
        Ok(())
    }

    /// `Σ_mr E_q‖y_mr − Σ_mt D_mt·W·h_{mt,mr}‖²`.
    pub fn expected_residual(&self) -> f64 {
        let d = self.model.dims();
        let mut total = 0.0;
        for k in 0..d.k {
            for n in 0..d.n {
                for r in 0..d.mr {
                    let mut resid = self.y.get(n, k, r);
                    let mut spread = 0.0;
                    for t in 0..d.mt {
                        let i = self.model.symbol_offset(n, k, t);
                        let p = self.model.pair_offset(t, r);
                        let f = self.h_freq[p][n];
                        resid -= self.s_mean[i] * f;
                        spread += self.s_second[i] * (f.norm_sqr() + self.h_var[p][n]) - self.s_mean[i].norm_sqr() * f.norm_sqr();
                    }
                    total += resid.norm_sqr() + spread;
                }
            }
        }
        total
    }

    /// `α = α₀ + N·K·Mr`, `β = β₀ + E_q[residual energy]`.
    pub fn update_noise(&mut self) -> Result<()> {
        let d = self.model.dims();
        let beta = self.config.beta0 + self.expected_residual();
        if !(beta > 0.0) || !beta.is_finite() {
            bail!(Numerical, "noise scale update produced {beta}");
        }
        self.state.alpha = self.config.alpha0 + (d.n * d.k * d.mr) as f64;
        self.state.beta = beta;
        Ok(())
    }

    /// One pass of the four updates: p_A, symbols in `(k, n, mt)` order,
    /// channels in `(mr, mt)` order, σ².
    pub fn sweep(&mut self) -> Result<()> {
        self.update_mixture();
        let d = *self.model.dims();
        for k in 0..d.k {
            for n in 0..d.n {
                for mt in 0..d.mt {
                    self.update_symbol(n, k, mt);
                }
            }
        }
        for mr in 0..d.mr {
            for mt in 0..d.mt {
                self.update_channel(mt, mr)?;
            }
        }
        self.update_noise()
    }

    /// Evidence lower bound `E_q[ln p(y, p_A, s, h, σ²)] − E_q[ln q]`.
    ///
    /// With an infinite `alpha_h` the (improper, constant) channel prior
    /// term is left out.
    pub fn free_energy(&self) -> Result<f64> {
        let d = self.model.dims();
        let st = &self.state;
        let (alpha, beta) = (st.alpha, st.beta);
        let e_inv = alpha / beta;
        let e_ln_s2 = beta.ln() - digamma_unchecked(alpha);
        let elog = self.expected_log_weights();
        let obs = (d.n * d.k * d.mr) as f64;

        // Likelihood.
        let mut f = -obs * PI.ln() - obs * e_ln_s2 - e_inv * self.expected_residual();

        // Symbols given p_A, plus the symbol entropies.
        for pmf in st.symbol_pmfs.chunks(self.model.candidates().len()) {
            for (p, c) in pmf.iter().zip(self.model.candidates()) {
                if *p > 0.0 {
                    f += p * (elog[c.label] - c.ln_size - p.ln());
                }
            }
        }

        // Dirichlet prior and entropy.
        let gamma = &self.config.gamma;
        let g0: f64 = gamma.iter().sum();
        let gt0: f64 = st.gamma_tilde.iter().sum();
        f += ln_gamma(g0) - gamma.iter().map(|&g| ln_gamma(g)).sum::<f64>();
        f += gamma.iter().zip(&elog).map(|(g, e)| (g - 1.0) * e).sum::<f64>();
        let labels = st.gamma_tilde.len() as f64;
        f += st.gamma_tilde.iter().map(|&g| ln_gamma(g)).sum::<f64>() - ln_gamma(gt0)
            + (gt0 - labels) * digamma_unchecked(gt0)
            - st.gamma_tilde.iter().map(|&g| (g - 1.0) * digamma_unchecked(g)).sum::<f64>();

        // Channel prior and Gaussian entropies.
        let l = d.l_hat as f64;
        for (mean, cov) in st.h_mean.iter().zip(&st.h_cov) {
            if self.config.alpha_h.is_finite() {
                let second: f64 = mean.iter().map(|z| z.norm_sqr()).sum::<f64>() + cov.trace().re;
                f += -l * (PI * self.config.alpha_h).ln() - second / self.config.alpha_h;
            }
            f += l * (PI * E).ln() + ln_det_hpd(cov)?;
        }

        // Inverse-gamma prior and entropy.
        let (a0, b0) = (self.config.alpha0, self.config.beta0);
        f += a0 * b0.ln() - ln_gamma(a0) - (a0 + 1.0) * e_ln_s2 - b0 * e_inv;
        f += alpha + beta.ln() + ln_gamma(alpha) - (1.0 + alpha) * digamma_unchecked(alpha);
        Ok(f)
    }
}
