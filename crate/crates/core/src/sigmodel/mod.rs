//! The physical model: constellations, frequency-selective MIMO channels,
//! OFDM frame synthesis and the Gaussian per-subcarrier likelihood.

mod channel;
mod constellation;
mod grid;
mod likelihood;

use alloc::string::String;

use num_complex::Complex64;
use crate::prelude::*;

pub use channel::{draw_taps, normalized_tap_powers, ChannelRealization};
pub use constellation::{build_constellation, Constellation, Modulation, ModulationPool};
pub use grid::{Grid, ReceivedGrid, TransmitGrid};
pub use likelihood::{loglik_by_receive_antenna, loglik_by_subcarrier, subcarrier_loglik};

use crate::error::{bail, Result};
use crate::numerics::{standard_complex_normal, DftSubmatrix, RandomStream};

/// Dimensions of one coherence frame as seen by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameDims {
    /// Subcarriers N.
    pub n: usize,
    /// OFDM symbols K per coherence frame.
    pub k: usize,
    pub mt: usize,
    pub mr: usize,
    /// Tap count L̂ assumed by the classifier.
    pub l_hat: usize,
}

impl FrameDims {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.mt == 0 || self.mr == 0 {
            bail!(Dimension, "N, K, Mt and Mr must all be at least 1 (got {:?})", self);
        }
        if self.l_hat == 0 || self.l_hat > self.n {
            bail!(Dimension, "assumed tap count must lie in 1..=N, got {} with N={}", self.l_hat, self.n);
        }
        Ok(())
    }

    /// N·K·Mt, the number of transmitted symbols.
    pub fn symbol_count(&self) -> usize {
        self.n * self.k * self.mt
    }
}

/// A complete simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n: usize,
    pub k: usize,
    pub mt: usize,
    pub mr: usize,
    /// True tap count L.
    pub l: usize,
    /// Tap count L̂ assumed by the classifier.
    pub l_hat: usize,
    pub tap_powers_db: Vec<f64>,
    pub snr_db: f64,
    pub pool: ModulationPool,
    pub true_modulation: String,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.dims().validate()?;
        if self.l == 0 || self.l > self.n {
            bail!(Dimension, "true tap count must lie in 1..=N, got {} with N={}", self.l, self.n);
        }
        if self.tap_powers_db.len() != self.l {
            bail!(Dimension, "{} tap powers given for L={}", self.tap_powers_db.len(), self.l);
        }
        if self.tap_powers_db.iter().any(|p| !p.is_finite()) || !self.snr_db.is_finite() {
            bail!(Config, "tap powers and SNR must be finite");
        }
        if self.pool.index_of(&self.true_modulation).is_none() {
            bail!(Config, "true modulation '{}' is not in the pool", self.true_modulation);
        }
        Ok(())
    }

    pub fn dims(&self) -> FrameDims {
        FrameDims {
            n: self.n,
            k: self.k,
            mt: self.mt,
            mr: self.mr,
            l_hat: self.l_hat,
        }
    }

    pub fn true_index(&self) -> Result<usize> {
        match self.pool.index_of(&self.true_modulation) {
            Some(i) => Ok(i),
            None => bail!(Config, "true modulation '{}' is not in the pool", self.true_modulation),
        }
    }
}

/// Noise variance for an average SNR of `10·log10(Mt/σ²)` dB.
pub fn sigma2_from_snr(snr_db: f64, mt: usize) -> f64 {
    mt as f64 / 10f64.powf(snr_db / 10.0)
}

/// Draws a Rayleigh channel with the scenario's tap profile.
pub fn draw_channel(scenario: &Scenario, rng: &mut RandomStream) -> Result<ChannelRealization> {
    scenario.validate()?;
    let dft = DftSubmatrix::new(scenario.n, scenario.l)?;
    let taps = draw_taps(&scenario.tap_powers_db, scenario.mt, scenario.mr, rng);
    ChannelRealization::from_taps(scenario.mt, scenario.mr, taps, &dft)
}

/// One synthesized coherence frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub transmitted: TransmitGrid,
    pub channel: ChannelRealization,
    pub sigma2: f64,
    pub received: ReceivedGrid,
}

/// Draws i.i.d. uniform symbols from `constellation` on an N×K×Mt grid.
pub fn draw_symbols(constellation: &Constellation, n: usize, k: usize, mt: usize, rng: &mut RandomStream) -> TransmitGrid {
    let points = constellation.points();
    Grid::from_fn(n, k, mt, |_, _, _| {
        let idx = ((rng.uniform() * points.len() as f64) as usize).min(points.len() - 1);
        points[idx]
    })
}

/// `y[n,k] = H[n]·s[n,k] + z[n,k]` with `z ~ 𝒞𝒩(0, σ²I)` i.i.d. over n and k.
pub fn transmit(
    symbols: &TransmitGrid,
    channel: &ChannelRealization,
    sigma2: f64,
    rng: &mut RandomStream,
) -> Result<ReceivedGrid> {
    let (n, k, mt) = symbols.shape();
    if mt != channel.transmit_antennas() {
        bail!(Dimension, "symbols use {mt} transmit antennas, channel has {}", channel.transmit_antennas());
    }
    if !(sigma2 >= 0.0) {
        bail!(Domain, "noise variance must be nonnegative, got {sigma2}");
    }
    let mr = channel.receive_antennas();
    let std = sigma2.sqrt();
    let mut y = Grid::zeros(n, k, mr);
    for kk in 0..k {
        for nn in 0..n {
            let s = symbols.vector(nn, kk);
            for r in 0..mr {
                let mut acc: Complex64 = (0..mt).map(|t| channel.frequency(t, r)[nn] * s[t]).sum();
                if sigma2 > 0.0 {
                    acc += standard_complex_normal(rng) * std;
                }
                y.set(nn, kk, r, acc);
            }
        }
    }
    Ok(y)
}

/// Draws channel, symbols and noise for `scenario` (in that order).
pub fn synthesize(scenario: &Scenario, rng: &mut RandomStream) -> Result<Synthesis> {
    let channel = draw_channel(scenario, rng)?;
    let constellation = scenario.pool.get(scenario.true_index()?);
    let transmitted = draw_symbols(constellation, scenario.n, scenario.k, scenario.mt, rng);
    let sigma2 = sigma2_from_snr(scenario.snr_db, scenario.mt);
    let received = transmit(&transmitted, &channel, sigma2, rng)?;
    Ok(Synthesis {
        transmitted,
        channel,
        sigma2,
        received,
    })
}
