//! Bayesian modulation classification for MIMO-OFDM links.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! * [`numerics`]: seeded random streams, the truncated DFT matrix, samplers for
//!   the Dirichlet / complex Gaussian / inverse-gamma families, the digamma function
//!   and the small dense complex linear algebra the conditionals need.
//! * [`sigmodel`]: constellations, frequency-selective channels, OFDM frame
//!   synthesis and the per-subcarrier Gaussian likelihood.
//! * [`gibbs`]: the latent-Dirichlet Gibbs sampler with annealing, entropy-selected
//!   restarts and the superconstellation variant.
//! * [`meanfield`]: mean-field variational inference, its free energy and the
//!   hybrid Gibbs-to-mean-field controller.
//!
//! Everything is deterministic given a [`numerics::RandomStream`] seed.

#![no_std]

extern crate alloc;

pub mod complexity;
mod error;
mod prelude;
pub mod gibbs;
pub mod meanfield;
pub mod numerics;
pub mod sigmodel;

pub use error::{Error, Result};
pub use num_complex::Complex64;
