//! Latent-Dirichlet Gibbs sampling over `(p_A, s, h, σ²)`.
//!
//! Each symbol is drawn jointly with the constellation it is attributed to,
//! from the candidate space of all `(point, label)` pairs. The mixture weights
//! p_A are averaged after burn-in and the classifier returns their argmax.

mod config;
mod model;
mod sampler;

use alloc::vec::Vec;

pub use config::{default_gamma, Annealing, InferenceConfig, Variant};
pub use model::{Candidate, Model};
pub use sampler::{gibbs_init, ChainResult, GibbsSampler, PosteriorSample, TraceRow, SUPERCONSTELLATION_FLOOR};

use crate::error::{bail, Result};
use crate::numerics::RandomStream;
use crate::sigmodel::ReceivedGrid;

/// Initializes from the priors and runs one chain of `config.iterations` sweeps.
pub fn run_chain(model: &Model, y: &ReceivedGrid, config: &InferenceConfig, rng: &mut RandomStream) -> Result<ChainResult> {
    let mut sampler = GibbsSampler::new(model, y, config, rng)?;
    sampler.run(rng)
}

/// Runs `config.restarts` independent chains and keeps the one whose averaged
/// p_A has the lowest entropy. Run `r` uses the stream `rng.child(r)`, so the
/// result does not depend on how many runs precede it.
pub fn run_with_restarts(
    model: &Model,
    y: &ReceivedGrid,
    config: &InferenceConfig,
    rng: &RandomStream,
) -> Result<ChainResult> {
    config.validate(model.labels())?;
    let runs = (0..config.restarts)
        .map(|r| run_chain(model, y, config, &mut rng.child(r as u64)))
        .collect::<Result<Vec<_>>>()?;
    select_min_entropy(runs)
}

/// Picks the run with the smallest entropy; ties go to the earliest run.
pub fn select_min_entropy(runs: Vec<ChainResult>) -> Result<ChainResult> {
    let mut best: Option<ChainResult> = None;
    for run in runs {
        match &best {
            Some(b) if !(run.entropy < b.entropy) => {}
            _ => best = Some(run),
        }
    }
    match best {
        Some(b) => Ok(b),
        None => bail!(Config, "no runs to select from"),
    }
}
