//! Mean-field variational inference over the same model as [`crate::gibbs`],
//! and the hybrid controller that starts with Gibbs sweeps and switches to
//! mean field.
//!
//! The approximation factorizes as `q(p_A)·Π q(s)·Π q(h)·q(σ²)` with Dirichlet,
//! categorical, complex Gaussian and inverse-gamma factors. Every update is the
//! exact coordinate maximizer of the free energy, so [`MeanField::free_energy`]
//! never decreases across a sweep.

mod engine;
mod state;

pub use engine::MeanField;
pub use state::MeanFieldState;

use crate::error::Result;
use crate::gibbs::{ChainResult, GibbsSampler, InferenceConfig, Model, TraceRow};
use crate::numerics::RandomStream;
use crate::prelude::*;
use crate::sigmodel::ReceivedGrid;

/// Runs mean-field sweeps `first..=config.iterations` from `state`, stopping
/// early if the free-energy tolerance is met.
fn iterate(
    model: &Model,
    y: &ReceivedGrid,
    config: &InferenceConfig,
    state: MeanFieldState,
    first: usize,
    mut trace: Option<Vec<TraceRow>>,
) -> Result<ChainResult> {
    let mut mf = MeanField::new(model, y, config, state)?;
    let monitor = config.record_trace || config.free_energy_tolerance.is_some();
    let mut previous = if monitor { Some(mf.free_energy()?) } else { None };
    for m in first..=config.iterations {
        mf.sweep()?;
        let current = if monitor { Some(mf.free_energy()?) } else { None };
        if let Some(t) = trace.as_mut() {
            t.push(TraceRow {
                iteration: m,
                p_a: mf.state().mixture_mean(),
                sigma2: mf.state().noise_mean(),
                free_energy: current,
            });
        }
        if let (Some(tol), Some(prev), Some(cur)) = (config.free_energy_tolerance, previous, current) {
            if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
                break;
            }
        }
        previous = current;
    }
    Ok(ChainResult::from_mean(mf.state().mixture_mean(), trace))
}

/// Pure mean field: prior-consistent initialization, then up to M sweeps.
/// The decision is the argmax of `γ̃ / Σγ̃`.
pub fn mean_field_run(model: &Model, y: &ReceivedGrid, config: &InferenceConfig, rng: &mut RandomStream) -> Result<ChainResult> {
    let state = MeanFieldState::from_prior(model, config, rng)?;
    let trace = config.record_trace.then(Vec::new);
    iterate(model, y, config, state, 1, trace)
}

/// Gibbs for sweeps `1..m_s`, then mean field for `m_s..=M`, with each
/// factor initialized from the matching Gibbs full conditional after sweep
/// `m_s − 1`. `m_s = 1` is [`mean_field_run`].
pub fn hybrid_run(model: &Model, y: &ReceivedGrid, config: &InferenceConfig, rng: &mut RandomStream) -> Result<ChainResult> {
    config.validate(model.labels())?;
    let switch = config.switch_iteration;
    if switch <= 1 {
        return mean_field_run(model, y, config, rng);
    }
    let mut sampler = GibbsSampler::new(model, y, config, rng)?;
    let mut trace = config.record_trace.then(Vec::new);
    for m in 1..switch {
        sampler.sweep(m, rng)?;
        if let Some(t) = trace.as_mut() {
            t.push(TraceRow {
                iteration: m,
                p_a: sampler.state().p_a.clone(),
                sigma2: sampler.state().sigma2,
                free_energy: None,
            });
        }
    }
    let state = MeanFieldState::from_gibbs(&sampler, switch - 1)?;
    iterate(model, y, config, state, switch, trace)
}

#[cfg(test)]
mod tests;
