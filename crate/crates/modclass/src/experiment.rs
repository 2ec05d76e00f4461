//! Seeded Monte Carlo trials over the configured cells.

use std::time::{Duration, Instant};

use modclass_core::gibbs::{run_with_restarts, ChainResult, InferenceConfig, Model};
use modclass_core::meanfield::{hybrid_run, mean_field_run};
use modclass_core::numerics::{derive_seed, RandomStream};
use modclass_core::sigmodel::{synthesize, ReceivedGrid};
use rayon::prelude::*;

use crate::config::{Cell, ExperimentConfig, Method};
use crate::error::{HarnessError, Result};

/// Outcome of one classification trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// Position in canonical order (cell, then modulation, then trial index).
    pub trial_id: usize,
    pub snr_db: f64,
    pub method: Method,
    pub l_hat: usize,
    pub iterations: usize,
    /// Pool index of the transmitted modulation.
    pub truth: usize,
    /// Trial index within its (cell, modulation) group.
    pub trial: usize,
    pub seed: u64,
    pub decision: usize,
    pub p_a_mean: Vec<f64>,
    pub entropy: f64,
    pub wall_time: Duration,
}

impl TrialRecord {
    pub fn correct(&self) -> bool {
        self.decision == self.truth
    }
}

/// Seed of trial `trial` for modulation `modulation` at SNR index `snr_index`.
/// Methods, L̂ and M share it, so their comparisons are paired.
pub fn trial_seed(base_seed: u64, snr_index: usize, modulation: usize, trial: usize) -> u64 {
    derive_seed(base_seed, &[snr_index as u64, modulation as u64, trial as u64])
}

/// Runs `method` on one observation. The stream is consumed as the
/// method's only source of randomness.
pub fn classify(
    method: Method,
    model: &Model,
    y: &ReceivedGrid,
    config: &InferenceConfig,
    rng: &mut RandomStream,
) -> modclass_core::Result<ChainResult> {
    match method {
        Method::MeanField => mean_field_run(model, y, config, rng),
        Method::Hybrid => hybrid_run(model, y, config, rng),
        _ => run_with_restarts(model, y, config, rng),
    }
}

struct WorkItem {
    trial_id: usize,
    cell: Cell,
    truth: usize,
    trial: usize,
}

fn run_trial(config: &ExperimentConfig, item: &WorkItem) -> Result<TrialRecord> {
    let start = Instant::now();
    let cell = item.cell;
    let truth_name = &config.pool[item.truth];
    let scenario = config.scenario(cell.snr_db, cell.l_hat, truth_name)?;
    let inference = config.inference(cell.method, cell.l_hat, cell.iterations)?;
    let model = Model::new(scenario.pool.clone(), scenario.dims())?;
    let seed = trial_seed(config.base_seed, cell.snr_index, item.truth, item.trial);
    let stream = RandomStream::new(seed);
    let frame = synthesize(&scenario, &mut stream.child(0))?;
    let result = classify(cell.method, &model, &frame.received, &inference, &mut stream.child(1)).map_err(|e| {
        HarnessError::from(e).with_context(format!(
            "trial {} ({} at {} dB, {} transmitted)",
            item.trial_id, cell.method, cell.snr_db, truth_name
        ))
    })?;
    Ok(TrialRecord {
        trial_id: item.trial_id,
        snr_db: cell.snr_db,
        method: cell.method,
        l_hat: cell.l_hat,
        iterations: cell.iterations,
        truth: item.truth,
        trial: item.trial,
        seed,
        decision: result.decision,
        p_a_mean: result.p_a_mean,
        entropy: result.entropy,
        wall_time: start.elapsed(),
    })
}

/// Worker count: explicit request, then `MODCLASS_WORKERS`, then the config,
/// then the available parallelism.
pub fn resolve_workers(requested: Option<usize>, config: &ExperimentConfig) -> usize {
    requested
        .or_else(|| std::env::var("MODCLASS_WORKERS").ok().and_then(|v| v.trim().parse().ok()))
        .or(config.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

/// Validates `config`, then runs every (cell, modulation, trial) on
/// `workers` threads. Records come back in canonical order regardless of
/// scheduling.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let mut items = Vec::new();
    let truths = config.transmitted_indices();
    for cell in config.cells() {
        for &truth in &truths {
            for trial in 0..config.trials_per_modulation {
                items.push(WorkItem {
                    trial_id: items.len(),
                    cell,
                    truth,
                    trial,
                });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| items.par_iter().map(|item| run_trial(config, item)).collect())
}
