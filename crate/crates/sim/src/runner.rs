//! Parallel epoch execution.

use anypath_core::experiment::{aggregate, run_epoch, ExperimentError, ExperimentOutcome};
use anypath_core::{ExperimentConfig, Topology};
use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("failed to start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Runs all epochs on `jobs` worker threads. Each epoch draws from its own
/// keyed random streams, so the outcome is identical for every `jobs` value.
pub fn run_experiment(
    topo: &Topology,
    config: &ExperimentConfig,
    jobs: usize,
) -> Result<ExperimentOutcome, RunError> {
    config.validate().map_err(ExperimentError::from)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()?;
    let traces = pool.install(|| {
        (0..config.epochs)
            .into_par_iter()
            .map(|e| run_epoch(topo, config, e))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let aggregate = aggregate(&traces)?;
    Ok(ExperimentOutcome { traces, aggregate })
}

/// Whole-run statistics that the aggregated CSV does not carry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunStats {
    pub explore_fraction: f64,
    /// Delivered packets over exploitation slots; `None` without any.
    pub delivery_rate: Option<f64>,
    pub capped_slots: usize,
}

pub fn run_stats(outcome: &ExperimentOutcome) -> RunStats {
    let mut slots = 0usize;
    let mut explore = 0usize;
    let mut exploit = 0usize;
    let mut delivered = 0usize;
    let mut capped = 0usize;
    for trace in &outcome.traces {
        slots += trace.slots.len();
        explore += trace.explore_slots();
        capped += trace.capped_slots();
        for s in &trace.slots {
            if let Some(ok) = s.delivered {
                exploit += 1;
                delivered += usize::from(ok);
            }
        }
    }
    RunStats {
        explore_fraction: explore as f64 / slots.max(1) as f64,
        delivery_rate: (exploit > 0).then(|| delivered as f64 / exploit as f64),
        capped_slots: capped,
    }
}
