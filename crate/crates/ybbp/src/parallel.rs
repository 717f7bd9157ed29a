//! Multi-threaded drivers. Work items own their random streams, so results
//! are identical for every worker count.

use rayon::prelude::*;
use ybbp_core::abc::{evaluate_proposal, AbcConfig, Observed, PosteriorSample, Selector};
use ybbp_core::predictive::{simulate_replicate, PredictiveConfig, PredictiveRow};
use ybbp_core::{LawFamily, Result};

use crate::error::{AppError, AppResult};

const CHUNK: u64 = 2048;

pub fn thread_pool(workers: Option<usize>) -> AppResult<rayon::ThreadPool> {
    let n = match workers {
        Some(0) => return Err(AppError::config("`workers` must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| AppError::config(format!("cannot start {n} workers: {e}")))
}

/// Same result as [`ybbp_core::abc::run_rejection`].
pub fn run_rejection(obs: &Observed, config: &AbcConfig, pool: &rayon::ThreadPool) -> Result<PosteriorSample> {
    obs.validate()?;
    config.validate()?;
    let chunks = config.pool_size.div_ceil(CHUNK);
    let capacity = config.selection_capacity();
    let parts: Vec<Selector> = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut selector = Selector::new(capacity);
                for i in (c * CHUNK)..((c + 1) * CHUNK).min(config.pool_size) {
                    selector.push(i, evaluate_proposal(obs, config, i)?);
                }
                Ok(selector)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut merged = Selector::new(capacity);
    for part in parts {
        merged.merge(part);
    }
    merged.finish(config)
}

/// Same rows, in the same order, as [`ybbp_core::predictive::predict`].
pub fn predict(
    draws: &PosteriorSample,
    cfg: &PredictiveConfig,
    family: LawFamily,
    pool: &rayon::ThreadPool,
) -> Result<Vec<PredictiveRow>> {
    if draws.draws.is_empty() {
        return Err(ybbp_core::Error::EmptySample);
    }
    cfg.validate()?;
    let s = cfg.replicates;
    let total = draws.draws.len() as u64 * s;
    pool.install(|| {
        (0..total)
            .into_par_iter()
            .map(|k| simulate_replicate(&draws.draws[(k / s) as usize].theta, family, cfg, k / s, k % s))
            .collect()
    })
}
