//! Posterior predictive simulation: continue the process from the last
//! observed census under each accepted θ.

use alloc::vec::Vec;

use crate::abc::PosteriorSample;
use crate::error::{Error, Result};
use crate::laws::LawFamily;
use crate::model::{founding_state, Census, GenerationState, Model, ParamVector};
use crate::rng::{domain, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PredictiveConfig {
    /// Generations ahead.
    pub horizon: usize,
    /// Replicates per posterior draw.
    pub replicates: u64,
    pub start: Census,
    pub seed: u64,
}

impl PredictiveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("predictive replicates must be >= 1".into()));
        }
        Ok(())
    }

    fn stream_index(&self, draw_index: u64, replicate: u64) -> u64 {
        draw_index * self.replicates + replicate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictiveRow {
    pub draw_index: u64,
    pub replicate: u64,
    /// Generation N + l; `n` counts generations after the start census.
    pub state: GenerationState,
}

/// One replicate: the start census is mated afresh, then `horizon`
/// reproduction and mating steps follow.
pub fn simulate_replicate(
    theta: &ParamVector,
    family: LawFamily,
    cfg: &PredictiveConfig,
    draw_index: u64,
    replicate: u64,
) -> Result<PredictiveRow> {
    let mut rng = RandomStream::derive(cfg.seed, domain::PREDICTIVE, cfg.stream_index(draw_index, replicate));
    let model = Model::new(*theta, family.law(theta.m_R)?, family.law(theta.m_r)?)?;
    let mut state = founding_state(cfg.start, &mut rng);
    for _ in 0..cfg.horizon {
        state = model.step(&state, &mut rng)?;
    }
    Ok(PredictiveRow { draw_index, replicate, state })
}

/// All `draws × replicates` rows, draw-major.
pub fn predict(draws: &PosteriorSample, cfg: &PredictiveConfig, family: LawFamily) -> Result<Vec<PredictiveRow>> {
    if draws.draws.is_empty() {
        return Err(Error::EmptySample);
    }
    cfg.validate()?;
    let mut rows = Vec::with_capacity(draws.draws.len() * cfg.replicates as usize);
    for (i, draw) in draws.draws.iter().enumerate() {
        for r in 0..cfg.replicates {
            rows.push(simulate_replicate(&draw.theta, family, cfg, i as u64, r)?);
        }
    }
    Ok(rows)
}

/// E[F_{N+1}] given θ and the couples formed from the start census, using
/// the expected hypergeometric split when males outnumber females.
#[allow(non_snake_case)]
pub fn expected_next_females(theta: &ParamVector, start: Census) -> f64 {
    let f = start.females as f64;
    let m_R = start.males_R as f64;
    let m_r = start.males_r as f64;
    let males = m_R + m_r;
    let (z_R, z_r) = if f >= males || males == 0.0 {
        (m_R, m_r)
    } else {
        (f * m_R / males, f * m_r / males)
    };
    theta.alpha * (z_R * theta.m_R + z_r * theta.m_r)
}
