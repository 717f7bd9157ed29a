//! Tolerance rejection ABC.
//!
//! A pool of proposals is simulated; proposal `i` draws θ from the mixture
//! prior, randomises the genotype split of the initial males, simulates a
//! path and measures its distance to the observed sample. Paths whose zero
//! pattern cannot match the observation get an infinite distance. The
//! tolerance ε is the configured quantile of the finite distances and the
//! accepted draws are the proposals at or below it.
//!
//! Proposal `i` consumes only the stream `(master_seed, ABC_POOL, i)`, so the
//! pool can be evaluated in any order or split across any number of workers.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::laws::LawFamily;
use crate::model::{Census, Model, ParamVector};
use crate::observation::{self, BasicSample, ExtendedSample, SchemeVariant};
use crate::rng::{domain, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PriorSpec {
    /// Upper end of the uniform priors on m_R and on the positive part of m_r.
    pub m_max: f64,
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self { m_max: 10.0 }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m_max.is_finite() && self.m_max > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(alloc::format!("m_max must be positive, got {}", self.m_max)))
        }
    }
}

/// Draws θ from the mixture prior. β and m_r each have a spike at 0 whose
/// weight is itself uniform and redrawn per proposal; the `force_*` flags
/// remove the spike.
#[allow(non_snake_case)]
pub fn draw_prior(
    spec: &PriorSpec,
    force_positive_beta: bool,
    force_positive_m_r: bool,
    rng: &mut RandomStream,
) -> ParamVector {
    let alpha = rng.open01();
    let gamma = rng.unit();
    let phi = rng.unit();
    let beta = if !force_positive_beta && rng.unit() < gamma {
        0.0
    } else {
        rng.open01()
    };
    let m_r = if !force_positive_m_r && rng.unit() < phi {
        0.0
    } else {
        spec.m_max * rng.open01()
    };
    let m_R = spec.m_max * rng.open01();
    ParamVector { alpha, beta, m_R, m_r }
}

/// Initial census for a simulated path: females copied, the observed male
/// total split uniformly between genotypes.
#[allow(non_snake_case)]
pub fn init_state_from_obs(females: u64, males: u64, rng: &mut RandomStream) -> Census {
    let males_R = rng.below_inclusive(males);
    Census::new(females, males_R, males - males_R)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Scheme {
    Basic,
    Extended(SchemeVariant),
}

/// An observed sample together with the scheme it is compared under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observed {
    Basic(BasicSample),
    Extended(ExtendedSample, SchemeVariant),
}

impl Observed {
    pub fn basic(&self) -> &BasicSample {
        match self {
            Self::Basic(b) => b,
            Self::Extended(e, _) => &e.basic,
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            Self::Basic(_) => Scheme::Basic,
            Self::Extended(_, v) => Scheme::Extended(*v),
        }
    }

    pub fn horizon(&self) -> usize {
        self.basic().horizon()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Basic(b) if !b.is_positive() => {
                Err(Error::VariantMismatch("observed sample is not positive in the last generation".into()))
            }
            Self::Extended(e, v) if !e.matches(*v) => Err(Error::VariantMismatch(alloc::format!(
                "observed sample does not have the {} zero pattern",
                v.label()
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AbcConfig {
    pub pool_size: u64,
    pub tolerance_quantile: f64,
    pub law_family: LawFamily,
    pub master_seed: u64,
    pub force_positive_beta: bool,
    pub force_positive_m_r: bool,
    pub prior: PriorSpec,
}

impl AbcConfig {
    pub fn new(pool_size: u64, tolerance_quantile: f64, master_seed: u64) -> Self {
        Self {
            pool_size,
            tolerance_quantile,
            law_family: LawFamily::Poisson,
            master_seed,
            force_positive_beta: false,
            force_positive_m_r: false,
            prior: PriorSpec::default(),
        }
    }

    /// Spike removal implied by an observed zero pattern: a positive R→r
    /// count needs β > 0 and a positive r→r count needs m_r > 0.
    pub fn with_forcing_for(mut self, scheme: Scheme) -> Self {
        match scheme {
            Scheme::Basic => {}
            Scheme::Extended(SchemeVariant::BothPositive) => {
                self.force_positive_beta = true;
                self.force_positive_m_r = true;
            }
            Scheme::Extended(SchemeVariant::RrZero) => self.force_positive_beta = true,
            Scheme::Extended(SchemeVariant::RmutZero) => self.force_positive_m_r = true,
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.tolerance_quantile;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidConfig(alloc::format!("tolerance quantile {q} outside (0, 1)")));
        }
        if (self.pool_size as f64) * q < 1.0 {
            return Err(Error::InvalidConfig(alloc::format!(
                "pool size {} is below 1/quantile = {}",
                self.pool_size,
                1.0 / q
            )));
        }
        self.law_family.validate()?;
        self.prior.validate()
    }

    /// Compatible paths needed for the quantile to select at least one draw.
    pub fn required_compatible(&self) -> u64 {
        libm::ceil(1.0 / self.tolerance_quantile) as u64
    }

    /// Upper bound on the number of accepted draws.
    pub fn selection_capacity(&self) -> usize {
        libm::ceil(self.tolerance_quantile * self.pool_size as f64) as usize + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub theta: ParamVector,
    /// +∞ for incompatible paths.
    pub distance: f64,
}

/// Simulates proposal `index` of the pool.
pub fn evaluate_proposal(obs: &Observed, config: &AbcConfig, index: u64) -> Result<Proposal> {
    let mut rng = RandomStream::derive(config.master_seed, domain::ABC_POOL, index);
    let theta = draw_prior(&config.prior, config.force_positive_beta, config.force_positive_m_r, &mut rng);
    let (f0, m0) = obs.basic().fm[0];
    let initial = init_state_from_obs(f0, m0, &mut rng);
    let model = Model {
        theta,
        law_R: config.law_family.law(theta.m_R)?,
        law_r: config.law_family.law(theta.m_r)?,
    };
    let distance = match model.simulate_path_with_R(initial, obs.horizon(), &mut rng)? {
        None => f64::INFINITY,
        Some(path) => match obs {
            Observed::Basic(o) => match observation::extract_basic(&path) {
                Some(sim) => observation::rho(&sim, o)?,
                None => f64::INFINITY,
            },
            Observed::Extended(o, variant) => match observation::extract_extended(&path, *variant) {
                Some(sim) => observation::rho_star(&sim, o, *variant)?,
                None => f64::INFINITY,
            },
        },
    };
    Ok(Proposal { theta, distance })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AcceptedDraw {
    pub theta: ParamVector,
    pub distance: f64,
    pub path_index: u64,
}

impl AcceptedDraw {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.path_index.cmp(&other.path_index))
    }
}

struct ByKey(AcceptedDraw);

impl PartialEq for ByKey {
    fn eq(&self, other: &Self) -> bool {
        self.0.key_cmp(&other.0) == Ordering::Equal
    }
}
impl Eq for ByKey {}
impl PartialOrd for ByKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ByKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.key_cmp(&other.0)
    }
}

/// Streaming reduction over a pool: keeps the `capacity` smallest finite
/// distances (ordered by distance, then pool index) and counts compatible
/// paths. The retained set does not depend on insertion order.
pub struct Selector {
    capacity: usize,
    heap: BinaryHeap<ByKey>,
    n_seen: u64,
    n_compatible: u64,
}

impl Selector {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, heap: BinaryHeap::with_capacity(capacity + 1), n_seen: 0, n_compatible: 0 }
    }

    pub fn push(&mut self, path_index: u64, proposal: Proposal) {
        self.n_seen += 1;
        if !proposal.distance.is_finite() {
            return;
        }
        self.n_compatible += 1;
        let draw = AcceptedDraw { theta: proposal.theta, distance: proposal.distance, path_index };
        if self.heap.len() < self.capacity {
            self.heap.push(ByKey(draw));
        } else if let Some(worst) = self.heap.peek() {
            if draw.key_cmp(&worst.0) == Ordering::Less {
                self.heap.pop();
                self.heap.push(ByKey(draw));
            }
        }
    }

    pub fn n_compatible(&self) -> u64 {
        self.n_compatible
    }

    /// Combines two selectors over disjoint index ranges.
    pub fn merge(&mut self, other: Selector) {
        self.n_seen += other.n_seen;
        self.n_compatible += other.n_compatible;
        for draw in other.heap {
            if self.heap.len() < self.capacity {
                self.heap.push(draw);
            } else if let Some(worst) = self.heap.peek() {
                if draw.0.key_cmp(&worst.0) == Ordering::Less {
                    self.heap.pop();
                    self.heap.push(draw);
                }
            }
        }
    }

    /// ε is the k-th smallest finite distance with k = round(q · n_compatible);
    /// exactly k draws are accepted, ties at ε going to the lowest pool
    /// indices. Draws are returned in pool order.
    pub fn finish(self, config: &AbcConfig) -> Result<PosteriorSample> {
        let required = config.required_compatible();
        if self.n_compatible < required {
            return Err(Error::InsufficientCompatible {
                compatible: self.n_compatible,
                required,
                pool_size: self.n_seen,
            });
        }
        let k = libm::round(config.tolerance_quantile * self.n_compatible as f64).max(1.0) as usize;
        let mut best: Vec<AcceptedDraw> = self.heap.into_sorted_vec().into_iter().map(|b| b.0).collect();
        best.truncate(k);
        let epsilon = best.last().map(|d| d.distance).unwrap_or(0.0);
        best.sort_by_key(|d| d.path_index);
        Ok(PosteriorSample {
            draws: best,
            epsilon,
            pool_size: self.n_seen,
            n_compatible: self.n_compatible,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PosteriorSample {
    pub draws: Vec<AcceptedDraw>,
    pub epsilon: f64,
    pub pool_size: u64,
    pub n_compatible: u64,
}

#[allow(non_snake_case)]
impl PosteriorSample {
    pub fn alphas(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.theta.alpha).collect()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.theta.beta).collect()
    }

    pub fn m_Rs(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.theta.m_R).collect()
    }

    pub fn m_rs(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.theta.m_r).collect()
    }

    /// Draws whose θ satisfies `keep`, with ε and pool counts unchanged.
    pub fn filtered(&self, keep: impl Fn(&ParamVector) -> bool) -> PosteriorSample {
        PosteriorSample {
            draws: self.draws.iter().filter(|d| keep(&d.theta)).copied().collect(),
            epsilon: self.epsilon,
            pool_size: self.pool_size,
            n_compatible: self.n_compatible,
        }
    }
}

/// Sequential reference driver over the whole pool.
pub fn run_rejection(obs: &Observed, config: &AbcConfig) -> Result<PosteriorSample> {
    obs.validate()?;
    config.validate()?;
    let mut selector = Selector::new(config.selection_capacity());
    for index in 0..config.pool_size {
        selector.push(index, evaluate_proposal(obs, config, index)?);
    }
    selector.finish(config)
}
