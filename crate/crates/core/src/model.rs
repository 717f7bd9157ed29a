//! The Y-linked two-sex branching process with mutations and blind choice.
//!
//! A generation is produced in two stages. In reproduction every couple has
//! offspring according to its genotype's law; offspring of R-couples are
//! split into females, R-males and mutant r-males, offspring of r-couples
//! into females and r-males. In mating each male pairs with one female while
//! females last; when males outnumber females the genotypes of the mated
//! males are a hypergeometric draw.
#![allow(non_snake_case)]

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::laws::OffspringLaw;
use crate::rng::RandomStream;
use crate::sampling;

/// θ = (α, β, m_R, m_r).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamVector {
    /// Probability that an offspring is female.
    pub alpha: f64,
    /// Probability that a son of an R-father carries a mutated allele.
    pub beta: f64,
    /// Mean offspring of an R-couple.
    pub m_R: f64,
    /// Mean offspring of an r-couple.
    pub m_r: f64,
}

impl ParamVector {
    pub fn new(alpha: f64, beta: f64, m_R: f64, m_r: f64) -> Result<Self> {
        let theta = Self { alpha, beta, m_R, m_r };
        theta.validate()?;
        Ok(theta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: self.alpha,
                reason: "must lie in (0, 1)",
            });
        }
        if !(self.beta >= 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: self.beta,
                reason: "must lie in [0, 1)",
            });
        }
        for (name, value) in [("m_R", self.m_R), ("m_r", self.m_r)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter { name, value, reason: "must be finite and >= 0" });
            }
        }
        Ok(())
    }

    /// min(α, 1 − α).
    pub fn sex_limit(&self) -> f64 {
        self.alpha.min(1.0 - self.alpha)
    }
}

/// Females and males by genotype, before mating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Census {
    pub females: u64,
    pub males_R: u64,
    pub males_r: u64,
}

impl Census {
    pub fn new(females: u64, males_R: u64, males_r: u64) -> Self {
        Self { females, males_R, males_r }
    }
}

/// Output of one reproduction phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Offspring {
    pub females: u64,
    pub males_R: u64,
    /// r-males whose fathers were R-males (mutants).
    pub males_Rr: u64,
    /// r-males whose fathers were r-males.
    pub males_rr: u64,
}

/// Full census of one generation after mating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenerationState {
    pub n: u32,
    pub females: u64,
    pub males_R: u64,
    pub males_Rr: u64,
    pub males_rr: u64,
    pub couples_R: u64,
    pub couples_r: u64,
}

impl GenerationState {
    pub fn males_r(&self) -> u64 {
        self.males_Rr + self.males_rr
    }

    pub fn males(&self) -> u64 {
        self.males_R + self.males_r()
    }

    pub fn is_extinct(&self) -> bool {
        self.couples_R == 0 && self.couples_r == 0
    }

    pub fn census(&self) -> Census {
        Census::new(self.females, self.males_R, self.males_r())
    }
}

/// Trajectory for generations 0..=N.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathRecord {
    pub states: Vec<GenerationState>,
}

impl PathRecord {
    /// N, the index of the last generation.
    pub fn horizon(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn last(&self) -> Option<&GenerationState> {
        self.states.last()
    }
}

/// Couples formed from a census: every male mates if females suffice,
/// otherwise every female picks a male blindly.
pub fn mate(females: u64, males_R: u64, males_r: u64, rng: &mut RandomStream) -> (u64, u64) {
    let males = males_R + males_r;
    if females >= males {
        return (males_R, males_r);
    }
    let z_R = sampling::hypergeometric(rng, males, males_R, females);
    (z_R, females - z_R)
}

/// θ together with the two reproduction laws it is simulated under.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub theta: ParamVector,
    pub law_R: OffspringLaw,
    pub law_r: OffspringLaw,
}

impl Model {
    pub fn new(theta: ParamVector, law_R: OffspringLaw, law_r: OffspringLaw) -> Result<Self> {
        theta.validate()?;
        Ok(Self { theta, law_R, law_r })
    }

    /// One reproduction phase from `z_R` R-couples and `z_r` r-couples.
    ///
    /// Couple totals are drawn in aggregate; splitting the aggregate is exact
    /// because the per-couple splits are iid multinomial thinnings with the
    /// same cell probabilities.
    pub fn reproduce(&self, z_R: u64, z_r: u64, rng: &mut RandomStream) -> Result<Offspring> {
        let ParamVector { alpha, beta, .. } = self.theta;
        let total_R = self.law_R.sample_couple_total(z_R, rng)?;
        let total_r = self.law_r.sample_couple_total(z_r, rng)?;

        // (F, M^R, M^{R→r}) ~ Multinomial(total_R; α, (1−α)(1−β), (1−α)β)
        let females_R = sampling::binomial(rng, total_R, alpha);
        let sons_R = total_R - females_R;
        let males_R = sampling::binomial(rng, sons_R, 1.0 - beta);
        let males_Rr = sons_R - males_R;

        // (F, M^{r→r}) ~ Multinomial(total_r; α, 1−α)
        let females_r = sampling::binomial(rng, total_r, alpha);
        let males_rr = total_r - females_r;

        let females = females_R
            .checked_add(females_r)
            .ok_or(Error::CountOverflow("females"))?;
        Ok(Offspring { females, males_R, males_Rr, males_rr })
    }

    /// Reference version of [`Model::reproduce`]: every couple draws its own
    /// offspring count and every child its own sex and genotype.
    pub fn reproduce_per_couple(&self, z_R: u64, z_r: u64, rng: &mut RandomStream) -> Result<Offspring> {
        let ParamVector { alpha, beta, .. } = self.theta;
        let mut kids = Offspring::default();
        for _ in 0..z_R {
            for _ in 0..self.law_R.sample(rng)? {
                if rng.unit() < alpha {
                    kids.females += 1;
                } else if rng.unit() < beta {
                    kids.males_Rr += 1;
                } else {
                    kids.males_R += 1;
                }
            }
        }
        for _ in 0..z_r {
            for _ in 0..self.law_r.sample(rng)? {
                if rng.unit() < alpha {
                    kids.females += 1;
                } else {
                    kids.males_rr += 1;
                }
            }
        }
        Ok(kids)
    }

    /// The next generation: reproduction from `state`'s couples, then mating.
    pub fn step(&self, state: &GenerationState, rng: &mut RandomStream) -> Result<GenerationState> {
        let kids = self.reproduce(state.couples_R, state.couples_r, rng)?;
        let males_r = kids
            .males_Rr
            .checked_add(kids.males_rr)
            .ok_or(Error::CountOverflow("r-males"))?;
        kids.males_R
            .checked_add(males_r)
            .ok_or(Error::CountOverflow("males"))?;
        let (couples_R, couples_r) = mate(kids.females, kids.males_R, males_r, rng);
        Ok(GenerationState {
            n: state.n + 1,
            females: kids.females,
            males_R: kids.males_R,
            males_Rr: kids.males_Rr,
            males_rr: kids.males_rr,
            couples_R,
            couples_r,
        })
    }

    /// Simulates generations 0..=`horizon`. Generation 0 is the mated initial
    /// census; its r-males are recorded as r-line males. Extinct paths are
    /// continued as all-zero generations.
    pub fn simulate_path(&self, initial: Census, horizon: usize, rng: &mut RandomStream) -> Result<PathRecord> {
        let mut states = Vec::with_capacity(horizon + 1);
        let mut state = founding_state(initial, rng);
        states.push(state);
        for _ in 0..horizon {
            state = if state.is_extinct() {
                GenerationState { n: state.n + 1, ..GenerationState::default() }
            } else {
                self.step(&state, rng)?
            };
            states.push(state);
        }
        Ok(PathRecord { states })
    }

    /// Like [`Model::simulate_path`] but gives up with `None` as soon as the
    /// R-line has no couples before the last generation, since such a path
    /// cannot end with R-males.
    pub fn simulate_path_with_R(
        &self,
        initial: Census,
        horizon: usize,
        rng: &mut RandomStream,
    ) -> Result<Option<PathRecord>> {
        let mut states = Vec::with_capacity(horizon + 1);
        let mut state = founding_state(initial, rng);
        states.push(state);
        for _ in 0..horizon {
            if state.couples_R == 0 {
                return Ok(None);
            }
            state = self.step(&state, rng)?;
            states.push(state);
        }
        Ok(Some(PathRecord { states }))
    }
}

/// Generation 0 from an initial census, with couples formed by the mating rule.
pub fn founding_state(initial: Census, rng: &mut RandomStream) -> GenerationState {
    let (couples_R, couples_r) = mate(initial.females, initial.males_R, initial.males_r, rng);
    GenerationState {
        n: 0,
        females: initial.females,
        males_R: initial.males_R,
        males_Rr: 0,
        males_rr: initial.males_r,
        couples_R,
        couples_r,
    }
}

/// Whether the coexistence set has positive probability:
/// min(α, 1 − α)(1 − β)m_R > 1.
pub fn survival_condition(theta: &ParamVector) -> bool {
    theta.sex_limit() * (1.0 - theta.beta) * theta.m_R > 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regime {
    /// m_r > (1 − β)m_R: r-couples outgrow R-couples.
    RDominant,
    /// m_r = (1 − β)m_R: the ratio Z^r/Z^R grows linearly.
    Equal,
    /// m_r < (1 − β)m_R: the ratio converges.
    NoDominant,
}

/// Long-run behaviour of Z^r_n / Z^R_n on the coexistence set.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RatioBehaviour {
    /// Grows like `rate^n` with rate m_r / ((1 − β)m_R).
    Geometric { rate: f64 },
    /// Grows like `slope · n` with slope β / (1 − β).
    Linear { slope: f64 },
    /// Converges to βm_R / ((1 − β)m_R − m_r).
    Limit { value: f64 },
    /// m_R = 0: the ratio is undefined.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateReport {
    pub tau_R: f64,
    pub tau_r: f64,
    pub regime: Regime,
    /// m_r − (1 − β)m_R; its sign decides the regime.
    pub gap: f64,
    pub ratio: RatioBehaviour,
}

/// Asymptotic growth rates of both couple types and the behaviour of their
/// ratio. The regime comparison is exact on the inputs.
pub fn theoretical_rates(theta: &ParamVector) -> RateReport {
    let s = theta.sex_limit();
    let retained = (1.0 - theta.beta) * theta.m_R;
    let tau_R = s * retained;
    let tau_r = s * theta.m_r.max(retained);
    let gap = theta.m_r - retained;
    let regime = if theta.m_r > retained {
        Regime::RDominant
    } else if theta.m_r == retained {
        Regime::Equal
    } else {
        Regime::NoDominant
    };
    let ratio = if theta.m_R == 0.0 {
        RatioBehaviour::Degenerate
    } else {
        match regime {
            Regime::RDominant => RatioBehaviour::Geometric { rate: theta.m_r / retained },
            Regime::Equal => RatioBehaviour::Linear { slope: theta.beta / (1.0 - theta.beta) },
            Regime::NoDominant => RatioBehaviour::Limit { value: theta.beta * theta.m_R / (retained - theta.m_r) },
        }
    };
    RateReport { tau_R, tau_r, regime, gap, ratio }
}
