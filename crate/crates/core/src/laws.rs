//! Offspring laws: the distribution of the total number of children of one
//! couple of a given genotype.
//!
//! Sums over many couples are sampled in closed form where the family is
//! closed under convolution (Poisson, negative binomial with common mean per
//! unit size), and by a multinomial split over support points otherwise.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::sampling;

/// Couple counts above which finite-support sums switch from a per-couple
/// loop to a multinomial split over support points.
pub const FINITE_LOOP_LIMIT: u64 = 64;

const PROB_SUM_TOLERANCE: f64 = 1e-12;

/// Plain description of a law, as it appears in configuration files:
/// `{"poisson": {"mean": 3.2}}`, `{"negbin": {"k": 2, "mean": 3.2}}`,
/// `{"finite": {"probs": [p0, ..., pK]}}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase", deny_unknown_fields))]
pub enum LawSpec {
    Poisson { mean: f64 },
    Negbin { k: f64, mean: f64 },
    Finite { probs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Poisson { mean: f64 },
    NegativeBinomial { size: f64, mean: f64 },
    FiniteSupport { probs: Vec<f64>, cdf: Vec<f64>, mean: f64 },
}

/// A validated offspring law. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringLaw {
    kind: Kind,
}

fn check_mean(mean: f64) -> Result<()> {
    if mean.is_finite() && mean >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidLaw(format!("mean must be finite and >= 0, got {mean}")))
    }
}

impl OffspringLaw {
    pub fn poisson(mean: f64) -> Result<Self> {
        check_mean(mean)?;
        Ok(Self { kind: Kind::Poisson { mean } })
    }

    /// Negative binomial with size `k` and mean `mean`; variance is
    /// `mean + mean^2 / k`.
    pub fn negative_binomial(size: f64, mean: f64) -> Result<Self> {
        check_mean(mean)?;
        if !(size.is_finite() && size > 0.0) {
            return Err(Error::InvalidLaw(format!("size k must be finite and > 0, got {size}")));
        }
        Ok(Self { kind: Kind::NegativeBinomial { size, mean } })
    }

    /// Law on `0..probs.len()` with `P(X = k) = probs[k]`.
    pub fn finite_support(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidLaw("finite support needs at least one probability".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidLaw(format!("probabilities must be finite and >= 0, got {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::InvalidLaw(format!("probabilities sum to {total}, expected 1")));
        }
        let mean = probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { kind: Kind::FiniteSupport { probs, cdf, mean } })
    }

    /// All mass at `count`.
    pub fn point_mass(count: usize) -> Self {
        let mut probs = alloc::vec![0.0; count + 1];
        probs[count] = 1.0;
        Self::finite_support(probs).expect("point mass is a valid law")
    }

    pub fn from_spec(spec: &LawSpec) -> Result<Self> {
        match spec {
            LawSpec::Poisson { mean } => Self::poisson(*mean),
            LawSpec::Negbin { k, mean } => Self::negative_binomial(*k, *mean),
            LawSpec::Finite { probs } => Self::finite_support(probs.clone()),
        }
    }

    pub fn spec(&self) -> LawSpec {
        match &self.kind {
            Kind::Poisson { mean } => LawSpec::Poisson { mean: *mean },
            Kind::NegativeBinomial { size, mean } => LawSpec::Negbin { k: *size, mean: *mean },
            Kind::FiniteSupport { probs, .. } => LawSpec::Finite { probs: probs.clone() },
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.kind {
            Kind::Poisson { mean } | Kind::NegativeBinomial { mean, .. } => *mean,
            Kind::FiniteSupport { mean, .. } => *mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match &self.kind {
            Kind::Poisson { mean } => *mean,
            Kind::NegativeBinomial { size, mean } => mean + mean * mean / size,
            Kind::FiniteSupport { probs, mean, .. } => probs
                .iter()
                .enumerate()
                .map(|(k, p)| p * (k as f64 - mean) * (k as f64 - mean))
                .sum(),
        }
    }

    /// One couple's offspring count.
    pub fn sample(&self, rng: &mut RandomStream) -> Result<u64> {
        match &self.kind {
            Kind::Poisson { mean } => sampling::poisson(rng, *mean),
            Kind::NegativeBinomial { size, mean } => {
                let rate = sampling::gamma(rng, *size, mean / size);
                sampling::poisson(rng, rate)
            }
            Kind::FiniteSupport { cdf, .. } => Ok(inverse_cdf(cdf, rng.unit())),
        }
    }

    /// Total offspring of `n_couples` independent couples.
    pub fn sample_couple_total(&self, n_couples: u64, rng: &mut RandomStream) -> Result<u64> {
        if n_couples == 0 {
            return Ok(0);
        }
        match &self.kind {
            Kind::Poisson { mean } => sampling::poisson(rng, n_couples as f64 * mean),
            Kind::NegativeBinomial { size, mean } => {
                let n = n_couples as f64;
                let rate = sampling::gamma(rng, n * size, mean / size);
                sampling::poisson(rng, rate)
            }
            Kind::FiniteSupport { probs, cdf, .. } => {
                if n_couples <= FINITE_LOOP_LIMIT {
                    let mut total = 0u64;
                    for _ in 0..n_couples {
                        total += inverse_cdf(cdf, rng.unit());
                    }
                    Ok(total)
                } else {
                    let mut counts = alloc::vec![0u64; probs.len()];
                    sampling::multinomial(rng, n_couples, probs, &mut counts);
                    counts.iter().enumerate().try_fold(0u64, |acc, (k, &c)| {
                        (k as u64)
                            .checked_mul(c)
                            .and_then(|v| acc.checked_add(v))
                            .ok_or(Error::CountOverflow("couple offspring total"))
                    })
                }
            }
        }
    }
}

fn inverse_cdf(cdf: &[f64], u: f64) -> u64 {
    // The last entry may fall a hair short of 1 after summation.
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1) as u64
}

/// Parametric family used to turn a proposed mean into a simulation law.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum LawFamily {
    Poisson,
    Negbin { k: f64 },
}

impl Default for LawFamily {
    fn default() -> Self {
        Self::Poisson
    }
}

impl LawFamily {
    /// The family member with the given mean. A zero mean yields the law
    /// degenerate at 0 in either family.
    pub fn law(&self, mean: f64) -> Result<OffspringLaw> {
        match *self {
            Self::Poisson => OffspringLaw::poisson(mean),
            Self::Negbin { k } => OffspringLaw::negative_binomial(k, mean),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.law(1.0).map(|_| ())
    }

    pub fn label(&self) -> alloc::string::String {
        match self {
            Self::Poisson => "poisson".into(),
            Self::Negbin { k } => format!("negbin(k={k})"),
        }
    }
}

/// Finite reproduction laws for the simulated examples, indexed by count
/// 0..=7.
pub mod tables {
    #![allow(non_upper_case_globals)]

    /// R-couples, m_R = 3.2.
    pub const EXAMPLE_1_R: [f64; 8] =
        [0.0139, 0.0819, 0.2069, 0.2904, 0.2445, 0.1236, 0.0347, 0.0041];
    /// r-couples, m_r = 4.
    pub const EXAMPLE_1_r: [f64; 8] =
        [0.0027, 0.0248, 0.0991, 0.2203, 0.2938, 0.2350, 0.1044, 0.0199];
    /// R-couples, m_R = 3.5.
    pub const EXAMPLE_2_R: [f64; 8] =
        [0.0078, 0.0547, 0.1641, 0.2734, 0.2734, 0.1641, 0.0547, 0.0078];
    /// r-couples, m_r = 2.6.
    pub const EXAMPLE_2_r: [f64; 8] =
        [0.0388, 0.1604, 0.2843, 0.2800, 0.1654, 0.0586, 0.0115, 0.0010];
    /// R-couples with mean 3 (the r law of this example is degenerate at 0).
    pub const EXAMPLE_3_R: [f64; 8] =
        [0.0199, 0.1044, 0.2350, 0.2938, 0.2203, 0.0991, 0.0248, 0.0027];
    /// R-couples, m_R = 3.
    pub const EXAMPLE_4_R: [f64; 8] = EXAMPLE_3_R;
    /// r-couples, m_r = 3.5.
    pub const EXAMPLE_4_r: [f64; 8] = EXAMPLE_2_R;
}
