//! Partial observation schemes and the rescaled distances between them.
//!
//! The basic scheme sees the totals (F_n, M_n) for n < N and the genotype
//! split (F_N, M^R_N, M^r_N) of the last generation. The extended scheme adds
//! the genotype split of generation N − 1 and the origin split of the last
//! generation's r-males.
//!
//! Every distance term compares two positive counts `a`, `b` through
//! `(a/b − b/a)^2`, which is symmetric and vanishes only at `a = b`.
#![allow(non_snake_case)]

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::PathRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LastGeneration {
    pub females: u64,
    pub males_R: u64,
    pub males_r: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicSample {
    /// (F_n, M_n) for n = 0..N−1.
    pub fm: Vec<(u64, u64)>,
    pub last: LastGeneration,
}

impl BasicSample {
    /// Validates the positivity of the last generation.
    pub fn new(fm: Vec<(u64, u64)>, last: LastGeneration) -> Result<Self> {
        if fm.is_empty() {
            return Err(Error::InvalidConfig("observed sample needs at least generations 0 and 1".into()));
        }
        let sample = Self { fm, last };
        if !sample.is_positive() {
            return Err(Error::VariantMismatch(
                "F_N, M^R_N and M^r_N must all be positive".into(),
            ));
        }
        Ok(sample)
    }

    /// N.
    pub fn horizon(&self) -> usize {
        self.fm.len()
    }

    /// Whether every count entering the distance is positive.
    pub fn is_positive(&self) -> bool {
        self.last.females > 0
            && self.last.males_R > 0
            && self.last.males_r > 0
            && self.fm[1..].iter().all(|&(f, m)| f > 0 && m > 0)
    }

    /// (F_n, M_n) for n = 0..=N.
    pub fn totals(&self, n: usize) -> (u64, u64) {
        if n < self.fm.len() {
            self.fm[n]
        } else {
            (self.last.females, self.last.males_R + self.last.males_r)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SchemeVariant {
    /// M^R_N, M^{R→r}_N and M^{r→r}_N all observed positive.
    BothPositive,
    /// M^{r→r}_N = 0 observed.
    RrZero,
    /// M^{R→r}_N = 0 observed.
    RmutZero,
}

impl SchemeVariant {
    /// The variant implied by the last generation's r-male origin split, if any.
    pub fn detect(males_Rr_last: u64, males_rr_last: u64) -> Option<Self> {
        match (males_Rr_last > 0, males_rr_last > 0) {
            (true, true) => Some(Self::BothPositive),
            (true, false) => Some(Self::RrZero),
            (false, true) => Some(Self::RmutZero),
            (false, false) => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::BothPositive => "both_positive",
            Self::RrZero => "rr_zero",
            Self::RmutZero => "rmut_zero",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedSample {
    pub basic: BasicSample,
    pub males_R_prev: u64,
    pub males_r_prev: u64,
    pub males_Rr_last: u64,
    pub males_rr_last: u64,
}

impl ExtendedSample {
    /// Checks the census identities linking the extra fields to the basic
    /// sample.
    pub fn new(
        basic: BasicSample,
        males_R_prev: u64,
        males_r_prev: u64,
        males_Rr_last: u64,
        males_rr_last: u64,
    ) -> Result<Self> {
        let sample = Self { basic, males_R_prev, males_r_prev, males_Rr_last, males_rr_last };
        if males_Rr_last + males_rr_last != sample.basic.last.males_r {
            return Err(Error::VariantMismatch(alloc::format!(
                "M^(R->r)_N + M^(r->r)_N = {} but M^r_N = {}",
                males_Rr_last + males_rr_last,
                sample.basic.last.males_r
            )));
        }
        let n = sample.basic.horizon();
        let prev_total = sample.basic.fm[n - 1].1;
        if males_R_prev + males_r_prev != prev_total {
            return Err(Error::VariantMismatch(alloc::format!(
                "M^R_(N-1) + M^r_(N-1) = {} but M_(N-1) = {prev_total}",
                males_R_prev + males_r_prev
            )));
        }
        Ok(sample)
    }

    pub fn variant(&self) -> Option<SchemeVariant> {
        SchemeVariant::detect(self.males_Rr_last, self.males_rr_last)
    }

    /// Whether the zero pattern is exactly the one `variant` prescribes.
    pub fn matches(&self, variant: SchemeVariant) -> bool {
        let others = self.basic.is_positive()
            && self.basic.last.males_R > 0
            && self.males_R_prev > 0
            && self.males_r_prev > 0;
        others && self.variant() == Some(variant)
    }
}

/// Projects a path onto the basic scheme; `None` unless both genotypes and
/// females are present in the last generation.
pub fn extract_basic(path: &PathRecord) -> Option<BasicSample> {
    if path.states.len() < 2 {
        return None;
    }
    let (head, tail) = path.states.split_at(path.states.len() - 1);
    let last = &tail[0];
    let sample = BasicSample {
        fm: head.iter().map(|s| (s.females, s.males())).collect(),
        last: LastGeneration { females: last.females, males_R: last.males_R, males_r: last.males_r() },
    };
    sample.is_positive().then_some(sample)
}

/// Projects a path onto the extended scheme; `None` unless the path's zero
/// pattern matches `variant` exactly.
pub fn extract_extended(path: &PathRecord, variant: SchemeVariant) -> Option<ExtendedSample> {
    let n = path.states.len();
    if n < 2 {
        return None;
    }
    let prev = &path.states[n - 2];
    let last = &path.states[n - 1];
    let basic = BasicSample {
        fm: path.states[..n - 1].iter().map(|s| (s.females, s.males())).collect(),
        last: LastGeneration { females: last.females, males_R: last.males_R, males_r: last.males_r() },
    };
    let sample = ExtendedSample {
        basic,
        males_R_prev: prev.males_R,
        males_r_prev: prev.males_r(),
        males_Rr_last: last.males_Rr,
        males_rr_last: last.males_rr,
    };
    sample.matches(variant).then_some(sample)
}

#[inline]
fn term(sim: u64, obs: u64, what: &'static str) -> Result<f64> {
    if sim == 0 || obs == 0 {
        return Err(Error::ZeroDenominator(what));
    }
    let (a, b) = (sim as f64, obs as f64);
    let d = a / b - b / a;
    Ok(d * d)
}

fn shared_terms(sim: &BasicSample, obs: &BasicSample, male_totals_until: usize) -> Result<f64> {
    let n = obs.horizon();
    if sim.horizon() != n {
        return Err(Error::HorizonMismatch { sim: sim.horizon(), obs: n });
    }
    let mut sum = 0.0;
    for g in 1..=n {
        sum += term(sim.totals(g).0, obs.totals(g).0, "F_n")?;
    }
    for g in 1..=male_totals_until {
        sum += term(sim.fm[g].1, obs.fm[g].1, "M_n")?;
    }
    Ok(sum)
}

/// Squared basic-scheme distance: F_n for n = 1..N, M_n for n = 1..N−1,
/// then M^R_N and M^r_N.
pub fn rho_squared(sim: &BasicSample, obs: &BasicSample) -> Result<f64> {
    let n = obs.horizon();
    let mut sum = shared_terms(sim, obs, n.saturating_sub(1))?;
    sum += term(sim.last.males_R, obs.last.males_R, "M^R_N")?;
    sum += term(sim.last.males_r, obs.last.males_r, "M^r_N")?;
    Ok(sum)
}

pub fn rho(sim: &BasicSample, obs: &BasicSample) -> Result<f64> {
    rho_squared(sim, obs).map(libm::sqrt)
}

/// Squared extended-scheme distance: F_n for n = 1..N, M_n for n = 1..N−2,
/// then M^R_{N−1}, M^r_{N−1}, M^R_N, M^{R→r}_N and M^{r→r}_N, dropping the
/// r→r term under [`SchemeVariant::RrZero`] and the R→r term under
/// [`SchemeVariant::RmutZero`].
pub fn rho_star_squared(sim: &ExtendedSample, obs: &ExtendedSample, variant: SchemeVariant) -> Result<f64> {
    for (side, sample) in [("simulated", sim), ("observed", obs)] {
        if !sample.matches(variant) {
            return Err(Error::VariantMismatch(alloc::format!(
                "{side} sample does not match {}",
                variant.label()
            )));
        }
    }
    let n = obs.basic.horizon();
    let mut sum = shared_terms(&sim.basic, &obs.basic, n.saturating_sub(2))?;
    sum += term(sim.males_R_prev, obs.males_R_prev, "M^R_(N-1)")?;
    sum += term(sim.males_r_prev, obs.males_r_prev, "M^r_(N-1)")?;
    sum += term(sim.basic.last.males_R, obs.basic.last.males_R, "M^R_N")?;
    if variant != SchemeVariant::RmutZero {
        sum += term(sim.males_Rr_last, obs.males_Rr_last, "M^(R->r)_N")?;
    }
    if variant != SchemeVariant::RrZero {
        sum += term(sim.males_rr_last, obs.males_rr_last, "M^(r->r)_N")?;
    }
    Ok(sum)
}

pub fn rho_star(sim: &ExtendedSample, obs: &ExtendedSample, variant: SchemeVariant) -> Result<f64> {
    rho_star_squared(sim, obs, variant).map(libm::sqrt)
}
