//! Posterior summaries over accepted draws.

use alloc::vec::Vec;

use crate::abc::PosteriorSample;
use crate::error::{Error, Result};
use crate::model::{theoretical_rates, ParamVector};

const MIN_GRID: usize = 512;
const MAX_GRID: usize = 1 << 20;
/// Kernel support in bandwidths, each side.
const KERNEL_REACH: f64 = 5.0;
/// Grid padding in bandwidths, each side.
const GRID_PAD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensityEstimate {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityEstimate {
    pub fn spacing(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let h = self.spacing();
        let n = self.density.len();
        let inner: f64 = self.density[1..n - 1].iter().sum();
        h * (inner + 0.5 * (self.density[0] + self.density[n - 1]))
    }

    /// Linear interpolation; zero outside the grid.
    pub fn value_at(&self, x: f64) -> f64 {
        let lo = self.grid[0];
        let h = self.spacing();
        let pos = (x - lo) / h;
        if !(pos >= 0.0) || pos > (self.grid.len() - 1) as f64 {
            return 0.0;
        }
        let i = (pos as usize).min(self.grid.len() - 2);
        let frac = pos - i as f64;
        self.density[i] * (1.0 - frac) + self.density[i + 1] * frac
    }

    /// Mode of the grid density.
    pub fn mode(&self) -> f64 {
        let (i, _) = self
            .density
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
        self.grid[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityReport {
    Smooth(DensityEstimate),
    /// Every sample has the same value.
    PointMass(f64),
}

fn mean_of(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

fn sample_sd(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean_of(samples);
    let ss: f64 = samples.iter().map(|x| (x - m) * (x - m)).sum();
    libm::sqrt(ss / (n - 1) as f64)
}

/// Quantile of sorted data with linear interpolation between order
/// statistics.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule of thumb, 0.9 · min(sd, IQR/1.34) · n^(−1/5); falls back
/// to the standard deviation when the IQR vanishes.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let sd = sample_sd(samples);
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * libm::pow(samples.len() as f64, -0.2)
}

/// Gaussian kernel density estimate with Silverman's bandwidth, evaluated on
/// an even grid over [min − 3h, max + 3h].
///
/// Samples are linearly binned onto the grid and convolved with the
/// truncated kernel, so the cost is linear in the sample size. The grid
/// spacing is at most h/4 (within a size cap) and the result is rescaled to
/// unit trapezoidal mass.
pub fn kde(samples: &[f64]) -> Result<DensityReport> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let (min, max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if min == max {
        return Ok(DensityReport::PointMass(min));
    }
    let h = silverman_bandwidth(samples);
    let lo = min - GRID_PAD * h;
    let hi = max + GRID_PAD * h;
    let width = hi - lo;
    let target = (width / (MIN_GRID - 1) as f64).min(h / 4.0);
    let points = ((libm::ceil(width / target) as usize) + 1).clamp(MIN_GRID, MAX_GRID);
    let spacing = width / (points - 1) as f64;

    let mut weights = alloc::vec![0.0f64; points];
    for &x in samples {
        let pos = (x - lo) / spacing;
        let i = (pos as usize).min(points - 2);
        let frac = pos - i as f64;
        weights[i] += 1.0 - frac;
        weights[i + 1] += frac;
    }

    let reach = (libm::ceil(KERNEL_REACH * h / spacing) as usize).min(points - 1);
    let norm = 1.0 / (samples.len() as f64 * h * libm::sqrt(2.0 * core::f64::consts::PI));
    let kernel: Vec<f64> = (0..=reach)
        .map(|j| {
            let z = j as f64 * spacing / h;
            norm * libm::exp(-0.5 * z * z)
        })
        .collect();

    let mut density = alloc::vec![0.0f64; points];
    for (i, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let start = i.saturating_sub(reach);
        let end = (i + reach).min(points - 1);
        for (k, slot) in density[start..=end].iter_mut().enumerate() {
            let j = (start + k).abs_diff(i);
            *slot += w * kernel[j];
        }
    }

    let grid: Vec<f64> = (0..points).map(|i| lo + i as f64 * spacing).collect();
    let mut estimate = DensityEstimate { grid, density, bandwidth: h };
    let mass = estimate.integral();
    if mass > 0.0 {
        estimate.density.iter_mut().for_each(|d| *d /= mass);
    }
    Ok(DensityReport::Smooth(estimate))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HpdSet {
    pub level: f64,
    /// Disjoint, increasing.
    pub intervals: Vec<(f64, f64)>,
}

impl HpdSet {
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }

    /// Fraction of `samples` inside the set.
    pub fn sample_mass(&self, samples: &[f64]) -> f64 {
        samples.iter().filter(|&&x| self.contains(x)).count() as f64 / samples.len() as f64
    }

    pub fn total_width(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    /// Whether two sets share at least one point.
    pub fn overlaps(&self, other: &HpdSet) -> bool {
        self.intervals
            .iter()
            .any(|&(a, b)| other.intervals.iter().any(|&(c, d)| a <= d && c <= b))
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(level))
    }
}

/// Highest-density region of a grid density: the super-level set
/// {f ≥ t} for the largest t whose set carries at least `level` of the
/// grid mass.
pub fn hpd_from_density(estimate: &DensityEstimate, level: f64) -> Result<HpdSet> {
    check_level(level)?;
    let d = &estimate.density;
    let n = d.len();
    let spacing = estimate.spacing();
    let cell = |i: usize| if i == 0 || i == n - 1 { 0.5 * spacing } else { spacing };
    let total = estimate.integral();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
    let mut acc = 0.0;
    let mut threshold = d[order[n - 1]];
    for &i in &order {
        acc += d[i] * cell(i);
        if acc >= level * total {
            threshold = d[i];
            break;
        }
    }
    Ok(HpdSet { level, intervals: super_level_intervals(estimate, threshold) })
}

/// Maximal runs of grid points with density ≥ `threshold`, ends
/// interpolated to the threshold crossing.
fn super_level_intervals(estimate: &DensityEstimate, threshold: f64) -> Vec<(f64, f64)> {
    let d = &estimate.density;
    let g = &estimate.grid;
    let n = d.len();
    let crossing = |inside: usize, outside: usize| {
        let (a, b) = (d[outside], d[inside]);
        if b > a {
            let t = (threshold - a) / (b - a);
            g[outside] + t * (g[inside] - g[outside])
        } else {
            g[inside]
        }
    };
    let mut intervals = Vec::new();
    let mut i = 0;
    while i < n {
        if d[i] >= threshold {
            let start = i;
            while i + 1 < n && d[i + 1] >= threshold {
                i += 1;
            }
            let lo = if start > 0 { crossing(start, start - 1) } else { g[start] };
            let hi = if i + 1 < n { crossing(i, i + 1) } else { g[i] };
            intervals.push((lo, hi));
        }
        i += 1;
    }
    intervals
}

/// HPD set of the Gaussian KDE of `samples`: {f ≥ t} with t the
/// (1 − level) quantile of the estimated density at the samples themselves,
/// so the set holds `level` of the draws. Degenerate samples give a single
/// zero-width interval.
pub fn hpd(samples: &[f64], level: f64) -> Result<HpdSet> {
    check_level(level)?;
    let est = match kde(samples)? {
        DensityReport::PointMass(c) => return Ok(HpdSet { level, intervals: alloc::vec![(c, c)] }),
        DensityReport::Smooth(est) => est,
    };
    let mut at_samples: Vec<f64> = samples.iter().map(|&x| est.value_at(x)).collect();
    at_samples.sort_by(f64::total_cmp);
    let outside = libm::floor((1.0 - level) * samples.len() as f64) as usize;
    let threshold = at_samples[outside.min(samples.len() - 1)];
    Ok(HpdSet { level, intervals: super_level_intervals(&est, threshold) })
}

/// Posterior mean, the Bayes estimate under squared error loss.
pub fn point_estimate(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(mean_of(samples))
}

/// Relative mean square error (1/n) Σ (δ_k − δ)² / δ².
pub fn rmse(samples: &[f64], truth: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if truth == 0.0 {
        return Err(Error::InvalidParameter {
            name: "true value",
            value: truth,
            reason: "relative error needs a nonzero truth; use rmse_zero",
        });
    }
    let t2 = truth * truth;
    Ok(samples.iter().map(|x| (x - truth) * (x - truth) / t2).sum::<f64>() / samples.len() as f64)
}

/// Stand-in accuracy measure for a zero true value. Not a reproduction of
/// any published formula; always reported with its label.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroTruthError {
    /// Mean of δ_k² / (δ_k + δ̄)², with δ̄ the sample mean.
    pub surrogate: f64,
    /// Mean of δ_k².
    pub mean_square: f64,
    pub label: &'static str,
}

pub const SURROGATE_LABEL: &str = "surrogate";

pub fn rmse_zero(samples: &[f64]) -> Result<ZeroTruthError> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = samples.len() as f64;
    let bar = mean_of(samples);
    let surrogate = samples
        .iter()
        .map(|&x| {
            let denom = x + bar;
            if denom == 0.0 { 0.0 } else { (x / denom) * (x / denom) }
        })
        .sum::<f64>()
        / n;
    let mean_square = samples.iter().map(|x| x * x).sum::<f64>() / n;
    Ok(ZeroTruthError { surrogate, mean_square, label: SURROGATE_LABEL })
}

/// Accuracy of draws around a truth, switching to the surrogate at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Accuracy {
    Relative(f64),
    ZeroTruth(ZeroTruthError),
}

pub fn accuracy(samples: &[f64], truth: f64) -> Result<Accuracy> {
    if truth == 0.0 {
        rmse_zero(samples).map(Accuracy::ZeroTruth)
    } else {
        rmse(samples, truth).map(Accuracy::Relative)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SpikeParam {
    Beta,
    MR,
}

impl SpikeParam {
    pub fn value(&self, theta: &ParamVector) -> f64 {
        match self {
            Self::Beta => theta.beta,
            Self::MR => theta.m_r,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Beta => "beta",
            Self::MR => "m_r",
        }
    }
}

/// Fraction of draws with the parameter exactly zero.
pub fn spike_probability(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(values.iter().filter(|&&v| v == 0.0).count() as f64 / values.len() as f64)
}

pub fn spike_probability_of(draws: &PosteriorSample, which: SpikeParam) -> Result<f64> {
    let values: Vec<f64> = draws.draws.iter().map(|d| which.value(&d.theta)).collect();
    spike_probability(&values)
}

/// Bayes factor for H0: parameter = 0 against H1: parameter > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BayesFactor {
    Finite(f64),
    /// No accepted draw at zero.
    Zero,
    /// Every accepted draw at zero.
    Infinite,
}

impl BayesFactor {
    pub fn value(&self) -> f64 {
        match self {
            Self::Finite(k) => *k,
            Self::Zero => 0.0,
            Self::Infinite => f64::INFINITY,
        }
    }
}

/// Posterior odds p / (1 − p) of the spike. The prior odds are 1 because the
/// spike weight is uniform on (0, 1) with mean 1/2.
pub fn bayes_factor_zero(p: f64) -> BayesFactor {
    if p <= 0.0 {
        BayesFactor::Zero
    } else if p >= 1.0 {
        BayesFactor::Infinite
    } else {
        BayesFactor::Finite(p / (1.0 - p))
    }
}

/// Per-draw growth rates of R-couples and r-couples.
pub fn rate_posteriors(draws: &PosteriorSample) -> (Vec<f64>, Vec<f64>) {
    draws
        .draws
        .iter()
        .map(|d| {
            let r = theoretical_rates(&d.theta);
            (r.tau_R, r.tau_r)
        })
        .unzip()
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
/// Conservative for discrete data.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = libm::sqrt(na * nb / (na + nb));
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    Ok((d, kolmogorov_tail(lambda)))
}

/// P(K > λ) for the Kolmogorov distribution.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = libm::exp(-2.0 * kf * kf * lambda * lambda);
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn point_mass_for_constant_samples() {
        assert_eq!(kde(&[2.5; 10]).unwrap(), DensityReport::PointMass(2.5));
        let set = hpd(&[2.5; 10], 0.95).unwrap();
        assert_eq!(set.intervals, vec![(2.5, 2.5)]);
        assert!(kde(&[]).is_err());
    }

    #[test]
    fn two_samples_integrate_to_one() {
        let DensityReport::Smooth(est) = kde(&[0.0, 1.0]).unwrap() else { panic!() };
        assert!((est.integral() - 1.0).abs() < 1e-3);
        assert!(est.density.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn point_estimates_and_rmse() {
        assert_eq!(point_estimate(&[3.0, 3.0]).unwrap(), 3.0);
        assert_eq!(point_estimate(&[0.0, 1.0]).unwrap(), 0.5);
        assert!(point_estimate(&[]).is_err());
        assert_eq!(rmse(&[0.46; 5], 0.46).unwrap(), 0.0);
        assert!((rmse(&[2.0 * 0.7], 0.7).unwrap() - 1.0).abs() < 1e-15);
        assert!(rmse(&[1.0], 0.0).is_err());
    }

    #[test]
    fn zero_truth_surrogate() {
        let z = rmse_zero(&[0.0, 0.0]).unwrap();
        assert_eq!((z.surrogate, z.mean_square), (0.0, 0.0));
        let z = rmse_zero(&[3.0]).unwrap();
        assert_eq!(z.surrogate, 0.25);
        assert_eq!(z.label, "surrogate");
        assert!(matches!(accuracy(&[1.0], 0.0).unwrap(), Accuracy::ZeroTruth(_)));
    }

    #[test]
    fn spikes_and_bayes_factors() {
        assert_eq!(spike_probability(&[0.1, 0.2]).unwrap(), 0.0);
        assert_eq!(spike_probability(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(bayes_factor_zero(0.5), BayesFactor::Finite(1.0));
        assert_eq!(bayes_factor_zero(0.0), BayesFactor::Zero);
        assert_eq!(bayes_factor_zero(1.0), BayesFactor::Infinite);
        let k = bayes_factor_zero(0.504).value();
        assert!((k - 0.504 / 0.496).abs() < 1e-15);
        assert!((bayes_factor_zero(0.152).value() - 0.179245283).abs() < 1e-8);
    }

    #[test]
    fn ks_identical_and_shifted() {
        let a: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let (d, p) = ks_two_sample(&a, &a).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(p, 1.0);
        let b: Vec<f64> = a.iter().map(|x| x + 250.0).collect();
        let (d, p) = ks_two_sample(&a, &b).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert!(p < 1e-20);
    }

    #[test]
    fn hpd_rejects_bad_levels() {
        assert!(hpd(&[0.0, 1.0], 0.0).is_err());
        assert!(hpd(&[0.0, 1.0], 1.0).is_err());
    }
}
