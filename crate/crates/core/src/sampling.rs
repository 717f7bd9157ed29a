//! Thin exact-sampling helpers over `rand_distr`, with the degenerate
//! parameter values those distributions reject handled up front.

use rand::distr::Distribution;
use rand_distr::{Binomial, Gamma, Hypergeometric, Poisson};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Largest Poisson mean accepted before reporting overflow.
const POISSON_LIMIT: f64 = Poisson::<f64>::MAX_LAMBDA;

pub(crate) fn poisson(rng: &mut RandomStream, lambda: f64) -> Result<u64> {
    if lambda <= 0.0 {
        return Ok(0);
    }
    if !(lambda < POISSON_LIMIT) {
        return Err(Error::CountOverflow("poisson mean"));
    }
    let draw = Poisson::new(lambda)
        .map_err(|_| Error::CountOverflow("poisson mean"))?
        .sample(rng);
    Ok(draw as u64)
}

pub(crate) fn gamma(rng: &mut RandomStream, shape: f64, scale: f64) -> f64 {
    if scale <= 0.0 || shape <= 0.0 {
        return 0.0;
    }
    match Gamma::new(shape, scale) {
        Ok(g) => g.sample(rng),
        Err(_) => 0.0,
    }
}

pub(crate) fn binomial(rng: &mut RandomStream, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("binomial parameters checked above")
        .sample(rng)
}

/// Number of marked items when `draws` items are taken without replacement
/// from `total` items of which `marked` are marked.
///
/// Uses `rand_distr`'s H2PE sampler when the mode is far from the lower end
/// of the support and an inverse-CDF walk from the lower end otherwise. The
/// walk starts from a log-gamma evaluation of the first probability, which
/// stays finite for any population size.
pub(crate) fn hypergeometric(rng: &mut RandomStream, total: u64, marked: u64, draws: u64) -> u64 {
    debug_assert!(marked <= total && draws <= total);
    if draws == 0 || marked == 0 {
        return 0;
    }
    if marked == total {
        return draws;
    }
    if draws == total {
        return marked;
    }
    let swap_marked = marked > total - marked;
    let n1 = marked.min(total - marked);
    let n2 = total - n1;
    let swap_draws = draws > total / 2;
    let k = if swap_draws { total - draws } else { draws };

    // Same switch rule as rand_distr, so the H2PE branch is taken there too.
    let mode = libm::floor((k + 1) as f64 * (n1 + 1) as f64 / (total + 2) as f64);
    let x = if mode - (k as f64 - n2 as f64).max(0.0) < 10.0 {
        hypergeometric_inversion(rng, total, n1, k)
    } else {
        let h = Hypergeometric::new(total, n1, k).expect("hypergeometric parameters checked above");
        h.sample(rng)
    };
    let y = if swap_draws { n1 - x } else { x };
    if swap_marked {
        draws - y
    } else {
        y
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// Inverse-CDF draw of the n1-items among k draws from n1 + n2 = total.
fn hypergeometric_inversion(rng: &mut RandomStream, total: u64, n1: u64, k: u64) -> u64 {
    let n2 = total - n1;
    let lo = k.saturating_sub(n2);
    let hi = k.min(n1);
    let mut p = libm::exp(ln_choose(n1, lo) + ln_choose(n2, k - lo) - ln_choose(total, k));
    let mut u = rng.unit();
    let mut x = lo;
    while x < hi {
        if u <= p {
            return x;
        }
        u -= p;
        p *= (n1 - x) as f64 * (k - x) as f64 / ((x + 1) as f64 * (n2 + x + 1 - k) as f64);
        x += 1;
    }
    hi
}

/// Splits `n` items over categories with probabilities `probs` (summing to 1)
/// by sequential binomial conditioning. Writes counts into `out`.
pub(crate) fn multinomial(rng: &mut RandomStream, n: u64, probs: &[f64], out: &mut [u64]) {
    debug_assert_eq!(probs.len(), out.len());
    let mut remaining = n;
    let mut mass_left = 1.0;
    let last = probs.len() - 1;
    for (i, (&p, slot)) in probs.iter().zip(out.iter_mut()).enumerate() {
        if i == last || remaining == 0 {
            *slot = if i == last { remaining } else { 0 };
            remaining -= *slot;
            continue;
        }
        let conditional = if mass_left > 0.0 { (p / mass_left).min(1.0) } else { 0.0 };
        let k = binomial(rng, remaining, conditional);
        *slot = k;
        remaining -= k;
        mass_left -= p;
    }
}
