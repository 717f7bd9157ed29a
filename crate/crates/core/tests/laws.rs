use statrs::distribution::{ChiSquared, ContinuousCDF};
use ybbp_core::laws::{tables, OffspringLaw};
use ybbp_core::stats::ks_two_sample;
use ybbp_core::RandomStream;

fn builtin_laws() -> Vec<OffspringLaw> {
    vec![
        OffspringLaw::poisson(3.2).unwrap(),
        OffspringLaw::negative_binomial(2.0, 3.2).unwrap(),
        OffspringLaw::finite_support(tables::EXAMPLE_1_R.to_vec()).unwrap(),
        OffspringLaw::finite_support(tables::EXAMPLE_1_r.to_vec()).unwrap(),
    ]
}

fn looped_total(law: &OffspringLaw, n: u64, rng: &mut RandomStream) -> u64 {
    (0..n).map(|_| law.sample(rng).unwrap()).sum()
}

/// Homogeneity chi-square p-value for two equal-size count samples, pooling
/// sparse cells.
fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> f64 {
    let lo = *a.iter().chain(b).min().unwrap();
    let hi = *a.iter().chain(b).max().unwrap();
    let width = (hi - lo + 1) as usize;
    let mut ca = vec![0f64; width];
    let mut cb = vec![0f64; width];
    a.iter().for_each(|&x| ca[(x - lo) as usize] += 1.0);
    b.iter().for_each(|&x| cb[(x - lo) as usize] += 1.0);
    let mut cells = Vec::new();
    let (mut sa, mut sb) = (0.0, 0.0);
    for i in 0..width {
        sa += ca[i];
        sb += cb[i];
        if sa + sb >= 20.0 {
            cells.push((sa, sb));
            sa = 0.0;
            sb = 0.0;
        }
    }
    if let Some(last) = cells.last_mut() {
        last.0 += sa;
        last.1 += sb;
    }
    let stat: f64 = cells.iter().map(|&(x, y)| (x - y) * (x - y) / (x + y)).sum();
    let df = (cells.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

#[test]
fn table_one_rows_have_the_stated_means() {
    let r = OffspringLaw::finite_support(tables::EXAMPLE_1_R.to_vec()).unwrap();
    assert!((r.mean() - 3.2).abs() < 1e-3, "{}", r.mean());
    let m = OffspringLaw::finite_support(tables::EXAMPLE_1_r.to_vec()).unwrap();
    assert!((m.mean() - 4.0).abs() < 1e-3, "{}", m.mean());
}

#[test]
fn poisson_mean_from_a_million_draws() {
    let law = OffspringLaw::poisson(3.2).unwrap();
    let mut rng = RandomStream::from_seed(11);
    let n = 1_000_000;
    let mean = (0..n).map(|_| law.sample(&mut rng).unwrap()).sum::<u64>() as f64 / n as f64;
    assert!((mean - 3.2).abs() < 0.01, "mean {mean}");
}

#[test]
fn every_law_mean_within_four_standard_errors() {
    let mut rng = RandomStream::from_seed(12);
    let n = 1_000_000;
    for law in builtin_laws() {
        let mean = (0..n).map(|_| law.sample(&mut rng).unwrap()).sum::<u64>() as f64 / n as f64;
        let se = (law.variance() / n as f64).sqrt();
        assert!((mean - law.mean()).abs() < 4.0 * se, "{:?}: {mean} vs {}", law.spec(), law.mean());
    }
}

#[test]
fn poisson_thousand_couple_total() {
    let law = OffspringLaw::poisson(3.2).unwrap();
    let mut rng = RandomStream::from_seed(13);
    let reps = 10_000;
    let mean = (0..reps).map(|_| law.sample_couple_total(1000, &mut rng).unwrap()).sum::<u64>() as f64 / reps as f64;
    assert!((mean - 3200.0).abs() < 20.0, "mean {mean}");
}

#[test]
fn finite_support_hundred_couples_matches_loop_by_chi_square() {
    let law = OffspringLaw::finite_support(tables::EXAMPLE_1_R.to_vec()).unwrap();
    let mut rng = RandomStream::from_seed(14);
    let reps = 100_000;
    let agg: Vec<u64> = (0..reps).map(|_| law.sample_couple_total(100, &mut rng).unwrap()).collect();
    let looped: Vec<u64> = (0..reps).map(|_| looped_total(&law, 100, &mut rng)).collect();
    let p = chi_square_homogeneity(&agg, &looped);
    assert!(p > 0.01, "p {p}");
}

#[test]
fn couple_totals_match_loop_by_ks() {
    let reps = 100_000;
    for (i, law) in builtin_laws().into_iter().enumerate() {
        let mut rng = RandomStream::derive(15, 0, i as u64);
        for n in [1u64, 5, 80] {
            let agg: Vec<f64> = (0..reps).map(|_| law.sample_couple_total(n, &mut rng).unwrap() as f64).collect();
            let looped: Vec<f64> = (0..reps).map(|_| looped_total(&law, n, &mut rng) as f64).collect();
            let (_, p) = ks_two_sample(&agg, &looped).unwrap();
            assert!(p > 0.01, "{:?} n={n}: p {p}", law.spec());
        }
    }
}

#[test]
fn single_couple_total_is_one_draw() {
    let law = OffspringLaw::negative_binomial(1.0, 4.0).unwrap();
    let mut rng = RandomStream::from_seed(16);
    let reps = 100_000;
    let a: Vec<f64> = (0..reps).map(|_| law.sample_couple_total(1, &mut rng).unwrap() as f64).collect();
    let b: Vec<f64> = (0..reps).map(|_| law.sample(&mut rng).unwrap() as f64).collect();
    assert!(ks_two_sample(&a, &b).unwrap().1 > 0.01);
}

#[test]
fn empty_couple_sum_is_zero() {
    let mut rng = RandomStream::from_seed(17);
    for law in builtin_laws() {
        assert_eq!(law.sample_couple_total(0, &mut rng).unwrap(), 0);
    }
}

#[test]
fn degenerate_laws() {
    let mut rng = RandomStream::from_seed(18);
    let three = OffspringLaw::point_mass(3);
    let zero = OffspringLaw::poisson(0.0).unwrap();
    for _ in 0..1000 {
        assert_eq!(three.sample(&mut rng).unwrap(), 3);
        assert_eq!(zero.sample(&mut rng).unwrap(), 0);
    }
    assert_eq!(OffspringLaw::point_mass(0).mean(), 0.0);
}
