use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use ybbp_core::abc::{AcceptedDraw, PosteriorSample};
use ybbp_core::stats::{bayes_factor_zero, hpd, kde, rate_posteriors, rmse, DensityReport};
use ybbp_core::{ParamVector, RandomStream};

fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = RandomStream::from_seed(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn smooth(samples: &[f64]) -> ybbp_core::stats::DensityEstimate {
    match kde(samples).unwrap() {
        DensityReport::Smooth(e) => e,
        DensityReport::PointMass(c) => panic!("point mass at {c}"),
    }
}

fn posterior(thetas: &[ParamVector]) -> PosteriorSample {
    PosteriorSample {
        draws: thetas
            .iter()
            .enumerate()
            .map(|(i, &theta)| AcceptedDraw { theta, distance: i as f64, path_index: i as u64 })
            .collect(),
        epsilon: thetas.len() as f64,
        pool_size: 1000,
        n_compatible: 100,
    }
}

#[test]
fn normal_density_at_zero() {
    let est = smooth(&normals(100_000, 41));
    assert!((est.value_at(0.0) - 0.398_942).abs() < 0.02, "{}", est.value_at(0.0));
    assert!((est.integral() - 1.0).abs() < 1e-3);
    assert!(est.density.iter().all(|&d| d >= 0.0));
    assert!(est.grid.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn normalisation_on_awkward_inputs() {
    let inputs: Vec<Vec<f64>> = vec![
        vec![0.0, 1.0],
        vec![0.0, 0.0, 0.0, 5.0],
        vec![1e-6, 2e-6, 1e3],
        (0..1000).map(|i| if i % 3 == 0 { 0.0 } else { i as f64 / 100.0 }).collect(),
    ];
    for x in inputs {
        let est = smooth(&x);
        assert!((est.integral() - 1.0).abs() < 1e-3);
    }
}

#[test]
fn uniform_hpd_width() {
    let mut rng = RandomStream::from_seed(42);
    let x: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
    let set = hpd(&x, 0.95).unwrap();
    assert!((set.total_width() - 0.95).abs() < 0.02, "{:?}", set.intervals);
}

#[test]
fn symmetric_sample_gives_symmetric_interval() {
    let x = normals(50_000, 43);
    let set = hpd(&x, 0.95).unwrap();
    assert_eq!(set.intervals.len(), 1);
    let (lo, hi) = set.intervals[0];
    assert!((lo + hi).abs() < 0.05, "{lo} {hi}");
    assert!((hi - 1.96).abs() < 0.1);
}

#[test]
fn hpd_mass_matches_level() {
    let mut x = normals(20_000, 44);
    for level in [0.5, 0.8, 0.95] {
        let set = hpd(&x, level).unwrap();
        assert!((set.sample_mass(&x) - level).abs() < 0.01, "level {level}: {}", set.sample_mass(&x));
    }
    let shifted: Vec<f64> = normals(20_000, 45).into_iter().map(|v| v + 8.0).collect();
    x.extend(shifted);
    let set = hpd(&x, 0.95).unwrap();
    assert_eq!(set.intervals.len(), 2);
    assert!((set.sample_mass(&x) - 0.95).abs() < 0.01);
}

#[test]
fn bayes_factor_reciprocity() {
    for i in 1..1000 {
        let p = i as f64 / 1000.0;
        let prod = bayes_factor_zero(p).value() * bayes_factor_zero(1.0 - p).value();
        assert!((prod - 1.0).abs() < 1e-12);
    }
}

#[test]
fn rmse_permutation_and_duplication() {
    let x = normals(101, 46).into_iter().map(|v| 0.46 + 0.05 * v).collect::<Vec<_>>();
    let base = rmse(&x, 0.46).unwrap();
    let mut rev = x.clone();
    rev.reverse();
    assert!((rmse(&rev, 0.46).unwrap() - base).abs() < 1e-15);
    let doubled: Vec<f64> = x.iter().chain(&x).copied().collect();
    assert!((rmse(&doubled, 0.46).unwrap() - base).abs() < 1e-15);
}

#[test]
fn rate_examples() {
    let post = posterior(&[
        ParamVector::new(0.46, 0.005, 3.2, 4.0).unwrap(),
        ParamVector::new(0.7, 0.0, 2.0, 0.0).unwrap(),
    ]);
    let (r, m) = rate_posteriors(&post);
    assert!((r[0] - 1.46464).abs() < 1e-12 && (m[0] - 1.84).abs() < 1e-12);
    assert!((r[1] - 0.6).abs() < 1e-12 && (m[1] - 0.6).abs() < 1e-12);
}

#[test]
fn rates_scale_and_commute_with_filtering() {
    let mut rng = RandomStream::from_seed(47);
    let thetas: Vec<ParamVector> = (0..500)
        .map(|_| {
            let beta = if rng.random::<bool>() { 0.0 } else { rng.random::<f64>() * 0.9 };
            ParamVector::new(0.05 + 0.9 * rng.random::<f64>(), beta, 10.0 * rng.random::<f64>(), 10.0 * rng.random::<f64>())
                .unwrap()
        })
        .collect();
    let post = posterior(&thetas);
    let keep = |t: &ParamVector| t.beta == 0.0;
    let (r_all, m_all) = rate_posteriors(&post);
    let (r_f, m_f) = rate_posteriors(&post.filtered(keep));
    let kept: Vec<usize> = (0..thetas.len()).filter(|&i| keep(&thetas[i])).collect();
    assert_eq!(r_f, kept.iter().map(|&i| r_all[i]).collect::<Vec<_>>());
    assert_eq!(m_f, kept.iter().map(|&i| m_all[i]).collect::<Vec<_>>());

    let scaled: Vec<ParamVector> = thetas
        .iter()
        .map(|t| ParamVector::new(t.alpha, t.beta, 3.0 * t.m_R, 3.0 * t.m_r).unwrap())
        .collect();
    let (r_s, m_s) = rate_posteriors(&posterior(&scaled));
    for i in 0..thetas.len() {
        assert!((r_s[i] - 3.0 * r_all[i]).abs() < 1e-12 && (m_s[i] - 3.0 * m_all[i]).abs() < 1e-12);
    }
}
