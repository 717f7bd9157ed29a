#![allow(non_snake_case)]

use ybbp_core::laws::{LawFamily, OffspringLaw};
use ybbp_core::model::{mate, Census, GenerationState, Model};
use ybbp_core::{ParamVector, RandomStream};

fn poisson_model(alpha: f64, beta: f64, m_R: f64, m_r: f64) -> Model {
    let theta = ParamVector::new(alpha, beta, m_R, m_r).unwrap();
    Model::new(theta, LawFamily::Poisson.law(m_R).unwrap(), LawFamily::Poisson.law(m_r).unwrap()).unwrap()
}

#[test]
fn r_couple_offspring_proportions() {
    let model = poisson_model(0.46, 0.005, 3.2, 4.0);
    let mut rng = RandomStream::from_seed(21);
    let (mut female_share, mut mutant_share) = (0.0, 0.0);
    for _ in 0..100 {
        let kids = model.reproduce(10_000, 0, &mut rng).unwrap();
        assert_eq!(kids.males_rr, 0);
        let total = (kids.females + kids.males_R + kids.males_Rr) as f64;
        female_share += kids.females as f64 / total;
        mutant_share += kids.males_Rr as f64 / (kids.males_R + kids.males_Rr) as f64;
    }
    assert!((female_share / 100.0 - 0.46).abs() < 0.01);
    assert!((mutant_share / 100.0 - 0.005).abs() < 0.002);
}

#[test]
fn r_line_female_mean() {
    let model = poisson_model(0.5, 0.3, 1.0, 2.0);
    let mut rng = RandomStream::from_seed(22);
    let reps = 1000;
    let draws: Vec<f64> = (0..reps).map(|_| model.reproduce(0, 10_000, &mut rng).unwrap().females as f64).collect();
    let mean = draws.iter().sum::<f64>() / reps as f64;
    // F is Poisson(10^4) here, so sd 100 per draw.
    let se = 100.0 / (reps as f64).sqrt();
    assert!((mean - 10_000.0).abs() < 3.0 * se, "mean {mean}");
}

#[test]
fn empty_reproduction() {
    let model = poisson_model(0.46, 0.005, 3.2, 4.0);
    let mut rng = RandomStream::from_seed(23);
    let kids = model.reproduce(0, 0, &mut rng).unwrap();
    assert_eq!((kids.females, kids.males_R, kids.males_Rr, kids.males_rr), (0, 0, 0, 0));
}

#[test]
fn mating_examples_and_conservation() {
    let mut rng = RandomStream::from_seed(24);
    assert_eq!(mate(10, 5, 5, &mut rng), (5, 5));
    assert_eq!(mate(0, 7, 3, &mut rng), (0, 0));
    let reps = 100_000;
    let mean = (0..reps).map(|_| mate(50, 60, 40, &mut rng).0).sum::<u64>() as f64 / reps as f64;
    assert!((mean - 30.0).abs() < 0.1, "mean {mean}");
    for i in 0..10_000u64 {
        let (f, mr, mm) = (rng.below_inclusive(200), rng.below_inclusive(150), rng.below_inclusive(150) * (i % 2));
        let (zr, zm) = mate(f, mr, mm, &mut rng);
        assert_eq!(zr + zm, f.min(mr + mm));
        assert!(zr <= mr && zm <= mm);
    }
}

#[test]
fn sex_ratio_converges() {
    let model = poisson_model(0.37, 0.2, 2.5, 1.5);
    let mut rng = RandomStream::from_seed(25);
    let (mut females, mut all) = (0u64, 0u64);
    for _ in 0..2000 {
        let k = model.reproduce(30, 20, &mut rng).unwrap();
        females += k.females;
        all += k.females + k.males_R + k.males_Rr + k.males_rr;
    }
    let p = females as f64 / all as f64;
    let se = (0.37 * 0.63 / all as f64).sqrt();
    assert!((p - 0.37).abs() < 4.0 * se);
}

#[test]
fn no_r_couples_means_no_mutants() {
    let model = poisson_model(0.4, 0.9, 5.0, 3.0);
    let mut rng = RandomStream::from_seed(26);
    let state = GenerationState { n: 3, females: 40, males_R: 0, males_Rr: 0, males_rr: 50, couples_R: 0, couples_r: 40 };
    for _ in 0..1000 {
        let next = model.step(&state, &mut rng).unwrap();
        assert_eq!((next.males_R, next.males_Rr), (0, 0));
    }
    let extinct = GenerationState::default();
    assert!(model.step(&extinct, &mut rng).unwrap().is_extinct());
}

#[test]
fn zero_means_die_after_generation_zero() {
    let model = poisson_model(0.5, 0.1, 0.0, 0.0);
    let mut rng = RandomStream::from_seed(27);
    let path = model.simulate_path(Census::new(10, 5, 5), 15, &mut rng).unwrap();
    assert_eq!(path.states.len(), 16);
    assert_eq!((path.states[0].couples_R, path.states[0].couples_r), (5, 5));
    assert!(path.states[1..].iter().all(|s| s.census() == Census::default() && s.is_extinct()));
}

#[test]
fn paths_are_pure_functions_of_the_stream() {
    let model = poisson_model(0.46, 0.005, 3.2, 4.0);
    let a = model.simulate_path(Census::new(10, 5, 5), 15, &mut RandomStream::derive(9, 1, 2)).unwrap();
    let b = model.simulate_path(Census::new(10, 5, 5), 15, &mut RandomStream::derive(9, 1, 2)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn coexistence_and_log_growth() {
    let model = Model::new(
        ParamVector::new(0.46, 0.005, 3.2, 4.0).unwrap(),
        OffspringLaw::finite_support(ybbp_core::laws::tables::EXAMPLE_1_R.to_vec()).unwrap(),
        OffspringLaw::finite_support(ybbp_core::laws::tables::EXAMPLE_1_r.to_vec()).unwrap(),
    )
    .unwrap();
    let mut logs = Vec::new();
    let mut coexisting = 0;
    for i in 0..2000 {
        let path = model.simulate_path(Census::new(10, 5, 5), 15, &mut RandomStream::derive(28, 0, i)).unwrap();
        let last = path.last().unwrap();
        if last.males_R > 0 && last.males_r() > 0 {
            coexisting += 1;
        }
        if last.couples_R > 100 {
            logs.push((last.couples_R as f64).ln() / 15.0);
        }
    }
    assert!(coexisting > 0);
    assert!(logs.len() > 200);
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    assert!((mean - 1.46464f64.ln()).abs() < 0.1, "mean log rate {mean}");
}
