mod common;

use common::instance;
use mdl_core::domain::Label;
use mdl_core::gen::{self, GenSpec};
use mdl_core::learner::{self, ErmTarget, HedgeConfig, OracleMode, SampleOracle, WeightedExample};
use mdl_core::{metrics, rng};
use proptest::prelude::*;

#[test]
fn default_schedule() {
    let c = HedgeConfig::defaults(6, 0.15, 0);
    let t = (8.0 * 6f64.ln() / 0.0225).ceil() as usize;
    assert_eq!(c.rounds, t);
    assert!((c.learning_rate - (8.0 * 6f64.ln() / t as f64).sqrt()).abs() < 1e-15);
    let one = HedgeConfig::defaults(1, 0.1, 0);
    assert_eq!(one.rounds, 1);
    assert!(one.learning_rate > 0.0);
}

#[test]
fn draws_follow_the_joint_law() {
    let inst = gen::generate(&GenSpec::random(6, 2, 4, 3)).unwrap();
    let d = inst.family.member(1);
    let mut g = rng::from_seed(4);
    let draws = 200_000;
    let mut counts = [[0usize; 2]; 6];
    for _ in 0..draws {
        let (x, y) = learner::draw_sample(d, &mut g);
        counts[x][(y == Label::Pos) as usize] += 1;
    }
    for (x, row) in counts.iter().enumerate() {
        let eta = d.label_one_prob()[x];
        for (j, p) in [(0, 1.0 - eta), (1, eta)] {
            let p = d.mass()[x] * p;
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            let observed = row[j] as f64 / draws as f64;
            assert!((observed - p).abs() <= 5.0 * sigma + 1e-12, "x={x} y={j}: {observed} vs {p}");
        }
    }
}

#[test]
fn contract_on_twenty_instances() {
    let eps = 0.1;
    for s in 0..20 {
        let inst = gen::generate(&GenSpec::random(30, 4, 12, 900 + s)).unwrap();
        let oracle = SampleOracle::exact(&inst.family);
        let f = learner::hedge_learn(&oracle, &inst.class, eps, 0.1, &HedgeConfig::defaults(4, eps, s)).unwrap();
        let r = metrics::randomized_worst_case_error(&f, &inst.class, &inst.family).unwrap();
        let (opt, _) = metrics::opt_bruteforce(&inst.class, &inst.family).unwrap();
        assert!(r <= opt + eps, "instance {s}: {r} > {opt} + {eps}");
    }
}

#[test]
fn sampling_mode_meets_the_contract_loosely() {
    let inst = gen::generate(&GenSpec::random(20, 3, 8, 77)).unwrap();
    let oracle = SampleOracle::new(&inst.family, OracleMode::Sampling);
    assert_eq!(oracle.mode(), OracleMode::Sampling);
    let eps = 0.2;
    let f = learner::hedge_learn(&oracle, &inst.class, eps, 0.1, &HedgeConfig::defaults(3, eps, 5)).unwrap();
    let r = metrics::randomized_worst_case_error(&f, &inst.class, &inst.family).unwrap();
    let (opt, _) = metrics::opt_bruteforce(&inst.class, &inst.family).unwrap();
    assert!(r <= opt + eps, "{r} > {opt} + {eps}");
}

#[test]
fn same_seed_same_mixture() {
    let inst = gen::generate(&GenSpec::random(20, 3, 8, 78)).unwrap();
    let oracle = SampleOracle::sampling(&inst.family);
    let cfg = HedgeConfig {
        rounds: 30,
        ..HedgeConfig::defaults(3, 0.2, 9)
    };
    let a = learner::hedge_learn(&oracle, &inst.class, 0.2, 0.1, &cfg).unwrap();
    let b = learner::hedge_learn(&oracle, &inst.class, 0.2, 0.1, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bad_parameters_are_rejected() {
    let inst = gen::generate(&GenSpec::random(5, 2, 3, 1)).unwrap();
    let oracle = SampleOracle::exact(&inst.family);
    let good = HedgeConfig::defaults(2, 0.1, 0);
    assert!(learner::hedge_learn(&oracle, &inst.class, 0.0, 0.1, &good).is_err());
    assert!(learner::hedge_learn(&oracle, &inst.class, 0.1, 1.0, &good).is_err());
    let zero = HedgeConfig { rounds: 0, ..good };
    assert!(learner::hedge_learn(&oracle, &inst.class, 0.1, 0.1, &zero).is_err());
    assert!(learner::erm(&inst.class, ErmTarget::Sample(&[])).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_is_a_distribution_over_the_class((fam, class, _) in instance(), seed in any::<u64>()) {
        let oracle = SampleOracle::exact(&fam);
        let cfg = HedgeConfig { rounds: 25, ..HedgeConfig::defaults(fam.k(), 0.2, seed) };
        let (f, trace) = learner::hedge_learn_traced(&oracle, &class, 0.2, 0.1, &cfg).unwrap();
        prop_assert!(f.weights().iter().all(|&w| w >= 0.0));
        prop_assert!((f.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(f.support().iter().all(|&h| h < class.len()));
        prop_assert_eq!(trace.len(), 25);
        for t in &trace {
            prop_assert!((t.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            // Each round plays an exact best response to the current weights.
            let mix = fam.mixture(&t.weights).unwrap();
            prop_assert_eq!(t.hypothesis, learner::erm(&class, ErmTarget::Distribution(&mix)).unwrap());
        }
    }

    #[test]
    fn hedge_regret_is_bounded((fam, class, _) in instance()) {
        // Average loss of the weights against the best fixed member, versus
        // the standard Hedge regret bound ln k / (η T) + η / 8.
        let oracle = SampleOracle::exact(&fam);
        let cfg = HedgeConfig::defaults(fam.k(), 0.2, 0);
        let (_, trace) = learner::hedge_learn_traced(&oracle, &class, 0.2, 0.1, &cfg).unwrap();
        let t = trace.len() as f64;
        let played: f64 = trace
            .iter()
            .map(|r| r.weights.iter().zip(&r.errors).map(|(w, e)| w * e).sum::<f64>())
            .sum::<f64>() / t;
        let best: f64 = (0..fam.k())
            .map(|i| trace.iter().map(|r| r.errors[i]).sum::<f64>() / t)
            .fold(f64::NEG_INFINITY, f64::max);
        let eta = cfg.learning_rate;
        let bound = (fam.k().max(2) as f64).ln() / (eta * t) + eta / 8.0;
        prop_assert!(best - played <= bound + 1e-9, "regret {} > {}", best - played, bound);
    }

    #[test]
    fn erm_is_the_lowest_index_minimizer((fam, class, _) in instance(), raw in prop::collection::vec((0usize..8, any::<bool>(), 1u32..10), 1..30)) {
        let mix = fam.mixture(&vec![1.0 / fam.k() as f64; fam.k()]).unwrap();
        let errs: Vec<f64> = class.hypotheses().iter().map(|h| metrics::error_on_distribution(h, &mix).unwrap()).collect();
        let min = errs.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(
            learner::erm(&class, ErmTarget::Distribution(&mix)).unwrap(),
            errs.iter().position(|&e| e == min).unwrap()
        );

        let n = fam.domain_size();
        let sample: Vec<WeightedExample> = raw
            .iter()
            .map(|&(x, y, w)| WeightedExample { x: x % n, y: common::label(y), weight: w as f64 })
            .collect();
        let losses: Vec<f64> = class
            .hypotheses()
            .iter()
            .map(|h| sample.iter().filter(|e| h.labels()[e.x] != e.y).map(|e| e.weight).sum())
            .collect();
        let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(
            learner::erm(&class, ErmTarget::Sample(&sample)).unwrap(),
            losses.iter().position(|&l| l == min).unwrap()
        );
    }
}

#[test]
fn trace_csv_layout() {
    let inst = gen::generate(&GenSpec::random(5, 2, 3, 2)).unwrap();
    let oracle = SampleOracle::exact(&inst.family);
    let cfg = HedgeConfig { rounds: 4, ..HedgeConfig::defaults(2, 0.2, 0) };
    let (_, trace) = learner::hedge_learn_traced(&oracle, &inst.class, 0.2, 0.1, &cfg).unwrap();
    let mut buf = Vec::new();
    learner::write_trace_csv(&mut buf, &trace).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "round,hypothesis,err_0,err_1,w_0,w_1");
    assert_eq!(text.lines().count(), 5);
}
