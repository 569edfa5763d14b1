mod common;

use std::collections::BTreeMap;

use common::{instance, label};
use mdl_core::domain::{DeterministicClassifier, HypothesisClass, Label};
use mdl_core::gen::{self, GenKind, GenSpec, Instance};
use mdl_core::hash::{self, CompactClassifier};
use mdl_core::{io, rng, RandomizedClassifier};
use proptest::prelude::*;

#[test]
fn generated_instance_round_trips_with_its_spec() {
    let spec = GenSpec::random(15, 3, 6, 4).with_kind(GenKind::BayesInClass);
    let inst = gen::generate(&spec).unwrap();
    let back = io::instance_from_json(&io::instance_to_json(&inst).unwrap()).unwrap();
    assert_eq!(back, inst);
    assert_eq!(back.spec, Some(spec));
}

#[test]
fn files_round_trip() {
    let dir = std::env::temp_dir().join(format!("mdl-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (fam, class, f) = gen::gen_gap_example(4).unwrap();
    let inst = Instance { family: fam, class, mixture: Some(f), spec: None };
    let path = dir.join("inst.json");
    io::write_instance(&path, &inst).unwrap();
    assert_eq!(io::read_instance(&path).unwrap(), inst);

    let a = mdl_core::discrepancy::BinaryMatrix::identity(3).unwrap();
    let mpath = dir.join("a.txt");
    io::write_matrix(&mpath, &a).unwrap();
    assert_eq!(io::read_matrix(&mpath).unwrap(), a);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn malformed_inputs_are_errors() {
    assert!(io::instance_from_json("{").is_err());
    assert!(io::instance_from_json("{\"distributions\": []}").is_err());
    assert!(io::classifier_from_json("{\"kind\": \"other\"}").is_err());
    assert!(io::parse_labels("1 0 -1").is_err());
    assert_eq!(io::parse_labels("1 -1\n+1").unwrap(), vec![Label::Pos, Label::Neg, Label::Pos]);
}

fn compact(n: usize, seed: u64) -> (CompactClassifier, HypothesisClass) {
    let mut g = rng::from_seed(seed);
    let class = gen::random_hypothesis_class(n, 5, &mut g).unwrap();
    let f = RandomizedClassifier::new(vec![0, 1, 4], vec![0.2, 0.3, 0.5]).unwrap();
    let p = hash::next_prime(n as u64 + 1).unwrap();
    let q = hash::sample_hash(p, 4, &mut g).unwrap();
    let table: BTreeMap<usize, Label> = (0..n).step_by(7).map(|x| (x, label(x % 2 == 0))).collect();
    (CompactClassifier::new(q, table, f, n).unwrap(), class)
}

#[test]
fn compact_classifier_survives_serialization_at_ten_thousand_points() {
    let n = 10_000;
    let (c, class) = compact(n, 9);
    let before = c.evaluate_all(n, &class).unwrap();
    let det = DeterministicClassifier::Compact(c);
    let back = io::classifier_from_json(&io::classifier_to_json(&det, n).unwrap()).unwrap();
    assert_eq!(back, det);
    assert_eq!(back.to_labels(n, &class).unwrap(), before);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_json_is_lossless((fam, class, f) in instance(), with_mix in any::<bool>()) {
        let inst = Instance { family: fam, class, mixture: with_mix.then_some(f), spec: None };
        let back = io::instance_from_json(&io::instance_to_json(&inst).unwrap()).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn explicit_classifier_json_is_lossless(bits in prop::collection::vec(any::<bool>(), 1..200)) {
        let labels: Vec<Label> = bits.iter().map(|&b| label(b)).collect();
        let det = DeterministicClassifier::Explicit(labels.clone());
        let back = io::classifier_from_json(&io::classifier_to_json(&det, labels.len()).unwrap()).unwrap();
        prop_assert_eq!(back, det);
    }

    #[test]
    fn compact_classifier_json_is_lossless(n in 1usize..500, seed in any::<u64>()) {
        let (c, class) = compact(n, seed);
        let before = c.evaluate_all(n, &class).unwrap();
        let det = DeterministicClassifier::Compact(c);
        let back = io::classifier_from_json(&io::classifier_to_json(&det, n).unwrap()).unwrap();
        prop_assert_eq!(back.to_labels(n, &class).unwrap(), before);
    }

    #[test]
    fn mixture_json_is_lossless(w in prop::collection::vec(1u32..1000, 1..10)) {
        let f = RandomizedClassifier::new((0..w.len()).rev().collect(), common::normalize(&w)).unwrap();
        prop_assert_eq!(io::mixture_from_json(&io::mixture_to_json(&f).unwrap()).unwrap(), f);
    }
}
