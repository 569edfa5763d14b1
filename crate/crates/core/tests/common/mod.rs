//! Shared strategies for the integration tests.
#![allow(dead_code)]

use mdl_core::domain::{
    DistributionFamily, Hypothesis, HypothesisClass, Label, LabeledDistribution, RandomizedClassifier,
};
use proptest::prelude::*;

/// Raw weights in `1..=100` scaled to sum to one.
pub fn normalize(raw: &[u32]) -> Vec<f64> {
    let total: u32 = raw.iter().sum();
    raw.iter().map(|&r| r as f64 / total as f64).collect()
}

pub fn label(b: bool) -> Label {
    if b {
        Label::Pos
    } else {
        Label::Neg
    }
}

/// A label-consistent family over `n` points with `k` members.
pub fn family(n: usize, k: usize) -> impl Strategy<Value = DistributionFamily> {
    (
        prop::collection::vec(prop::collection::vec(1u32..=100, n), k),
        prop::collection::vec(0u32..=20, n),
    )
        .prop_map(|(masses, etas)| {
            let eta: Vec<f64> = etas.iter().map(|&e| e as f64 / 20.0).collect();
            let members = masses
                .iter()
                .map(|m| LabeledDistribution::new(normalize(m), eta.clone()).unwrap())
                .collect();
            DistributionFamily::new(members).unwrap()
        })
}

pub fn class(n: usize, count: usize) -> impl Strategy<Value = HypothesisClass> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), n), count).prop_map(|rows| {
        HypothesisClass::new(
            rows.into_iter()
                .map(|r| Hypothesis::new(r.into_iter().map(label).collect()).unwrap())
                .collect(),
        )
        .unwrap()
    })
}

/// A mixture over the first `count` hypotheses.
pub fn mixture(count: usize) -> impl Strategy<Value = RandomizedClassifier> {
    prop::collection::vec(1u32..=100, count)
        .prop_map(move |w| RandomizedClassifier::new((0..count).collect(), normalize(&w)).unwrap())
}

/// `(family, class, mixture)` with small random dimensions.
pub fn instance() -> impl Strategy<Value = (DistributionFamily, HypothesisClass, RandomizedClassifier)> {
    (1usize..=8, 1usize..=4, 1usize..=6)
        .prop_flat_map(|(n, k, h)| (family(n, k), class(n, h), mixture(h)))
}

/// Error of a labeling on one member, from the joint table
/// `Pr[(x, y)]` over all `2n` outcomes.
pub fn joint_table_error(labels: &[Label], d: &LabeledDistribution) -> f64 {
    let mut total = 0.0;
    for (x, &l) in labels.iter().enumerate() {
        for y in [Label::Neg, Label::Pos] {
            let eta = d.label_one_prob()[x];
            let p = d.mass()[x] * if y == Label::Pos { eta } else { 1.0 - eta };
            if l != y {
                total += p;
            }
        }
    }
    total
}
