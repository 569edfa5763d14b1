//! Derandomization of a randomized multi-distribution learner.
//!
//! For label-consistent families the learner's mixture `F` is turned into a
//! single classifier in two steps:
//!
//! 1. From `m` fresh samples per member, every point whose empirical label
//!    balance `ρ_{i,x}` clears `sqrt(ln γ / n_{i,x})` goes into the bias
//!    table `T` with label `sign(ρ_{i,x})`.
//! 2. Every other point gets the label of an independent draw `f ~ F`
//!    (or, in the compact variant, the hash rounding rule of [`crate::hash`]).
//!
//! Points in `T` then carry the Bayes label and the remaining points are
//! lightly biased, so rounding concentrates for all members at once.

use std::collections::BTreeMap;

use rand::Rng as _;

use crate::domain::{DeterministicClassifier, DistributionFamily, HypothesisClass, Label, Labeling, RandomizedClassifier};
use crate::error::{invalid, Error, Result};
use crate::hash::{choose_hash_params, sample_hash, CompactClassifier};
use crate::learner::{hedge_learn, HedgeConfig, SampleOracle};
use crate::metrics::{self, HeavyVariant, CONSISTENCY_TOL};
use crate::rng::{self, streams, Rng};

/// Default for the "large enough" constant `C`.
pub const DEFAULT_C: f64 = 4.0;
/// Default for the hash-variant constant `C'`; the smallest integer with
/// `256 / (C' e^{2/3}) ≤ e^{-1}`.
pub const DEFAULT_C_PRIME: f64 = 358.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerandMode {
    /// `m` and the threshold follow the formulas exactly.
    Theory,
    /// Fixed sample count per member and a scaled threshold.
    Calibrated { m_override: usize, threshold_scale: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundingKind {
    ExplicitPerPoint,
    HashCompact,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerandConfig {
    pub eps: f64,
    pub delta: f64,
    pub c_const: f64,
    pub c_prime: f64,
    pub mode: DerandMode,
    pub rounding: RoundingKind,
    pub seed: u64,
}

impl DerandConfig {
    pub fn theory(eps: f64, delta: f64, seed: u64) -> Self {
        DerandConfig {
            eps,
            delta,
            c_const: DEFAULT_C,
            c_prime: DEFAULT_C_PRIME,
            mode: DerandMode::Theory,
            rounding: RoundingKind::ExplicitPerPoint,
            seed,
        }
    }

    pub fn calibrated(eps: f64, delta: f64, m: usize, threshold_scale: f64, seed: u64) -> Self {
        DerandConfig {
            mode: DerandMode::Calibrated {
                m_override: m,
                threshold_scale,
            },
            ..Self::theory(eps, delta, seed)
        }
    }

    pub fn with_rounding(mut self, rounding: RoundingKind) -> Self {
        self.rounding = rounding;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) || !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!(
                "eps and delta must lie in (0, 1), got {} and {}",
                self.eps, self.delta
            )));
        }
        if !(self.c_const > 0.0) || !(self.c_prime > 0.0) {
            return Err(invalid("C and C' must be positive"));
        }
        if let DerandMode::Calibrated { m_override, threshold_scale } = self.mode {
            if m_override == 0 || !(threshold_scale > 0.0) {
                return Err(invalid("calibrated mode needs m > 0 and threshold_scale > 0"));
            }
        }
        Ok(())
    }

    /// `γ = C k / (εδ)`, times `C'` for hash rounding.
    pub fn gamma(&self, k: usize) -> f64 {
        let base = self.c_const * k as f64 / (self.eps * self.delta);
        match self.rounding {
            RoundingKind::ExplicitPerPoint => base,
            RoundingKind::HashCompact => base * self.c_prime,
        }
    }

    /// Samples drawn per member: `⌈C ln²γ / ε²⌉`, or `⌈C C' ln³γ / ε²⌉` for
    /// hash rounding; the override in calibrated mode.
    pub fn samples_per_member(&self, k: usize) -> usize {
        match self.mode {
            DerandMode::Calibrated { m_override, .. } => m_override,
            DerandMode::Theory => {
                let lg = self.gamma(k).ln();
                let m = match self.rounding {
                    RoundingKind::ExplicitPerPoint => self.c_const * lg * lg / (self.eps * self.eps),
                    RoundingKind::HashCompact => {
                        self.c_const * self.c_prime * lg * lg * lg / (self.eps * self.eps)
                    }
                };
                m.ceil() as usize
            }
        }
    }

    pub fn threshold_scale(&self) -> f64 {
        match self.mode {
            DerandMode::Theory => 1.0,
            DerandMode::Calibrated { threshold_scale, .. } => threshold_scale,
        }
    }

    /// The heavy-bias definition matching this rounding kind.
    pub fn heavy_variant(&self) -> HeavyVariant {
        match self.rounding {
            RoundingKind::ExplicitPerPoint => HeavyVariant::PerPoint,
            RoundingKind::HashCompact => HeavyVariant::Hash { c_prime: self.c_prime },
        }
    }
}

/// `(#positive - #negative) / count` for one point and member.
pub fn empirical_rho(positives: usize, negatives: usize) -> Result<f64> {
    let count = positives + negatives;
    if count == 0 {
        return Err(invalid("empirical_rho needs at least one sample"));
    }
    Ok((positives as f64 - negatives as f64) / count as f64)
}

/// `|ρ| > scale · sqrt(ln γ / count)`, strictly.
pub fn threshold_test(rho: f64, count: usize, gamma: f64, scale: f64) -> Result<bool> {
    if !(gamma > 1.0) {
        return Err(invalid(format!("gamma must exceed 1, got {gamma}")));
    }
    if count == 0 {
        return Err(invalid("threshold_test needs count ≥ 1"));
    }
    Ok(rho.abs() > scale * (gamma.ln() / count as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasEntry {
    pub label: Label,
    pub member: usize,
    pub rho: f64,
    pub count: usize,
}

/// Points whose majority label was fixed from samples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BiasTable {
    entries: BTreeMap<usize, BiasEntry>,
}

impl BiasTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.entries.contains_key(&x)
    }

    pub fn get(&self, x: usize) -> Option<&BiasEntry> {
        self.entries.get(&x)
    }

    pub fn entries(&self) -> &BTreeMap<usize, BiasEntry> {
        &self.entries
    }

    pub fn labels(&self) -> BTreeMap<usize, Label> {
        self.entries.iter().map(|(&x, e)| (x, e.label)).collect()
    }

    /// Membership mask over a domain of `n` points.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &x in self.entries.keys() {
            m[x] = true;
        }
        m
    }
}

/// Samples `m` points from each member in turn and fills the bias table.
/// A point already in the table is never revisited.
pub fn build_bias_table(oracle: &SampleOracle<'_>, cfg: &DerandConfig, rng: &mut Rng) -> Result<BiasTable> {
    cfg.validate()?;
    if let Some(fam) = oracle.exact_family() {
        if !fam.is_label_consistent(CONSISTENCY_TOL) {
            return Err(Error::NotLabelConsistent);
        }
    }
    let k = oracle.k();
    let n = oracle.domain_size();
    let gamma = cfg.gamma(k);
    let m = cfg.samples_per_member(k);
    let scale = cfg.threshold_scale();

    let mut table = BiasTable::default();
    let mut pos = vec![0usize; n];
    let mut neg = vec![0usize; n];
    for i in 0..k {
        pos.iter_mut().for_each(|c| *c = 0);
        neg.iter_mut().for_each(|c| *c = 0);
        for _ in 0..m {
            match oracle.draw(i, rng) {
                (x, Label::Pos) => pos[x] += 1,
                (x, Label::Neg) => neg[x] += 1,
            }
        }
        for x in 0..n {
            let count = pos[x] + neg[x];
            if count == 0 || table.contains(x) {
                continue;
            }
            let rho = empirical_rho(pos[x], neg[x])?;
            if threshold_test(rho, count, gamma, scale)? {
                table.entries.insert(
                    x,
                    BiasEntry {
                        label: Label::sign_of(rho),
                        member: i,
                        rho,
                        count,
                    },
                );
            }
        }
    }
    Ok(table)
}

/// Labels every point: table points keep their table label, every other
/// point copies the label of its own independent draw `f ~ F`.
pub fn round_outside_table(
    f: &RandomizedClassifier,
    table: &BiasTable,
    class: &HypothesisClass,
    rng: &mut Rng,
) -> Result<Vec<Label>> {
    f.check_against(class)?;
    let mut cdf = Vec::with_capacity(f.weights().len());
    let mut acc = 0.0;
    for &w in f.weights() {
        acc += w;
        cdf.push(acc);
    }
    let last = cdf.len() - 1;
    Ok((0..class.domain_size())
        .map(|x| match table.get(x) {
            Some(e) => e.label,
            None => {
                let u = rng.random::<f64>() * acc;
                let j = cdf.partition_point(|&c| c <= u).min(last);
                class.get(f.support()[j]).label(x)
            }
        })
        .collect())
}

/// Anything that produces a randomized classifier meeting the min-max
/// contract at a requested precision and confidence.
pub trait RandomizedLearner {
    fn learn(
        &self,
        oracle: &SampleOracle<'_>,
        class: &HypothesisClass,
        eps: f64,
        delta: f64,
        seed: u64,
    ) -> Result<RandomizedClassifier>;
}

/// Hedge with defaults derived from `(k, ε)`; any field set here overrides
/// the default. When only the round count is given, `η` follows it.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HedgeLearner {
    pub rounds: Option<usize>,
    pub learning_rate: Option<f64>,
    pub erm_sample_size: Option<usize>,
}

impl HedgeLearner {
    pub fn config(&self, k: usize, eps: f64, seed: u64) -> HedgeConfig {
        let mut cfg = HedgeConfig::defaults(k, eps, seed);
        if let Some(t) = self.rounds {
            cfg.rounds = t;
            cfg.learning_rate = (8.0 * (k.max(2) as f64).ln() / t.max(1) as f64).sqrt();
        }
        if let Some(eta) = self.learning_rate {
            cfg.learning_rate = eta;
        }
        if let Some(n) = self.erm_sample_size {
            cfg.erm_sample_size = n;
        }
        cfg
    }
}

impl RandomizedLearner for HedgeLearner {
    fn learn(
        &self,
        oracle: &SampleOracle<'_>,
        class: &HypothesisClass,
        eps: f64,
        delta: f64,
        seed: u64,
    ) -> Result<RandomizedClassifier> {
        hedge_learn(oracle, class, eps, delta, &self.config(oracle.k(), eps, seed))
    }
}

/// Everything a derandomization run produces.
#[derive(Clone, Debug, PartialEq)]
pub struct DerandOutcome {
    pub classifier: DeterministicClassifier,
    pub mixture: RandomizedClassifier,
    pub table: BiasTable,
}

/// Runs the learner at `(ε/2, δ/2)`, builds the bias table from fresh
/// samples, then rounds the rest of the domain.
pub fn derandomize<L: RandomizedLearner + ?Sized>(
    oracle: &SampleOracle<'_>,
    class: &HypothesisClass,
    learner: &L,
    cfg: &DerandConfig,
) -> Result<DerandOutcome> {
    cfg.validate()?;
    if class.domain_size() != oracle.domain_size() {
        return Err(Error::DomainMismatch {
            expected: oracle.domain_size(),
            actual: class.domain_size(),
        });
    }
    if let Some(fam) = oracle.exact_family() {
        if !fam.is_label_consistent(CONSISTENCY_TOL) {
            return Err(Error::NotLabelConsistent);
        }
    }

    let learner_seed = rng::derive_seed(cfg.seed, streams::LEARNER);
    let mixture = learner.learn(oracle, class, cfg.eps / 2.0, cfg.delta / 2.0, learner_seed)?;
    mixture.check_against(class)?;

    let mut table_rng = rng::stream(cfg.seed, streams::BIAS_TABLE);
    let table = build_bias_table(oracle, cfg, &mut table_rng)?;

    let classifier = match cfg.rounding {
        RoundingKind::ExplicitPerPoint => {
            let mut rng = rng::stream(cfg.seed, streams::ROUNDING);
            DeterministicClassifier::Explicit(round_outside_table(&mixture, &table, class, &mut rng)?)
        }
        RoundingKind::HashCompact => {
            let params = choose_hash_params(oracle.k(), cfg.eps, cfg.delta, oracle.domain_size(), cfg.c_prime)?;
            let mut rng = rng::stream(cfg.seed, streams::HASH);
            let hash = sample_hash(params.prime, params.r, &mut rng)?;
            DeterministicClassifier::Compact(CompactClassifier::new(
                hash,
                table.labels(),
                mixture.clone(),
                oracle.domain_size(),
            )?)
        }
    };
    Ok(DerandOutcome {
        classifier,
        mixture,
        table,
    })
}

/// Per-member split of a classifier's error into the part on the bias table
/// and the part off it, next to the mixture's off-table part.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorSplit {
    pub on_table: Vec<f64>,
    pub off_table: Vec<f64>,
    pub mixture_off_table: Vec<f64>,
}

impl ErrorSplit {
    pub fn compute(
        labels: &[Label],
        table: &BiasTable,
        mixture: &RandomizedClassifier,
        class: &HypothesisClass,
        fam: &DistributionFamily,
    ) -> Result<Self> {
        let mask = table.mask(fam.domain_size());
        let mut split = ErrorSplit {
            on_table: Vec::with_capacity(fam.k()),
            off_table: Vec::with_capacity(fam.k()),
            mixture_off_table: Vec::with_capacity(fam.k()),
        };
        for d in fam.members() {
            split.on_table.push(metrics::restricted_error(labels, d, |x| mask[x])?);
            split.off_table.push(metrics::restricted_error(labels, d, |x| !mask[x])?);
            split
                .mixture_off_table
                .push(metrics::randomized_restricted_error(mixture, class, d, |x| !mask[x])?);
        }
        Ok(split)
    }

    /// `max_i |off-table error of f̂ − off-table error of F|`.
    pub fn max_off_table_deviation(&self) -> f64 {
        self.off_table
            .iter()
            .zip(&self.mixture_off_table)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// True iff every heavily biased point is in the table with label
/// `sign(β_x)`.
pub fn heavy_coverage(table: &BiasTable, fam: &DistributionFamily, cfg: &DerandConfig) -> Result<bool> {
    let betas = metrics::biases(fam)?;
    let heavy = metrics::heavy_points(fam, cfg.eps, cfg.delta, cfg.heavy_variant())?;
    Ok(heavy.iter().all(|&x| {
        table
            .get(x)
            .is_some_and(|e| e.label == Label::sign_of(betas[x]))
    }))
}

/// True iff every table label equals `sign(β_x)`.
pub fn table_labels_correct(table: &BiasTable, fam: &DistributionFamily) -> Result<bool> {
    let betas = metrics::biases(fam)?;
    Ok(table
        .entries()
        .iter()
        .all(|(&x, e)| e.label == Label::sign_of(betas[x])))
}
