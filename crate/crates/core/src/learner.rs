//! A randomized multi-distribution learner.
//!
//! Hedge keeps weights over the `k` distributions and best-responds each
//! round with an exhaustive ERM over the hypothesis class. The returned
//! randomized classifier is the uniform mixture of the best responses.
//! Distributions where the current response does badly gain weight.

use std::io::Write;

use rand::Rng as _;

use crate::domain::{DistributionFamily, HypothesisClass, Label, LabeledDistribution, RandomizedClassifier};
use crate::error::{invalid, Error, Result};
use crate::metrics::error_on_distribution;
use crate::rng::{self, Rng};

/// How the learner may access the family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    /// Masses and conditionals are visible.
    Exact,
    /// Only i.i.d. draws are available.
    Sampling,
}

/// Inverse-CDF sampler for one member.
#[derive(Clone, Debug)]
struct MemberSampler {
    cdf: Vec<f64>,
    label_one_prob: Vec<f64>,
}

impl MemberSampler {
    fn new(d: &LabeledDistribution) -> Self {
        let mut acc = 0.0;
        let cdf = d
            .mass()
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        MemberSampler {
            cdf,
            label_one_prob: d.label_one_prob().to_vec(),
        }
    }

    fn draw(&self, rng: &mut Rng) -> (usize, Label) {
        let total = *self.cdf.last().expect("nonempty domain");
        let u = rng.random::<f64>() * total;
        let mut x = self.cdf.partition_point(|&c| c <= u);
        if x >= self.cdf.len() {
            // u landed on the rounding slack at the top; take the last point
            // that carries mass.
            x = self
                .cdf
                .windows(2)
                .rposition(|w| w[1] > w[0])
                .map_or(0, |p| p + 1);
        }
        let y = if rng.random::<f64>() < self.label_one_prob[x] {
            Label::Pos
        } else {
            Label::Neg
        };
        (x, y)
    }
}

/// Draws one `(x, y)` from `member`: inverse CDF over the masses, then a
/// label coin with bias `Pr[y = 1 | x]`.
pub fn draw_sample(member: &LabeledDistribution, rng: &mut Rng) -> (usize, Label) {
    MemberSampler::new(member).draw(rng)
}

/// Access to a distribution family, either exact or draw-only. The random
/// stream is supplied by the caller on every draw so that each consumer owns
/// its own stream.
#[derive(Clone, Debug)]
pub struct SampleOracle<'a> {
    family: &'a DistributionFamily,
    mode: OracleMode,
    samplers: Vec<MemberSampler>,
}

impl<'a> SampleOracle<'a> {
    pub fn new(family: &'a DistributionFamily, mode: OracleMode) -> Self {
        SampleOracle {
            family,
            mode,
            samplers: family.members().iter().map(MemberSampler::new).collect(),
        }
    }

    pub fn exact(family: &'a DistributionFamily) -> Self {
        Self::new(family, OracleMode::Exact)
    }

    pub fn sampling(family: &'a DistributionFamily) -> Self {
        Self::new(family, OracleMode::Sampling)
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    pub fn k(&self) -> usize {
        self.family.k()
    }

    pub fn domain_size(&self) -> usize {
        self.family.domain_size()
    }

    /// The family itself; `None` in sampling mode.
    pub fn exact_family(&self) -> Option<&'a DistributionFamily> {
        match self.mode {
            OracleMode::Exact => Some(self.family),
            OracleMode::Sampling => None,
        }
    }

    pub fn draw(&self, member: usize, rng: &mut Rng) -> (usize, Label) {
        self.samplers[member].draw(rng)
    }

    pub fn draw_many(&self, member: usize, count: usize, rng: &mut Rng) -> Vec<(usize, Label)> {
        (0..count).map(|_| self.draw(member, rng)).collect()
    }
}

/// One weighted training example.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedExample {
    pub x: usize,
    pub y: Label,
    pub weight: f64,
}

/// What ERM minimizes against.
#[derive(Clone, Copy, Debug)]
pub enum ErmTarget<'a> {
    Distribution(&'a LabeledDistribution),
    Sample(&'a [WeightedExample]),
}

/// Exhaustive empirical risk minimization; lowest index wins ties.
pub fn erm(class: &HypothesisClass, target: ErmTarget<'_>) -> Result<usize> {
    let loss = |h: usize| -> Result<f64> {
        let hyp = class.get(h);
        match target {
            ErmTarget::Distribution(d) => error_on_distribution(hyp, d),
            ErmTarget::Sample(s) => Ok(s
                .iter()
                .filter(|e| hyp.labels()[e.x] != e.y)
                .map(|e| e.weight)
                .sum()),
        }
    };
    if let ErmTarget::Sample(s) = target {
        if s.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(e) = s.iter().find(|e| e.x >= class.domain_size()) {
            return Err(invalid(format!("sample point {} outside the domain", e.x)));
        }
    }
    let mut best = (f64::INFINITY, 0);
    for h in 0..class.len() {
        let l = loss(h)?;
        if l < best.0 {
            best = (l, h);
        }
    }
    Ok(best.1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HedgeConfig {
    pub rounds: usize,
    pub learning_rate: f64,
    /// Draws per member per round; sampling mode only.
    pub erm_sample_size: usize,
    pub seed: u64,
}

pub const DEFAULT_ERM_SAMPLE_SIZE: usize = 2000;

impl HedgeConfig {
    /// `T = ⌈8 ln k / eps²⌉` (at least 1) and `η = sqrt(8 ln k / T)`. For
    /// `k = 1` the logarithm is taken at 2 so that `η` stays positive.
    pub fn defaults(k: usize, eps: f64, seed: u64) -> Self {
        let ln_k = (k.max(2) as f64).ln();
        let rounds = if k <= 1 {
            1
        } else {
            ((8.0 * ln_k / (eps * eps)).ceil() as usize).max(1)
        };
        HedgeConfig {
            rounds,
            learning_rate: (8.0 * ln_k / rounds as f64).sqrt(),
            erm_sample_size: DEFAULT_ERM_SAMPLE_SIZE,
            seed,
        }
    }

    fn check(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(invalid("Hedge needs at least one round"));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(invalid(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.erm_sample_size == 0 {
            return Err(invalid("erm_sample_size must be positive"));
        }
        Ok(())
    }
}

/// One Hedge round: the weights used, the best response and its errors.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrace {
    pub round: usize,
    pub hypothesis: usize,
    pub errors: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn write_trace_csv<W: Write>(out: W, trace: &[RoundTrace]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let k = trace.first().map_or(0, |t| t.errors.len());
    let mut header = vec!["round".to_string(), "hypothesis".to_string()];
    header.extend((0..k).map(|i| format!("err_{i}")));
    header.extend((0..k).map(|i| format!("w_{i}")));
    w.write_record(&header)?;
    for t in trace {
        let mut rec = vec![t.round.to_string(), t.hypothesis.to_string()];
        rec.extend(t.errors.iter().map(f64::to_string));
        rec.extend(t.weights.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs Hedge and returns the uniform mixture of best responses.
pub fn hedge_learn(
    oracle: &SampleOracle<'_>,
    class: &HypothesisClass,
    eps: f64,
    delta: f64,
    cfg: &HedgeConfig,
) -> Result<RandomizedClassifier> {
    hedge_learn_traced(oracle, class, eps, delta, cfg).map(|(f, _)| f)
}

pub fn hedge_learn_traced(
    oracle: &SampleOracle<'_>,
    class: &HypothesisClass,
    eps: f64,
    delta: f64,
    cfg: &HedgeConfig,
) -> Result<(RandomizedClassifier, Vec<RoundTrace>)> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("eps and delta must lie in (0, 1), got {eps}, {delta}")));
    }
    cfg.check()?;
    if class.domain_size() != oracle.domain_size() {
        return Err(Error::DomainMismatch {
            expected: oracle.domain_size(),
            actual: class.domain_size(),
        });
    }

    let k = oracle.k();
    let mut rng = rng::stream(cfg.seed, rng::streams::LEARNER);
    let mut weights = vec![1.0 / k as f64; k];
    let mut chosen = Vec::with_capacity(cfg.rounds);
    let mut trace = Vec::with_capacity(cfg.rounds);

    for round in 0..cfg.rounds {
        let (h, errors) = match oracle.exact_family() {
            Some(fam) => {
                let mix = fam.mixture(&weights)?;
                let h = erm(class, ErmTarget::Distribution(&mix))?;
                let errors = fam
                    .members()
                    .iter()
                    .map(|d| error_on_distribution(class.get(h), d))
                    .collect::<Result<Vec<_>>>()?;
                (h, errors)
            }
            None => {
                let n = cfg.erm_sample_size;
                let mut sample = Vec::with_capacity(n * k);
                for (i, &w) in weights.iter().enumerate() {
                    for (x, y) in oracle.draw_many(i, n, &mut rng) {
                        sample.push(WeightedExample { x, y, weight: w / n as f64 });
                    }
                }
                let h = erm(class, ErmTarget::Sample(&sample))?;
                let labels = class.get(h).labels();
                let errors = (0..k)
                    .map(|i| {
                        let wrong = oracle
                            .draw_many(i, n, &mut rng)
                            .into_iter()
                            .filter(|&(x, y)| labels[x] != y)
                            .count();
                        wrong as f64 / n as f64
                    })
                    .collect();
                (h, errors)
            }
        };

        trace.push(RoundTrace {
            round,
            hypothesis: h,
            errors: errors.clone(),
            weights: weights.clone(),
        });
        chosen.push(h);

        for (w, e) in weights.iter_mut().zip(&errors) {
            *w *= (cfg.learning_rate * e).exp();
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
    }

    Ok((RandomizedClassifier::uniform_over(&chosen)?, trace))
}
