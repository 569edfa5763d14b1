//! Reproducible instance generators.
//!
//! Every generator is a pure function of its [`GenSpec`] (seed included);
//! randomness comes from the instance stream of that seed.

use rand::Rng as _;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::domain::{DistributionFamily, Hypothesis, HypothesisClass, Label, LabeledDistribution, RandomizedClassifier};
use crate::error::{invalid, Result};
use crate::metrics::{self, HeavyVariant};
use crate::rng::{self, streams, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    RandomLabelConsistent,
    BayesInClass,
    GapExample,
    HeavyPointProbe,
}

/// Mixture of near-deterministic and near-fair points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasProfile {
    /// Fraction of points whose `|β|` is drawn from `strong_beta`.
    pub strong_fraction: f64,
    pub strong_beta: (f64, f64),
    /// The remaining points get `|β|` uniform on `[0, weak_beta_max]`.
    pub weak_beta_max: f64,
}

impl Default for BiasProfile {
    fn default() -> Self {
        BiasProfile {
            strong_fraction: 0.5,
            strong_beta: (0.4, 0.5),
            weak_beta_max: 0.05,
        }
    }
}

impl BiasProfile {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.strong_beta;
        if !(0.0..=1.0).contains(&self.strong_fraction)
            || !(0.0 <= lo && lo <= hi && hi <= 0.5)
            || !(0.0..=0.5).contains(&self.weak_beta_max)
        {
            return Err(invalid(format!("invalid bias profile {self:?}")));
        }
        Ok(())
    }

    fn draw_beta(&self, rng: &mut Rng) -> f64 {
        let magnitude = if rng.random::<f64>() < self.strong_fraction {
            let (lo, hi) = self.strong_beta;
            lo + (hi - lo) * rng.random::<f64>()
        } else {
            self.weak_beta_max * rng.random::<f64>()
        };
        if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        }
    }
}

/// Parameters of the heavy/light probe family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    pub eps: f64,
    pub delta: f64,
    /// Heavy point `j` is point `j` and has `β = ±heavy_beta` (alternating,
    /// starting with `+`).
    pub heavy_count: usize,
    pub heavy_beta: f64,
    /// Mass of heavy point `j` under member `j mod k`.
    pub heavy_mass: f64,
    pub light_count: usize,
    pub light_beta_max: f64,
    /// Threshold the designated points are checked against.
    pub c_prime: Option<f64>,
}

impl ProbeParams {
    pub fn variant(&self) -> HeavyVariant {
        match self.c_prime {
            None => HeavyVariant::PerPoint,
            Some(c_prime) => HeavyVariant::Hash { c_prime },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub domain_size: usize,
    pub k: usize,
    pub hypothesis_count: usize,
    #[serde(default)]
    pub bias: BiasProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeParams>,
    pub seed: u64,
}

impl GenSpec {
    pub fn random(domain_size: usize, k: usize, hypothesis_count: usize, seed: u64) -> Self {
        GenSpec {
            kind: GenKind::RandomLabelConsistent,
            domain_size,
            k,
            hypothesis_count,
            bias: BiasProfile::default(),
            probe: None,
            seed,
        }
    }

    pub fn with_kind(mut self, kind: GenKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.domain_size == 0 || self.k == 0 || self.hypothesis_count == 0 {
            return Err(invalid("domain_size, k and hypothesis_count must be positive"));
        }
        self.bias.validate()
    }
}

/// A family and class, plus a reference mixture for worked examples.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub family: DistributionFamily,
    pub class: HypothesisClass,
    pub mixture: Option<RandomizedClassifier>,
    pub spec: Option<GenSpec>,
}

/// Dispatches on `spec.kind`.
pub fn generate(spec: &GenSpec) -> Result<Instance> {
    spec.validate()?;
    let mut inst = match spec.kind {
        GenKind::RandomLabelConsistent | GenKind::BayesInClass => {
            let (family, class) = gen_random_label_consistent(spec)?;
            Instance {
                family,
                class,
                mixture: None,
                spec: None,
            }
        }
        GenKind::GapExample => {
            let (family, class, mixture) = gen_gap_example(spec.k)?;
            Instance {
                family,
                class,
                mixture: Some(mixture),
                spec: None,
            }
        }
        GenKind::HeavyPointProbe => {
            let probe = spec
                .probe
                .ok_or_else(|| invalid("heavy_point_probe needs probe parameters"))?;
            let family = gen_heavy_point_probe(spec.k, &probe, spec.seed)?;
            let mut rng = rng::stream(spec.seed, streams::INSTANCE ^ 0x80);
            let class = random_hypothesis_class(family.domain_size(), spec.hypothesis_count, &mut rng)?;
            Instance {
                family,
                class,
                mixture: None,
                spec: None,
            }
        }
    };
    inst.spec = Some(spec.clone());
    Ok(inst)
}

fn random_mass(n: usize, rng: &mut Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// `count` labelings with i.i.d. fair signs.
pub fn random_hypothesis_class(domain_size: usize, count: usize, rng: &mut Rng) -> Result<HypothesisClass> {
    let hs = (0..count)
        .map(|_| {
            Hypothesis::new(
                (0..domain_size)
                    .map(|_| if rng.random::<bool>() { Label::Pos } else { Label::Neg })
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    HypothesisClass::new(hs)
}

/// `k` exponential-normalized mass vectors over one shared conditional drawn
/// from the bias profile, and `hypothesis_count` random labelings. For
/// [`GenKind::BayesInClass`] the last labeling is replaced by the Bayes
/// labeling.
pub fn gen_random_label_consistent(spec: &GenSpec) -> Result<(DistributionFamily, HypothesisClass)> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, streams::INSTANCE);
    let n = spec.domain_size;
    let eta: Vec<f64> = (0..n).map(|_| 0.5 + spec.bias.draw_beta(&mut rng)).collect();
    let members = (0..spec.k)
        .map(|_| LabeledDistribution::new(random_mass(n, &mut rng), eta.clone()))
        .collect::<Result<Vec<_>>>()?;
    let family = DistributionFamily::new(members)?;
    let class = random_hypothesis_class(n, spec.hypothesis_count, &mut rng)?;
    let class = if spec.kind == GenKind::BayesInClass {
        let mut hs = class.hypotheses().to_vec();
        *hs.last_mut().expect("nonempty") = Hypothesis::new(metrics::bayes_labeling(&family))?;
        HypothesisClass::new(hs)?
    } else {
        class
    };
    Ok((family, class))
}

/// Point masses `D_i` on `(x_i, +1)`, hypotheses `h_i` that are `-1` only at
/// `x_i`, and `F` uniform over them.
pub fn gen_gap_example(k: usize) -> Result<(DistributionFamily, HypothesisClass, RandomizedClassifier)> {
    if k < 2 {
        return Err(invalid(format!("gap example needs k ≥ 2, got {k}")));
    }
    let family = DistributionFamily::new(
        (0..k)
            .map(|i| LabeledDistribution::point_mass(k, i, 1.0))
            .collect::<Result<_>>()?,
    )?;
    let class = HypothesisClass::new(
        (0..k)
            .map(|i| {
                let mut labels = vec![Label::Pos; k];
                labels[i] = Label::Neg;
                Hypothesis::new(labels)
            })
            .collect::<Result<_>>()?,
    )?;
    let indices: Vec<usize> = (0..k).collect();
    Ok((family, class, RandomizedClassifier::uniform_over(&indices)?))
}

const THRESHOLD_REL_TOL: f64 = 1e-12;

/// Family with `heavy_count` designated heavy points followed by
/// `light_count` designated light points. Each member spreads the mass left
/// after its heavy points over the light points with ratios in `[1, 2)`.
///
/// Fails if any designated point lands on the wrong side of the threshold
/// or on it.
pub fn gen_heavy_point_probe(k: usize, p: &ProbeParams, seed: u64) -> Result<DistributionFamily> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    if !(0.0..=0.5).contains(&p.heavy_beta) || !(0.0..=0.5).contains(&p.light_beta_max) {
        return Err(invalid("biases must lie in [0, 1/2]"));
    }
    if !(p.heavy_mass > 0.0 && p.heavy_mass <= 1.0) {
        return Err(invalid("heavy_mass must lie in (0, 1]"));
    }
    let n = p.heavy_count + p.light_count;
    if n == 0 {
        return Err(invalid("probe needs at least one point"));
    }
    let mut rng = rng::stream(seed, streams::INSTANCE);

    let mut eta = Vec::with_capacity(n);
    for j in 0..p.heavy_count {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        eta.push(0.5 + sign * p.heavy_beta);
    }
    for _ in 0..p.light_count {
        let b = p.light_beta_max * rng.random::<f64>();
        eta.push(if rng.random::<bool>() { 0.5 + b } else { 0.5 - b });
    }

    let mut members = Vec::with_capacity(k);
    for i in 0..k {
        let mut mass = vec![0.0; n];
        for (j, m) in mass.iter_mut().enumerate().take(p.heavy_count) {
            if j % k == i {
                *m = p.heavy_mass;
            }
        }
        let used: f64 = mass.iter().sum();
        let rest = 1.0 - used;
        if rest < -1e-12 {
            return Err(invalid(format!("member {i}: heavy masses exceed 1")));
        }
        if rest > 1e-12 {
            if p.light_count == 0 {
                return Err(invalid(format!("member {i}: leftover mass {rest} but no light points")));
            }
            let w: Vec<f64> = (0..p.light_count).map(|_| 1.0 + rng.random::<f64>()).collect();
            let total: f64 = w.iter().sum();
            for (slot, wj) in mass[p.heavy_count..].iter_mut().zip(&w) {
                *slot = rest * wj / total;
            }
        }
        members.push(LabeledDistribution::new(mass, eta.clone())?);
    }
    let family = DistributionFamily::new(members)?;

    let threshold = metrics::heavy_threshold(k, p.eps, p.delta, p.variant())?;
    for (x, &e) in eta.iter().enumerate() {
        let b = e - 0.5;
        let peak = family
            .members()
            .iter()
            .map(|d| b * b * d.mass()[x])
            .fold(0.0, f64::max);
        if (peak - threshold).abs() <= THRESHOLD_REL_TOL * threshold {
            return Err(invalid(format!("point {x} sits on the heavy threshold")));
        }
        let want_heavy = x < p.heavy_count;
        if (peak > threshold) != want_heavy {
            let side = if want_heavy { "light" } else { "heavy" };
            return Err(invalid(format!("designated point {x} came out {side}")));
        }
    }
    Ok(family)
}
