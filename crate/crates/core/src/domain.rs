//! Value types: domains, labeled distributions, hypotheses and classifiers.
//!
//! Domain points are dense indices `0..size`. A [`LabeledDistribution`] is the
//! pair `(D(x), Pr[y = 1 | x])` over those indices. Everything here is
//! immutable after construction.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hash::CompactClassifier;

/// Tolerance for "sums to one".
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A binary label, `-1` or `+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    /// `sign(v)` with `sign(0) = +1`.
    pub fn sign_of(v: f64) -> Label {
        if v < 0.0 {
            Label::Neg
        } else {
            Label::Pos
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Neg => -1,
            Label::Pos => 1,
        }
    }

    pub fn as_i64(self) -> i64 {
        self.as_i8() as i64
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Neg => Label::Pos,
            Label::Pos => Label::Neg,
        }
    }

    /// Probability that this prediction is wrong when `Pr[y = 1] = eta`.
    #[inline]
    pub fn error_prob(self, eta: f64) -> f64 {
        match self {
            Label::Pos => 1.0 - eta,
            Label::Neg => eta,
        }
    }
}

impl TryFrom<i64> for Label {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self> {
        match v {
            -1 => Ok(Label::Neg),
            1 => Ok(Label::Pos),
            other => Err(invalid(format!("label must be -1 or +1, got {other}"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

/// Anything that assigns a label to every domain point.
pub trait Labeling {
    fn domain_size(&self) -> usize;
    fn label(&self, x: usize) -> Label;
}

impl Labeling for [Label] {
    fn domain_size(&self) -> usize {
        self.len()
    }
    fn label(&self, x: usize) -> Label {
        self[x]
    }
}

impl Labeling for Vec<Label> {
    fn domain_size(&self) -> usize {
        self.len()
    }
    fn label(&self, x: usize) -> Label {
        self[x]
    }
}

/// A finite input domain `{0, .., size - 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    size: usize,
}

impl Domain {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(invalid("domain size must be at least 1"));
        }
        Ok(Domain { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn points(&self) -> std::ops::Range<usize> {
        0..self.size
    }
}

/// One invariant violation found by [`DistributionFamily::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    MassSum { member: usize, sum: f64 },
    NegativeMass { member: usize, point: usize, value: f64 },
    ProbabilityRange { member: usize, point: usize, value: f64 },
    NonFinite { member: usize, point: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MassSum { member, sum } => {
                write!(f, "member {member}: mass sum {sum} ≠ 1")
            }
            Violation::NegativeMass { member, point, value } => {
                write!(f, "member {member}: negative mass {value} at point {point}")
            }
            Violation::ProbabilityRange { member, point, value } => {
                write!(f, "member {member}: label_one_prob {value} outside [0, 1] at point {point}")
            }
            Violation::NonFinite { member, point } => {
                write!(f, "member {member}: non-finite value at point {point}")
            }
        }
    }
}

/// A distribution over `X × {-1, +1}` given as a marginal mass and the
/// conditional probability of label `+1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDistribution {
    mass: Vec<f64>,
    label_one_prob: Vec<f64>,
}

impl LabeledDistribution {
    /// Builds a member without checking normalization; see
    /// [`DistributionFamily::validate`].
    pub fn new(mass: Vec<f64>, label_one_prob: Vec<f64>) -> Result<Self> {
        if mass.len() != label_one_prob.len() {
            return Err(Error::DomainMismatch {
                expected: mass.len(),
                actual: label_one_prob.len(),
            });
        }
        if mass.is_empty() {
            return Err(invalid("distribution over an empty domain"));
        }
        Ok(LabeledDistribution { mass, label_one_prob })
    }

    /// Point mass on `(x, +1)` with probability `eta` of label one.
    pub fn point_mass(domain_size: usize, x: usize, eta: f64) -> Result<Self> {
        if x >= domain_size {
            return Err(invalid(format!("point {x} outside domain of size {domain_size}")));
        }
        let mut mass = vec![0.0; domain_size];
        mass[x] = 1.0;
        Self::new(mass, vec![eta; domain_size])
    }

    pub fn domain_size(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn label_one_prob(&self) -> &[f64] {
        &self.label_one_prob
    }

    fn violations(&self, member: usize, out: &mut Vec<Violation>) {
        let mut sum = 0.0;
        for (point, (&m, &eta)) in self.mass.iter().zip(&self.label_one_prob).enumerate() {
            if !m.is_finite() || !eta.is_finite() {
                out.push(Violation::NonFinite { member, point });
                continue;
            }
            if m < 0.0 {
                out.push(Violation::NegativeMass { member, point, value: m });
            }
            if !(0.0..=1.0).contains(&eta) {
                out.push(Violation::ProbabilityRange { member, point, value: eta });
            }
            sum += m;
        }
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            out.push(Violation::MassSum { member, sum });
        }
    }
}

/// `k` labeled distributions over a shared domain.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionFamily {
    domain: Domain,
    members: Vec<LabeledDistribution>,
}

impl DistributionFamily {
    /// Checks shape only (k ≥ 1, shared domain size). Use [`Self::new`] to
    /// also reject numeric violations.
    pub fn from_parts(members: Vec<LabeledDistribution>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| invalid("a family needs at least one member"))?;
        let domain = Domain::new(first.domain_size())?;
        for m in &members {
            if m.domain_size() != domain.size() {
                return Err(Error::DomainMismatch {
                    expected: domain.size(),
                    actual: m.domain_size(),
                });
            }
        }
        Ok(DistributionFamily { domain, members })
    }

    pub fn new(members: Vec<LabeledDistribution>) -> Result<Self> {
        let fam = Self::from_parts(members)?;
        let report = fam.validate();
        if report.is_empty() {
            Ok(fam)
        } else {
            Err(Error::InvalidFamily(report))
        }
    }

    /// All invariant violations; empty iff the family is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, m) in self.members.iter().enumerate() {
            m.violations(i, &mut out);
        }
        out
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn domain_size(&self) -> usize {
        self.domain.size()
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[LabeledDistribution] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &LabeledDistribution {
        &self.members[i]
    }

    /// True iff every point carrying mass in two or more members gets the
    /// same conditional label law (within `tol`) from all of them.
    pub fn is_label_consistent(&self, tol: f64) -> bool {
        for x in self.domain.points() {
            let mut reference: Option<f64> = None;
            for m in &self.members {
                if m.mass[x] <= 0.0 {
                    continue;
                }
                match reference {
                    None => reference = Some(m.label_one_prob[x]),
                    Some(r) if (r - m.label_one_prob[x]).abs() > tol => return false,
                    Some(_) => {}
                }
            }
        }
        true
    }

    /// The shared conditional `Pr[y = 1 | x]`, taken from the first member
    /// that puts mass on `x` (member 0 if none does).
    pub fn shared_label_one_prob(&self, x: usize) -> f64 {
        self.members
            .iter()
            .find(|m| m.mass[x] > 0.0)
            .unwrap_or(&self.members[0])
            .label_one_prob[x]
    }

    /// The `w`-weighted mixture of the members, keeping per-point conditionals
    /// as the mass-weighted average.
    pub fn mixture(&self, weights: &[f64]) -> Result<LabeledDistribution> {
        if weights.len() != self.k() {
            return Err(invalid(format!(
                "mixture needs {} weights, got {}",
                self.k(),
                weights.len()
            )));
        }
        let n = self.domain_size();
        let mut mass = vec![0.0; n];
        let mut pos = vec![0.0; n];
        for (w, m) in weights.iter().zip(&self.members) {
            for x in 0..n {
                let wm = w * m.mass[x];
                mass[x] += wm;
                pos[x] += wm * m.label_one_prob[x];
            }
        }
        let eta = mass
            .iter()
            .zip(&pos)
            .map(|(&m, &p)| if m > 0.0 { (p / m).clamp(0.0, 1.0) } else { 0.5 })
            .collect();
        LabeledDistribution::new(mass, eta)
    }
}

/// A total labeling of the domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    labels: Vec<Label>,
}

impl Hypothesis {
    pub fn new(labels: Vec<Label>) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid("hypothesis over an empty domain"));
        }
        Ok(Hypothesis { labels })
    }

    pub fn from_signs(signs: &[i64]) -> Result<Self> {
        let labels = signs
            .iter()
            .map(|&s| Label::try_from(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels)
    }

    pub fn constant(domain_size: usize, label: Label) -> Self {
        Hypothesis {
            labels: vec![label; domain_size.max(1)],
        }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
}

impl Labeling for Hypothesis {
    fn domain_size(&self) -> usize {
        self.labels.len()
    }
    fn label(&self, x: usize) -> Label {
        self.labels[x]
    }
}

/// A finite, explicitly listed hypothesis class.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisClass {
    hypotheses: Vec<Hypothesis>,
    vc_dim: Option<usize>,
}

impl HypothesisClass {
    pub fn new(hypotheses: Vec<Hypothesis>) -> Result<Self> {
        let first = hypotheses
            .first()
            .ok_or_else(|| invalid("hypothesis class must be nonempty"))?;
        let n = first.domain_size();
        for h in &hypotheses {
            if h.domain_size() != n {
                return Err(Error::DomainMismatch {
                    expected: n,
                    actual: h.domain_size(),
                });
            }
        }
        Ok(HypothesisClass {
            hypotheses,
            vc_dim: None,
        })
    }

    /// Every labeling of `n` points, in binary order (bit `j` set means
    /// point `j` is labeled `+1`).
    pub fn all_labelings(n: usize) -> Result<Self> {
        if n == 0 || n > 20 {
            return Err(Error::TooLarge {
                what: "points in full labeling class",
                value: n,
                limit: 20,
            });
        }
        let hs = (0u64..1 << n)
            .map(|bits| Hypothesis {
                labels: (0..n)
                    .map(|j| if bits >> j & 1 == 1 { Label::Pos } else { Label::Neg })
                    .collect(),
            })
            .collect();
        let mut class = Self::new(hs)?;
        class.vc_dim = Some(n);
        Ok(class)
    }

    pub fn with_vc_dim(mut self, vc_dim: Option<usize>) -> Self {
        self.vc_dim = vc_dim;
        self
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn domain_size(&self) -> usize {
        self.hypotheses[0].domain_size()
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn get(&self, i: usize) -> &Hypothesis {
        &self.hypotheses[i]
    }

    pub fn vc_dim(&self) -> Option<usize> {
        self.vc_dim
    }

    /// Indices of hypotheses that repeat an earlier one. Duplicates are legal
    /// but usually indicate a generator quirk.
    pub fn duplicate_indices(&self) -> Vec<usize> {
        let mut seen = HashSet::new();
        self.hypotheses
            .iter()
            .enumerate()
            .filter(|(_, h)| !seen.insert(h.labels()))
            .map(|(i, _)| i)
            .collect()
    }
}

/// A finitely supported distribution over hypotheses of some class.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomizedClassifier {
    support: Vec<usize>,
    weights: Vec<f64>,
}

impl RandomizedClassifier {
    pub fn new(support: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidMixture("empty support".into()));
        }
        if support.len() != weights.len() {
            return Err(Error::InvalidMixture(format!(
                "{} support indices but {} weights",
                support.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidMixture(format!("bad weight {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidMixture(format!("weights sum to {sum}")));
        }
        Ok(RandomizedClassifier { support, weights })
    }

    /// The point mass on hypothesis `index`.
    pub fn singleton(index: usize) -> Self {
        RandomizedClassifier {
            support: vec![index],
            weights: vec![1.0],
        }
    }

    /// Uniform over `indices`, merging repeats by summing their weights.
    /// Support order is first appearance.
    pub fn uniform_over(indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidMixture("empty support".into()));
        }
        let mut support: Vec<usize> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        let mut pos = std::collections::HashMap::new();
        for &i in indices {
            match pos.get(&i) {
                Some(&p) => counts[p] += 1,
                None => {
                    pos.insert(i, support.len());
                    support.push(i);
                    counts.push(1);
                }
            }
        }
        let total = indices.len() as f64;
        let weights = counts.iter().map(|&c| c as f64 / total).collect();
        Self::new(support, weights)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied())
    }

    /// Checks that every support index refers into `class`.
    pub fn check_against(&self, class: &HypothesisClass) -> Result<()> {
        match self.support.iter().find(|&&i| i >= class.len()) {
            Some(i) => Err(Error::InvalidMixture(format!(
                "support index {i} out of range for a class of {}",
                class.len()
            ))),
            None => Ok(()),
        }
    }

    /// `Pr_{f ~ F}[f(x) = +1]`.
    pub fn marginal_one_probability(&self, class: &HypothesisClass, x: usize) -> f64 {
        self.iter()
            .filter(|&(h, _)| class.get(h).label(x) == Label::Pos)
            .map(|(_, w)| w)
            .sum()
    }
}

/// A total deterministic classifier.
#[derive(Clone, Debug, PartialEq)]
pub enum DeterministicClassifier {
    Explicit(Vec<Label>),
    Compact(CompactClassifier),
}

impl DeterministicClassifier {
    /// Label at `x`. The class is only consulted by compact classifiers.
    pub fn predict(&self, x: usize, class: &HypothesisClass) -> Label {
        match self {
            DeterministicClassifier::Explicit(labels) => labels[x],
            DeterministicClassifier::Compact(c) => c.evaluate(x, class),
        }
    }

    /// Evaluates on the whole domain.
    pub fn to_labels(&self, domain_size: usize, class: &HypothesisClass) -> Result<Vec<Label>> {
        match self {
            DeterministicClassifier::Explicit(labels) => {
                if labels.len() != domain_size {
                    return Err(Error::DomainMismatch {
                        expected: domain_size,
                        actual: labels.len(),
                    });
                }
                Ok(labels.clone())
            }
            DeterministicClassifier::Compact(c) => c.evaluate_all(domain_size, class),
        }
    }
}
