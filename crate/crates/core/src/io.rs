//! File formats: instances and classifiers as JSON, matrices as plain text.
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::discrepancy::BinaryMatrix;
use crate::domain::{
    DeterministicClassifier, DistributionFamily, Hypothesis, HypothesisClass, Label, LabeledDistribution,
    RandomizedClassifier,
};
use crate::error::{invalid, Error, Result};
use crate::gen::{GenSpec, Instance};
use crate::hash::{CompactClassifier, PolyHash};

#[derive(Debug, Serialize, Deserialize)]
struct DistributionRecord {
    mass: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label_one_prob: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MixtureRecord {
    pub support_indices: Vec<usize>,
    pub weights: Vec<f64>,
}

impl From<&RandomizedClassifier> for MixtureRecord {
    fn from(f: &RandomizedClassifier) -> Self {
        MixtureRecord {
            support_indices: f.support().to_vec(),
            weights: f.weights().to_vec(),
        }
    }
}

impl TryFrom<MixtureRecord> for RandomizedClassifier {
    type Error = Error;

    fn try_from(r: MixtureRecord) -> Result<Self> {
        RandomizedClassifier::new(r.support_indices, r.weights)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gen_spec: Option<GenSpec>,
    domain_size: usize,
    distributions: Vec<DistributionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shared_label_one_prob: Option<Vec<f64>>,
    hypotheses: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vc_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mixture: Option<MixtureRecord>,
}

fn signs(labels: &[Label]) -> Vec<i64> {
    labels.iter().map(|l| l.as_i64()).collect()
}

fn labels_from_signs(signs: &[i64]) -> Result<Vec<Label>> {
    signs.iter().map(|&s| Label::try_from(s)).collect()
}

pub fn instance_to_json(inst: &Instance) -> Result<String> {
    let fam = &inst.family;
    let first = fam.member(0).label_one_prob();
    let shared = fam.members().iter().all(|d| d.label_one_prob() == first);
    let record = InstanceRecord {
        gen_spec: inst.spec.clone(),
        domain_size: fam.domain_size(),
        distributions: fam
            .members()
            .iter()
            .map(|d| DistributionRecord {
                mass: d.mass().to_vec(),
                label_one_prob: (!shared).then(|| d.label_one_prob().to_vec()),
            })
            .collect(),
        shared_label_one_prob: shared.then(|| first.to_vec()),
        hypotheses: inst.class.hypotheses().iter().map(|h| signs(h.labels())).collect(),
        vc_dim: inst.class.vc_dim(),
        mixture: inst.mixture.as_ref().map(MixtureRecord::from),
    };
    Ok(serde_json::to_string_pretty(&record)?)
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let r: InstanceRecord = serde_json::from_str(text)?;
    let members = r
        .distributions
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let eta = d
                .label_one_prob
                .or_else(|| r.shared_label_one_prob.clone())
                .ok_or_else(|| Error::Parse(format!("distribution {i} has no label_one_prob")))?;
            LabeledDistribution::new(d.mass, eta)
        })
        .collect::<Result<Vec<_>>>()?;
    let family = DistributionFamily::new(members)?;
    if family.domain_size() != r.domain_size {
        return Err(Error::DomainMismatch {
            expected: r.domain_size,
            actual: family.domain_size(),
        });
    }
    let class = HypothesisClass::new(
        r.hypotheses
            .iter()
            .map(|h| Hypothesis::new(labels_from_signs(h)?))
            .collect::<Result<_>>()?,
    )?
    .with_vc_dim(r.vc_dim);
    if class.domain_size() != r.domain_size {
        return Err(Error::DomainMismatch {
            expected: r.domain_size,
            actual: class.domain_size(),
        });
    }
    let mixture = r.mixture.map(RandomizedClassifier::try_from).transpose()?;
    if let Some(f) = &mixture {
        f.check_against(&class)?;
    }
    Ok(Instance {
        family,
        class,
        mixture,
        spec: r.gen_spec,
    })
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    instance_from_json(&fs::read_to_string(path)?)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    fs::write(path, instance_to_json(inst)? + "\n")?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ClassifierRecord {
    Explicit {
        labels: Vec<i64>,
    },
    Compact {
        domain_size: usize,
        prime: u64,
        degree_r: usize,
        coefficients: Vec<u64>,
        range_size: u64,
        t_table: Vec<(usize, i64)>,
        support_indices: Vec<usize>,
        weights: Vec<f64>,
    },
}

/// Compact classifiers need the domain size to check `p > |X|`.
pub fn classifier_to_json(c: &DeterministicClassifier, domain_size: usize) -> Result<String> {
    let record = match c {
        DeterministicClassifier::Explicit(labels) => ClassifierRecord::Explicit { labels: signs(labels) },
        DeterministicClassifier::Compact(cc) => ClassifierRecord::Compact {
            domain_size,
            prime: cc.hash().prime(),
            degree_r: cc.hash().degree_r(),
            coefficients: cc.hash().coefficients().to_vec(),
            range_size: cc.range_size(),
            t_table: cc.t_table().iter().map(|(&x, l)| (x, l.as_i64())).collect(),
            support_indices: cc.mixture().support().to_vec(),
            weights: cc.mixture().weights().to_vec(),
        },
    };
    Ok(serde_json::to_string_pretty(&record)?)
}

pub fn classifier_from_json(text: &str) -> Result<DeterministicClassifier> {
    match serde_json::from_str(text)? {
        ClassifierRecord::Explicit { labels } => Ok(DeterministicClassifier::Explicit(labels_from_signs(&labels)?)),
        ClassifierRecord::Compact {
            domain_size,
            prime,
            degree_r,
            coefficients,
            range_size,
            t_table,
            support_indices,
            weights,
        } => {
            if coefficients.len() != degree_r {
                return Err(Error::Parse(format!(
                    "degree_r {degree_r} but {} coefficients",
                    coefficients.len()
                )));
            }
            if range_size != prime {
                return Err(Error::Parse(format!("range_size {range_size} differs from prime {prime}")));
            }
            let mut table = BTreeMap::new();
            for (x, s) in t_table {
                if table.insert(x, Label::try_from(s)?).is_some() {
                    return Err(Error::Parse(format!("duplicate bias table key {x}")));
                }
            }
            let hash = PolyHash::new(prime, coefficients)?;
            let mixture = RandomizedClassifier::new(support_indices, weights)?;
            Ok(DeterministicClassifier::Compact(CompactClassifier::new(
                hash,
                table,
                mixture,
                domain_size,
            )?))
        }
    }
}

pub fn read_classifier(path: &Path) -> Result<DeterministicClassifier> {
    classifier_from_json(&fs::read_to_string(path)?)
}

pub fn write_classifier(path: &Path, c: &DeterministicClassifier, domain_size: usize) -> Result<()> {
    fs::write(path, classifier_to_json(c, domain_size)? + "\n")?;
    Ok(())
}

pub fn mixture_to_json(f: &RandomizedClassifier) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MixtureRecord::from(f))?)
}

pub fn mixture_from_json(text: &str) -> Result<RandomizedClassifier> {
    let r: MixtureRecord = serde_json::from_str(text)?;
    r.try_into()
}

pub fn read_matrix(path: &Path) -> Result<BinaryMatrix> {
    BinaryMatrix::parse(&fs::read_to_string(path)?)
}

pub fn write_matrix(path: &Path, a: &BinaryMatrix) -> Result<()> {
    fs::write(path, a.to_string())?;
    Ok(())
}

/// Reads a labeling of the matrix columns: whitespace- or comma-separated
/// `-1`/`+1` values.
pub fn parse_labels(text: &str) -> Result<Vec<Label>> {
    let values = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.trim_start_matches('+')
                .parse::<i64>()
                .map_err(|e| Error::Parse(format!("bad label {t:?}: {e}")))
                .and_then(Label::try_from)
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(invalid("no labels given"));
    }
    Ok(values)
}
