//! Exact error functionals, the `OPT` benchmark, biases and VC utilities.
//!
//! All errors are exact expectations over the finite domain; nothing in this
//! module samples.

use std::collections::HashSet;
use std::io::Write;

use crate::domain::{DistributionFamily, HypothesisClass, Label, LabeledDistribution, Labeling, RandomizedClassifier};
use crate::error::{invalid, Error, Result};

/// Tolerance used when checking label consistency before computing biases.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Per-distribution errors of one classifier plus their maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub per_distribution: Vec<f64>,
    pub worst_case: f64,
    pub argmax_index: usize,
}

impl ErrorReport {
    /// Builds a report; ties go to the lowest index.
    pub fn from_errors(per_distribution: Vec<f64>) -> Self {
        let mut argmax_index = 0;
        for (i, &e) in per_distribution.iter().enumerate() {
            if e > per_distribution[argmax_index] {
                argmax_index = i;
            }
        }
        let worst_case = per_distribution[argmax_index];
        ErrorReport {
            per_distribution,
            worst_case,
            argmax_index,
        }
    }
}

/// Writes `instance_id, classifier_id, err_0..err_{k-1}, worst_case,
/// argmax_index` rows with a header. All reports must share `k`.
pub fn write_error_reports<W: Write>(
    out: W,
    rows: &[(String, String, ErrorReport)],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let k = rows.first().map_or(0, |r| r.2.per_distribution.len());
    let mut header = vec!["instance_id".to_string(), "classifier_id".to_string()];
    header.extend((0..k).map(|i| format!("err_{i}")));
    header.push("worst_case".into());
    header.push("argmax_index".into());
    w.write_record(&header)?;
    for (inst, cls, rep) in rows {
        if rep.per_distribution.len() != k {
            return Err(invalid("error reports with differing k in one CSV"));
        }
        let mut rec = vec![inst.clone(), cls.clone()];
        rec.extend(rep.per_distribution.iter().map(|e| e.to_string()));
        rec.push(rep.worst_case.to_string());
        rec.push(rep.argmax_index.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn check_size(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DomainMismatch { expected, actual })
    }
}

/// `Pr_{(x,y) ~ D}[f(x) != y]`.
pub fn error_on_distribution<L: Labeling + ?Sized>(f: &L, d: &LabeledDistribution) -> Result<f64> {
    check_size(d.domain_size(), f.domain_size())?;
    Ok(d.mass()
        .iter()
        .zip(d.label_one_prob())
        .enumerate()
        .map(|(x, (&m, &eta))| m * f.label(x).error_prob(eta))
        .sum())
}

/// Error of `f` on `D` counting only points where `keep(x)` holds.
pub fn restricted_error<L, P>(f: &L, d: &LabeledDistribution, keep: P) -> Result<f64>
where
    L: Labeling + ?Sized,
    P: Fn(usize) -> bool,
{
    check_size(d.domain_size(), f.domain_size())?;
    Ok((0..d.domain_size())
        .filter(|&x| keep(x))
        .map(|x| d.mass()[x] * f.label(x).error_prob(d.label_one_prob()[x]))
        .sum())
}

pub fn worst_case_error<L: Labeling + ?Sized>(f: &L, fam: &DistributionFamily) -> Result<ErrorReport> {
    let errs = fam
        .members()
        .iter()
        .map(|d| error_on_distribution(f, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport::from_errors(errs))
}

/// The `|H| × k` matrix of exact errors.
pub fn error_matrix(class: &HypothesisClass, fam: &DistributionFamily) -> Result<Vec<Vec<f64>>> {
    class
        .hypotheses()
        .iter()
        .map(|h| {
            fam.members()
                .iter()
                .map(|d| error_on_distribution(h, d))
                .collect()
        })
        .collect()
}

/// `E_{f ~ F}[er_{D_i}(f)]` for every member `i`.
pub fn randomized_errors(
    f: &RandomizedClassifier,
    class: &HypothesisClass,
    fam: &DistributionFamily,
) -> Result<Vec<f64>> {
    f.check_against(class)?;
    let mut out = vec![0.0; fam.k()];
    for (h, w) in f.iter() {
        for (i, d) in fam.members().iter().enumerate() {
            out[i] += w * error_on_distribution(class.get(h), d)?;
        }
    }
    Ok(out)
}

/// `max_i E_{f ~ F}[er_{D_i}(f)]`.
pub fn randomized_worst_case_error(
    f: &RandomizedClassifier,
    class: &HypothesisClass,
    fam: &DistributionFamily,
) -> Result<f64> {
    Ok(ErrorReport::from_errors(randomized_errors(f, class, fam)?).worst_case)
}

/// `E_{f ~ F}[er_D restricted to keep]` for a single member.
pub fn randomized_restricted_error<P: Fn(usize) -> bool>(
    f: &RandomizedClassifier,
    class: &HypothesisClass,
    d: &LabeledDistribution,
    keep: P,
) -> Result<f64> {
    f.check_against(class)?;
    let mut total = 0.0;
    for (h, w) in f.iter() {
        total += w * restricted_error(class.get(h), d, &keep)?;
    }
    Ok(total)
}

/// Worst-case error of the worst single hypothesis in `F`'s support.
pub fn support_worst_case(
    f: &RandomizedClassifier,
    class: &HypothesisClass,
    fam: &DistributionFamily,
) -> Result<f64> {
    f.check_against(class)?;
    let mut worst = f64::NEG_INFINITY;
    for &h in f.support() {
        worst = worst.max(worst_case_error(class.get(h), fam)?.worst_case);
    }
    Ok(worst)
}

/// `OPT = min_{h in H} max_i er_{D_i}(h)` by enumeration; lowest index wins
/// ties.
pub fn opt_bruteforce(class: &HypothesisClass, fam: &DistributionFamily) -> Result<(f64, usize)> {
    let mut best = (f64::INFINITY, 0);
    for (i, h) in class.hypotheses().iter().enumerate() {
        let e = worst_case_error(h, fam)?.worst_case;
        if e < best.0 {
            best = (e, i);
        }
    }
    Ok(best)
}

/// The pointwise Bayes labeling `sign(2 eta - 1)` with ties to `+1`.
pub fn bayes_labeling(fam: &DistributionFamily) -> Vec<Label> {
    fam.domain()
        .points()
        .map(|x| Label::sign_of(2.0 * fam.shared_label_one_prob(x) - 1.0))
        .collect()
}

fn require_label_consistent(fam: &DistributionFamily) -> Result<()> {
    if fam.is_label_consistent(CONSISTENCY_TOL) {
        Ok(())
    } else {
        Err(Error::NotLabelConsistent)
    }
}

/// `beta_x = Pr[y = 1 | x] - 1/2` under the shared conditional.
pub fn bias(x: usize, fam: &DistributionFamily) -> Result<f64> {
    require_label_consistent(fam)?;
    if x >= fam.domain_size() {
        return Err(invalid(format!("point {x} outside the domain")));
    }
    Ok(fam.shared_label_one_prob(x) - 0.5)
}

/// All biases at once; checks consistency a single time.
pub fn biases(fam: &DistributionFamily) -> Result<Vec<f64>> {
    require_label_consistent(fam)?;
    Ok(fam
        .domain()
        .points()
        .map(|x| fam.shared_label_one_prob(x) - 0.5)
        .collect())
}

/// Which heavy-bias threshold to apply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HeavyVariant {
    /// `eps² / (8 ln(4k/δ))`, for independent per-point rounding.
    PerPoint,
    /// `eps² / (C' ln²(4k/δ))`, for hash rounding.
    Hash { c_prime: f64 },
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Right-hand side of the heavy-bias inequality.
pub fn heavy_threshold(k: usize, eps: f64, delta: f64, variant: HeavyVariant) -> Result<f64> {
    check_eps_delta(eps, delta)?;
    let log_term = (4.0 * k as f64 / delta).ln();
    Ok(match variant {
        HeavyVariant::PerPoint => eps * eps / (8.0 * log_term),
        HeavyVariant::Hash { c_prime } => {
            if !(c_prime > 0.0) {
                return Err(invalid("C' must be positive"));
            }
            eps * eps / (c_prime * log_term * log_term)
        }
    })
}

/// True iff `beta_x² D_i(x)` strictly exceeds the threshold for some `i`.
pub fn is_heavily_biased(
    x: usize,
    fam: &DistributionFamily,
    eps: f64,
    delta: f64,
    variant: HeavyVariant,
) -> Result<bool> {
    let beta = bias(x, fam)?;
    let threshold = heavy_threshold(fam.k(), eps, delta, variant)?;
    Ok(fam
        .members()
        .iter()
        .any(|d| beta * beta * d.mass()[x] > threshold))
}

/// Every heavily biased point, ascending.
pub fn heavy_points(
    fam: &DistributionFamily,
    eps: f64,
    delta: f64,
    variant: HeavyVariant,
) -> Result<Vec<usize>> {
    let betas = biases(fam)?;
    let threshold = heavy_threshold(fam.k(), eps, delta, variant)?;
    Ok(fam
        .domain()
        .points()
        .filter(|&x| {
            let b2 = betas[x] * betas[x];
            fam.members().iter().any(|d| b2 * d.mass()[x] > threshold)
        })
        .collect())
}

const MAX_SHATTER_POINTS: usize = 20;

fn hypothesis_bits(class: &HypothesisClass, points: &[usize]) -> Vec<u32> {
    class
        .hypotheses()
        .iter()
        .map(|h| {
            points
                .iter()
                .enumerate()
                .filter(|&(_, &x)| h.label(x) == Label::Pos)
                .fold(0u32, |acc, (j, _)| acc | 1 << j)
        })
        .collect()
}

/// True iff every `±1` pattern on `points` is realized by some hypothesis.
pub fn shattering_check(class: &HypothesisClass, points: &[usize]) -> Result<bool> {
    if points.len() > MAX_SHATTER_POINTS {
        return Err(Error::TooLarge {
            what: "points to shatter",
            value: points.len(),
            limit: MAX_SHATTER_POINTS,
        });
    }
    if let Some(&x) = points.iter().find(|&&x| x >= class.domain_size()) {
        return Err(invalid(format!("point {x} outside the domain")));
    }
    if points.iter().collect::<HashSet<_>>().len() != points.len() {
        return Err(invalid("points to shatter must be distinct"));
    }
    let patterns: HashSet<u32> = hypothesis_bits(class, points).into_iter().collect();
    Ok(patterns.len() == 1usize << points.len())
}

/// Size of the largest shattered subset of the domain.
pub fn vc_dim_bruteforce(class: &HypothesisClass) -> Result<usize> {
    let n = class.domain_size();
    if n > MAX_SHATTER_POINTS {
        return Err(Error::TooLarge {
            what: "domain size for VC enumeration",
            value: n,
            limit: MAX_SHATTER_POINTS,
        });
    }
    let all: Vec<usize> = (0..n).collect();
    let bits = hypothesis_bits(class, &all);
    let mut best = 0;
    // Subsets of a shattered set are shattered, so sizes can be scanned upward
    // until one fails.
    for size in 1..=n {
        if 1usize << size > class.len() {
            break;
        }
        let found = (0u32..1 << n)
            .filter(|s| s.count_ones() as usize == size)
            .any(|s| bits.iter().map(|b| b & s).collect::<HashSet<_>>().len() == 1 << size);
        if !found {
            break;
        }
        best = size;
    }
    Ok(best)
}
