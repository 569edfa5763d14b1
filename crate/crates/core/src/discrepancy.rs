//! Matrix-to-distributions reduction for families whose conditional labels
//! disagree across members.
//!
//! A 0/1 matrix `A` with row supports of size `m_i` becomes `2n` members
//! `D_i^+`, `D_i^-`, uniform over the support of row `i` with label `+1`
//! resp. `-1`. For a labeling `v` of the points and `σ = sign(v·a_i)` the
//! member `D_i^{-σ}` has error `1/2 + |v·a_i| / (2 m_i)`, so the best
//! worst-case error is `1/2` exactly when some coloring has `Az = 0`.
//!
//! Everything here is exact rational arithmetic.

use std::fmt;

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::Rng as _;
use rayon::prelude::*;

use crate::domain::{DistributionFamily, Label, LabeledDistribution};
use crate::error::{invalid, Error, Result};
use crate::rng::Rng;

/// Exact rational with small numerators and denominators.
pub type Rational = Ratio<i64>;

/// Largest `n` accepted by the exhaustive enumerations.
pub const MAX_ENUMERATION_N: usize = 20;

fn half() -> Rational {
    Rational::new(1, 2)
}

/// Square 0/1 matrix without zero rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMatrix {
    n: usize,
    rows: Vec<Vec<bool>>,
    row_ones: Vec<usize>,
}

impl BinaryMatrix {
    pub fn new(rows: Vec<Vec<bool>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(invalid("matrix must have at least one row"));
        }
        let mut row_ones = Vec::with_capacity(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(invalid(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            let ones = row.iter().filter(|&&b| b).count();
            if ones == 0 {
                return Err(invalid(format!("row {i} is all zeros")));
            }
            row_ones.push(ones);
        }
        Ok(BinaryMatrix { n, rows, row_ones })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| (0..n).map(|j| i == j).collect()).collect())
    }

    pub fn all_ones(n: usize) -> Result<Self> {
        Self::new(vec![vec![true; n]; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.rows[i][j]
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.rows[i]
    }

    /// `m_i`, the number of ones in row `i`.
    pub fn row_ones(&self, i: usize) -> usize {
        self.row_ones[i]
    }

    /// `a_i · v` for a ±1 vector.
    pub fn row_dot(&self, i: usize, v: &[Label]) -> i64 {
        self.rows[i]
            .iter()
            .zip(v)
            .filter(|(&a, _)| a)
            .map(|(_, l)| l.as_i64())
            .sum()
    }

    /// `A v`.
    pub fn product(&self, v: &[Label]) -> Result<Vec<i64>> {
        if v.len() != self.n {
            return Err(Error::DomainMismatch {
                expected: self.n,
                actual: v.len(),
            });
        }
        Ok((0..self.n).map(|i| self.row_dot(i, v)).collect())
    }

    /// Parses `n` followed by `n` lines of `n` characters from `{0,1}`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix file".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad dimension: {e}")))?;
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing row {i}")))?;
            let row = line
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(Error::Parse(format!("row {i}: unexpected character {other:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if lines.next().is_some() {
            return Err(Error::Parse(format!("more than {n} rows")));
        }
        Self::new(rows)
    }
}

impl fmt::Display for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for row in &self.rows {
            let line: String = row.iter().map(|&b| if b { '1' } else { '0' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// A ±1 vector indexed like the matrix columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coloring {
    z: Vec<Label>,
}

impl Coloring {
    pub fn new(z: Vec<Label>) -> Self {
        Coloring { z }
    }

    pub fn from_signs(signs: &[i64]) -> Result<Self> {
        signs
            .iter()
            .map(|&s| Label::try_from(s))
            .collect::<Result<Vec<_>>>()
            .map(Coloring::new)
    }

    pub fn labels(&self) -> &[Label] {
        &self.z
    }

    pub fn signs(&self) -> Vec<i64> {
        self.z.iter().map(|l| l.as_i64()).collect()
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Bit `n-1-j` set iff `z_j = +1`, so numeric order is lexicographic
    /// order with `-1 < +1`.
    fn from_code(code: u32, n: usize) -> Self {
        Coloring::new(
            (0..n)
                .map(|j| {
                    if code >> (n - 1 - j) & 1 == 1 {
                        Label::Pos
                    } else {
                        Label::Neg
                    }
                })
                .collect(),
        )
    }
}

/// A labeled distribution with exact rational masses and label-one
/// probabilities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalDistribution {
    pub mass: Vec<Rational>,
    pub label_one_prob: Vec<Rational>,
}

impl RationalDistribution {
    /// `Σ_x mass[x] · Pr[y ≠ f(x) | x]`.
    pub fn error(&self, labels: &[Label]) -> Rational {
        let one = Rational::from_integer(1);
        self.mass
            .iter()
            .zip(&self.label_one_prob)
            .zip(labels)
            .map(|((&m, &eta), l)| match l {
                Label::Pos => m * (one - eta),
                Label::Neg => m * eta,
            })
            .sum()
    }

    pub fn to_float(&self) -> Result<LabeledDistribution> {
        LabeledDistribution::new(
            self.mass.iter().map(ratio_to_f64).collect(),
            self.label_one_prob.iter().map(ratio_to_f64).collect(),
        )
    }
}

pub fn ratio_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A distribution family with exact rational entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFamily {
    members: Vec<RationalDistribution>,
    domain_size: usize,
}

impl RationalFamily {
    pub fn new(members: Vec<RationalDistribution>) -> Result<Self> {
        let domain_size = members
            .first()
            .ok_or_else(|| invalid("a family needs at least one member"))?
            .mass
            .len();
        let one = Rational::from_integer(1);
        let zero = Rational::from_integer(0);
        for (i, m) in members.iter().enumerate() {
            if m.mass.len() != domain_size || m.label_one_prob.len() != domain_size {
                return Err(Error::DomainMismatch {
                    expected: domain_size,
                    actual: m.mass.len(),
                });
            }
            if m.mass.iter().sum::<Rational>() != one {
                return Err(invalid(format!("member {i}: masses do not sum to 1")));
            }
            if m.mass.iter().any(|&v| v < zero)
                || m.label_one_prob.iter().any(|&v| v < zero || v > one)
            {
                return Err(invalid(format!("member {i}: value out of range")));
            }
        }
        Ok(RationalFamily { members, domain_size })
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn members(&self) -> &[RationalDistribution] {
        &self.members
    }

    /// Per-member errors by direct summation over `(x, y)`.
    pub fn errors(&self, labels: &[Label]) -> Result<Vec<Rational>> {
        if labels.len() != self.domain_size {
            return Err(Error::DomainMismatch {
                expected: self.domain_size,
                actual: labels.len(),
            });
        }
        Ok(self.members.iter().map(|d| d.error(labels)).collect())
    }

    pub fn worst_case_error(&self, labels: &[Label]) -> Result<Rational> {
        Ok(self.errors(labels)?.into_iter().max().expect("k ≥ 1"))
    }

    /// Minimum of the worst-case error over all `2^|X|` labelings, by direct
    /// summation. Ties go to the lexicographically smallest labeling.
    pub fn min_error_over_labelings(&self) -> Result<(Rational, Vec<Label>)> {
        let n = self.domain_size;
        if n > MAX_ENUMERATION_N {
            return Err(Error::TooLarge {
                what: "domain size",
                value: n,
                limit: MAX_ENUMERATION_N,
            });
        }
        let best = (0u32..1 << n)
            .into_par_iter()
            .map(|code| {
                let labels = Coloring::from_code(code, n).z;
                let err = self.worst_case_error(&labels).expect("sizes match");
                (err, code)
            })
            .min()
            .expect("nonempty enumeration");
        Ok((best.0, Coloring::from_code(best.1, n).z))
    }

    pub fn to_family(&self) -> Result<DistributionFamily> {
        DistributionFamily::new(
            self.members
                .iter()
                .map(RationalDistribution::to_float)
                .collect::<Result<_>>()?,
        )
    }
}

/// The `2n`-member family built from a matrix. Member `2i` is `D_i^+` and
/// member `2i + 1` is `D_i^-`; the points are the column indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionFamily {
    matrix: BinaryMatrix,
    family: RationalFamily,
}

impl ReductionFamily {
    pub fn matrix(&self) -> &BinaryMatrix {
        &self.matrix
    }

    pub fn family(&self) -> &RationalFamily {
        &self.family
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn plus_member(i: usize) -> usize {
        2 * i
    }

    pub fn minus_member(i: usize) -> usize {
        2 * i + 1
    }
}

pub fn matrix_to_family(a: &BinaryMatrix) -> ReductionFamily {
    let n = a.n();
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    let mut members = Vec::with_capacity(2 * n);
    for i in 0..n {
        let w = Rational::new(1, a.row_ones(i) as i64);
        let mass: Vec<Rational> = a.row(i).iter().map(|&b| if b { w } else { zero }).collect();
        members.push(RationalDistribution {
            mass: mass.clone(),
            label_one_prob: vec![one; n],
        });
        members.push(RationalDistribution {
            mass,
            label_one_prob: vec![zero; n],
        });
    }
    ReductionFamily {
        matrix: a.clone(),
        family: RationalFamily::new(members).expect("rows are nonempty"),
    }
}

/// Errors of the two members of one row for labeling `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowErrors {
    /// `sign(v·a_i)`, `+1` when the product is zero.
    pub sigma: Label,
    pub dot: i64,
    /// Error on `D_i^{-σ}` by direct summation.
    pub against_sign: Rational,
    /// Error on `D_i^{σ}` by direct summation.
    pub with_sign: Rational,
}

impl RowErrors {
    /// `1/2 + |v·a_i| / (2 m_i)`.
    pub fn predicted_against_sign(&self, m_i: usize) -> Rational {
        half() + Rational::new(self.dot.abs(), 2 * m_i as i64)
    }
}

pub fn row_errors(rf: &ReductionFamily, i: usize, v: &[Label]) -> Result<RowErrors> {
    if v.len() != rf.n() {
        return Err(Error::DomainMismatch {
            expected: rf.n(),
            actual: v.len(),
        });
    }
    let errs = [
        rf.family.members[ReductionFamily::plus_member(i)].error(v),
        rf.family.members[ReductionFamily::minus_member(i)].error(v),
    ];
    let dot = rf.matrix.row_dot(i, v);
    let sigma = Label::sign_of(dot as f64);
    let (with_sign, against_sign) = match sigma {
        Label::Pos => (errs[0], errs[1]),
        Label::Neg => (errs[1], errs[0]),
    };
    Ok(RowErrors {
        sigma,
        dot,
        against_sign,
        with_sign,
    })
}

/// `max_i (1/2 + |z·a_i| / (2 m_i))`, from the row identity.
pub fn identity_error(a: &BinaryMatrix, z: &[Label]) -> Result<Rational> {
    let prod = a.product(z)?;
    Ok(prod
        .iter()
        .enumerate()
        .map(|(i, d)| half() + Rational::new(d.abs(), 2 * a.row_ones(i) as i64))
        .max()
        .expect("n ≥ 1"))
}

/// Worst-case error of coloring `z` over the reduction family. Computed from
/// the row identity and checked against direct summation.
pub fn coloring_error(z: &Coloring, rf: &ReductionFamily) -> Result<Rational> {
    let by_identity = identity_error(&rf.matrix, z.labels())?;
    let direct = rf.family.worst_case_error(z.labels())?;
    if by_identity != direct {
        return Err(invalid(format!(
            "row identity {by_identity} disagrees with direct summation {direct}"
        )));
    }
    Ok(by_identity)
}

/// Minimum discrepancy coloring found by exhaustive search.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscrepancyWitness {
    pub z: Coloring,
    pub inf_norm: i64,
    pub two_norm_sq: i64,
}

impl DiscrepancyWitness {
    pub fn two_norm(&self) -> f64 {
        (self.two_norm_sq as f64).sqrt()
    }
}

fn check_enumerable(n: usize) -> Result<()> {
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge {
            what: "n",
            value: n,
            limit: MAX_ENUMERATION_N,
        });
    }
    Ok(())
}

/// Visits every coloring with `z_0 = -1` (the other half follows by sign
/// symmetry), calling `score(Az, code)` and keeping the minimum.
///
/// The free coordinates are split into a prefix enumerated in parallel and
/// a suffix walked in Gray-code order with incremental updates of `Az`.
fn enumerate_min<K, S>(a: &BinaryMatrix, score: S) -> (K, u32)
where
    K: Ord + Send + Copy,
    S: Fn(&[i64]) -> K + Sync,
{
    let n = a.n();
    let free = n - 1;
    let prefix_bits = free.min(8);
    let suffix_bits = free - prefix_bits;
    // Column j as an integer vector.
    let cols: Vec<Vec<i64>> = (0..n)
        .map(|j| (0..n).map(|i| a.entry(i, j) as i64).collect())
        .collect();

    (0u32..1 << prefix_bits)
        .into_par_iter()
        .map(|prefix| {
            // Coordinates 1..=prefix_bits come from `prefix`; the rest start at -1.
            let mut code: u32 = prefix << suffix_bits;
            let mut z = Coloring::from_code(code, n).z;
            let mut az = a.product(&z).expect("sizes match");
            let mut best = (score(&az), code);
            for step in 1u32..1 << suffix_bits {
                let bit = step.trailing_zeros() as usize;
                let j = n - 1 - bit;
                z[j] = z[j].flip();
                code ^= 1 << bit;
                let s = 2 * z[j].as_i64();
                for (v, c) in az.iter_mut().zip(&cols[j]) {
                    *v += s * c;
                }
                let cand = (score(&az), code);
                if cand < best {
                    best = cand;
                }
            }
            best
        })
        .min()
        .expect("nonempty enumeration")
}

/// Coloring minimizing `‖Az‖_∞`, then `‖Az‖_2`, then lexicographically
/// (with `-1 < +1`). `n ≤ 20`.
pub fn bruteforce_min_discrepancy(a: &BinaryMatrix) -> Result<DiscrepancyWitness> {
    check_enumerable(a.n())?;
    let ((inf_norm, two_norm_sq), code) = enumerate_min(a, |az| {
        (
            az.iter().map(|v| v.abs()).max().unwrap_or(0),
            az.iter().map(|v| v * v).sum::<i64>(),
        )
    });
    Ok(DiscrepancyWitness {
        z: Coloring::from_code(code, a.n()),
        inf_norm,
        two_norm_sq,
    })
}

/// `min_z max_i (1/2 + |z·a_i| / (2 m_i))` with a minimizing coloring
/// (lexicographically smallest among minimizers with `z_0 = -1`).
pub fn min_deterministic_error(rf: &ReductionFamily) -> Result<(Rational, Coloring)> {
    let a = rf.matrix();
    check_enumerable(a.n())?;
    let ones: Vec<i64> = (0..a.n()).map(|i| a.row_ones(i) as i64).collect();
    let (worst, code) = enumerate_min(a, |az| {
        az.iter()
            .zip(&ones)
            .map(|(d, &m)| Rational::new(d.abs(), m))
            .max()
            .expect("n ≥ 1")
    });
    Ok((half() + worst / 2, Coloring::from_code(code, a.n())))
}

/// Verdict of the error-threshold distinguisher.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    ZeroDiscrepancyLikely,
    HighDiscrepancy,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ZeroDiscrepancyLikely => "zero-discrepancy-likely",
            Verdict::HighDiscrepancy => "high-discrepancy",
        })
    }
}

/// Evaluates `f` on the `n` points, computes its exact worst-case error on
/// the reduction family and answers "zero discrepancy" iff it is below
/// `1/2 + eps`.
pub fn distinguisher(a: &BinaryMatrix, labels: &[Label], eps: f64) -> Result<(Verdict, Rational)> {
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    let err = identity_error(a, labels)?;
    let excess = ratio_to_f64(&(err - half()));
    let verdict = if excess < eps {
        Verdict::ZeroDiscrepancyLikely
    } else {
        Verdict::HighDiscrepancy
    };
    Ok((verdict, err))
}

/// Adds a dummy point (last index `n`) that every member returns with label
/// `+1` and probability `1 - 2 opt_prime`; the original masses are scaled by
/// `2 opt_prime`. `opt_prime ∈ (0, 1/2]`.
pub fn dummy_point_variant(rf: &ReductionFamily, opt_prime: Rational) -> Result<RationalFamily> {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    if opt_prime <= zero || opt_prime > half() {
        return Err(invalid(format!("opt_prime must lie in (0, 1/2], got {opt_prime}")));
    }
    let scale = opt_prime * 2;
    let members = rf
        .family
        .members()
        .iter()
        .map(|d| {
            let mut mass: Vec<Rational> = d.mass.iter().map(|&m| m * scale).collect();
            mass.push(one - scale);
            let mut eta = d.label_one_prob.clone();
            eta.push(one);
            RationalDistribution {
                mass,
                label_one_prob: eta,
            }
        })
        .collect();
    RationalFamily::new(members)
}

/// Random matrix with a planted coloring `z` such that `Az = 0`.
///
/// Each row picks `c` columns where `z = +1` and `c` where `z = -1`, with
/// `c` near `density · n / 2`.
pub fn planted_zero_matrix(n: usize, density: f64, rng: &mut Rng) -> Result<(BinaryMatrix, Coloring)> {
    if n < 2 || n % 2 == 1 {
        return Err(invalid(format!("n must be even and at least 2, got {n}")));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(invalid("density must lie in (0, 1]"));
    }
    let z = loop {
        let z: Vec<Label> = (0..n)
            .map(|_| if rng.random::<bool>() { Label::Pos } else { Label::Neg })
            .collect();
        if z.contains(&Label::Pos) && z.contains(&Label::Neg) {
            break z;
        }
    };
    let pos: Vec<usize> = (0..n).filter(|&j| z[j] == Label::Pos).collect();
    let neg: Vec<usize> = (0..n).filter(|&j| z[j] == Label::Neg).collect();
    let cap = pos.len().min(neg.len());
    let target = ((density * n as f64 / 2.0).round() as usize).clamp(1, cap);
    let lo = target.saturating_sub(1).max(1);
    let hi = (target + 1).min(cap);
    let rows = (0..n)
        .map(|_| {
            let c = rng.random_range(lo..=hi);
            let mut row = vec![false; n];
            for idx in sample(rng, pos.len(), c) {
                row[pos[idx]] = true;
            }
            for idx in sample(rng, neg.len(), c) {
                row[neg[idx]] = true;
            }
            row
        })
        .collect();
    Ok((BinaryMatrix::new(rows)?, Coloring::new(z)))
}

/// Random matrix whose rows have between `min_weight` and `max_weight` ones.
pub fn sparse_matrix(n: usize, min_weight: usize, max_weight: usize, rng: &mut Rng) -> Result<BinaryMatrix> {
    if min_weight == 0 || min_weight > max_weight || max_weight > n {
        return Err(invalid(format!(
            "row weights must satisfy 1 ≤ {min_weight} ≤ {max_weight} ≤ {n}"
        )));
    }
    let rows = (0..n)
        .map(|_| {
            let w = rng.random_range(min_weight..=max_weight);
            let mut row = vec![false; n];
            for j in sample(rng, n, w) {
                row[j] = true;
            }
            row
        })
        .collect();
    BinaryMatrix::new(rows)
}

/// Draws sparse matrices until brute force certifies `min_z ‖Az‖_∞ ≥
/// min_inf_norm`.
pub fn certified_high_discrepancy_matrix(
    n: usize,
    min_weight: usize,
    max_weight: usize,
    min_inf_norm: i64,
    max_attempts: usize,
    rng: &mut Rng,
) -> Result<(BinaryMatrix, DiscrepancyWitness)> {
    for _ in 0..max_attempts {
        let a = sparse_matrix(n, min_weight, max_weight, rng)?;
        let w = bruteforce_min_discrepancy(&a)?;
        if w.inf_norm >= min_inf_norm {
            return Ok((a, w));
        }
    }
    Err(invalid(format!(
        "no matrix with discrepancy ≥ {min_inf_norm} found in {max_attempts} attempts"
    )))
}
