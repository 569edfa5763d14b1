//! `r`-wise independent polynomial hashing and compact rounding.
//!
//! Instead of storing one random label per domain point, a compact
//! classifier stores a random polynomial `q(x) = Σ α_i x^i mod p` and the
//! mixture `F`. Outside the bias table, `x` is labeled `+1` iff
//! `q(x) + 1 ≤ Pr_{f~F}[f(x) = 1] · p`, so `Pr_q[+1] = ⌊marginal · p⌋ / p`.

use std::collections::{BTreeMap, HashMap};

use rand::Rng as _;
use rayon::prelude::*;

use crate::domain::{HypothesisClass, Label, RandomizedClassifier};
use crate::error::{invalid, Error, Result};
use crate::rng::{self, Rng};

/// Largest prime modulus accepted.
pub const MAX_PRIME: u64 = 1 << 62;

/// Relative slack used when snapping `marginal · p` to an integer; see
/// [`positive_count`].
pub const SNAP_TOL: f64 = 1e-9;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases are exact for
/// all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime `≥ n`.
pub fn next_prime(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(invalid("next_prime needs n >= 1"));
    }
    if n > MAX_PRIME {
        return Err(Error::Overflow(format!("{n} exceeds 2^62")));
    }
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
        if c > MAX_PRIME {
            return Err(Error::Overflow(format!("no prime in [{n}, 2^62]")));
        }
    }
    Ok(c)
}

/// A polynomial hash `q(x) = Σ_{i<r} α_i x^i mod p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyHash {
    prime: u64,
    coefficients: Vec<u64>,
}

impl PolyHash {
    /// A hash with even degree parameter `r ≥ 2`, as the tail bound requires.
    pub fn new(prime: u64, coefficients: Vec<u64>) -> Result<Self> {
        let r = coefficients.len();
        if r < 2 || !r.is_multiple_of(2) {
            return Err(invalid(format!("r must be even and at least 2, got {r}")));
        }
        Self::new_unrestricted(prime, coefficients)
    }

    /// Any `r ≥ 1`. Odd and constant polynomials carry no tail guarantee;
    /// they exist for independence checks and unit tests.
    pub fn new_unrestricted(prime: u64, coefficients: Vec<u64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(invalid("a hash needs at least one coefficient"));
        }
        if prime > MAX_PRIME || !is_prime(prime) {
            return Err(invalid(format!("{prime} is not a prime below 2^62")));
        }
        if let Some(a) = coefficients.iter().find(|&&a| a >= prime) {
            return Err(invalid(format!("coefficient {a} not in [0, {prime})")));
        }
        Ok(PolyHash { prime, coefficients })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn degree_r(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    /// Horner evaluation with 128-bit intermediates.
    pub fn eval(&self, x: u64) -> Result<u64> {
        if x >= self.prime {
            return Err(invalid(format!("key {x} not below p = {}", self.prime)));
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    fn eval_unchecked(&self, x: u64) -> u64 {
        let p = self.prime as u128;
        let x = x as u128;
        self.coefficients
            .iter()
            .rev()
            .fold(0u128, |acc, &a| (acc * x + a as u128) % p) as u64
    }

    /// The text stanza `p`, `r`, coefficients, one per line.
    pub fn to_stanza(&self) -> String {
        let coeffs: Vec<String> = self.coefficients.iter().map(u64::to_string).collect();
        format!(
            "prime {}\ndegree_r {}\ncoefficients {}\n",
            self.prime,
            self.degree_r(),
            coeffs.join(" ")
        )
    }

    pub fn from_stanza(text: &str) -> Result<Self> {
        let mut fields: HashMap<&str, &str> = HashMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            fields.insert(key, rest.trim());
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| Error::Parse(format!("missing `{k}`")));
        let prime: u64 = get("prime")?
            .parse()
            .map_err(|e| Error::Parse(format!("prime: {e}")))?;
        let r: usize = get("degree_r")?
            .parse()
            .map_err(|e| Error::Parse(format!("degree_r: {e}")))?;
        let coefficients = get("coefficients")?
            .split_whitespace()
            .map(|c| c.parse::<u64>().map_err(|e| Error::Parse(format!("coefficient: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if coefficients.len() != r {
            return Err(Error::Parse(format!("degree_r {r} but {} coefficients", coefficients.len())));
        }
        Self::new_unrestricted(prime, coefficients)
    }
}

/// `r` coefficients i.i.d. uniform on `[0, p)`.
pub fn sample_hash(prime: u64, r: usize, rng: &mut Rng) -> Result<PolyHash> {
    if r < 2 || !r.is_multiple_of(2) {
        return Err(invalid(format!("r must be even and at least 2, got {r}")));
    }
    if prime > MAX_PRIME || !is_prime(prime) {
        return Err(invalid(format!("{prime} is not a prime below 2^62")));
    }
    let coefficients = (0..r).map(|_| rng.random_range(0..prime)).collect();
    PolyHash::new(prime, coefficients)
}

/// `eval_hash(q, x)`; errors when `x ≥ p`.
pub fn eval_hash(q: &PolyHash, x: u64) -> Result<u64> {
    q.eval(x)
}

/// `Pr_{f ~ F}[f(x) = 1]`.
pub fn marginal_one_probability(f: &RandomizedClassifier, class: &HypothesisClass, x: usize) -> f64 {
    f.marginal_one_probability(class, x)
}

/// `⌊marginal · p⌋`, the number of hash values that round to `+1`.
///
/// Marginals are sums of floating-point weights, so a marginal that is
/// mathematically `j/p` may arrive a few ulps low. Products within
/// `SNAP_TOL · max(1, marginal · p)` of an integer are rounded to that
/// integer; otherwise the floor is taken. The snap window is far wider than
/// weight-summation drift and far narrower than `1/p` for any `p < 10^8`.
pub fn positive_count(marginal: f64, prime: u64) -> u64 {
    let y = marginal.clamp(0.0, 1.0) * prime as f64;
    let nearest = y.round();
    let count = if (y - nearest).abs() <= SNAP_TOL * y.max(1.0) {
        nearest
    } else {
        y.floor()
    };
    (count.max(0.0) as u64).min(prime)
}

/// The rounding rule: `+1` iff `q(x) + 1 ≤ marginal · p`.
pub fn hash_round(q: &PolyHash, x: u64, marginal: f64) -> Result<Label> {
    let v = q.eval(x)?;
    Ok(if v < positive_count(marginal, q.prime) {
        Label::Pos
    } else {
        Label::Neg
    })
}

/// Hash parameters for compact rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashParams {
    pub r: usize,
    pub prime: u64,
}

/// `r` = smallest even integer `≥ 2 ln(4k/δ)` (at least 2) and `p` = the
/// next prime above the largest of `|X| + 1`, `⌈ε⁻³ ln(4k/δ)⌉` and
/// `⌈4α²/ε⌉ + 1` with `α = 2ε / (ln(4k/δ) √C')`.
pub fn choose_hash_params(
    k: usize,
    eps: f64,
    delta: f64,
    domain_size: usize,
    c_prime: f64,
) -> Result<HashParams> {
    if k == 0 || !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) || !(c_prime > 0.0) {
        return Err(invalid("choose_hash_params: need k ≥ 1, eps, delta in (0, 1), C' > 0"));
    }
    let log_term = (4.0 * k as f64 / delta).ln();
    let raw_r = (2.0 * log_term).ceil().max(2.0) as usize;
    let r = raw_r + raw_r % 2;

    let alpha = 2.0 * eps / (log_term * c_prime.sqrt());
    let by_eps = (log_term / (eps * eps * eps)).ceil();
    let by_alpha = (4.0 * alpha * alpha / eps).ceil() + 1.0;
    let lower = by_eps.max(by_alpha).max(domain_size as f64 + 1.0);
    if lower > MAX_PRIME as f64 {
        return Err(Error::Overflow(format!("hash range {lower} exceeds 2^62")));
    }
    Ok(HashParams {
        r,
        prime: next_prime(lower as u64)?,
    })
}

/// A deterministic classifier stored as bias-table overrides, a hash and the
/// mixture `F`. Evaluation needs the hypothesis class `F` refers into.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactClassifier {
    hash: PolyHash,
    t_table: BTreeMap<usize, Label>,
    mixture: RandomizedClassifier,
}

impl CompactClassifier {
    pub fn new(
        hash: PolyHash,
        t_table: BTreeMap<usize, Label>,
        mixture: RandomizedClassifier,
        domain_size: usize,
    ) -> Result<Self> {
        if hash.prime() <= domain_size as u64 {
            return Err(invalid(format!(
                "hash range p = {} must exceed the domain size {domain_size}",
                hash.prime()
            )));
        }
        if let Some(&x) = t_table.keys().find(|&&x| x >= domain_size) {
            return Err(invalid(format!("bias table point {x} outside the domain")));
        }
        Ok(CompactClassifier {
            hash,
            t_table,
            mixture,
        })
    }

    pub fn hash(&self) -> &PolyHash {
        &self.hash
    }

    pub fn t_table(&self) -> &BTreeMap<usize, Label> {
        &self.t_table
    }

    pub fn mixture(&self) -> &RandomizedClassifier {
        &self.mixture
    }

    pub fn range_size(&self) -> u64 {
        self.hash.prime()
    }

    /// Table hit, else the hash rounding rule. `x` must be below `p`.
    pub fn evaluate(&self, x: usize, class: &HypothesisClass) -> Label {
        if let Some(&label) = self.t_table.get(&x) {
            return label;
        }
        let count = positive_count(self.mixture.marginal_one_probability(class, x), self.hash.prime);
        if self.hash.eval_unchecked(x as u64) < count {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn evaluate_all(&self, domain_size: usize, class: &HypothesisClass) -> Result<Vec<Label>> {
        if self.hash.prime() <= domain_size as u64 {
            return Err(invalid("hash range does not cover the domain"));
        }
        self.mixture.check_against(class)?;
        if class.domain_size() != domain_size {
            return Err(Error::DomainMismatch {
                expected: domain_size,
                actual: class.domain_size(),
            });
        }
        Ok((0..domain_size).map(|x| self.evaluate(x, class)).collect())
    }
}

/// Counts `r`-tuples of keys for which `(α_0..α_{r-1}) ↦ (q(k_1)..q(k_r))`
/// fails to be a bijection onto `[0, p)^r`, by enumerating all `p^r`
/// coefficient vectors. Zero means exact `r`-wise independence on those keys.
pub fn independence_violations(prime: u64, r: usize, key_sets: &[Vec<u64>]) -> Result<usize> {
    let total = (prime as u128).checked_pow(r as u32).filter(|&t| t <= 1 << 24);
    let total = total.ok_or(Error::TooLarge {
        what: "coefficient space p^r",
        value: usize::MAX,
        limit: 1 << 24,
    })? as u64;
    let mut violations = 0;
    for keys in key_sets {
        if keys.len() != r {
            return Err(invalid(format!("key set {keys:?} does not have {r} keys")));
        }
        let mut seen = vec![false; total as usize];
        let mut ok = true;
        for code in 0..total {
            let mut c = code;
            let coeffs: Vec<u64> = (0..r)
                .map(|_| {
                    let a = c % prime;
                    c /= prime;
                    a
                })
                .collect();
            let q = PolyHash::new_unrestricted(prime, coeffs)?;
            let mut slot = 0u64;
            for &k in keys.iter().rev() {
                slot = slot * prime + q.eval(k)?;
            }
            if std::mem::replace(&mut seen[slot as usize], true) {
                ok = false;
                break;
            }
        }
        if !ok {
            violations += 1;
        }
    }
    Ok(violations)
}

/// Every set of `r` distinct keys from `[0, p)`.
pub fn all_key_sets(prime: u64, r: usize) -> Vec<Vec<u64>> {
    fn rec(start: u64, p: u64, r: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for k in start..p {
            cur.push(k);
            rec(k + 1, p, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, prime, r, &mut Vec::new(), &mut out);
    out
}

/// Empirical `Pr[+1]` under fresh hashes versus `⌊m p⌋ / p`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalLawRow {
    pub marginal: f64,
    pub expected: f64,
    pub observed: f64,
    pub sigma: f64,
    pub within_3_sigma: bool,
}

pub fn marginal_law_check(
    prime: u64,
    r: usize,
    marginal: f64,
    key: u64,
    draws: usize,
    seed: u64,
) -> Result<MarginalLawRow> {
    let expected = positive_count(marginal, prime) as f64 / prime as f64;
    let positives = monte_carlo(draws, seed, |rng| -> Result<u64> {
        let q = sample_hash(prime, r, rng)?;
        Ok((hash_round(&q, key, marginal)? == Label::Pos) as u64)
    })?;
    let observed = positives as f64 / draws as f64;
    let sigma = (expected * (1.0 - expected) / draws as f64).sqrt();
    Ok(MarginalLawRow {
        marginal,
        expected,
        observed,
        sigma,
        within_3_sigma: (observed - expected).abs() <= 3.0 * sigma,
    })
}

const CHUNK: usize = 10_000;

/// Sums `trial` over `draws` runs, in parallel chunks with one random stream
/// per chunk; the result does not depend on the thread count.
fn monte_carlo<F>(draws: usize, seed: u64, trial: F) -> Result<u64>
where
    F: Fn(&mut Rng) -> Result<u64> + Sync,
{
    let chunks = draws.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, c as u64);
            let len = CHUNK.min(draws - c * CHUNK);
            let mut acc = 0;
            for _ in 0..len {
                acc += trial(&mut rng)?;
            }
            Ok(acc)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Setup for the limited-independence tail experiment: `n` indicators
/// `Z_j = 1{q(j) < threshold}` for keys `j = 0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailCheckConfig {
    pub n: usize,
    pub r: usize,
    pub prime: u64,
    pub threshold: u64,
    pub draws: usize,
    /// Deviations `T` at which the tail is measured.
    pub deviations: Vec<f64>,
    /// Replace the hash by fresh independent coins per point; the bound is
    /// then the two-sided Hoeffding bound.
    pub independent: bool,
    pub seed: u64,
}

impl TailCheckConfig {
    /// `n` near-fair bits from a degree-`r` hash, measured at
    /// `T ∈ {0.5, 1, 2} · sqrt(n)`.
    pub fn standard(n: usize, r: usize, draws: usize, seed: u64) -> Result<Self> {
        let prime = next_prime(10_007.max(n as u64 + 1))?;
        let root = (n as f64).sqrt();
        Ok(TailCheckConfig {
            n,
            r,
            prime,
            threshold: prime / 2,
            draws,
            deviations: vec![0.5 * root, root, 2.0 * root],
            independent: false,
            seed,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailRow {
    pub deviation: f64,
    pub observed: f64,
    pub bound: f64,
    pub sampling_3_sigma: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailReport {
    pub mean: f64,
    pub variance: f64,
    pub q: f64,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| !r.violated)
    }
}

/// `(r Q / (e^{2/3} T²))^{r/2}` with `Q ≥ max(r, σ²)`.
pub fn rwise_tail_bound(r: usize, q: f64, deviation: f64) -> f64 {
    let base = r as f64 * q / ((2.0f64 / 3.0).exp() * deviation * deviation);
    base.powf(r as f64 / 2.0)
}

/// Monte-Carlo tail frequencies `Pr[|Z - μ| ≥ T]` compared one-sided
/// against the limited-independence bound (or Hoeffding when
/// `independent`). A row is violated when the observed frequency exceeds
/// the bound by more than three binomial standard errors.
pub fn empirical_tail_bound_check(cfg: &TailCheckConfig) -> Result<TailReport> {
    if cfg.prime <= cfg.n as u64 || !is_prime(cfg.prime) {
        return Err(invalid("tail check needs a prime p > n"));
    }
    if cfg.r < 2 || !cfg.r.is_multiple_of(2) {
        return Err(invalid("tail check needs even r ≥ 2"));
    }
    if cfg.draws == 0 || cfg.threshold > cfg.prime {
        return Err(invalid("tail check needs draws > 0 and threshold ≤ p"));
    }
    let p1 = cfg.threshold as f64 / cfg.prime as f64;
    let n = cfg.n as f64;
    let mean = n * p1;
    let variance = n * p1 * (1.0 - p1);
    let q = (cfg.r as f64).max(variance);

    let sums: Vec<u32> = (0..cfg.draws.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| -> Result<Vec<u32>> {
            let mut rng = rng::stream(cfg.seed, c as u64);
            let len = CHUNK.min(cfg.draws - c * CHUNK);
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                let z = if cfg.independent {
                    (0..cfg.n)
                        .filter(|_| rng.random_range(0..cfg.prime) < cfg.threshold)
                        .count() as u32
                } else {
                    let h = sample_hash(cfg.prime, cfg.r, &mut rng)?;
                    (0..cfg.n as u64)
                        .filter(|&j| h.eval_unchecked(j) < cfg.threshold)
                        .count() as u32
                };
                out.push(z);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .concat();

    let rows = cfg
        .deviations
        .iter()
        .map(|&t| {
            let hits = sums.iter().filter(|&&z| (z as f64 - mean).abs() >= t).count();
            let observed = hits as f64 / cfg.draws as f64;
            let bound = if cfg.independent {
                2.0 * (-2.0 * t * t / n).exp()
            } else {
                rwise_tail_bound(cfg.r, q, t)
            };
            let b = bound.min(1.0);
            let sampling_3_sigma = 3.0 * (b * (1.0 - b) / cfg.draws as f64).sqrt();
            TailRow {
                deviation: t,
                observed,
                bound,
                sampling_3_sigma,
                violated: observed > bound + sampling_3_sigma,
            }
        })
        .collect();

    Ok(TailReport {
        mean,
        variance,
        q,
        rows,
    })
}
