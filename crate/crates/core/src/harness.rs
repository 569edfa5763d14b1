//! Trials and Monte-Carlo campaigns over the derandomization pipeline, plus
//! the hash-exactness and tail-bound suites.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::derand::{self, derandomize, DerandConfig, DerandOutcome, ErrorSplit, HedgeLearner, RandomizedLearner};
use crate::error::{invalid, Error, Result};
use crate::gen::{self, GenSpec, Instance};
use crate::hash::{self, MarginalLawRow, TailCheckConfig, TailReport};
use crate::learner::SampleOracle;
use crate::metrics;
use crate::rng;

/// Quantities measured in one derandomization trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub trial: u64,
    pub seed: u64,
    pub opt: f64,
    /// `max_i E_{f~F} er_i(f)` of the learner's mixture.
    pub randomized_error: f64,
    /// `er_P(f̂)` of the derandomized classifier.
    pub derand_error: f64,
    pub table_size: usize,
    /// Every heavily biased point is in the table with its Bayes label.
    pub heavy_coverage: bool,
    /// `max_i |off-table error of f̂ − off-table error of F|`.
    pub off_table_deviation: f64,
    /// Not written to CSV, so report files stay reproducible.
    #[serde(skip)]
    pub wall_time_ms: f64,
}

/// Runs learner, derandomizer and exact evaluation on one instance.
/// `cfg.seed` is replaced by `seed`.
pub fn run_trial<L: RandomizedLearner + ?Sized>(
    inst: &Instance,
    learner: &L,
    cfg: &DerandConfig,
    trial: u64,
    seed: u64,
) -> Result<TrialReport> {
    run_trial_with_outcome(inst, learner, cfg, trial, seed).map(|(r, _)| r)
}

/// [`run_trial`], also returning the classifier, mixture and table.
pub fn run_trial_with_outcome<L: RandomizedLearner + ?Sized>(
    inst: &Instance,
    learner: &L,
    cfg: &DerandConfig,
    trial: u64,
    seed: u64,
) -> Result<(TrialReport, DerandOutcome)> {
    let wrap = |e: Error| Error::Trial {
        trial,
        source: Box::new(e),
    };
    let start = Instant::now();
    let cfg = DerandConfig { seed, ..*cfg };
    let fam = &inst.family;
    let class = &inst.class;
    let oracle = SampleOracle::exact(fam);
    let out = derandomize(&oracle, class, learner, &cfg).map_err(wrap)?;
    let labels = out
        .classifier
        .to_labels(fam.domain_size(), class)
        .map_err(wrap)?;
    let (opt, _) = metrics::opt_bruteforce(class, fam).map_err(wrap)?;
    let randomized_error = metrics::randomized_worst_case_error(&out.mixture, class, fam).map_err(wrap)?;
    let derand_error = metrics::worst_case_error(&labels, fam).map_err(wrap)?.worst_case;
    let split = ErrorSplit::compute(&labels, &out.table, &out.mixture, class, fam).map_err(wrap)?;
    let heavy_coverage = derand::heavy_coverage(&out.table, fam, &cfg).map_err(wrap)?;
    let report = TrialReport {
        trial,
        seed,
        opt,
        randomized_error,
        derand_error,
        table_size: out.table.len(),
        heavy_coverage,
        off_table_deviation: split.max_off_table_deviation(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((report, out))
}

/// Pass/fail conditions evaluated per trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    /// `er_P(f̂) ≤ OPT + ε`.
    OptPlusEps,
    /// `er_P(f̂) ≤ max_i E_F er_i + ε/2`.
    RandomizedPlusHalfEps,
    HeavyCoverage,
    /// Off-table deviation at most `ε/2`, judged only on trials where every
    /// heavily biased point made it into the table.
    OffTableDeviation,
}

impl Predicate {
    pub fn name(self) -> &'static str {
        match self {
            Predicate::OptPlusEps => "opt_plus_eps",
            Predicate::RandomizedPlusHalfEps => "randomized_plus_half_eps",
            Predicate::HeavyCoverage => "heavy_coverage",
            Predicate::OffTableDeviation => "off_table_deviation",
        }
    }

    /// Whether the trial counts toward this predicate at all.
    pub fn applies(self, r: &TrialReport) -> bool {
        match self {
            Predicate::OffTableDeviation => r.heavy_coverage,
            _ => true,
        }
    }

    pub fn holds(self, r: &TrialReport, eps: f64) -> bool {
        match self {
            Predicate::OptPlusEps => r.derand_error <= r.opt + eps,
            Predicate::RandomizedPlusHalfEps => r.derand_error <= r.randomized_error + eps / 2.0,
            Predicate::HeavyCoverage => r.heavy_coverage,
            Predicate::OffTableDeviation => r.off_table_deviation <= eps / 2.0,
        }
    }
}

impl std::str::FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Predicate::OptPlusEps,
            Predicate::RandomizedPlusHalfEps,
            Predicate::HeavyCoverage,
            Predicate::OffTableDeviation,
        ]
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| invalid(format!("unknown predicate {s:?}")))
    }
}

/// A predicate and the success fraction it must reach.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PredicateSpec {
    pub predicate: Predicate,
    pub required_fraction: f64,
}

/// Where trial instances come from.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSource {
    /// The same instance in every trial.
    Fixed(Instance),
    /// A fresh instance per trial; its seed is combined with the
    /// trial index.
    Generated(GenSpec),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignSpec {
    pub source: InstanceSource,
    pub learner: HedgeLearner,
    /// `seed` is the master seed; trial `t` uses `derive_seed(seed, t)`.
    pub derand: DerandConfig,
    pub trials: u64,
    pub predicates: Vec<PredicateSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredicateSummary {
    pub predicate: Predicate,
    pub successes: u64,
    pub evaluated: u64,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub required_fraction: f64,
    pub met: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialFailure {
    pub trial: u64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub eps: f64,
    pub delta: f64,
    pub c_const: f64,
    pub c_prime: f64,
    pub mode: String,
    pub rounding: String,
    pub seed: u64,
    pub gen_spec: Option<GenSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub trials: u64,
    pub completed: u64,
    pub partial: bool,
    pub failures: Vec<TrialFailure>,
    pub predicates: Vec<PredicateSummary>,
    pub config: ConfigEcho,
}

impl CampaignSummary {
    /// No trial errored and every predicate reached its required fraction.
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.predicates.iter().all(|p| p.met)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignResult {
    /// Sorted by trial id.
    pub reports: Vec<TrialReport>,
    pub summary: CampaignSummary,
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = n as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + Z * Z / n;
    let center = (p + Z * Z / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + Z * Z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

fn run_one(spec: &CampaignSpec, trial: u64) -> Result<TrialReport> {
    let seed = rng::derive_seed(spec.derand.seed, trial);
    match &spec.source {
        InstanceSource::Fixed(inst) => run_trial(inst, &spec.learner, &spec.derand, trial, seed),
        InstanceSource::Generated(g) => {
            let g = GenSpec {
                seed: rng::derive_seed(g.seed, trial),
                ..g.clone()
            };
            let inst = gen::generate(&g).map_err(|e| Error::Trial {
                trial,
                source: Box::new(e),
            })?;
            run_trial(&inst, &spec.learner, &spec.derand, trial, seed)
        }
    }
}

/// Runs all trials on a pool of `parallelism` threads. Results do not depend
/// on the thread count; failing trials are recorded and skipped.
pub fn run_campaign(spec: &CampaignSpec, parallelism: usize) -> Result<CampaignResult> {
    if spec.trials == 0 {
        return Err(invalid("a campaign needs at least one trial"));
    }
    spec.derand.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    let outcomes: Vec<(u64, Result<TrialReport>)> = pool.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .map(|t| (t, run_one(spec, t)))
            .collect()
    });

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (trial, outcome) in outcomes {
        match outcome {
            Ok(r) => reports.push(r),
            Err(e) => failures.push(TrialFailure {
                trial,
                message: e.to_string(),
            }),
        }
    }
    reports.sort_by_key(|r| r.trial);

    let eps = spec.derand.eps;
    let predicates = spec
        .predicates
        .iter()
        .map(|ps| {
            let judged: Vec<&TrialReport> = reports.iter().filter(|r| ps.predicate.applies(r)).collect();
            let evaluated = judged.len() as u64;
            let successes = judged.iter().filter(|r| ps.predicate.holds(r, eps)).count() as u64;
            let fraction = if evaluated == 0 {
                0.0
            } else {
                successes as f64 / evaluated as f64
            };
            let (ci_low, ci_high) = wilson_interval(successes, evaluated);
            PredicateSummary {
                predicate: ps.predicate,
                successes,
                evaluated,
                fraction,
                ci_low,
                ci_high,
                required_fraction: ps.required_fraction,
                met: evaluated > 0 && fraction >= ps.required_fraction,
            }
        })
        .collect();

    let d = &spec.derand;
    let summary = CampaignSummary {
        trials: spec.trials,
        completed: reports.len() as u64,
        partial: !failures.is_empty(),
        failures,
        predicates,
        config: ConfigEcho {
            eps: d.eps,
            delta: d.delta,
            c_const: d.c_const,
            c_prime: d.c_prime,
            mode: format!("{:?}", d.mode),
            rounding: format!("{:?}", d.rounding),
            seed: d.seed,
            gen_spec: match &spec.source {
                InstanceSource::Generated(g) => Some(g.clone()),
                InstanceSource::Fixed(inst) => inst.spec.clone(),
            },
        },
    };
    Ok(CampaignResult { reports, summary })
}

/// One CSV row per report, with a header.
pub fn write_reports_csv<W: Write>(out: W, reports: &[TrialReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r)?;
    }
    if reports.is_empty() {
        w.write_record([
            "trial",
            "seed",
            "opt",
            "randomized_error",
            "derand_error",
            "table_size",
            "heavy_coverage",
            "off_table_deviation",
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Results of the hash exactness and tail-bound suites.
#[derive(Clone, Debug, PartialEq)]
pub struct HashcheckReport {
    pub pairwise_violations: usize,
    pub triple_violations: usize,
    pub marginal_rows: Vec<MarginalLawRow>,
    pub tail: TailReport,
    pub independent_tail: TailReport,
}

impl HashcheckReport {
    pub fn passed(&self) -> bool {
        self.pairwise_violations == 0
            && self.triple_violations == 0
            && self.marginal_rows.iter().all(|r| r.within_3_sigma)
            && self.tail.passed()
            && self.independent_tail.passed()
    }
}

/// Exhaustive independence at `(p, r) = (5, 2)` and `(7, 3)`, the marginal
/// law at `p = 7` for marginals `{0, 1/3, 1/2, 2/3, 1}`, and the tail check
/// for `n` hash-derived bits at degree `r` (plus its independent-coins
/// control).
pub fn run_hashcheck(n: usize, r: usize, draws: usize, seed: u64) -> Result<HashcheckReport> {
    let pairwise_violations = hash::independence_violations(5, 2, &hash::all_key_sets(5, 2))?;
    let triple_violations = hash::independence_violations(7, 3, &hash::all_key_sets(7, 3))?;
    let marginal_rows = [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0]
        .iter()
        .enumerate()
        .map(|(i, &m)| hash::marginal_law_check(7, 2, m, 3, draws, rng::derive_seed(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let cfg = TailCheckConfig::standard(n, r, draws, rng::derive_seed(seed, 100))?;
    let tail = hash::empirical_tail_bound_check(&cfg)?;
    let independent_tail = hash::empirical_tail_bound_check(&TailCheckConfig {
        independent: true,
        seed: rng::derive_seed(seed, 101),
        ..cfg
    })?;
    Ok(HashcheckReport {
        pairwise_violations,
        triple_violations,
        marginal_rows,
        tail,
        independent_tail,
    })
}
