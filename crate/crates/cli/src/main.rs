//! `mdl`: generate instances, learn, derandomize, evaluate, run campaigns and
//! the discrepancy and hashing tools from the command line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mdl_core::derand::{DerandConfig, DerandMode, HedgeLearner, RoundingKind, DEFAULT_C, DEFAULT_C_PRIME};
use mdl_core::discrepancy::{self, Rational};
use mdl_core::gen::{self, BiasProfile, GenKind, GenSpec, Instance, ProbeParams};
use mdl_core::harness::{self, CampaignSpec, InstanceSource, Predicate, PredicateSpec};
use mdl_core::learner::{self, OracleMode, SampleOracle};
use mdl_core::{io as mio, metrics, rng, HypothesisClass};

/// Relative output paths are resolved against this directory when set.
const OUTPUT_DIR_ENV: &str = "MDL_OUTPUT_DIR";

/// Exit status when a run completed but a check or predicate failed.
const EXIT_CHECK_FAILED: u8 = 2;

#[derive(Parser)]
#[command(name = "mdl", version, about = "Multi-distribution learning and derandomization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance file.
    Gen(GenArgs),
    /// Run the Hedge learner and write the mixture F.
    Learn(LearnArgs),
    /// Learn, build the bias table and round to a deterministic classifier.
    Derand(DerandArgs),
    /// Exact per-distribution errors of a classifier or mixture.
    Eval(EvalArgs),
    /// Discrepancy tools for the matrix reduction.
    #[command(subcommand)]
    Disc(DiscCommand),
    /// Monte-Carlo campaign of derandomization trials.
    Trial(TrialArgs),
    /// Hash independence, marginal-law and tail-bound suites.
    Hashcheck(HashcheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Random,
    BayesInClass,
    Gap,
    HeavyProbe,
}

impl From<KindArg> for GenKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Random => GenKind::RandomLabelConsistent,
            KindArg::BayesInClass => GenKind::BayesInClass,
            KindArg::Gap => GenKind::GapExample,
            KindArg::HeavyProbe => GenKind::HeavyPointProbe,
        }
    }
}

#[derive(Args)]
struct GenSpecArgs {
    #[arg(long, value_enum, default_value = "random")]
    kind: KindArg,
    /// |X|; ignored by the gap example and the heavy probe.
    #[arg(long, default_value_t = 40)]
    domain_size: usize,
    /// Number of distributions k.
    #[arg(long, default_value_t = 6)]
    k: usize,
    /// |H|.
    #[arg(long, default_value_t = 16)]
    hypotheses: usize,
    /// Fraction of strongly biased points.
    #[arg(long, default_value_t = 0.5)]
    strong_fraction: f64,
    #[arg(long, default_value_t = 0.4)]
    strong_beta_min: f64,
    #[arg(long, default_value_t = 0.5)]
    strong_beta_max: f64,
    /// |β| bound for the remaining points.
    #[arg(long, default_value_t = 0.05)]
    weak_beta_max: f64,
    /// Heavy probe: number of designated heavy points.
    #[arg(long, default_value_t = 3)]
    heavy_count: usize,
    #[arg(long, default_value_t = 0.4)]
    heavy_beta: f64,
    #[arg(long, default_value_t = 0.2)]
    heavy_mass: f64,
    #[arg(long, default_value_t = 40)]
    light_count: usize,
    #[arg(long, default_value_t = 0.05)]
    light_beta_max: f64,
    /// Heavy probe: precision the heavy threshold is evaluated at.
    #[arg(long = "probe-eps", default_value_t = 0.1)]
    probe_eps: f64,
    #[arg(long = "probe-delta", default_value_t = 0.1)]
    probe_delta: f64,
    /// Instance seed.
    #[arg(long = "gen-seed", default_value_t = 0)]
    gen_seed: u64,
}

impl GenSpecArgs {
    fn spec(&self) -> GenSpec {
        let kind = GenKind::from(self.kind);
        let probe = (kind == GenKind::HeavyPointProbe).then_some(ProbeParams {
            eps: self.probe_eps,
            delta: self.probe_delta,
            heavy_count: self.heavy_count,
            heavy_beta: self.heavy_beta,
            heavy_mass: self.heavy_mass,
            light_count: self.light_count,
            light_beta_max: self.light_beta_max,
            c_prime: None,
        });
        let domain_size = match kind {
            GenKind::GapExample => self.k,
            GenKind::HeavyPointProbe => self.heavy_count + self.light_count,
            _ => self.domain_size,
        };
        GenSpec {
            kind,
            domain_size,
            k: self.k,
            hypothesis_count: self.hypotheses,
            bias: BiasProfile {
                strong_fraction: self.strong_fraction,
                strong_beta: (self.strong_beta_min, self.strong_beta_max),
                weak_beta_max: self.weak_beta_max,
            },
            probe,
            seed: self.gen_seed,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    spec: GenSpecArgs,
    /// Instance file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LearnerArgs {
    /// Hedge rounds T; default ⌈8 ln k / ε²⌉ at the learner's precision.
    #[arg(long)]
    rounds: Option<usize>,
    /// Hedge learning rate η; default sqrt(8 ln k / T).
    #[arg(long)]
    eta: Option<f64>,
    /// Draws per member per round in sampling mode.
    #[arg(long, default_value_t = learner::DEFAULT_ERM_SAMPLE_SIZE)]
    erm_samples: usize,
}

impl LearnerArgs {
    fn learner(&self) -> HedgeLearner {
        HedgeLearner {
            rounds: self.rounds,
            learning_rate: self.eta,
            erm_sample_size: Some(self.erm_samples),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Exact,
    Sampling,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 0.15)]
    eps: f64,
    #[arg(long, default_value_t = 0.15)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "exact")]
    oracle: OracleArg,
    #[command(flatten)]
    learner: LearnerArgs,
    /// Mixture file to write.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-round trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Theory,
    Calibrated,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoundingArg {
    Explicit,
    Hash,
}

#[derive(Args)]
struct DerandFlags {
    /// Target precision ε.
    #[arg(long, default_value_t = 0.15)]
    eps: f64,
    /// Failure probability δ.
    #[arg(long, default_value_t = 0.15)]
    delta: f64,
    /// The constant C in γ = Ck/(εδ) and m = ⌈C ln²γ / ε²⌉.
    #[arg(long, default_value_t = DEFAULT_C)]
    c_const: f64,
    /// The constant C' of the hash variant.
    #[arg(long, default_value_t = DEFAULT_C_PRIME)]
    c_prime: f64,
    #[arg(long, value_enum, default_value = "calibrated")]
    mode: ModeArg,
    /// Samples per member in calibrated mode.
    #[arg(long, default_value_t = 5000)]
    m: usize,
    /// Multiplier on sqrt(ln γ / n) in calibrated mode.
    #[arg(long, default_value_t = 1.0)]
    threshold_scale: f64,
    /// Rounding off the bias table: independent per point or polynomial hash.
    #[arg(long, value_enum, default_value = "explicit")]
    rounding: RoundingArg,
    /// Master seed; all randomness derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl DerandFlags {
    fn config(&self) -> DerandConfig {
        DerandConfig {
            eps: self.eps,
            delta: self.delta,
            c_const: self.c_const,
            c_prime: self.c_prime,
            mode: match self.mode {
                ModeArg::Theory => DerandMode::Theory,
                ModeArg::Calibrated => DerandMode::Calibrated {
                    m_override: self.m,
                    threshold_scale: self.threshold_scale,
                },
            },
            rounding: match self.rounding {
                RoundingArg::Explicit => RoundingKind::ExplicitPerPoint,
                RoundingArg::Hash => RoundingKind::HashCompact,
            },
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct DerandArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    derand: DerandFlags,
    #[command(flatten)]
    learner: LearnerArgs,
    /// Classifier file to write.
    #[arg(long)]
    out: PathBuf,
    /// Trial-report CSV (one row).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Deterministic classifier file.
    #[arg(long, conflicts_with = "mixture")]
    classifier: Option<PathBuf>,
    /// Mixture file; the instance's own mixture is used if neither is given.
    #[arg(long)]
    mixture: Option<PathBuf>,
    /// Also print OPT over the instance's class.
    #[arg(long)]
    opt: bool,
}

#[derive(Subcommand)]
enum DiscCommand {
    /// Write a random matrix.
    Gen(DiscGenArgs),
    /// Minimum-discrepancy coloring by exhaustive search.
    Solve(DiscSolveArgs),
    /// Write the reduction family as an instance file.
    Reduce(DiscReduceArgs),
    /// Threshold the exact error of a labeling at 1/2 + eps.
    Distinguish(DiscDistinguishArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixKind {
    /// Rows balanced against a planted coloring, so Az = 0 is attainable.
    Planted,
    /// Sparse rows, no guarantee.
    Sparse,
    /// Sparse rows, resampled until brute force certifies min ‖Az‖∞ ≥ 2.
    Certified,
}

#[derive(Args)]
struct DiscGenArgs {
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, value_enum, default_value = "planted")]
    kind: MatrixKind,
    /// Planted: approximate fraction of ones per row.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 2)]
    min_weight: usize,
    #[arg(long, default_value_t = 6)]
    max_weight: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Planted: also write the planted coloring.
    #[arg(long)]
    coloring_out: Option<PathBuf>,
}

#[derive(Args)]
struct DiscSolveArgs {
    #[arg(long)]
    matrix: PathBuf,
}

#[derive(Args)]
struct DiscReduceArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Add a dummy point so the optimum becomes this value, e.g. `1/4`.
    #[arg(long)]
    opt_prime: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiscDistinguishArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// File of ±1 labels for the n points; the best labeling is used if absent.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TrialArgs {
    /// Fixed instance; otherwise a fresh generated instance per trial.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[command(flatten)]
    gen: GenSpecArgs,
    #[command(flatten)]
    derand: DerandFlags,
    #[command(flatten)]
    learner: LearnerArgs,
    #[arg(long, default_value_t = 200)]
    trials: u64,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// `name:fraction`, e.g. `opt_plus_eps:0.79`. Names: opt_plus_eps,
    /// randomized_plus_half_eps, heavy_coverage, off_table_deviation.
    #[arg(long = "predicate")]
    predicates: Vec<String>,
    /// Directory for trials.csv and summary.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct HashcheckArgs {
    /// Number of hash-derived indicators in the tail experiment.
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Independence degree of the tail experiment.
    #[arg(long, default_value_t = 4)]
    r: usize,
    #[arg(long, default_value_t = 100_000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn output_path(p: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if p.is_relative() => Path::new(&dir).join(p),
        _ => p.to_path_buf(),
    }
}

fn create_parent(p: &Path) -> Result<()> {
    if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(())
}

fn read_instance(p: &Path) -> Result<Instance> {
    mio::read_instance(p).with_context(|| format!("reading instance {}", p.display()))
}

fn parse_rational(s: &str) -> Result<Rational> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: i64 = n.trim().parse().with_context(|| format!("bad numerator in {s:?}"))?;
    let d: i64 = d.trim().parse().with_context(|| format!("bad denominator in {s:?}"))?;
    if d == 0 {
        bail!("zero denominator in {s:?}");
    }
    Ok(Rational::new(n, d))
}

fn parse_predicate(s: &str) -> Result<PredicateSpec> {
    let (name, frac) = s
        .split_once(':')
        .with_context(|| format!("predicate {s:?} is not name:fraction"))?;
    let required_fraction: f64 = frac.parse().with_context(|| format!("bad fraction in {s:?}"))?;
    if !(0.0..=1.0).contains(&required_fraction) {
        bail!("fraction in {s:?} must lie in [0, 1]");
    }
    Ok(PredicateSpec {
        predicate: name.parse::<Predicate>()?,
        required_fraction,
    })
}

fn cmd_gen(a: &GenArgs) -> Result<ExitCode> {
    let inst = gen::generate(&a.spec.spec())?;
    let out = output_path(&a.out);
    create_parent(&out)?;
    mio::write_instance(&out, &inst)?;
    println!("wrote {} (|X| = {}, k = {}, |H| = {})", out.display(), inst.family.domain_size(), inst.family.k(), inst.class.len());
    Ok(ExitCode::SUCCESS)
}

fn cmd_learn(a: &LearnArgs) -> Result<ExitCode> {
    let inst = read_instance(&a.instance)?;
    let mode = match a.oracle {
        OracleArg::Exact => OracleMode::Exact,
        OracleArg::Sampling => OracleMode::Sampling,
    };
    let oracle = SampleOracle::new(&inst.family, mode);
    let cfg = a.learner.learner().config(inst.family.k(), a.eps, a.seed);
    let (f, trace) = learner::hedge_learn_traced(&oracle, &inst.class, a.eps, a.delta, &cfg)?;
    let out = output_path(&a.out);
    create_parent(&out)?;
    fs::write(&out, mio::mixture_to_json(&f)? + "\n")?;
    if let Some(t) = &a.trace {
        let t = output_path(t);
        create_parent(&t)?;
        learner::write_trace_csv(fs::File::create(&t)?, &trace)?;
    }
    let err = metrics::randomized_worst_case_error(&f, &inst.class, &inst.family)?;
    println!("rounds {} support {} randomized_worst_case_error {err}", cfg.rounds, f.support().len());
    Ok(ExitCode::SUCCESS)
}

fn cmd_derand(a: &DerandArgs) -> Result<ExitCode> {
    let inst = read_instance(&a.instance)?;
    let cfg = a.derand.config();
    let (report, out) = harness::run_trial_with_outcome(&inst, &a.learner.learner(), &cfg, 0, cfg.seed)?;
    let path = output_path(&a.out);
    create_parent(&path)?;
    mio::write_classifier(&path, &out.classifier, inst.family.domain_size())?;
    if let Some(r) = &a.report {
        let r = output_path(r);
        create_parent(&r)?;
        harness::write_reports_csv(fs::File::create(&r)?, std::slice::from_ref(&report))?;
    }
    println!(
        "opt {} randomized_error {} derand_error {} table_size {} heavy_coverage {}",
        report.opt, report.randomized_error, report.derand_error, report.table_size, report.heavy_coverage
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(a: &EvalArgs) -> Result<ExitCode> {
    let inst = read_instance(&a.instance)?;
    let (fam, class) = (&inst.family, &inst.class);
    let mut stdout = io::stdout().lock();
    if let Some(c) = &a.classifier {
        let c = mio::read_classifier(c)?;
        let labels = c.to_labels(fam.domain_size(), class)?;
        let rep = metrics::worst_case_error(&labels, fam)?;
        metrics::write_error_reports(&mut stdout, &[(a.instance.display().to_string(), "classifier".into(), rep)])?;
    } else {
        let f = match &a.mixture {
            Some(p) => mio::mixture_from_json(&fs::read_to_string(p)?)?,
            None => inst
                .mixture
                .clone()
                .context("no --classifier or --mixture given and the instance has no mixture")?,
        };
        let rep = metrics::ErrorReport::from_errors(metrics::randomized_errors(&f, class, fam)?);
        metrics::write_error_reports(&mut stdout, &[(a.instance.display().to_string(), "mixture".into(), rep)])?;
        writeln!(stdout, "# support_worst_case {}", metrics::support_worst_case(&f, class, fam)?)?;
    }
    if a.opt {
        let (opt, idx) = metrics::opt_bruteforce(class, fam)?;
        writeln!(stdout, "# opt {opt} hypothesis {idx}")?;
    }
    Ok(ExitCode::SUCCESS)
}

fn signs_line(labels: &[mdl_core::Label]) -> String {
    labels.iter().map(|l| l.as_i64().to_string()).collect::<Vec<_>>().join(" ")
}

fn cmd_disc(c: &DiscCommand) -> Result<ExitCode> {
    match c {
        DiscCommand::Gen(a) => {
            let mut g = rng::from_seed(a.seed);
            let (m, z) = match a.kind {
                MatrixKind::Planted => {
                    let (m, z) = discrepancy::planted_zero_matrix(a.n, a.density, &mut g)?;
                    (m, Some(z))
                }
                MatrixKind::Sparse => (discrepancy::sparse_matrix(a.n, a.min_weight, a.max_weight, &mut g)?, None),
                MatrixKind::Certified => {
                    let (m, _) = discrepancy::certified_high_discrepancy_matrix(
                        a.n,
                        a.min_weight,
                        a.max_weight,
                        2,
                        1000,
                        &mut g,
                    )?;
                    (m, None)
                }
            };
            let out = output_path(&a.out);
            create_parent(&out)?;
            mio::write_matrix(&out, &m)?;
            if let (Some(p), Some(z)) = (&a.coloring_out, &z) {
                let p = output_path(p);
                create_parent(&p)?;
                fs::write(&p, signs_line(z.labels()) + "\n")?;
            }
            println!("wrote {}", out.display());
        }
        DiscCommand::Solve(a) => {
            let m = mio::read_matrix(&a.matrix)?;
            let w = discrepancy::bruteforce_min_discrepancy(&m)?;
            let rf = discrepancy::matrix_to_family(&m);
            let (best, _) = discrepancy::min_deterministic_error(&rf)?;
            println!("z {}", signs_line(w.z.labels()));
            println!("inf_norm {}", w.inf_norm);
            println!("two_norm {}", w.two_norm());
            println!("min_worst_case_error {best}");
        }
        DiscCommand::Reduce(a) => {
            let m = mio::read_matrix(&a.matrix)?;
            let rf = discrepancy::matrix_to_family(&m);
            let family = match &a.opt_prime {
                Some(s) => discrepancy::dummy_point_variant(&rf, parse_rational(s)?)?.to_family()?,
                None => rf.family().to_family()?,
            };
            let class = HypothesisClass::all_labelings(family.domain_size())?;
            let inst = Instance {
                family,
                class,
                mixture: None,
                spec: None,
            };
            let out = output_path(&a.out);
            create_parent(&out)?;
            mio::write_instance(&out, &inst)?;
            println!("wrote {} (k = {})", out.display(), inst.family.k());
        }
        DiscCommand::Distinguish(a) => {
            let m = mio::read_matrix(&a.matrix)?;
            let labels = match &a.labels {
                Some(p) => mio::parse_labels(&fs::read_to_string(p)?)?,
                None => {
                    let rf = discrepancy::matrix_to_family(&m);
                    discrepancy::min_deterministic_error(&rf)?.1.labels().to_vec()
                }
            };
            let (verdict, err) = discrepancy::distinguisher(&m, &labels, a.eps)?;
            println!("worst_case_error {err}");
            println!("verdict {verdict}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_trial(a: &TrialArgs) -> Result<ExitCode> {
    let source = match &a.instance {
        Some(p) => InstanceSource::Fixed(read_instance(p)?),
        None => InstanceSource::Generated(a.gen.spec()),
    };
    let spec = CampaignSpec {
        source,
        learner: a.learner.learner(),
        derand: a.derand.config(),
        trials: a.trials,
        predicates: a.predicates.iter().map(|s| parse_predicate(s)).collect::<Result<_>>()?,
    };
    let res = harness::run_campaign(&spec, a.parallelism)?;
    let dir = output_path(&a.out_dir);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    harness::write_reports_csv(fs::File::create(dir.join("trials.csv"))?, &res.reports)?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&res.summary)? + "\n")?;
    for p in &res.summary.predicates {
        println!(
            "{} {}/{} = {:.4} [{:.4}, {:.4}] required {} {}",
            p.predicate.name(),
            p.successes,
            p.evaluated,
            p.fraction,
            p.ci_low,
            p.ci_high,
            p.required_fraction,
            if p.met { "met" } else { "NOT MET" }
        );
    }
    if res.summary.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        let failed: Vec<_> = res
            .summary
            .predicates
            .iter()
            .filter(|p| !p.met)
            .map(|p| p.predicate.name())
            .collect();
        println!(
            "{}",
            json!({ "status": "failed", "failed_predicates": failed, "trial_errors": res.summary.failures })
        );
        Ok(ExitCode::from(EXIT_CHECK_FAILED))
    }
}

fn cmd_hashcheck(a: &HashcheckArgs) -> Result<ExitCode> {
    let rep = harness::run_hashcheck(a.n, a.r, a.draws, a.seed)?;
    println!("pairwise_violations(p=5,r=2) {}", rep.pairwise_violations);
    println!("triple_violations(p=7,r=3) {}", rep.triple_violations);
    for r in &rep.marginal_rows {
        println!(
            "marginal {:.6} expected {:.6} observed {:.6} sigma {:.6} {}",
            r.marginal,
            r.expected,
            r.observed,
            r.sigma,
            if r.within_3_sigma { "ok" } else { "FAIL" }
        );
    }
    for (name, t) in [("hash", &rep.tail), ("independent", &rep.independent_tail)] {
        for row in &t.rows {
            println!(
                "tail[{name}] T {:.3} observed {:.6} bound {:.6} {}",
                row.deviation,
                row.observed,
                row.bound,
                if row.violated { "FAIL" } else { "ok" }
            );
        }
    }
    if rep.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{}", json!({ "status": "failed", "suite": "hashcheck" }));
        Ok(ExitCode::from(EXIT_CHECK_FAILED))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Learn(a) => cmd_learn(a),
        Command::Derand(a) => cmd_derand(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Disc(c) => cmd_disc(c),
        Command::Trial(a) => cmd_trial(a),
        Command::Hashcheck(a) => cmd_hashcheck(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
