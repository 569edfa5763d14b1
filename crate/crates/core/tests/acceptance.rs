//! Acceptance suite: twelve end-to-end checks, one pass/fail line each.
//!
//! Runs with a custom harness so the lines are always printed; the process
//! exits nonzero if any check fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mdl_core::derand::{self, DerandConfig, HedgeLearner, RoundingKind};
use mdl_core::discrepancy::{self, Rational, Verdict};
use mdl_core::gen::{self, GenSpec, ProbeParams};
use mdl_core::harness::{self, CampaignSpec, InstanceSource, Predicate, PredicateSpec};
use mdl_core::learner::{hedge_learn, HedgeConfig, SampleOracle};
use mdl_core::metrics::{self, HeavyVariant};
use mdl_core::{rng, Label};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn run(id: u32, title: &str, limit: Duration, check: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check));
    let elapsed = start.elapsed();
    let (passed, detail) = match result {
        Ok(o) => (o.passed, o.detail),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    let in_time = elapsed <= limit;
    let ok = passed && in_time;
    println!(
        "criterion {id:>2} [{}] {title}: {detail}; {:.2}s (limit {}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    ok
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

const BINOMIAL_SLACK: f64 = 0.06;

fn gap_example() -> Outcome {
    let k = 8;
    let (fam, class, f) = gen::gen_gap_example(k).unwrap();
    let randomized = metrics::randomized_worst_case_error(&f, &class, &fam).unwrap();
    let support = metrics::support_worst_case(&f, &class, &fam).unwrap();
    let matrix = metrics::error_matrix(&class, &fam).unwrap();
    // Pr_{f~F}[er_i(f) = 1] for each member i.
    let exceed: Vec<f64> = (0..k)
        .map(|i| f.iter().filter(|&(h, _)| matrix[h][i] == 1.0).map(|(_, w)| w).sum())
        .collect();
    let ok = (randomized - 0.125).abs() <= 1e-12
        && support == 1.0
        && exceed.iter().all(|&p| (p - 0.125).abs() <= 1e-12);
    outcome(
        ok,
        format!("randomized {randomized}, support worst case {support}, exceedance {:?}", exceed[0]),
    )
}

fn row_identity() -> Outcome {
    let mut g = rng::from_seed(2);
    let mut checked = 0;
    let mut bad = 0;
    for _ in 0..100 {
        let a = discrepancy::sparse_matrix(12, 1, 12, &mut g).unwrap();
        let rf = discrepancy::matrix_to_family(&a);
        let v: Vec<Label> = (0..12)
            .map(|_| if rand::Rng::random::<bool>(&mut g) { Label::Pos } else { Label::Neg })
            .collect();
        for i in 0..12 {
            let row = discrepancy::row_errors(&rf, i, &v).unwrap();
            let predicted = Rational::new(1, 2) + Rational::new(row.dot.abs(), 2 * a.row_ones(i) as i64);
            checked += 1;
            if row.against_sign != predicted || row.against_sign + row.with_sign != Rational::from_integer(1) {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("{checked} rows over 100 pairs, {bad} mismatches"))
}

fn zero_discrepancy() -> Outcome {
    let mut g = rng::from_seed(3);
    let half = Rational::new(1, 2);
    let mut good = 0;
    for _ in 0..20 {
        let (a, z) = discrepancy::planted_zero_matrix(12, 0.5, &mut g).unwrap();
        let rf = discrepancy::matrix_to_family(&a);
        let planted = discrepancy::coloring_error(&z, &rf).unwrap();
        let w = discrepancy::bruteforce_min_discrepancy(&a).unwrap();
        let (by_identity, _) = discrepancy::min_deterministic_error(&rf).unwrap();
        let (by_summation, _) = rf.family().min_error_over_labelings().unwrap();
        if planted == half && w.inf_norm == 0 && by_identity == half && by_summation == half {
            good += 1;
        }
    }
    outcome(good == 20, format!("{good}/20 planted instances at exactly 1/2 with zero discrepancy"))
}

fn distinguisher() -> Outcome {
    let eps = 1.0 / (2.0 * 12f64.sqrt());
    let mut g = rng::from_seed(4);
    let mut correct = 0;
    for _ in 0..20 {
        let (a, _) = discrepancy::planted_zero_matrix(12, 0.5, &mut g).unwrap();
        let (_, best) = discrepancy::min_deterministic_error(&discrepancy::matrix_to_family(&a)).unwrap();
        let (v, _) = discrepancy::distinguisher(&a, best.labels(), eps).unwrap();
        correct += (v == Verdict::ZeroDiscrepancyLikely) as usize;
    }
    for _ in 0..20 {
        let (a, w) = discrepancy::certified_high_discrepancy_matrix(12, 2, 6, 2, 10_000, &mut g).unwrap();
        assert!(w.inf_norm >= 2);
        let (_, best) = discrepancy::min_deterministic_error(&discrepancy::matrix_to_family(&a)).unwrap();
        let (v, _) = discrepancy::distinguisher(&a, best.labels(), eps).unwrap();
        correct += (v == Verdict::HighDiscrepancy) as usize;
    }
    outcome(correct == 40, format!("{correct}/40 correct verdicts at eps = {eps:.4}"))
}

fn hedge_contract() -> Outcome {
    let eps = 0.15;
    let mut within = 0;
    let mut worst_gap = f64::NEG_INFINITY;
    for s in 0..50 {
        let inst = gen::generate(&GenSpec::random(40, 6, 16, 500 + s)).unwrap();
        let oracle = SampleOracle::exact(&inst.family);
        let cfg = HedgeConfig::defaults(6, eps, s);
        let f = hedge_learn(&oracle, &inst.class, eps, 0.15, &cfg).unwrap();
        let r = metrics::randomized_worst_case_error(&f, &inst.class, &inst.family).unwrap();
        let (opt, _) = metrics::opt_bruteforce(&inst.class, &inst.family).unwrap();
        within += (r <= opt + eps) as usize;
        worst_gap = worst_gap.max(r - opt);
    }
    outcome(within >= 48, format!("{within}/50 within OPT + eps, largest gap {worst_gap:.4}"))
}

fn main_campaign(rounding: RoundingKind, trials: u64, seed: u64) -> CampaignSpec {
    let (eps, delta) = (0.15, 0.15);
    let required = (1.0 - delta) - BINOMIAL_SLACK;
    CampaignSpec {
        source: InstanceSource::Generated(GenSpec::random(40, 6, 16, seed)),
        learner: HedgeLearner::default(),
        derand: DerandConfig::calibrated(eps, delta, 5000, 1.0, seed).with_rounding(rounding),
        trials,
        predicates: vec![
            PredicateSpec {
                predicate: Predicate::OptPlusEps,
                required_fraction: required,
            },
            PredicateSpec {
                predicate: Predicate::RandomizedPlusHalfEps,
                required_fraction: required,
            },
        ],
    }
}

fn csv_of(res: &harness::CampaignResult) -> String {
    let mut buf = Vec::new();
    harness::write_reports_csv(&mut buf, &res.reports).unwrap();
    String::from_utf8(buf).unwrap()
}

fn summarize(res: &harness::CampaignResult) -> String {
    res.summary
        .predicates
        .iter()
        .map(|p| format!("{} {}/{}", p.predicate.name(), p.successes, p.evaluated))
        .collect::<Vec<_>>()
        .join(", ")
}

fn end_to_end() -> Outcome {
    let res = harness::run_campaign(&main_campaign(RoundingKind::ExplicitPerPoint, 200, 6), 8).unwrap();
    outcome(res.summary.passed(), summarize(&res))
}

fn probe_params() -> ProbeParams {
    ProbeParams {
        eps: 0.1,
        delta: 0.1,
        heavy_count: 3,
        heavy_beta: 0.4,
        heavy_mass: 0.2,
        light_count: 40,
        light_beta_max: 0.05,
        c_prime: None,
    }
}

fn heavy_probe() -> Outcome {
    let p = probe_params();
    let fam = gen::gen_heavy_point_probe(2, &p, 7).unwrap();
    let heavy = metrics::heavy_points(&fam, p.eps, p.delta, HeavyVariant::PerPoint).unwrap();
    assert_eq!(heavy, vec![0, 1, 2]);
    let cfg = DerandConfig::theory(p.eps, p.delta, 0);
    let oracle = SampleOracle::exact(&fam);
    let runs = 500;
    let covered = (0..runs)
        .filter(|&s| {
            let mut g = rng::stream(s, rng::streams::BIAS_TABLE);
            let table = derand::build_bias_table(&oracle, &cfg, &mut g).unwrap();
            derand::heavy_coverage(&table, &fam, &cfg).unwrap()
        })
        .count();
    let required = 1.0 - p.delta / 4.0 - 0.05;
    let frac = covered as f64 / runs as f64;
    outcome(
        frac >= required,
        format!("{covered}/{runs} runs cover all heavy points (m = {}), required {required}", cfg.samples_per_member(2)),
    )
}

fn light_probe() -> Outcome {
    let p = ProbeParams {
        heavy_count: 0,
        light_count: 50,
        ..probe_params()
    };
    let fam = gen::gen_heavy_point_probe(2, &p, 8).unwrap();
    let betas = metrics::biases(&fam).unwrap();
    assert!(betas.iter().all(|b| b.abs() <= 0.05));
    assert!(metrics::heavy_points(&fam, p.eps, p.delta, HeavyVariant::PerPoint)
        .unwrap()
        .is_empty());
    let class = gen::random_hypothesis_class(50, 16, &mut rng::from_seed(8)).unwrap();
    let oracle = SampleOracle::exact(&fam);
    let runs = 500;
    let mut within = 0;
    let mut worst: f64 = 0.0;
    for s in 0..runs {
        let cfg = DerandConfig::theory(p.eps, p.delta, s);
        let out = derand::derandomize(&oracle, &class, &HedgeLearner::default(), &cfg).unwrap();
        let labels = out.classifier.to_labels(50, &class).unwrap();
        let split = derand::ErrorSplit::compute(&labels, &out.table, &out.mixture, &class, &fam).unwrap();
        let dev = split.max_off_table_deviation();
        worst = worst.max(dev);
        within += (dev <= p.eps / 2.0) as usize;
    }
    let required = 1.0 - p.delta / 4.0 - 0.05;
    outcome(
        within as f64 / runs as f64 >= required,
        format!("{within}/{runs} runs with deviation ≤ eps/2, largest {worst:.4}"),
    )
}

fn hash_exactness() -> Outcome {
    use mdl_core::hash;
    let pairs = hash::independence_violations(5, 2, &hash::all_key_sets(5, 2)).unwrap();
    let triples = hash::independence_violations(7, 3, &hash::all_key_sets(7, 3)).unwrap();
    let rows: Vec<_> = [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0]
        .iter()
        .enumerate()
        .map(|(i, &m)| hash::marginal_law_check(7, 2, m, 4, 100_000, 90 + i as u64).unwrap())
        .collect();
    let law_ok = rows.iter().all(|r| r.within_3_sigma);
    let observed: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.observed)).collect();
    outcome(
        pairs == 0 && triples == 0 && law_ok,
        format!(
            "pairwise violations {pairs}, 3-wise violations {triples}, marginal law {}",
            observed.join("/")
        ),
    )
}

fn tail_bound() -> Outcome {
    let cfg = mdl_core::hash::TailCheckConfig::standard(64, 4, 100_000, 10).unwrap();
    let rep = mdl_core::hash::empirical_tail_bound_check(&cfg).unwrap();
    let rows: Vec<String> = rep
        .rows
        .iter()
        .map(|r| format!("T={:.0}: {:.4} ≤ {:.4}", r.deviation, r.observed, r.bound))
        .collect();
    outcome(rep.passed(), rows.join(", "))
}

fn rounding_paths() -> Outcome {
    let inst = gen::generate(&GenSpec::random(40, 6, 16, 11)).unwrap();
    let run = |rounding| {
        let mut spec = main_campaign(rounding, 200, 11);
        spec.source = InstanceSource::Fixed(inst.clone());
        harness::run_campaign(&spec, 8).unwrap()
    };
    let explicit = run(RoundingKind::ExplicitPerPoint);
    let hashed = run(RoundingKind::HashCompact);
    let mean = |r: &harness::CampaignResult| {
        r.reports.iter().map(|t| t.derand_error).sum::<f64>() / r.reports.len() as f64
    };
    let (a, b) = (mean(&explicit), mean(&hashed));
    outcome(
        (a - b).abs() <= 0.02 && explicit.summary.passed() && hashed.summary.passed(),
        format!(
            "mean er_P explicit {a:.4} vs hash {b:.4}; explicit: {}; hash: {}",
            summarize(&explicit),
            summarize(&hashed)
        ),
    )
}

fn determinism() -> Outcome {
    let specs = [
        main_campaign(RoundingKind::ExplicitPerPoint, 200, 6),
        main_campaign(RoundingKind::HashCompact, 60, 12),
    ];
    let mut identical = 0;
    for spec in &specs {
        let serial = csv_of(&harness::run_campaign(spec, 1).unwrap());
        let parallel = csv_of(&harness::run_campaign(spec, 8).unwrap());
        let again = csv_of(&harness::run_campaign(spec, 8).unwrap());
        identical += (serial == parallel && parallel == again) as usize;
    }
    outcome(
        identical == specs.len(),
        format!("{identical}/{} campaigns byte-identical across parallelism 1, 8, 8", specs.len()),
    )
}

fn main() -> ExitCode {
    let results = [
        run(1, "gap example", secs(1), gap_example),
        run(2, "row identity", secs(1), row_identity),
        run(3, "zero discrepancy at error 1/2", secs(30), zero_discrepancy),
        run(4, "distinguisher verdicts", secs(60), distinguisher),
        run(5, "Hedge min-max contract", secs(60), hedge_contract),
        run(6, "derandomized error end to end", secs(300), end_to_end),
        run(7, "heavy points enter the table", secs(120), heavy_probe),
        run(8, "off-table deviation on light points", secs(120), light_probe),
        run(9, "hash independence and marginal law", secs(30), hash_exactness),
        run(10, "limited-independence tail bound", secs(60), tail_bound),
        run(11, "explicit and hash rounding agree", secs(300), rounding_paths),
        run(12, "campaign determinism", secs(600), determinism),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
