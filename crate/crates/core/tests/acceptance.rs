//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod support;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use delayhit::adversary::build_adversarial_sequence;
use delayhit::check::{run_suite, Suite};
use delayhit::counterexample::{counterexample_sequence, verify_nonantimonotonicity};
use delayhit::opt::optimal_hit_sequences;
use delayhit::workload::{
    case_rng, random_instance, random_policy_kind, random_static_set, InstanceSpace,
};
use delayhit::{
    brute_force_opt, simulate, Belady, Fifo, Latency, Lru, Mode, ModelParams, Policy, PolicyKind,
    Ratio, RequestSequence, SearchLimits,
};
use rand::Rng;

use support::{classical_misses, latency_by_definition, naive_opt, Classical};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

const SEED: u64 = 20_260_101;

fn latency_equivalence() -> Outcome {
    let cases = 1000u64;
    let space = InstanceSpace::default();
    let mut compared = 0usize;
    for case in 0..cases {
        let mut rng = case_rng(SEED, case);
        let (params, seq) = random_instance(&mut rng, &space);
        let kind = random_policy_kind(&mut rng);
        let targets = random_static_set(&mut rng, &params);
        let policy_seed: u64 = rng.gen();
        for mode in [Mode::Standard, Mode::Antimonotone] {
            let p = params.with_mode(mode);
            let mut policy = kind.build(&seq, Some(&targets), policy_seed);
            let res = ok(simulate(p, &seq, &mut policy))?;
            let want = latency_by_definition(
                seq.items(),
                p.delay,
                res.hit_sequence.bits(),
                mode == Mode::Antimonotone,
            );
            ensure!(
                want == res.per_request_latency,
                "case {case} {mode} {kind}: simulated {:?}, definition {want:?}",
                res.per_request_latency
            );
            ensure!(
                want.iter().sum::<Latency>() == res.total_latency,
                "case {case}: total"
            );
            compared += seq.len();
        }
    }
    let suite = run_suite(Suite::Latency, cases, SEED);
    ensure!(suite.is_clean(), "library suite: {:?}", suite.first_failure);
    Ok(format!("{cases} cases x 2 modes, {compared} requests"))
}

fn burst_identity() -> Outcome {
    let mut runs = 0;
    for z in 1..=10u32 {
        for k in 1..=3u32 {
            let params = ModelParams::new(k + 1, k, z).unwrap();
            let seq = RequestSequence::new(vec![k + 1; z as usize]);
            let want: Vec<Latency> = (1..=z as Latency).rev().collect();
            for kind in PolicyKind::ALL {
                for mode in [Mode::Standard, Mode::Antimonotone] {
                    let mut policy = kind.build(&seq, Some(&[1]), 5);
                    let res = ok(simulate(params.with_mode(mode), &seq, &mut policy))?;
                    ensure!(
                        res.per_request_latency == want,
                        "Z={z} k={k} {kind} {mode}: {:?}",
                        res.per_request_latency
                    );
                    ensure!(res.total_latency == (z * (z + 1) / 2) as Latency, "total");
                    runs += 1;
                }
            }
        }
    }
    Ok(format!("{runs} runs, Z=1..10"))
}

fn adversary_bounds() -> Outcome {
    let mut checked = 0;
    let mut oracle_checked = 0;
    for (name, make) in [
        (
            "lru",
            (|| Box::new(Lru) as Box<dyn Policy + Send>) as fn() -> Box<dyn Policy + Send>,
        ),
        ("fifo", || Box::<Fifo>::default()),
    ] {
        for k in 1..=4u32 {
            for z in 2..=10u32 {
                let params = ModelParams::new(k + 1, k, z).unwrap();
                let report = ok(build_adversarial_sequence(
                    &mut make(),
                    params,
                    10 * k as usize,
                ))?;
                ensure!(
                    !report.capped && report.bursty_count == k as usize,
                    "{name} k={k} Z={z}: {} bursts",
                    report.bursty_count
                );
                let resim = ok(simulate(params, &report.sigma_a, &mut make()))?.total_latency;
                ensure!(
                    resim == report.policy_latency,
                    "{name} k={k} Z={z}: replay {resim}"
                );
                ensure!(
                    report.opt_latency == z as Latency,
                    "{name} k={k} Z={z}: OPT {}",
                    report.opt_latency
                );
                // Z for the first segment plus Z(Z+1)/2 per burst, over OPT = Z.
                let expected = Ratio::new(
                    2 * z as u64 + k as u64 * z as u64 * (z as u64 + 1),
                    2 * z as u64,
                );
                ensure!(
                    report.ratio_lower_bound == expected,
                    "{name} k={k} Z={z}: ratio {} != {}",
                    report.ratio_lower_bound,
                    expected
                );
                if k <= 2 && z <= 5 {
                    let opt = ok(brute_force_opt(
                        params,
                        &report.sigma_a,
                        SearchLimits::default(),
                    ))?;
                    ensure!(
                        opt.min_latency == z as Latency,
                        "{name} k={k} Z={z}: brute force {}",
                        opt.min_latency
                    );
                    oracle_checked += 1;
                }
                checked += 1;
            }
        }
    }
    let params = ModelParams::new(3, 2, 3).unwrap();
    let report = ok(build_adversarial_sequence(&mut Lru, params, 20))?;
    let opt = ok(brute_force_opt(
        params,
        &report.sigma_a,
        SearchLimits::default(),
    ))?;
    let naive = naive_opt(params, &report.sigma_a);
    ensure!(
        opt.min_latency == 3 && naive == 3,
        "k=2 Z=3: brute force {}, naive {naive}",
        opt.min_latency
    );
    ensure!(
        report.ratio_lower_bound >= Ratio::new(5, 1),
        "k=2 Z=3 ratio {}",
        report.ratio_lower_bound
    );
    Ok(format!(
        "{checked} (policy,k,Z) triples, {oracle_checked} cross-checked by exhaustive search"
    ))
}

fn counterexample() -> Outcome {
    let mut built = 0;
    for z in 5..=12u32 {
        for k in 1..=3u32 {
            let spec = ok(counterexample_sequence(k, z))?;
            let half = z / 2;
            let predicted = (half * (z - half)) as i64 - z as i64;
            ensure!(
                spec.predicted_gap == predicted,
                "Z={z} k={k}: predicted {}",
                spec.predicted_gap
            );
            let oracle = z <= 6 && k == 1;
            let report = ok(verify_nonantimonotonicity(
                &spec,
                SearchLimits::default(),
                oracle,
            ))?;
            ensure!(
                report.gap == predicted && report.gap > 0,
                "Z={z} k={k}: gap {}",
                report.gap
            );
            let by_def = |b: &[bool]| {
                latency_by_definition(spec.sigma_prime.items(), z, b, false)
                    .iter()
                    .sum::<Latency>()
            };
            ensure!(
                by_def(spec.b.bits()) == report.latency_b
                    && by_def(spec.b_prime.bits()) == report.latency_b_prime,
                "Z={z} k={k}: definition disagrees"
            );
            if oracle {
                ensure!(
                    report.opt_latency == Some(report.latency_b),
                    "Z={z}: OPT {:?}",
                    report.opt_latency
                );
            }
            built += 1;
        }
    }

    let spec = ok(counterexample_sequence(1, 5))?;
    let (min, optima) = ok(optimal_hit_sequences(
        spec.params,
        &spec.sigma_prime,
        SearchLimits::default(),
    ))?;
    ensure!(min == 18, "Z=5 k=1: OPT {min}");
    ensure!(
        optima.len() == 1
            && optima[0].hits.normalized(&spec.sigma_prime) == spec.b.normalized(&spec.sigma_prime),
        "Z=5 k=1: {} optimal hit sequences",
        optima.len()
    );
    ensure!(
        naive_opt(spec.params, &spec.sigma_prime) == 18,
        "Z=5 k=1: naive OPT"
    );

    let mut previous = f64::NEG_INFINITY;
    let mut scaled = Vec::new();
    for z in [16u32, 32, 64] {
        let spec = ok(counterexample_sequence(1, z))?;
        let report = ok(verify_nonantimonotonicity(
            &spec,
            SearchLimits::default(),
            false,
        ))?;
        let ratio = report.gap as f64 / (z as f64 * z as f64);
        let near_quarter = (ratio - 0.25).abs() <= 1.0 / z as f64;
        let increasing = ratio > previous;
        ensure!(near_quarter, "Z={z}: gap/Z^2 = {ratio}");
        ensure!(increasing, "Z={z}: gap/Z^2 not increasing");
        previous = ratio;
        scaled.push(format!("{ratio:.4}"));
    }
    Ok(format!(
        "{built} instances, OPT(Z=5)=18 unique, gap/Z^2 = {}",
        scaled.join(", ")
    ))
}

fn antimonotone_latency() -> Outcome {
    let report = run_suite(Suite::Antimono, 10_000, SEED);
    ensure!(
        report.is_clean(),
        "{} violations, first {:?}",
        report.failed,
        report.first_failure
    );
    Ok(format!(
        "{} cases, {} comparisons, 0 violations",
        report.cases, report.checks
    ))
}

fn domination() -> Outcome {
    let report = run_suite(Suite::Reduction, 1000, SEED);
    ensure!(
        report.is_clean(),
        "{} violations, first {:?}",
        report.failed,
        report.first_failure
    );
    Ok(format!(
        "{} cases, {} per-request comparisons",
        report.cases, report.checks
    ))
}

fn unit_delay_collapse() -> Outcome {
    let space = InstanceSpace {
        delay: 1..=1,
        len: 1..=40,
        ..InstanceSpace::default()
    };
    for case in 0..500u64 {
        let (params, seq) = random_instance(&mut case_rng(SEED, case), &space);
        let rules: [(Box<dyn Policy>, Classical); 3] = [
            (Box::new(Lru), Classical::Lru),
            (Box::<Fifo>::default(), Classical::Fifo),
            (Box::new(Belady::new(seq.clone())), Classical::Belady),
        ];
        let mut belady = 0;
        for (mut policy, rule) in rules {
            let res = ok(simulate(params, &seq, &mut policy))?;
            let misses = classical_misses(seq.items(), params.k, rule);
            ensure!(
                res.miss_count(&seq) == misses && res.total_latency == misses as Latency,
                "case {case} {rule:?}: {} vs classical {misses}",
                res.total_latency
            );
            if rule == Classical::Belady {
                belady = res.total_latency;
            }
        }
        let opt = ok(brute_force_opt(params, &seq, SearchLimits::default()))?;
        ensure!(
            opt.min_latency == belady,
            "case {case}: Belady {belady}, OPT {}",
            opt.min_latency
        );
    }
    Ok("500 cases".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        (
            "latency functions match the simulator",
            latency_equivalence,
            10,
        ),
        ("single-item burst costs Z(Z+1)/2", burst_identity, 1),
        ("adversary forces ratio 1 + k(Z+1)/2", adversary_bounds, 30),
        ("extra hit raises latency by z(Z-z)-Z", counterexample, 60),
        (
            "fetch-on-hit latency is antimonotone",
            antimonotone_latency,
            10,
        ),
        ("wrapped policy dominates per request", domination, 30),
        ("Z=1 reduces to classical paging", unit_delay_collapse, 10),
    ];
    let mut failed = 0;
    for (idx, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed > Duration::from_secs(limit) {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit}s"))
            } else {
                Ok(detail)
            }
        });
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail} ({elapsed:.2?})", idx + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why} ({elapsed:.2?})", idx + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
