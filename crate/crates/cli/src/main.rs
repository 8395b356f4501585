use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use delayhit::adversary::{build_adversarial_sequence, default_cap};
use delayhit::check::{run_suite, Suite};
use delayhit::counterexample::{counterexample_sequence, verify_nonantimonotonicity};
use delayhit::reduction::verify_domination;
use delayhit::trace::{parse_trace, render_trace};
use delayhit::{
    brute_force_opt, simulate, Error, Item, Mode, ModelParams, Policy, PolicyKind, ReportEnvelope,
    ReportParams, RequestSequence, SearchLimits,
};

#[derive(Parser)]
#[command(
    name = "delayhit",
    version,
    about = "Caching with delayed hits: simulator and lower-bound constructions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Budget {
    /// Node budget for the exhaustive offline search.
    #[arg(long, default_value_t = SearchLimits::default().max_nodes)]
    budget: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run a policy over a trace file.
    Simulate {
        trace: PathBuf,
        /// Universe size; defaults to the largest item in the trace.
        #[arg(short = 'n')]
        n: Option<u32>,
        #[arg(short = 'k', default_value_t = 2)]
        k: u32,
        #[arg(short = 'Z', default_value_t = 4)]
        delay: u32,
        #[arg(long, default_value = "lru")]
        policy: String,
        #[arg(long, default_value = "standard")]
        model: String,
        /// Comma-separated target set for the static policy.
        #[arg(long, value_delimiter = ',')]
        static_set: Vec<Item>,
        /// Seed for the random policy.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Build the adaptive adversarial trace against a deterministic online policy.
    Adversary {
        #[arg(long, default_value = "lru")]
        policy: String,
        #[arg(short = 'n')]
        n: Option<u32>,
        #[arg(short = 'k', default_value_t = 2)]
        k: u32,
        #[arg(short = 'Z', default_value_t = 4)]
        delay: u32,
        /// Maximum number of bursty segments (default 10k).
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        static_set: Vec<Item>,
        /// Also compute the exact optimum of the generated trace.
        #[arg(long)]
        oracle_check: bool,
        #[command(flatten)]
        budget: Budget,
        /// Write the generated trace here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Build and verify the trace where an extra hit increases latency.
    Counterexample {
        #[arg(short = 'Z', default_value_t = 6)]
        delay: u32,
        #[arg(short = 'k', default_value_t = 1)]
        k: u32,
        #[arg(long)]
        oracle_check: bool,
        #[command(flatten)]
        budget: Budget,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Compare a fetch-on-hit policy with its standard-model wrapper on a trace.
    Reduce {
        trace: PathBuf,
        #[arg(long, default_value = "lru")]
        policy: String,
        #[arg(short = 'n')]
        n: Option<u32>,
        #[arg(short = 'k', default_value_t = 2)]
        k: u32,
        #[arg(short = 'Z', default_value_t = 4)]
        delay: u32,
        #[arg(long, value_delimiter = ',')]
        static_set: Vec<Item>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Run a randomized property suite.
    Check {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1000)]
        cases: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

/// Process exit codes.
mod exit {
    pub const OK: u8 = 0;
    pub const VIOLATION: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const INFEASIBLE: u8 = 3;
    pub const BUDGET: u8 = 4;
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InfeasibleEviction { .. } => exit::INFEASIBLE,
        Error::BudgetExceeded { .. } => exit::BUDGET,
        Error::Violation { .. } | Error::PolicyHit { .. } => exit::VIOLATION,
        _ => exit::INPUT,
    }
}

/// A command failure: exit code, message and an optional partial report.
struct Failure {
    code: u8,
    message: String,
    report: Option<Box<ReportEnvelope>>,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure {
            code: exit_code(&err),
            message: err.to_string(),
            report: None,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        Failure {
            code: exit::INPUT,
            message: format!("{err:#}"),
            report: None,
        }
    }
}

type CmdResult = Result<ReportEnvelope, Failure>;

fn read_trace(path: &Path) -> Result<RequestSequence, Failure> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading trace {}", path.display()))?;
    Ok(parse_trace(&text)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn make_params(
    n: Option<u32>,
    k: u32,
    delay: u32,
    seq: &RequestSequence,
) -> Result<ModelParams, Failure> {
    let n = n.unwrap_or_else(|| seq.max_item().max(1));
    let params = ModelParams::new(n, k, delay)?;
    seq.validate(n)?;
    Ok(params)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    trace: &Path,
    n: Option<u32>,
    k: u32,
    delay: u32,
    policy: &str,
    model: &str,
    static_set: &[Item],
    seed: u64,
) -> CmdResult {
    let seq = read_trace(trace)?;
    let kind: PolicyKind = policy.parse()?;
    let mode: Mode = model.parse()?;
    let params = make_params(n, k, delay, &seq)?.with_mode(mode);
    let mut policy = kind.build(&seq, Some(static_set), seed);
    let res = simulate(params, &seq, &mut policy)?;
    let results = json!({
        "total_latency": res.total_latency,
        "misses": res.miss_count(&seq),
        "per_request_latency": res.per_request_latency,
        "hit_sequence": res.hit_sequence,
        "eviction_sequence": res.eviction_sequence,
        "final_cache": res.cache_history.last(),
    });
    Ok(ReportEnvelope::new(
        "simulate",
        ReportParams {
            n: Some(params.n),
            k: Some(k),
            delay: Some(delay),
            mode: Some(mode),
            policy: Some(kind.to_string()),
            seed: (kind == PolicyKind::Random).then_some(seed),
        },
        results,
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_adversary(
    policy: &str,
    n: Option<u32>,
    k: u32,
    delay: u32,
    cap: Option<usize>,
    static_set: &[Item],
    oracle_check: bool,
    budget: u64,
    trace_out: Option<&Path>,
) -> CmdResult {
    let kind: PolicyKind = policy.parse()?;
    if !kind.is_online() || !kind.is_deterministic() {
        return Err(Error::InvalidParams(format!(
            "the adversary needs a deterministic online policy, not '{kind}'"
        ))
        .into());
    }
    let params = ModelParams::new(n.unwrap_or(k + 1), k, delay)?;
    let mut built = kind.build(&RequestSequence::default(), Some(static_set), 0);
    let report =
        build_adversarial_sequence(&mut built, params, cap.unwrap_or_else(|| default_cap(k)))?;
    if let Some(path) = trace_out {
        write_file(path, &render_trace(&report.sigma_a))?;
    }

    let mut results = serde_json::to_value(&report).expect("serializable");
    let mut failure = None;
    if oracle_check {
        results["oracle"] =
            match brute_force_opt(params, &report.sigma_a, SearchLimits { max_nodes: budget }) {
                Ok(opt) => {
                    if opt.min_latency != report.opt_latency {
                        failure = Some((
                            exit::VIOLATION,
                            format!(
                                "oracle optimum {} differs from the static witness {}",
                                opt.min_latency, report.opt_latency
                            ),
                        ));
                    }
                    json!({ "min_latency": opt.min_latency, "nodes": opt.nodes })
                }
                Err(err @ Error::BudgetExceeded { .. }) => {
                    failure = Some((exit::BUDGET, err.to_string()));
                    json!({ "budget_exceeded": true })
                }
                Err(err) => return Err(err.into()),
            };
    }
    let envelope = ReportEnvelope::new(
        "adversary",
        ReportParams {
            n: Some(params.n),
            k: Some(k),
            delay: Some(delay),
            mode: Some(params.mode),
            policy: Some(kind.to_string()),
            seed: None,
        },
        results,
    );
    match failure {
        None => Ok(envelope),
        Some((code, message)) => Err(Failure {
            code,
            message,
            report: Some(Box::new(envelope)),
        }),
    }
}

fn cmd_counterexample(
    delay: u32,
    k: u32,
    oracle_check: bool,
    budget: u64,
    trace_out: Option<&Path>,
) -> CmdResult {
    let spec = counterexample_sequence(k, delay)?;
    if let Some(path) = trace_out {
        write_file(path, &render_trace(&spec.sigma_prime))?;
    }
    let report =
        verify_nonantimonotonicity(&spec, SearchLimits { max_nodes: budget }, oracle_check)?;
    let results = json!({
        "sigma_prime": spec.sigma_prime,
        "b": spec.b,
        "b_prime": spec.b_prime,
        "flip_time": spec.flip_time,
        "verification": report,
    });
    let envelope = ReportEnvelope::new(
        "counterexample",
        ReportParams {
            n: Some(spec.params.n),
            k: Some(k),
            delay: Some(delay),
            mode: Some(Mode::Standard),
            policy: None,
            seed: None,
        },
        results,
    );
    if report.oracle_budget_exceeded {
        return Err(Failure {
            code: exit::BUDGET,
            message: "offline oracle exceeded its budget".into(),
            report: Some(Box::new(envelope)),
        });
    }
    Ok(envelope)
}

#[allow(clippy::too_many_arguments)]
fn cmd_reduce(
    trace: &Path,
    policy: &str,
    n: Option<u32>,
    k: u32,
    delay: u32,
    static_set: &[Item],
    seed: u64,
) -> CmdResult {
    let seq = read_trace(trace)?;
    let kind: PolicyKind = policy.parse()?;
    let params = make_params(n, k, delay, &seq)?;
    let make = || -> Box<dyn Policy + Send> { kind.build(&seq, Some(static_set), seed) };
    let report = verify_domination(&seq, &make, params)?;
    let violation = report.first_violation();
    let envelope = ReportEnvelope::new(
        "reduce",
        ReportParams {
            n: Some(params.n),
            k: Some(k),
            delay: Some(delay),
            mode: Some(Mode::Antimonotone),
            policy: Some(kind.to_string()),
            seed: (kind == PolicyKind::Random).then_some(seed),
        },
        serde_json::to_value(&report).expect("serializable"),
    );
    match violation {
        None => Ok(envelope),
        Some(err) => Err(Failure {
            code: exit::VIOLATION,
            message: err.to_string(),
            report: Some(Box::new(envelope)),
        }),
    }
}

fn cmd_check(suite: &str, cases: u64, seed: u64) -> CmdResult {
    let suite: Suite = suite.parse()?;
    let report = run_suite(suite, cases, seed);
    let clean = report.is_clean();
    let message = format!("{}: {}/{} cases passed", suite, report.passed, report.cases);
    let envelope = ReportEnvelope::new(
        "check",
        ReportParams {
            seed: Some(seed),
            ..Default::default()
        },
        serde_json::to_value(&report).expect("serializable"),
    );
    if clean {
        eprintln!("{message}");
        Ok(envelope)
    } else {
        Err(Failure {
            code: exit::VIOLATION,
            message,
            report: Some(Box::new(envelope)),
        })
    }
}

fn emit(report: &ReportEnvelope, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = report.to_json_pretty();
    text.push('\n');
    match out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (result, out) = match cli.command {
        Command::Simulate {
            trace,
            n,
            k,
            delay,
            policy,
            model,
            static_set,
            seed,
            output,
        } => (
            cmd_simulate(&trace, n, k, delay, &policy, &model, &static_set, seed),
            output.out,
        ),
        Command::Adversary {
            policy,
            n,
            k,
            delay,
            cap,
            static_set,
            oracle_check,
            budget,
            trace_out,
            output,
        } => (
            cmd_adversary(
                &policy,
                n,
                k,
                delay,
                cap,
                &static_set,
                oracle_check,
                budget.budget,
                trace_out.as_deref(),
            ),
            output.out,
        ),
        Command::Counterexample {
            delay,
            k,
            oracle_check,
            budget,
            trace_out,
            output,
        } => (
            cmd_counterexample(delay, k, oracle_check, budget.budget, trace_out.as_deref()),
            output.out,
        ),
        Command::Reduce {
            trace,
            policy,
            n,
            k,
            delay,
            static_set,
            seed,
            output,
        } => (
            cmd_reduce(&trace, &policy, n, k, delay, &static_set, seed),
            output.out,
        ),
        Command::Check {
            suite,
            cases,
            seed,
            output,
        } => (cmd_check(&suite, cases, seed), output.out),
    };
    match result {
        Ok(report) => emit(&report, out.as_deref()),
        Err(mut failure) => {
            if let Some(report) = failure.report.take() {
                emit(&report, out.as_deref())?;
            }
            Err(failure)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
