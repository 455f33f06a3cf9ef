use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use ballast_core::analysis::{
    default_epsilon_grid, epsilon_from_f64, phase_report_from_trace, phase_report_run, poisson_upper_tail,
    theoretical_bounds, OverlapOptions, PhaseConfig,
};
use ballast_core::experiment::{
    build_policy, cli_verify, emit, emit_to_writer, run_experiment, ExperimentSpec, OutputFormat, PolicyKind,
    PolicyParams, VerifyOptions,
};
use ballast_core::{simulate_run, trace, SimConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ballast", version, about = "Seeded balls-into-bins experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a single run and print the result as JSON.
    Run(RunArgs),
    /// Run a scaling scan from a TOML spec and flag overrides.
    Scan(ScanArgs),
    /// Check the placement-probability claim over reachable memory states.
    /// Exits nonzero on any violation.
    Verify(VerifyArgs),
    /// Per-phase set sizes for a live run or a stored trace.
    Phases(PhasesArgs),
    /// Print the theoretical bounds for n and delta.
    Bounds(BoundsArgs),
    /// Tabulate Poisson upper tails.
    Tail(TailArgs),
}

#[derive(Args)]
struct PolicyArgs {
    #[arg(long, default_value = "greedy")]
    policy: PolicyKind,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long)]
    cluster_size: Option<usize>,
    #[arg(long)]
    counter_cap: Option<u32>,
    #[arg(long)]
    advice_threshold: Option<u32>,
}

impl PolicyArgs {
    fn params(&self) -> PolicyParams {
        PolicyParams {
            cluster_size: self.cluster_size,
            counter_cap: self.counter_cap,
            advice_threshold: self.advice_threshold,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    policy: PolicyArgs,
    #[arg(long, default_value_t = 1 << 14)]
    n: usize,
    /// Defaults to n.
    #[arg(long)]
    balls: Option<u64>,
    #[arg(long, env = "BALLAST_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the step trace here; a `.bin` extension selects the binary format.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Include final loads in the JSON output.
    #[arg(long)]
    loads: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    /// TOML experiment spec. Flags override its fields.
    spec: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    policy: Option<Vec<PolicyKind>>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, env = "BALLAST_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    balls: Option<u64>,
    #[arg(long)]
    cluster_size: Option<usize>,
    #[arg(long)]
    counter_cap: Option<u32>,
    #[arg(long)]
    advice_threshold: Option<u32>,
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Output file; stdout when absent from both flags and spec.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Measure wall-clock time per run (makes output nondeterministic).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    policy: PolicyArgs,
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Explore every memory state reachable within this many balls.
    #[arg(long, default_value_t = 0)]
    balls: u64,
    /// Comma-separated epsilons in (0, 1). Defaults to 0.05, 0.10, ..., 0.95.
    #[arg(long, value_delimiter = ',')]
    epsilon_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000)]
    subsets: usize,
    #[arg(long, env = "BALLAST_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    state_limit: usize,
    /// Drop the per-state verdicts from the report.
    #[arg(long)]
    summary: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PhasesArgs {
    #[command(flatten)]
    policy: PolicyArgs,
    #[arg(long, default_value_t = 1 << 16)]
    n: usize,
    /// Number of phases; derived from n and delta when absent.
    #[arg(long)]
    phases: Option<usize>,
    #[arg(long)]
    balls: Option<u64>,
    #[arg(long, env = "BALLAST_SEED", default_value_t = 0)]
    seed: u64,
    /// Read a stored trace (CSV or binary) instead of simulating.
    #[arg(long)]
    trace_in: Option<PathBuf>,
    /// Track forbidden-set overlap over visited memory states.
    #[arg(long)]
    overlap: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 1 << 20)]
    n: u64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
}

#[derive(Args)]
struct TailArgs {
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    #[arg(long, default_value_t = 30)]
    t_max: u64,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

fn write_output(out: Option<&Path>, body: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(body)?;
            Ok(stdout.flush()?)
        }
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut body = serde_json::to_vec_pretty(value)?;
    body.push(b'\n');
    Ok(body)
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let config = SimConfig::new(args.n, args.seed)
        .with_balls(args.balls.unwrap_or(args.n as u64))
        .with_trace(args.trace_out.is_some());
    let mut policy = build_policy(args.policy.policy, args.n, args.policy.delta, &args.policy.params())?;
    let mut result = simulate_run(&config, policy.as_mut())?;

    if let (Some(path), Some(steps)) = (&args.trace_out, result.trace.take()) {
        let file = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        if path.extension().is_some_and(|e| e == "bin") {
            trace::write_binary(&steps, file)?;
        } else {
            trace::write_csv(&steps, file)?;
        }
    }

    let mut summary = serde_json::json!({
        "policy": policy.name(),
        "n": args.n,
        "balls": config.balls,
        "seed": args.seed,
        "max_load": result.max_load,
        "memory_bits": result.memory_bits,
        "histogram": result.final_loads.histogram()?,
    });
    if args.loads {
        summary["final_loads"] = serde_json::to_value(&result.final_loads)?;
    }
    write_output(args.out.as_deref(), &json_line(&summary)?)
}

fn cmd_scan(args: ScanArgs) -> anyhow::Result<()> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentSpec::from_toml_str(&text)?
        }
        None => ExperimentSpec::default(),
    };
    if let Some(v) = args.n {
        spec.n_values = v;
    }
    if let Some(v) = args.policy {
        spec.policies = v;
    }
    if let Some(v) = args.delta {
        spec.delta = v;
    }
    if let Some(v) = args.trials {
        spec.trials = v;
    }
    if let Some(v) = args.seed {
        spec.base_seed = v;
    }
    if args.balls.is_some() {
        spec.balls = args.balls;
    }
    if args.cluster_size.is_some() {
        spec.cluster_size = args.cluster_size;
    }
    if args.counter_cap.is_some() {
        spec.counter_cap = args.counter_cap;
    }
    if args.advice_threshold.is_some() {
        spec.advice_threshold = args.advice_threshold;
    }
    if let Some(v) = args.format {
        spec.format = v;
    }
    if args.out.is_some() {
        spec.output_path = args.out;
    }
    spec.timing |= args.timing;

    let rows = run_experiment(&spec)?;
    match &spec.output_path {
        Some(path) => emit(&rows, spec.format, path)?,
        None => {
            let mut buf = Vec::new();
            emit_to_writer(&rows, spec.format, &mut buf)?;
            write_output(None, &buf)?;
        }
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<bool> {
    let epsilons = match &args.epsilon_grid {
        Some(grid) => grid
            .iter()
            .map(|&e| epsilon_from_f64(e))
            .collect::<Result<Vec<_>, _>>()?,
        None => default_epsilon_grid(),
    };
    let opts = VerifyOptions {
        policy: args.policy.policy,
        params: args.policy.params(),
        n: args.n,
        delta: args.policy.delta,
        epsilons,
        depth: args.balls,
        subsets: args.subsets,
        seed: args.seed,
        state_limit: args.state_limit,
    };
    let mut report = cli_verify(&opts)?;
    if args.summary {
        report.per_state.clear();
    }
    write_output(args.out.as_deref(), &json_line(&report)?)?;
    Ok(report.ok)
}

fn cmd_phases(args: PhasesArgs) -> anyhow::Result<()> {
    let pc = match args.phases {
        Some(l) => PhaseConfig::new(args.n, l, args.policy.delta)?,
        None => PhaseConfig::from_bounds(args.n, args.policy.delta)?,
    };
    let report = match &args.trace_in {
        Some(path) => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let steps = trace::read_any(&bytes)?;
            if let Some(bad) = steps.iter().find(|r| r.chosen as usize >= args.n) {
                bail!("trace places into bin {} but n = {}", bad.chosen, args.n);
            }
            phase_report_from_trace(&steps, pc)?
        }
        None => {
            let config = SimConfig::new(args.n, args.seed).with_balls(args.balls.unwrap_or(args.n as u64));
            let mut policy = build_policy(args.policy.policy, args.n, args.policy.delta, &args.policy.params())?;
            let overlap = args.overlap.then(OverlapOptions::default);
            phase_report_run(&config, policy.as_mut(), pc, overlap)?.1
        }
    };
    write_output(args.out.as_deref(), &json_line(&report)?)
}

fn cmd_bounds(args: BoundsArgs) -> anyhow::Result<()> {
    let b = theoretical_bounds(args.n, args.delta)?;
    let mut v = serde_json::to_value(b)?;
    v["advice_threshold"] = b.advice_threshold().into();
    v["log2_log2_n"] = b.log2_log2_n().into();
    write_output(None, &json_line(&v)?)
}

fn cmd_tail(args: TailArgs) -> anyhow::Result<()> {
    let rows = (0..=args.t_max)
        .map(|t| poisson_upper_tail(args.lambda, t))
        .collect::<Result<Vec<_>, _>>()?;
    let body = match args.format {
        OutputFormat::Json => json_line(&rows)?,
        OutputFormat::Csv => {
            let mut s = String::from("lambda,t,tail,leading_term\n");
            for r in &rows {
                s.push_str(&format!("{},{},{:e},{:e}\n", r.lambda, r.t, r.tail, r.leading_term));
            }
            s.into_bytes()
        }
    };
    write_output(None, &body)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a).map(|_| true),
        Command::Scan(a) => cmd_scan(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
        Command::Phases(a) => cmd_phases(a).map(|_| true),
        Command::Bounds(a) => cmd_bounds(a).map(|_| true),
        Command::Tail(a) => cmd_tail(a).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("ballast: claim violated");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("ballast: {e:#}");
            ExitCode::from(2)
        }
    }
}
