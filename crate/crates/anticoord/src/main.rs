//! `anticoord` — run channel-allocation learning scenarios, list the
//! built-in presets, or cross-check the simulator against the exact chain
//! solvers. Thin wrapper over the library; see the crate examples for
//! programmatic use.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use anticoord::agent::{BackoffScheme, ExponentialForm};
use anticoord::experiments::{
    preset, presets, run_job, summarize, write_csv, write_summary_csv, InitKind, Job, JoinPlan,
    MetricRecord, RunnerKind, ScenarioConfig,
};
use anticoord::game::{SignalMode, SignalNoiseModel};
use anticoord::{verify, Error};

#[derive(Parser)]
#[command(name = "anticoord", version, about = "Decentralized channel-allocation learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a custom scenario and write data + summary CSVs.
    Run(Box<RunArgs>),
    /// List the built-in scenario presets.
    Presets,
    /// Run the chain-vs-simulation oracle suite.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackoffArg {
    Constant,
    Linear,
    Exponential,
    WorstLast,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExpFormArg {
    Literal,
    Exponent,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Random,
    Greedy,
    Polite,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignalModeArg {
    Iid,
    Roundrobin,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignalNoiseArg {
    Full,
    ExcludeTrue,
}

#[derive(Clone, Copy, ValueEnum)]
enum LearnerArg {
    Table,
    RegretMatching,
    PolyWeights,
}

#[derive(Args)]
struct RunArgs {
    /// Preset id (fig01..fig17) or "custom".
    #[arg(long, default_value = "custom")]
    scenario: String,
    /// JSON file with a ScenarioConfig; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long)]
    signals: Option<usize>,
    #[arg(long)]
    backoff: Option<BackoffArg>,
    /// Constant back-off probability.
    #[arg(long)]
    p: Option<f64>,
    /// Exponential back-off strength.
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    exp_form: Option<ExpFormArg>,
    #[arg(long)]
    init: Option<InitArg>,
    #[arg(long)]
    p_restart: Option<f64>,
    #[arg(long)]
    p_feedback: Option<f64>,
    #[arg(long)]
    p_signal: Option<f64>,
    #[arg(long)]
    signal_mode: Option<SignalModeArg>,
    /// Support of a falsely-read signal value.
    #[arg(long)]
    signal_noise: Option<SignalNoiseArg>,
    #[arg(long)]
    collision_cost: Option<f64>,
    /// Learner for custom scenarios: the table learner or a generic baseline.
    #[arg(long, default_value = "table")]
    learner: LearnerArg,
    /// Grow the population one agent at a time (custom scenarios).
    #[arg(long)]
    joining: bool,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
    /// Data CSV path; the summary lands next to it with a _summary suffix.
    #[arg(long, default_value = "anticoord.csv")]
    out: PathBuf,
}

fn load_config(path: &Path) -> Result<ScenarioConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn apply_overrides(config: &mut ScenarioConfig, args: &RunArgs) -> Result<(), Error> {
    if let Some(n) = args.agents {
        config.n_agents = n;
    }
    if let Some(c) = args.channels {
        config.n_channels = c;
    }
    if let Some(k) = args.signals {
        config.n_signals = k;
    }
    if args.backoff.is_some() || args.p.is_some() || args.mu.is_some() || args.exp_form.is_some() {
        let kind = args.backoff.unwrap_or(BackoffArg::Constant);
        config.scheme = match kind {
            BackoffArg::Constant => BackoffScheme::Constant {
                p: args.p.unwrap_or(0.5),
            },
            BackoffArg::Linear => BackoffScheme::Linear,
            BackoffArg::Exponential => BackoffScheme::Exponential {
                mu: args.mu.unwrap_or(0.5),
                form: match args.exp_form.unwrap_or(ExpFormArg::Exponent) {
                    ExpFormArg::Literal => ExponentialForm::Literal,
                    ExpFormArg::Exponent => ExponentialForm::Exponent,
                },
            },
            BackoffArg::WorstLast => BackoffScheme::WorstAgentLast,
        };
    }
    if let Some(init) = args.init {
        config.init = match init {
            InitArg::Random => InitKind::Random,
            InitArg::Greedy => InitKind::Greedy,
            InitArg::Polite => InitKind::Polite,
        };
    }
    if let Some(p) = args.p_restart {
        config.p_restart = p;
    }
    if let Some(p) = args.p_feedback {
        config.p_feedback = p;
    }
    if let Some(p) = args.p_signal {
        config.p_signal = p;
    }
    if let Some(mode) = args.signal_mode {
        config.signal_mode = match mode {
            SignalModeArg::Iid => SignalMode::Iid,
            SignalModeArg::Roundrobin => SignalMode::RoundRobin,
        };
    }
    if let Some(model) = args.signal_noise {
        config.signal_noise_model = match model {
            SignalNoiseArg::Full => SignalNoiseModel::FullSupport,
            SignalNoiseArg::ExcludeTrue => SignalNoiseModel::ExcludeTrue,
        };
    }
    if let Some(c) = args.collision_cost {
        config.collision_cost = c;
    }
    if args.joining && config.join_plan.is_none() {
        config.join_plan = Some(JoinPlan::default());
    }
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(horizon) = args.horizon {
        config.horizon = horizon;
    }
    Ok(())
}

fn custom_jobs(args: &RunArgs) -> Result<Vec<Job>, Error> {
    let mut config = match &args.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::default(),
    };
    apply_overrides(&mut config, args)?;
    let runner = match args.learner {
        LearnerArg::RegretMatching => RunnerKind::RegretMatching,
        LearnerArg::PolyWeights => RunnerKind::PolyWeights,
        LearnerArg::Table => {
            if config.join_plan.is_some() {
                RunnerKind::Joining
            } else if config.p_restart > 0.0 {
                RunnerKind::Restarting
            } else if config.p_feedback > 0.0 || config.p_signal > 0.0 {
                RunnerKind::Noisy
            } else {
                RunnerKind::Static
            }
        }
    };
    Ok(vec![Job { runner, config }])
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "anticoord".into());
    out.with_file_name(format!("{stem}_summary.csv"))
}

fn cmd_run(args: &RunArgs) -> Result<(), Error> {
    let jobs = if args.scenario == "custom" {
        custom_jobs(args)?
    } else {
        let preset = preset(&args.scenario).ok_or_else(|| {
            Error::Config(format!(
                "unknown scenario '{}'; see `anticoord presets`",
                args.scenario
            ))
        })?;
        let mut jobs = preset.jobs;
        for job in &mut jobs {
            apply_overrides(&mut job.config, args)?;
        }
        jobs
    };

    let mut records: Vec<MetricRecord> = Vec::new();
    for (index, job) in jobs.iter().enumerate() {
        eprintln!(
            "[{}/{}] {} {:?} N={} C={} K={} runs={}",
            index + 1,
            jobs.len(),
            job.config.scenario_id,
            job.runner,
            job.config.n_agents,
            job.config.n_channels,
            job.config.n_signals,
            job.config.runs,
        );
        records.extend(run_job(job.runner, &job.config)?);
    }

    write_csv(&records, &args.out)?;
    let summary = summarize(&records);
    let summary_out = summary_path(&args.out);
    write_summary_csv(&summary, &summary_out)?;
    eprintln!(
        "wrote {} records to {} and {} summary rows to {}",
        records.len(),
        args.out.display(),
        summary.len(),
        summary_out.display(),
    );
    Ok(())
}

// Tolerate a consumer that closes the pipe early (e.g. `presets | head`).
fn print_line(line: std::fmt::Arguments) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{line}");
}

fn cmd_presets() {
    for p in presets() {
        print_line(format_args!(
            "{}  {} ({} jobs)",
            p.id,
            p.description,
            p.jobs.len()
        ));
    }
}

fn cmd_verify() -> Result<bool, Error> {
    let checks = verify::oracle_suite()?;
    let mut all_passed = true;
    for check in &checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        print_line(format_args!("{status}  {}: {}", check.name, check.detail));
        all_passed &= check.passed;
    }
    Ok(all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args).map(|()| true),
        Command::Presets => {
            cmd_presets();
            Ok(true)
        }
        Command::Verify => cmd_verify(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_) | Error::Parameter(_) => ExitCode::from(2),
                Error::Io { .. } => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}
