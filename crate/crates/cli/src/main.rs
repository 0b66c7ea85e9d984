use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thzlab::{AggregateMode, Metric, MuConvention};
use thzlab_cli::commands::{self, AxisArg, OptimizeTarget, Range};
use thzlab_cli::output::{json_document, write_atomic, write_report};
use thzlab_cli::scenario::SchemeKind;
use thzlab_cli::{CliError, Report, Resolved, ScenarioFile};

#[derive(Parser)]
#[command(
    name = "thzlab",
    version,
    about = "Outage and capacity of terahertz links under micro-mobility"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outage, spectral efficiency and capacity of both schemes.
    Metrics(Common),
    /// Time-to-misalignment pdf and cdf on a log grid.
    Fpt {
        #[command(flatten)]
        common: Common,
        /// Time grid in seconds, log-spaced.
        #[arg(long)]
        range: Option<Range>,
    },
    /// One metric along one parameter axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// update_period (ms), n_ue, n_ap, dx (m), dphi (deg), distance (m) or realignment_time (ms).
        #[arg(long)]
        axis: AxisArg,
        /// Linear grid in the axis unit.
        #[arg(long)]
        range: Range,
        /// outage, spectral_efficiency, capacity or mean_time.
        #[arg(long, default_value = "outage", value_parser = commands::parse_metric)]
        metric: Metric,
    },
    /// Optimal update period, array size or array pair.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// update_period, n_ue, n_ap, joint, or envelope over distance.
        #[arg(long)]
        axis: OptimizeTarget,
        /// Distances in m for the envelope, linear.
        #[arg(long)]
        range: Option<Range>,
    },
    /// Monte Carlo run of the configured scheme.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write one realignment event per line to this TSV file.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Simulation against the analytic model; nonzero exit on mismatch.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario JSON. Defaults apply to omitted fields, or to everything without this flag.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Accept an empty scenario file as the default scenario.
    #[arg(long)]
    allow_empty: bool,
    /// Output path; `.csv` and `.json` are written side by side. Without it the JSON goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// on_demand or periodic.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<SchemeKind>,
    /// lognormal or exact.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<AggregateMode>,
    /// moment_matched or paper_literal.
    #[arg(long, value_parser = parse_mu)]
    mu: Option<MuConvention>,
}

fn parse_enum<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_scheme(s: &str) -> Result<SchemeKind, String> {
    parse_enum(s)
}

fn parse_mode(s: &str) -> Result<AggregateMode, String> {
    parse_enum(s)
}

fn parse_mu(s: &str) -> Result<MuConvention, String> {
    parse_enum(s)
}

impl Common {
    /// The scenario with command-line overrides folded in, so the echo is
    /// what actually ran.
    fn scenario(&self) -> Result<ScenarioFile, CliError> {
        let mut s = match &self.scenario {
            Some(p) => ScenarioFile::load(p, self.allow_empty)?,
            None => ScenarioFile::default(),
        };
        if let Some(seed) = self.seed {
            s.simulation.seed = seed;
        }
        if let Some(n) = self.trials {
            s.simulation.trials = n;
        }
        if let Some(k) = self.scheme {
            s.scheme.kind = k;
        }
        if let Some(m) = self.mode {
            s.flags.aggregate_mode = m;
        }
        if let Some(m) = self.mu {
            s.flags.mu_convention = m;
        }
        Ok(s)
    }
}

fn emit(
    out: Option<&Path>,
    report: &Report,
    scenario: &ScenarioFile,
    resolved: &Resolved,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let (csv, json) = write_report(path, report, scenario, resolved)?;
            log::info!("wrote {} and {}", csv.display(), json.display());
        }
        None => {
            let doc = json_document(report, scenario, resolved);
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("document serializes")
            );
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Metrics(c) | Command::Validate(c) => c,
        Command::Fpt { common, .. }
        | Command::Sweep { common, .. }
        | Command::Optimize { common, .. }
        | Command::Simulate { common, .. } => common,
    };
    let scenario = common.scenario()?;
    let resolved = scenario.resolve()?;
    let out = common.out.as_deref();
    let report = match &cli.command {
        Command::Metrics(_) => commands::metrics(&resolved)?,
        Command::Fpt { range, .. } => commands::fpt(&resolved, *range)?,
        Command::Sweep {
            axis,
            range,
            metric,
            ..
        } => commands::sweep_cmd(&resolved, *axis, *range, *metric)?,
        Command::Optimize { axis, range, .. } => commands::optimize(&resolved, *axis, *range)?,
        Command::Simulate { events, .. } => {
            let (report, trace) = commands::simulate(&resolved, events.is_some())?;
            if let Some(path) = events {
                let mut buf = Vec::new();
                thzlab::sim::write_trace_tsv(&trace, &mut buf)
                    .map_err(|e| CliError::io(path, e))?;
                write_atomic(path, &buf)?;
            }
            report
        }
        Command::Validate(_) => {
            let v = commands::validate(&resolved)?;
            emit(out, &v.report, &scenario, &resolved)?;
            if !v.passed {
                return Err(CliError::ChecksFailed(v.failures.join("; ")));
            }
            return Ok(());
        }
    };
    emit(out, &report, &scenario, &resolved)
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("THZLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::validation(
            "THZLAB_THREADS",
            format!("must be a positive integer, got {v:?}"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => return fail(&CliError::Usage(e.to_string())),
    };
    if let Err(e) = init_threads() {
        return fail(&e);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
