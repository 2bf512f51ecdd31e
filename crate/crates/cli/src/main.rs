use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use busfactor_core::config::{self, AlgorithmChoice, OutputFormat, ParamOverrides, RunConfig};
use busfactor_core::event::write_event_log;
use busfactor_core::{evaluate, pipeline, report, Error, ErrorCategory};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "busfactor", version, about = "Estimate a project's bus factor and key engineers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one branch of a git repository.
    Analyze(Box<AnalyzeArgs>),
    /// Compare predictions against human ground truth.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    repo: PathBuf,
    /// Branch to analyze; defaults to the checked-out branch.
    #[arg(long)]
    branch: Option<String>,
    /// JSON array of code reviews.
    #[arg(long)]
    reviews: Option<PathBuf>,
    /// JSON array of meetings.
    #[arg(long)]
    meetings: Option<PathBuf>,
    /// TOML file with algorithm parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "multimodal", value_parser = parse_algorithm)]
    algorithm: AlgorithmChoice,
    /// Analysis instant (RFC 3339 or YYYY-MM-DD). Defaults to the latest of
    /// the head commit and the newest event.
    #[arg(long)]
    as_of: Option<String>,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: OutputFormat,
    /// Also write the contribution-event log to this file.
    #[arg(long)]
    events_out: Option<PathBuf>,
    #[command(flatten)]
    params: ParamFlags,
}

#[derive(Args)]
struct ParamFlags {
    #[arg(long)]
    decay_days: Option<f64>,
    #[arg(long)]
    mte_minutes: Option<f64>,
    #[arg(long)]
    fa_weight: Option<f64>,
    #[arg(long)]
    dl_weight: Option<f64>,
    #[arg(long)]
    rv_weight: Option<f64>,
    #[arg(long)]
    log_dl_weight: Option<f64>,
    #[arg(long)]
    log_rv_weight: Option<f64>,
    #[arg(long)]
    doa_threshold: Option<f64>,
    #[arg(long)]
    norm_threshold: Option<f64>,
    #[arg(long)]
    coverage_threshold: Option<f64>,
    #[arg(long)]
    meeting_window_days: Option<u32>,
    /// Meeting title keyword to exclude; repeat for several. Replaces the defaults.
    #[arg(long = "exclude-keyword")]
    exclude_keywords: Vec<String>,
}

impl ParamFlags {
    fn overrides(&self) -> ParamOverrides {
        ParamOverrides {
            decay_days: self.decay_days,
            mte_minutes: self.mte_minutes,
            fa_weight: self.fa_weight,
            dl_weight: self.dl_weight,
            rv_weight: self.rv_weight,
            log_dl_weight: self.log_dl_weight,
            log_rv_weight: self.log_rv_weight,
            doa_threshold: self.doa_threshold,
            norm_threshold: self.norm_threshold,
            coverage_threshold: self.coverage_threshold,
            meeting_window_days: self.meeting_window_days,
            meeting_exclude_keywords: (!self.exclude_keywords.is_empty())
                .then(|| self.exclude_keywords.iter().map(|k| k.to_lowercase()).collect()),
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: OutputFormat,
}

fn parse_algorithm(s: &str) -> Result<AlgorithmChoice, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse()
}

fn analyze(args: AnalyzeArgs) -> busfactor_core::Result<String> {
    let mut config = RunConfig::new(&args.repo);
    config.branch = args.branch;
    config.reviews_path = args.reviews;
    config.meetings_path = args.meetings;
    config.algorithm = args.algorithm;
    config.format = args.format;
    config.params = config::load_params(args.config.as_deref(), &args.params.overrides())?;
    config.as_of = args.as_of.as_deref().map(config::parse_instant).transpose()?;

    let ingested = pipeline::ingest(&config)?;
    if let Some(path) = &args.events_out {
        let file = std::fs::File::create(path).map_err(|e| Error::Input {
            path: path.clone(),
            message: e.to_string(),
        })?;
        write_event_log(&ingested.events, std::io::BufWriter::new(file))?;
    }
    let doc = pipeline::report(&ingested, &config)?;
    Ok(match config.format {
        OutputFormat::Json => report::to_json(&doc),
        OutputFormat::Text => report::render_text(&doc),
    })
}

fn evaluate_cmd(args: EvaluateArgs) -> busfactor_core::Result<String> {
    let predictions = evaluate::load_predictions(&args.predictions)?;
    let truth = evaluate::load_truth(&args.truth)?;
    let result = evaluate::evaluate(&predictions, &truth)?;
    for w in &result.warnings {
        log::warn!("{w}");
    }
    Ok(match args.format {
        OutputFormat::Json => report::to_json(&result),
        OutputFormat::Text => evaluate::render_text(&result),
    })
}

fn exit_code(err: &Error) -> u8 {
    match err.category() {
        ErrorCategory::Usage => 1,
        ErrorCategory::InputData => 2,
        ErrorCategory::Repository => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let result = match cli.command {
        Command::Analyze(args) => analyze(*args),
        Command::Evaluate(args) => evaluate_cmd(args),
    };
    match result {
        Ok(output) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(output.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
