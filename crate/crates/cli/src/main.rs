use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oalens::model::parse_period;
use oalens::{
    run_pipeline, BundlePart, ConfigError, DenominatorMode, InputPaths, PipelineConfig,
    PipelineError, ReportFormat,
};

/// Classify publications into Open Access types and compute institutional
/// OA indicators. Every flag can also be set through an `OALENS_*`
/// environment variable.
#[derive(Debug, Parser)]
#[command(name = "oalens", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-publication OA type labels.
    Classify(RunArgs),
    /// University, country, region and field indicator tables.
    Aggregate(RunArgs),
    /// Share of green output held in each university's own repository.
    RepoMatch(RunArgs),
    /// PubMed Central share of green OA by country.
    PmcReport(RunArgs),
    /// National, English-language and APC shares of gold OA by country.
    GoldModel(RunArgs),
    /// The full report bundle.
    Report(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Evidence dump, one JSON object per line, optionally gzipped.
    #[arg(long, env = "OALENS_EVIDENCE")]
    evidence: PathBuf,
    /// Publication table (CSV, or JSON lines for .jsonl/.ndjson).
    #[arg(long, env = "OALENS_PUBLICATIONS")]
    publications: PathBuf,
    /// Institution roster.
    #[arg(long, env = "OALENS_INSTITUTIONS")]
    institutions: Option<PathBuf>,
    /// Journal registry.
    #[arg(long, env = "OALENS_JOURNALS")]
    journals: Option<PathBuf>,
    #[arg(long, env = "OALENS_OUT_DIR", default_value = "oalens-out")]
    out_dir: PathBuf,
    /// csv or jsonl.
    #[arg(long, env = "OALENS_FORMAT", default_value = "csv")]
    format: ReportFormat,
    /// Universities a country needs to appear in the displayed medians.
    #[arg(long, env = "OALENS_MIN_UNIVERSITIES", default_value_t = 10)]
    min_universities: usize,
    /// Universities a country needs to appear in the displayed gold model.
    #[arg(long, env = "OALENS_MIN_UNIVERSITIES_GOLD", default_value_t = 5)]
    min_universities_gold: usize,
    /// Share denominator: all publications or only those with a DOI.
    #[arg(long, env = "OALENS_DENOMINATOR", default_value = "all")]
    denominator: DenominatorMode,
    /// URL substring identifying PubMed Central copies. Repeatable.
    #[arg(
        long = "pmc-pattern",
        env = "OALENS_PMC_PATTERN",
        value_delimiter = ',',
        default_value = "ncbi.nlm.nih.gov/pmc"
    )]
    pmc_patterns: Vec<String>,
    /// URL substring counted towards the upper repository bound.
    #[arg(long, env = "OALENS_HANDLE_PATTERN", default_value = "hdl.handle.net")]
    handle_pattern: String,
    /// Publication years, START-END.
    #[arg(long, env = "OALENS_PERIOD", default_value = "2014-2017")]
    period: String,
    /// Worker shards for classification and counting.
    #[arg(long, env = "OALENS_SHARDS", default_value_t = 1)]
    shards: usize,
    /// Fraction of rejected lines per input that aborts the run.
    #[arg(long, env = "OALENS_MAX_ISSUE_RATE", default_value_t = 0.1)]
    max_issue_rate: f64,
    /// Write every parse issue to this file.
    #[arg(long, env = "OALENS_ISSUE_LOG")]
    issue_log: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<PipelineConfig, ConfigError> {
        Ok(PipelineConfig {
            min_universities_country: self.min_universities,
            min_universities_gold_model: self.min_universities_gold,
            denominator_mode: self.denominator,
            pmc_url_patterns: self.pmc_patterns.clone(),
            handle_pattern: self.handle_pattern.clone(),
            period: parse_period(&self.period)?,
            max_issue_rate: self.max_issue_rate,
            shards: self.shards,
        })
    }

    fn inputs(&self) -> InputPaths {
        InputPaths {
            evidence: self.evidence.clone(),
            publications: self.publications.clone(),
            institutions: self.institutions.clone(),
            journals: self.journals.clone(),
            issue_log: self.issue_log.clone(),
        }
    }
}

fn run(part: BundlePart, args: &RunArgs) -> Result<(), PipelineError> {
    let config = args.config()?;
    if part != BundlePart::Classify && args.institutions.is_none() {
        return Err(
            ConfigError::Invalid("--institutions is required for this command".into()).into(),
        );
    }
    let bundle = run_pipeline(&config, &args.inputs())?;
    for path in bundle.write(&args.out_dir, part, args.format)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (part, args) = match &cli.command {
        Command::Classify(a) => (BundlePart::Classify, a),
        Command::Aggregate(a) => (BundlePart::Aggregate, a),
        Command::RepoMatch(a) => (BundlePart::RepoMatch, a),
        Command::PmcReport(a) => (BundlePart::PmcReport, a),
        Command::GoldModel(a) => (BundlePart::GoldModel, a),
        Command::Report(a) => (BundlePart::Report, a),
    };
    match run(part, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("oalens: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
