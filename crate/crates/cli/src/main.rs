//! Campaign command line: generate suites, run them, derive metamorphic
//! follow-ups, and re-aggregate stored outcomes.
//!
//! Every flag can also come from an environment variable with the same name
//! prefixed `CROSSCHECK_`, and from a JSON config file; flags win over the
//! environment, which wins over the config file.
//!
//! Exit code 0 means the campaign completed, whether or not it found
//! failures; nonzero is reserved for execution errors.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use crosscheck::campaign::{
    generate_suite, load_suite, reaggregate, run_campaign, run_suite, write_artifacts,
    CampaignConfig, OutputFormat,
};
use crosscheck::planners::PlannerKind;
use crosscheck::report::aggregate;
use crosscheck::scenario::ScenarioClass;
use crosscheck::testgen::write_suite;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "crosscheck",
    version,
    about = "Scenario-based safety testing campaigns for driving planners"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON campaign config; flags override its fields.
    #[arg(long, env = "CROSSCHECK_CONFIG", global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, env = "CROSSCHECK_OUT", global = true)]
    out: Option<PathBuf>,
    /// Scenario classes: A, B, C, D or all.
    #[arg(long = "class", env = "CROSSCHECK_CLASS", global = true)]
    class: Option<String>,
    /// Planner: blind, oracle or limited.
    #[arg(long, env = "CROSSCHECK_PLANNER", global = true)]
    planner: Option<PlannerKind>,
    /// Worker threads (0 = one per CPU). Never changes outcomes.
    #[arg(long, env = "CROSSCHECK_JOBS", global = true)]
    jobs: Option<usize>,
    /// Tabular artifact format: csv or json.
    #[arg(long, env = "CROSSCHECK_FORMAT", global = true)]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the equivalence-partitioned suite (plus configured metamorphic
    /// follow-ups) as JSON, without running anything.
    Generate {
        #[command(flatten)]
        common: CommonArgs,
        /// Also derive MR1/MR2 follow-ups for the selected classes.
        #[arg(long)]
        mt: bool,
        /// Suite file to write (default: <out>/suite.json).
        #[arg(long)]
        suite: Option<PathBuf>,
    },
    /// Run the equivalence-partitioning campaign (plus any metamorphic
    /// classes in the config) and write all artifacts.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Replay a previously generated suite file instead of enumerating.
        #[arg(long)]
        suite: Option<PathBuf>,
    },
    /// Run a metamorphic campaign over one class: sources plus MR1/MR2
    /// follow-ups, paired and checked.
    Mt {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Re-aggregate stored outcome archives into fresh reports.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        /// Outcome JSONL files to aggregate (concatenated).
        #[arg(long = "input", required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn parse_classes(spec: &str) -> Result<Vec<ScenarioClass>> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(ScenarioClass::ALL.to_vec());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<ScenarioClass>()
                .map_err(|e| anyhow::anyhow!("{e}"))
        })
        .collect()
}

fn parse_format(spec: &str) -> Result<OutputFormat> {
    match spec.trim().to_ascii_lowercase().as_str() {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => bail!("unknown format: {other} (expected csv or json)"),
    }
}

/// Loads the config file (if any) and layers the command-line overrides.
fn resolve_config(common: &CommonArgs) -> Result<CampaignConfig> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => CampaignConfig::default(),
    };
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    }
    if let Some(class) = &common.class {
        config.classes = parse_classes(class)?;
        // Keep metamorphic classes within the selection.
        config.mt_classes.retain(|c| config.classes.contains(c));
    }
    if let Some(planner) = common.planner {
        config.planner = planner;
    }
    if let Some(jobs) = common.jobs {
        config.jobs = jobs;
    }
    if let Some(format) = &common.format {
        config.format = parse_format(format)?;
    }
    Ok(config)
}

fn cmd_generate(common: &CommonArgs, mt: bool, suite_path: Option<PathBuf>) -> Result<()> {
    let mut config = resolve_config(common)?;
    if mt {
        config.mt_classes = config.classes.clone();
    } else if common.class.is_some() {
        // An explicit class selection without --mt generates sources only.
        config.mt_classes.clear();
    }
    let suite = generate_suite(&config)?;
    let path = match suite_path {
        Some(p) => p,
        None => {
            std::fs::create_dir_all(&config.out_dir)?;
            config.out_dir.join("suite.json")
        }
    };
    write_suite(&path, &suite)?;
    println!("wrote {} cases to {}", suite.len(), path.display());
    Ok(())
}

fn cmd_run(common: &CommonArgs, suite: Option<PathBuf>) -> Result<()> {
    let config = resolve_config(common)?;
    match suite {
        Some(path) => {
            // Replay a stored suite exactly.
            let cases = load_suite(&path)?;
            std::fs::create_dir_all(&config.out_dir)?;
            let records = match run_suite(&cases, &config) {
                Ok(records) => records,
                Err(failure) => bail!(
                    "campaign incomplete at case {}: {}",
                    failure.case_id,
                    failure.error
                ),
            };
            write_suite(&config.out_dir.join("suite.json"), &cases)?;
            write_artifacts(&config.out_dir, &records, config.format)?;
            let report = aggregate(&records)?;
            print_summary(records.len(), report.overall.failed_cases, &config);
        }
        None => {
            let output = run_campaign(&config)?;
            print_summary(
                output.records.len(),
                output.manifest.failures_found,
                &config,
            );
        }
    }
    Ok(())
}

fn cmd_mt(common: &CommonArgs) -> Result<()> {
    let mut config = resolve_config(common)?;
    if config.classes.len() != 1 {
        bail!("mt runs one class at a time; pass --class A|B|C|D");
    }
    config.mt_classes = config.classes.clone();
    let output = run_campaign(&config)?;
    for s in &output.report.mt {
        println!(
            "{}: {} pairs, {} source failures, {} follow-up failures, {} violations",
            s.relation, s.pairs, s.source_failures, s.follow_up_failures, s.violations
        );
    }
    print_summary(
        output.records.len(),
        output.manifest.failures_found,
        &config,
    );
    Ok(())
}

fn cmd_report(common: &CommonArgs, inputs: &[PathBuf]) -> Result<()> {
    let config = resolve_config(common)?;
    let report = reaggregate(inputs, &config.out_dir, config.format)?;
    println!(
        "aggregated {} cases ({} failed) into {}",
        report.overall.total_cases,
        report.overall.failed_cases,
        config.out_dir.display()
    );
    Ok(())
}

fn print_summary(records: usize, failures: usize, config: &CampaignConfig) {
    println!(
        "campaign complete: {records} runs, {failures} failures found, artifacts in {}",
        config.out_dir.display()
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate { common, mt, suite } => cmd_generate(common, *mt, suite.clone()),
        Command::Run { common, suite } => cmd_run(common, suite.clone()),
        Command::Mt { common } => cmd_mt(common),
        Command::Report { common, inputs } => cmd_report(common, inputs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
