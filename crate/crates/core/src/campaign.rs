//! Campaign orchestration: configuration, suite generation, parallel
//! execution with per-run isolation, and artifact persistence.
//!
//! Each run gets a fresh world and a fresh planner, so runs share no mutable
//! state; a work queue feeds a bounded pool of workers and results are
//! collected by case index. Re-running a config reproduces the outcome
//! archive byte for byte at any parallelism.

use crate::planners::{PerceptionConfig, PlannerKind};
use crate::report::{
    aggregate, pair_records, radar_json, read_jsonl, write_jsonl, write_mt_csv,
    write_parameters_csv, write_summary_csv, CampaignReport, ReportError, RunRecord,
};
use crate::scenario::{ScenarioClass, ScenarioError};
use crate::sim::{run_simulation, EgoDynamics, SimError, SimParams, SimulationLimits};
use crate::testgen::{
    derive_follow_ups, enumerate_test_cases, read_suite, write_suite, ClassSpec, MetamorphicPair,
    TestCase, TestGenError,
};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use thiserror::Error;

/// Tabular artifact format; the outcome archive is always JSON Lines and the
/// radar data always JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Full campaign configuration; a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct CampaignConfig {
    /// Scenario classes to enumerate and run.
    pub classes: Vec<ScenarioClass>,
    /// Classes that additionally get MR1/MR2 follow-up runs.
    pub mt_classes: Vec<ScenarioClass>,
    pub planner: PlannerKind,
    pub perception: PerceptionConfig,
    pub dynamics: EgoDynamics,
    pub limits: SimulationLimits,
    /// Worker threads; 0 means one per available CPU. Parallelism never
    /// changes outcomes.
    pub jobs: usize,
    /// Reserved for future stochastic features; the current pipeline is
    /// fully deterministic. Stamped into every outcome record.
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            classes: ScenarioClass::ALL.to_vec(),
            mt_classes: vec![ScenarioClass::D],
            planner: PlannerKind::Limited,
            perception: PerceptionConfig::default(),
            dynamics: EgoDynamics::default(),
            limits: SimulationLimits::default(),
            jobs: 0,
            seed: 0,
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

/// The outcome-relevant subset of the config. Jobs, output directory and
/// format are execution details that cannot change any record; the class
/// selection only decides which cases exist, and each record already carries
/// its own case. What remains is exactly what determines a verdict.
#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SemanticConfig<'a> {
    planner: PlannerKind,
    perception: &'a PerceptionConfig,
    dynamics: &'a EgoDynamics,
    limits: &'a SimulationLimits,
    seed: u64,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.classes.is_empty() && self.mt_classes.is_empty() {
            return Err(CampaignError::Config("no classes selected".into()));
        }
        self.limits.validate()?;
        self.dynamics.validate()?;
        Ok(())
    }

    /// Stable hash of the outcome-relevant configuration, stamped into every
    /// record for provenance.
    pub fn config_hash(&self) -> String {
        let semantic = SemanticConfig {
            planner: self.planner,
            perception: &self.perception,
            dynamics: &self.dynamics,
            limits: &self.limits,
            seed: self.seed,
        };
        let json = serde_json::to_string(&semantic).expect("config serializes");
        format!("{:016x}", fnv1a64(json.as_bytes()))
    }

    pub fn effective_jobs(&self) -> usize {
        if self.jobs == 0 {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        } else {
            self.jobs
        }
    }

    fn sim_params(&self) -> SimParams {
        SimParams {
            limits: self.limits,
            dynamics: self.dynamics,
            record_trajectory: false,
        }
    }
}

/// Enumerates the configured suite: equivalence-partitioned sources for every
/// selected class, then MR1/MR2 follow-ups for each metamorphic class's
/// daytime/clear sources.
pub fn generate_suite(config: &CampaignConfig) -> Result<Vec<TestCase>, CampaignError> {
    config.validate()?;
    let mut classes: Vec<ScenarioClass> = config
        .classes
        .iter()
        .chain(config.mt_classes.iter())
        .copied()
        .collect();
    classes.sort();
    classes.dedup();

    let mut suite = Vec::new();
    for &class in &classes {
        suite.extend(enumerate_test_cases(&ClassSpec::canonical(class))?);
    }
    for &class in &classes {
        if !config.mt_classes.contains(&class) {
            continue;
        }
        let sources: Vec<TestCase> = suite
            .iter()
            .filter(|c| c.class_id == class && c.environment.is_clear_noon())
            .cloned()
            .collect();
        for source in sources {
            let (mr1, mr2) = derive_follow_ups(&source)?;
            suite.push(mr1);
            suite.push(mr2);
        }
    }
    Ok(suite)
}

fn run_one(
    case: &TestCase,
    config: &CampaignConfig,
    params: &SimParams,
    config_hash: &str,
) -> Result<RunRecord, CampaignError> {
    let instance = case.build_instance()?;
    let mut planner = config.planner.build(&config.perception);
    let outcome = run_simulation(&instance, planner.as_mut(), params)?;
    Ok(RunRecord::new(case, &outcome, config.seed, config_hash))
}

/// Runs every case on a worker pool; records come back in case order
/// regardless of scheduling. On a failed run the completed records are
/// returned alongside the error so callers can persist partial results.
pub fn run_suite(
    cases: &[TestCase],
    config: &CampaignConfig,
) -> Result<Vec<RunRecord>, SuiteFailure> {
    let params = config.sim_params();
    let hash = config.config_hash();
    let jobs = config.effective_jobs().min(cases.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<RunRecord, CampaignError>>>> =
        (0..cases.len()).map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cases.len() {
                    break;
                }
                let result = run_one(&cases[i], config, &params, &hash);
                *slots[i].lock().expect("result slot") = Some(result);
            });
        }
    });

    let mut records = Vec::with_capacity(cases.len());
    for (i, slot) in slots.into_iter().enumerate() {
        match slot.into_inner().expect("result slot") {
            Some(Ok(record)) => records.push(record),
            Some(Err(err)) => {
                return Err(SuiteFailure {
                    completed: records,
                    case_id: cases[i].id.clone(),
                    error: err.to_string(),
                })
            }
            None => unreachable!("every case is claimed by a worker"),
        }
    }
    Ok(records)
}

/// A suite run that stopped early; completed records are preserved.
#[derive(Debug)]
pub struct SuiteFailure {
    pub completed: Vec<RunRecord>,
    pub case_id: String,
    pub error: String,
}

/// Campaign provenance and completeness marker, written first with
/// `complete: false` and finalized after all artifacts are on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub config: CampaignConfig,
    pub config_hash: String,
    pub complete: bool,
    pub total_cases: usize,
    pub completed_cases: usize,
    pub failures_found: usize,
    pub files: Vec<String>,
    pub error: Option<String>,
}

/// Everything a finished campaign produced.
#[derive(Debug)]
pub struct CampaignOutput {
    pub records: Vec<RunRecord>,
    pub pairs: Vec<MetamorphicPair>,
    pub report: CampaignReport,
    pub manifest: Manifest,
    pub out_dir: PathBuf,
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), CampaignError> {
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(manifest)?,
    )?;
    Ok(())
}

/// Runs the configured campaign end to end and persists all artifacts into
/// the output directory:
///
/// * `suite.json` - the generated cases (replayable)
/// * `outcomes.jsonl` - one record per run
/// * `summary.csv`/`.json`, `parameters.csv`/`.json` - tabular reports
/// * `mt_pairs.jsonl`, `mt_summary.csv`/`.json` - metamorphic results
/// * `radar.json` - per-case parameter polylines
/// * `report.json` - the full aggregated report
/// * `manifest.json` - config, hash, completeness
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignOutput, CampaignError> {
    config.validate()?;
    let out_dir = config.out_dir.clone();
    fs::create_dir_all(&out_dir)?;
    let suite = generate_suite(config)?;
    let config_hash = config.config_hash();

    let mut manifest = Manifest {
        config: config.clone(),
        config_hash: config_hash.clone(),
        complete: false,
        total_cases: suite.len(),
        completed_cases: 0,
        failures_found: 0,
        files: Vec::new(),
        error: None,
    };
    write_manifest(&out_dir, &manifest)?;
    write_suite(&out_dir.join("suite.json"), &suite)?;

    let records = match run_suite(&suite, config) {
        Ok(records) => records,
        Err(failure) => {
            // Preserve what completed and mark the campaign incomplete.
            let mut buffer = Vec::new();
            write_jsonl(&failure.completed, &mut buffer)?;
            fs::write(out_dir.join("outcomes.jsonl"), buffer)?;
            manifest.completed_cases = failure.completed.len();
            manifest.failures_found = failure.completed.iter().filter(|r| r.is_failure()).count();
            manifest.error = Some(format!("case {}: {}", failure.case_id, failure.error));
            manifest.files = vec!["suite.json".into(), "outcomes.jsonl".into()];
            write_manifest(&out_dir, &manifest)?;
            return Err(CampaignError::Incomplete {
                completed: manifest.completed_cases,
                total: manifest.total_cases,
                error: manifest.error.clone().unwrap_or_default(),
            });
        }
    };

    let files = write_artifacts(&out_dir, &records, config.format)?;
    let pairs = pair_records(&records)?;
    let report = aggregate(&records)?;

    manifest.completed_cases = records.len();
    manifest.failures_found = records.iter().filter(|r| r.is_failure()).count();
    manifest.complete = true;
    manifest.files = files;
    write_manifest(&out_dir, &manifest)?;

    Ok(CampaignOutput {
        records,
        pairs,
        report,
        manifest,
        out_dir,
    })
}

/// Writes every report artifact derived from a record set. Returns the file
/// names written. Also used by the re-aggregation path.
pub fn write_artifacts(
    dir: &Path,
    records: &[RunRecord],
    format: OutputFormat,
) -> Result<Vec<String>, CampaignError> {
    let mut files = vec!["manifest.json".to_string(), "suite.json".to_string()];
    let mut buffer = Vec::new();
    write_jsonl(records, &mut buffer)?;
    fs::write(dir.join("outcomes.jsonl"), buffer)?;
    files.push("outcomes.jsonl".into());

    let report = aggregate(records)?;
    let pairs = pair_records(records)?;

    match format {
        OutputFormat::Csv => {
            let mut summary = Vec::new();
            write_summary_csv(&report, &mut summary)?;
            fs::write(dir.join("summary.csv"), summary)?;
            files.push("summary.csv".into());

            let mut parameters = Vec::new();
            write_parameters_csv(&report, &mut parameters)?;
            fs::write(dir.join("parameters.csv"), parameters)?;
            files.push("parameters.csv".into());

            if !report.mt.is_empty() {
                let mut mt = Vec::new();
                write_mt_csv(&report, &mut mt)?;
                fs::write(dir.join("mt_summary.csv"), mt)?;
                files.push("mt_summary.csv".into());
            }
        }
        OutputFormat::Json => {
            fs::write(
                dir.join("summary.json"),
                serde_json::to_string_pretty(&report.per_class)?,
            )?;
            files.push("summary.json".into());
            fs::write(
                dir.join("parameters.json"),
                serde_json::to_string_pretty(&report.parameters)?,
            )?;
            files.push("parameters.json".into());
            if !report.mt.is_empty() {
                fs::write(
                    dir.join("mt_summary.json"),
                    serde_json::to_string_pretty(&report.mt)?,
                )?;
                files.push("mt_summary.json".into());
            }
        }
    }

    if !pairs.is_empty() {
        let mut buffer = Vec::new();
        for p in &pairs {
            serde_json::to_writer(&mut buffer, p)?;
            buffer.push(b'\n');
        }
        fs::write(dir.join("mt_pairs.jsonl"), buffer)?;
        files.push("mt_pairs.jsonl".into());
    }

    fs::write(
        dir.join("radar.json"),
        serde_json::to_string_pretty(&radar_json(&report))?,
    )?;
    files.push("radar.json".into());
    fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    files.push("report.json".into());
    Ok(files)
}

/// Re-aggregates stored outcome archives (concatenating all inputs) and
/// rewrites the report artifacts into `out_dir`. The result is identical to
/// the report the original campaign wrote, regardless of how the records are
/// split across inputs.
pub fn reaggregate(
    inputs: &[PathBuf],
    out_dir: &Path,
    format: OutputFormat,
) -> Result<CampaignReport, CampaignError> {
    let mut records = Vec::new();
    for input in inputs {
        let file = fs::File::open(input)
            .map_err(|e| CampaignError::Config(format!("cannot open {}: {e}", input.display())))?;
        records.extend(read_jsonl(BufReader::new(file))?);
    }
    if records.is_empty() {
        return Err(CampaignError::Config("no records to aggregate".into()));
    }
    fs::create_dir_all(out_dir)?;
    // write_artifacts rewrites outcomes.jsonl with the concatenation, which
    // keeps the directory self-contained.
    write_artifacts(out_dir, &records, format)?;
    aggregate(&records).map_err(Into::into)
}

/// Loads a suite file previously written by [`generate_suite`]'s JSON form.
pub fn load_suite(path: &Path) -> Result<Vec<TestCase>, CampaignError> {
    Ok(read_suite(path)?)
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    TestGen(#[from] TestGenError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("campaign incomplete: {completed}/{total} runs finished ({error})")]
    Incomplete {
        completed: usize,
        total: usize,
        error: String,
    },
}
