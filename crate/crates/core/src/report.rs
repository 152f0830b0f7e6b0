//! Outcome aggregation: per-class summaries, per-parameter failure
//! breakdowns, metamorphic summaries and radar-plot data.

use crate::scenario::{EnvironmentConditions, ParamValue, ParameterAssignment, ScenarioClass};
use crate::sim::{CollisionDetail, SimulationOutcome, Verdict};
use crate::testgen::{CaseRole, ClassSpec, MetamorphicPair, Relation, RelationResult, TestCase};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use thiserror::Error;

/// One archived simulation run: the case, its verdict and provenance.
/// Serialized as one JSON object per line in `outcomes.jsonl`. Wall-clock
/// cost is deliberately absent so archives are byte-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunRecord {
    pub case_id: String,
    pub class_id: ScenarioClass,
    pub role: CaseRole,
    pub source_id: Option<String>,
    pub params: ParameterAssignment,
    pub environment: EnvironmentConditions,
    pub verdict: Verdict,
    pub collision: Option<CollisionDetail>,
    pub destination_reached: bool,
    /// Simulated end time, seconds.
    pub sim_time: f64,
    pub seed: u64,
    pub config_hash: String,
}

impl RunRecord {
    pub fn new(case: &TestCase, outcome: &SimulationOutcome, seed: u64, config_hash: &str) -> Self {
        RunRecord {
            case_id: case.id.clone(),
            class_id: case.class_id,
            role: case.role,
            source_id: case.source_id.clone(),
            params: case.params.clone(),
            environment: case.environment,
            verdict: outcome.verdict,
            collision: outcome.collision.clone(),
            destination_reached: outcome.destination_reached,
            sim_time: outcome.sim_time,
            seed,
            config_hash: config_hash.to_string(),
        }
    }

    /// Reconstructs the test case, enabling replay from archives alone.
    pub fn to_case(&self) -> TestCase {
        TestCase {
            id: self.case_id.clone(),
            class_id: self.class_id,
            params: self.params.clone(),
            environment: self.environment,
            role: self.role,
            source_id: self.source_id.clone(),
        }
    }

    pub fn is_failure(&self) -> bool {
        self.verdict.is_failure()
    }
}

/// One-decimal percentage, rounding half away from zero; 0 when `total` is 0.
pub fn percent_one_decimal(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        (count as f64 / total as f64 * 1000.0).round() / 10.0
    }
}

/// Failure-rate percentage for summary tables, rounded to a whole percent
/// (the tables print it with one decimal, e.g. 58/576 -> 10.0, 25/81 -> 31.0).
pub fn summary_rate_percent(failed: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        (failed as f64 / total as f64 * 100.0).round()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassSummary {
    pub label: String,
    pub parameters: usize,
    pub failed_cases: usize,
    pub total_cases: usize,
    /// Raw ratio `failed / total`.
    pub failure_rate: f64,
}

impl ClassSummary {
    /// Table presentation of the rate, in percent.
    pub fn rate_percent(&self) -> f64 {
        summary_rate_percent(self.failed_cases, self.total_cases)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValueRow {
    pub value: ParamValue,
    pub failures: usize,
    /// Share of the class's failures carrying this value, one decimal.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ParameterBreakdown {
    pub parameter: String,
    pub rows: Vec<ValueRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RelationSummary {
    pub relation: Relation,
    pub pairs: usize,
    pub source_failures: usize,
    pub follow_up_failures: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RadarPoint {
    pub parameter: String,
    pub value: ParamValue,
}

/// One case drawn over its class's parameter axes, tagged safe/unsafe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RadarPolyline {
    pub case_id: String,
    pub class_id: ScenarioClass,
    pub failed: bool,
    pub points: Vec<RadarPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OverallSummary {
    pub failed_cases: usize,
    pub total_cases: usize,
    pub failure_rate: f64,
}

impl OverallSummary {
    pub fn rate_percent(&self) -> f64 {
        summary_rate_percent(self.failed_cases, self.total_cases)
    }
}

/// Aggregated campaign results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CampaignReport {
    pub per_class: BTreeMap<ScenarioClass, ClassSummary>,
    pub overall: OverallSummary,
    pub parameters: BTreeMap<ScenarioClass, Vec<ParameterBreakdown>>,
    pub mt: Vec<RelationSummary>,
    pub radar: BTreeMap<ScenarioClass, Vec<RadarPolyline>>,
}

/// Aggregates run records using the canonical class partition tables.
///
/// Source-role records feed the per-class totals, parameter breakdowns and
/// radar polylines; follow-up records pair with their sources into the
/// metamorphic summary. Aggregation is a pure fold: permuting the input
/// changes nothing.
pub fn aggregate(records: &[RunRecord]) -> Result<CampaignReport, ReportError> {
    let specs: Vec<ClassSpec> = ScenarioClass::ALL
        .iter()
        .map(|c| ClassSpec::canonical(*c))
        .collect();
    aggregate_with_specs(records, &specs)
}

/// [`aggregate`] with explicit partition tables (one per class of interest).
pub fn aggregate_with_specs(
    records: &[RunRecord],
    specs: &[ClassSpec],
) -> Result<CampaignReport, ReportError> {
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert(r.case_id.as_str()) {
            return Err(ReportError::DuplicateCase(r.case_id.clone()));
        }
    }

    let mut sources: BTreeMap<ScenarioClass, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        if r.role == CaseRole::Source {
            sources.entry(r.class_id).or_default().push(r);
        }
    }

    let mut per_class = BTreeMap::new();
    let mut parameters = BTreeMap::new();
    let mut radar = BTreeMap::new();
    let mut overall_failed = 0;
    let mut overall_total = 0;

    for (&class, class_records) in &sources {
        let total = class_records.len();
        let failed = class_records.iter().filter(|r| r.is_failure()).count();
        overall_failed += failed;
        overall_total += total;
        let spec = specs
            .iter()
            .find(|s| s.class_id == class)
            .ok_or(ReportError::MissingSpec(class))?;
        per_class.insert(
            class,
            ClassSummary {
                label: class.label().to_string(),
                parameters: spec.partitions.len(),
                failed_cases: failed,
                total_cases: total,
                failure_rate: if total == 0 {
                    0.0
                } else {
                    failed as f64 / total as f64
                },
            },
        );

        let mut breakdowns = Vec::with_capacity(spec.partitions.len());
        for partition in &spec.partitions {
            let rows = partition
                .values
                .iter()
                .map(|value| {
                    let failures = class_records
                        .iter()
                        .filter(|r| r.is_failure() && r.params.get(&partition.name) == Some(value))
                        .count();
                    ValueRow {
                        value: value.clone(),
                        failures,
                        percent: percent_one_decimal(failures, failed),
                    }
                })
                .collect();
            breakdowns.push(ParameterBreakdown {
                parameter: partition.name.clone(),
                rows,
            });
        }
        parameters.insert(class, breakdowns);

        let polylines = class_records
            .iter()
            .map(|r| RadarPolyline {
                case_id: r.case_id.clone(),
                class_id: class,
                failed: r.is_failure(),
                points: spec
                    .partitions
                    .iter()
                    .map(|p| RadarPoint {
                        parameter: p.name.clone(),
                        value: r
                            .params
                            .get(&p.name)
                            .cloned()
                            .unwrap_or(ParamValue::Number(f64::NAN)),
                    })
                    .collect(),
            })
            .collect();
        radar.insert(class, polylines);
    }

    let mt = mt_summarize(&pair_records(records)?);

    Ok(CampaignReport {
        per_class,
        overall: OverallSummary {
            failed_cases: overall_failed,
            total_cases: overall_total,
            failure_rate: if overall_total == 0 {
                0.0
            } else {
                overall_failed as f64 / overall_total as f64
            },
        },
        parameters,
        mt,
        radar,
    })
}

/// Rebuilds metamorphic pairs from archived records by joining follow-ups to
/// their sources.
pub fn pair_records(records: &[RunRecord]) -> Result<Vec<MetamorphicPair>, ReportError> {
    let by_id: BTreeMap<&str, &RunRecord> = records
        .iter()
        .filter(|r| r.role == CaseRole::Source)
        .map(|r| (r.case_id.as_str(), r))
        .collect();
    let mut pairs = Vec::new();
    for r in records {
        let relation = match r.role {
            CaseRole::Source => continue,
            CaseRole::FollowUpMr1 => Relation::Mr1,
            CaseRole::FollowUpMr2 => Relation::Mr2,
        };
        let source_id = r
            .source_id
            .as_deref()
            .ok_or_else(|| ReportError::MissingSource {
                follow_up: r.case_id.clone(),
                missing: "<none>".into(),
            })?;
        let source = by_id
            .get(source_id)
            .ok_or_else(|| ReportError::MissingSource {
                follow_up: r.case_id.clone(),
                missing: source_id.to_string(),
            })?;
        pairs.push(MetamorphicPair::evaluate(
            relation,
            source_id,
            r.case_id.clone(),
            source.verdict,
            r.verdict,
        ));
    }
    Ok(pairs)
}

/// Per-relation totals: source failures, follow-up failures, violations.
pub fn mt_summarize(pairs: &[MetamorphicPair]) -> Vec<RelationSummary> {
    Relation::ALL
        .iter()
        .filter_map(|&relation| {
            let of_relation: Vec<_> = pairs.iter().filter(|p| p.relation == relation).collect();
            if of_relation.is_empty() {
                return None;
            }
            Some(RelationSummary {
                relation,
                pairs: of_relation.len(),
                source_failures: of_relation
                    .iter()
                    .filter(|p| p.source_verdict.is_failure())
                    .count(),
                follow_up_failures: of_relation
                    .iter()
                    .filter(|p| p.follow_up_verdict.is_failure())
                    .count(),
                violations: of_relation
                    .iter()
                    .filter(|p| p.result == RelationResult::Violated)
                    .count(),
            })
        })
        .collect()
}

/// Radar polylines as one JSON array across classes, axes in class order.
pub fn radar_json(report: &CampaignReport) -> serde_json::Value {
    let all: Vec<&RadarPolyline> = report.radar.values().flatten().collect();
    serde_json::to_value(all).expect("radar serializes")
}

/// Quotes a CSV field when it contains a comma or quote.
fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

/// Summary CSV, one row per class plus a total row.
pub fn write_summary_csv(report: &CampaignReport, mut out: impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "class,label,parameters,failedCases,totalCases,failureRatePct"
    )?;
    for (class, summary) in &report.per_class {
        writeln!(
            out,
            "{},{},{},{},{},{:.1}",
            class,
            csv_field(&summary.label),
            summary.parameters,
            summary.failed_cases,
            summary.total_cases,
            summary.rate_percent()
        )?;
    }
    writeln!(
        out,
        "total,,{},{},{},{:.1}",
        report
            .per_class
            .values()
            .map(|s| s.parameters)
            .sum::<usize>(),
        report.overall.failed_cases,
        report.overall.total_cases,
        report.overall.rate_percent()
    )?;
    Ok(())
}

/// Per-parameter CSV across all classes.
pub fn write_parameters_csv(report: &CampaignReport, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "class,parameter,value,failures,percentOfClassFailures")?;
    for (class, breakdowns) in &report.parameters {
        for b in breakdowns {
            for row in &b.rows {
                writeln!(
                    out,
                    "{},{},{},{},{:.1}",
                    class, b.parameter, row.value, row.failures, row.percent
                )?;
            }
        }
    }
    Ok(())
}

/// Metamorphic summary CSV.
pub fn write_mt_csv(report: &CampaignReport, mut out: impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "relation,pairs,sourceFailures,followUpFailures,violations"
    )?;
    for s in &report.mt {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.relation, s.pairs, s.source_failures, s.follow_up_failures, s.violations
        )?;
    }
    Ok(())
}

/// Writes records as JSON Lines.
pub fn write_jsonl(records: &[RunRecord], mut out: impl Write) -> Result<(), ReportError> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads records back from JSON Lines, skipping blank lines.
pub fn read_jsonl(reader: impl BufRead) -> Result<Vec<RunRecord>, ReportError> {
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("duplicate case id: {0}")]
    DuplicateCase(String),
    #[error("follow-up {follow_up} references missing source {missing}")]
    MissingSource { follow_up: String, missing: String },
    #[error("no partition table for class {0}")]
    MissingSpec(ScenarioClass),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testgen::enumerate_test_cases;

    fn source_record(
        id: &str,
        class: ScenarioClass,
        params: ParameterAssignment,
        verdict: Verdict,
    ) -> RunRecord {
        RunRecord {
            case_id: id.to_string(),
            class_id: class,
            role: CaseRole::Source,
            source_id: None,
            params,
            environment: EnvironmentConditions::clear_noon(),
            verdict,
            collision: None,
            destination_reached: verdict == Verdict::Safe,
            sim_time: 10.0,
            seed: 0,
            config_hash: "test".into(),
        }
    }

    /// All 81 class A cases, safe by default.
    fn class_a_records() -> Vec<RunRecord> {
        enumerate_test_cases(&ClassSpec::canonical(ScenarioClass::A))
            .unwrap()
            .into_iter()
            .map(|c| source_record(&c.id, ScenarioClass::A, c.params, Verdict::Safe))
            .collect()
    }

    #[test]
    fn zero_failures_mean_zero_percentages() {
        let report = aggregate(&class_a_records()).unwrap();
        let summary = &report.per_class[&ScenarioClass::A];
        assert_eq!(summary.failed_cases, 0);
        assert_eq!(summary.failure_rate, 0.0);
        for b in &report.parameters[&ScenarioClass::A] {
            for row in &b.rows {
                assert_eq!(row.percent, 0.0);
                assert_eq!(row.failures, 0);
            }
        }
    }

    #[test]
    fn summary_rate_rounding_matches_table_presentation() {
        assert_eq!(summary_rate_percent(58, 576), 10.0);
        assert_eq!(summary_rate_percent(25, 81), 31.0);
        assert_eq!(format!("{:.1}", summary_rate_percent(58, 576)), "10.0");
    }

    #[test]
    fn percent_one_decimal_rounds_half_away_from_zero() {
        assert_eq!(percent_one_decimal(19, 25), 76.0);
        assert_eq!(percent_one_decimal(6, 25), 24.0);
        assert_eq!(percent_one_decimal(24, 28), 85.7);
        assert_eq!(percent_one_decimal(1, 3), 33.3);
        assert_eq!(percent_one_decimal(0, 0), 0.0);
    }

    #[test]
    fn failure_counts_per_parameter_sum_to_class_failures() {
        let mut records = class_a_records();
        for r in records.iter_mut().take(13) {
            r.verdict = Verdict::Collision;
        }
        let report = aggregate(&records).unwrap();
        let failed = report.per_class[&ScenarioClass::A].failed_cases;
        assert_eq!(failed, 13);
        for b in &report.parameters[&ScenarioClass::A] {
            let sum: usize = b.rows.iter().map(|r| r.failures).sum();
            assert_eq!(
                sum, failed,
                "parameter {} sums to class failures",
                b.parameter
            );
        }
    }

    #[test]
    fn radar_has_one_polyline_per_case() {
        let mut records = class_a_records();
        records[0].verdict = Verdict::Collision;
        let report = aggregate(&records).unwrap();
        let polylines = &report.radar[&ScenarioClass::A];
        assert_eq!(polylines.len(), 81, "safe and unsafe cases both drawn");
        assert_eq!(polylines.iter().filter(|p| p.failed).count(), 1);
        // Axes are ordered as in the class spec.
        let axes: Vec<&str> = polylines[0]
            .points
            .iter()
            .map(|p| p.parameter.as_str())
            .collect();
        assert_eq!(
            axes,
            vec!["pedSpeed", "pedTrigger", "numberOfCar", "pedLocation"]
        );
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let mut records = class_a_records();
        records[1].case_id = records[0].case_id.clone();
        assert!(matches!(
            aggregate(&records),
            Err(ReportError::DuplicateCase(_))
        ));
    }

    #[test]
    fn aggregation_is_permutation_invariant() {
        let mut records = class_a_records();
        for r in records.iter_mut().take(25) {
            r.verdict = Verdict::Collision;
        }
        let forward = aggregate(&records).unwrap();
        records.reverse();
        let backward = aggregate(&records).unwrap();
        assert_eq!(forward.per_class, backward.per_class);
        assert_eq!(forward.parameters, backward.parameters);
        assert_eq!(forward.overall, backward.overall);
        // Radar order follows input order; compare as sets of case ids.
        let ids = |r: &CampaignReport| {
            let mut v: Vec<String> = r.radar[&ScenarioClass::A]
                .iter()
                .map(|p| p.case_id.clone())
                .collect();
            v.sort();
            v
        };
        assert_eq!(ids(&forward), ids(&backward));
    }

    #[test]
    fn mt_summary_echoes_pair_counts() {
        let mut pairs = Vec::new();
        for i in 0..243 {
            let source_verdict = if i < 5 {
                Verdict::Collision
            } else {
                Verdict::Safe
            };
            let mr1 = if i < 23 {
                Verdict::Collision
            } else {
                Verdict::Safe
            };
            let mr2 = if i < 20 {
                Verdict::Collision
            } else {
                Verdict::Safe
            };
            pairs.push(MetamorphicPair::evaluate(
                Relation::Mr1,
                format!("D-{i:03}"),
                format!("D-{i:03}-MR1"),
                source_verdict,
                mr1,
            ));
            pairs.push(MetamorphicPair::evaluate(
                Relation::Mr2,
                format!("D-{i:03}"),
                format!("D-{i:03}-MR2"),
                source_verdict,
                mr2,
            ));
        }
        let summary = mt_summarize(&pairs);
        assert_eq!(summary.len(), 2);
        let mr1 = &summary[0];
        assert_eq!(
            (mr1.source_failures, mr1.follow_up_failures),
            (5, 23),
            "source and follow-up failure counts echo the fixture"
        );
        let mr2 = &summary[1];
        assert_eq!((mr2.source_failures, mr2.follow_up_failures), (5, 20));
        // Violations equal an independent recount of verdict-differing pairs.
        for (summary, relation) in [(mr1, Relation::Mr1), (mr2, Relation::Mr2)] {
            let recount = pairs
                .iter()
                .filter(|p| {
                    p.relation == relation
                        && p.source_verdict.is_failure() != p.follow_up_verdict.is_failure()
                })
                .count();
            assert_eq!(summary.violations, recount);
        }
    }

    #[test]
    fn all_satisfied_pairs_mean_zero_violations() {
        let pairs: Vec<MetamorphicPair> = (0..50)
            .map(|i| {
                MetamorphicPair::evaluate(
                    Relation::Mr1,
                    format!("D-{i:03}"),
                    format!("D-{i:03}-MR1"),
                    Verdict::Safe,
                    Verdict::Safe,
                )
            })
            .collect();
        let summary = mt_summarize(&pairs);
        assert_eq!(summary[0].violations, 0);
    }

    #[test]
    fn summary_csv_quotes_labels_containing_commas() {
        let cases = enumerate_test_cases(&ClassSpec::canonical(ScenarioClass::C)).unwrap();
        let records: Vec<RunRecord> = cases
            .into_iter()
            .map(|c| source_record(&c.id, ScenarioClass::C, c.params, Verdict::Safe))
            .collect();
        let report = aggregate(&records).unwrap();
        let mut out = Vec::new();
        write_summary_csv(&report, &mut out).unwrap();
        let csv = String::from_utf8(out).unwrap();
        assert!(
            csv.contains("C,\"Go Around, Oncoming\",3,0,36,0.0"),
            "{csv}"
        );
    }

    #[test]
    fn jsonl_round_trips() {
        let mut records = class_a_records();
        records.truncate(5);
        let mut buffer = Vec::new();
        write_jsonl(&records, &mut buffer).unwrap();
        let back = read_jsonl(&buffer[..]).unwrap();
        assert_eq!(records, back);
    }
}
