//! Equivalence-partitioned test-case enumeration and metamorphic follow-up
//! derivation with relation checking.

use crate::scenario::{
    build_scenario, EnvironmentConditions, ParamValue, ParameterAssignment, ScenarioClass,
    ScenarioError, ScenarioInstance,
};
use crate::sim::Verdict;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use thiserror::Error;

/// One parameter and its representative values, one per equivalence range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPartition {
    pub name: String,
    pub values: Vec<ParamValue>,
}

/// The full partition table of one scenario class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassSpec {
    pub class_id: ScenarioClass,
    pub partitions: Vec<ParameterPartition>,
}

fn partition(name: &str, values: &[f64]) -> ParameterPartition {
    ParameterPartition {
        name: name.to_string(),
        values: values.iter().map(|v| ParamValue::Number(*v)).collect(),
    }
}

impl ClassSpec {
    /// The canonical representative values per class.
    ///
    /// Every parameter carries 2-4 representatives, one per equivalence
    /// range, so the class products come out at 81 / 216 / 36 / 243 cases.
    /// Class D's turn direction enumerates straight/left/right.
    pub fn canonical(class: ScenarioClass) -> ClassSpec {
        let partitions = match class {
            ScenarioClass::A => vec![
                partition("pedSpeed", &[1.0, 2.0, 4.0]),
                partition("pedTrigger", &[10.0, 20.0, 30.0]),
                partition("numberOfCar", &[4.0, 10.0, 20.0]),
                partition("pedLocation", &[2.0, 3.0, 5.0]),
            ],
            ScenarioClass::B => vec![
                partition("rain", &[0.0, 1.0]),
                partition("fog", &[0.0, 1.0]),
                partition("timeOfDay", &[12.0, 0.0]),
                partition("pedSpeed", &[6.0, 8.0, 10.0]),
                partition("pedTrigger", &[14.0, 24.0, 32.0]),
                partition("pedDistanceFromIntersection", &[6.0, 9.0, 12.0]),
            ],
            ScenarioClass::C => vec![
                partition("oncomingSpeed", &[4.0, 8.0, 12.0]),
                partition("spawnDistance", &[30.0, 50.0, 70.0]),
                partition("oncomingTrigger", &[10.0, 20.0, 30.0, 40.0]),
            ],
            ScenarioClass::D => vec![
                partition("leftSpeed", &[0.0, 5.0, 10.0]),
                partition("leftTrigger", &[5.0, 25.0, 55.0]),
                partition("rightSpeed", &[0.0, 5.0, 10.0]),
                partition("rightTrigger", &[10.0, 15.0, 45.0]),
                ParameterPartition {
                    name: "turnDirection".into(),
                    values: vec![
                        ParamValue::from("straight"),
                        ParamValue::from("left"),
                        ParamValue::from("right"),
                    ],
                },
            ],
        };
        ClassSpec {
            class_id: class,
            partitions,
        }
    }

    /// Number of cases the Cartesian product yields.
    pub fn case_count(&self) -> usize {
        self.partitions.iter().map(|p| p.values.len()).product()
    }

    pub fn validate(&self) -> Result<(), TestGenError> {
        if self.partitions.is_empty() {
            return Err(TestGenError::EmptyPartitions);
        }
        for p in &self.partitions {
            if p.values.is_empty() {
                return Err(TestGenError::EmptyValues(p.name.clone()));
            }
        }
        Ok(())
    }
}

/// How a case participates in metamorphic testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CaseRole {
    Source,
    FollowUpMr1,
    FollowUpMr2,
}

/// The two metamorphic relations: verdicts must survive switching the
/// environment from clear noon to midnight (MR1), and to midnight with
/// intense rain and fog (MR2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "MR1")]
    Mr1,
    #[serde(rename = "MR2")]
    Mr2,
}

impl Relation {
    pub const ALL: [Relation; 2] = [Relation::Mr1, Relation::Mr2];

    /// The follow-up environment of this relation.
    pub fn environment(self) -> EnvironmentConditions {
        match self {
            Relation::Mr1 => EnvironmentConditions {
                rain: 0.0,
                fog: 0.0,
                time_of_day: 0.0,
            },
            Relation::Mr2 => EnvironmentConditions {
                rain: 1.0,
                fog: 1.0,
                time_of_day: 0.0,
            },
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Mr1 => "MR1",
            Relation::Mr2 => "MR2",
        })
    }
}

/// One point in a class's parameter space, with identity and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TestCase {
    /// Stable id: class plus ordinal, e.g. `D-042`; follow-ups append the
    /// relation, e.g. `D-042-MR1`.
    pub id: String,
    pub class_id: ScenarioClass,
    pub params: ParameterAssignment,
    /// Effective environment of the run. Source cases are clear noon (class B
    /// reads it from its own environment parameters); follow-ups override it.
    pub environment: EnvironmentConditions,
    pub role: CaseRole,
    pub source_id: Option<String>,
}

impl TestCase {
    /// Builds the concrete scenario for this case: class layout from the
    /// parameters, then the case's environment applied on top.
    pub fn build_instance(&self) -> Result<ScenarioInstance, ScenarioError> {
        let mut instance = build_scenario(self.class_id, &self.params)?;
        instance.environment = self.environment;
        instance.environment.validate()?;
        Ok(instance)
    }
}

/// Environment parameters that metamorphic follow-ups are allowed to change.
const ENVIRONMENT_PARAMS: [&str; 3] = ["rain", "fog", "timeOfDay"];

fn environment_from_params(
    class: ScenarioClass,
    params: &ParameterAssignment,
) -> EnvironmentConditions {
    if class == ScenarioClass::B {
        EnvironmentConditions {
            rain: params.number("rain").unwrap_or(0.0),
            fog: params.number("fog").unwrap_or(0.0),
            time_of_day: params.number("timeOfDay").unwrap_or(12.0),
        }
    } else {
        EnvironmentConditions::clear_noon()
    }
}

/// Enumerates the Cartesian product of a class's partitions, one case per
/// combination, in lexicographic order over the partition order. Ids are
/// stable: the same spec always yields the same ids in the same order.
pub fn enumerate_test_cases(spec: &ClassSpec) -> Result<Vec<TestCase>, TestGenError> {
    spec.validate()?;
    let sizes: Vec<usize> = spec.partitions.iter().map(|p| p.values.len()).collect();
    let total = spec.case_count();
    let mut cases = Vec::with_capacity(total);
    let mut indices = vec![0usize; sizes.len()];
    for ordinal in 0..total {
        let mut params = ParameterAssignment::new();
        for (p, &value_index) in spec.partitions.iter().zip(&indices) {
            params.set(&p.name, p.values[value_index].clone());
        }
        let environment = environment_from_params(spec.class_id, &params);
        cases.push(TestCase {
            id: format!("{}-{:03}", spec.class_id, ordinal),
            class_id: spec.class_id,
            params,
            environment,
            role: CaseRole::Source,
            source_id: None,
        });
        // Mixed-radix increment; the last partition varies fastest.
        for d in (0..indices.len()).rev() {
            indices[d] += 1;
            if indices[d] < sizes[d] {
                break;
            }
            indices[d] = 0;
        }
    }
    Ok(cases)
}

/// Derives the MR1 and MR2 follow-up cases of a daytime/clear source case.
///
/// Every non-environment parameter is preserved exactly; only the
/// environment (and, for class B, the environment-valued parameters) change.
pub fn derive_follow_ups(source: &TestCase) -> Result<(TestCase, TestCase), TestGenError> {
    if source.role != CaseRole::Source {
        return Err(TestGenError::NotASource(source.id.clone()));
    }
    if !source.environment.is_clear_noon() {
        return Err(TestGenError::NotCanonical(source.id.clone()));
    }
    let derive = |relation: Relation| {
        let env = relation.environment();
        let mut params = source.params.clone();
        for key in ENVIRONMENT_PARAMS {
            if params.get(key).is_some() {
                let value = match key {
                    "rain" => env.rain,
                    "fog" => env.fog,
                    _ => env.time_of_day,
                };
                params.set(key, value);
            }
        }
        TestCase {
            id: format!("{}-{}", source.id, relation),
            class_id: source.class_id,
            params,
            environment: env,
            role: match relation {
                Relation::Mr1 => CaseRole::FollowUpMr1,
                Relation::Mr2 => CaseRole::FollowUpMr2,
            },
            source_id: Some(source.id.clone()),
        }
    };
    Ok((derive(Relation::Mr1), derive(Relation::Mr2)))
}

/// Result of checking one metamorphic pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelationResult {
    Satisfied,
    Violated,
}

/// A relation is violated when the failure classification of the two verdicts
/// differs, in either direction. Timeout counts as a non-failure, so
/// Safe/Timeout disagreements do not violate.
pub fn check_relation(source: Verdict, follow_up: Verdict) -> RelationResult {
    if source.is_failure() == follow_up.is_failure() {
        RelationResult::Satisfied
    } else {
        RelationResult::Violated
    }
}

/// A source/follow-up pairing with both verdicts and the relation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetamorphicPair {
    pub relation: Relation,
    pub source_id: String,
    pub follow_up_id: String,
    pub source_verdict: Verdict,
    pub follow_up_verdict: Verdict,
    pub result: RelationResult,
}

impl MetamorphicPair {
    pub fn evaluate(
        relation: Relation,
        source_id: impl Into<String>,
        follow_up_id: impl Into<String>,
        source_verdict: Verdict,
        follow_up_verdict: Verdict,
    ) -> Self {
        MetamorphicPair {
            relation,
            source_id: source_id.into(),
            follow_up_id: follow_up_id.into(),
            source_verdict,
            follow_up_verdict,
            result: check_relation(source_verdict, follow_up_verdict),
        }
    }
}

/// Writes a suite as a JSON list of test cases.
pub fn write_suite(path: &Path, cases: &[TestCase]) -> Result<(), TestGenError> {
    let json = serde_json::to_string_pretty(cases)?;
    std::fs::write(path, json)?;
    Ok(())
}

/// Reads a suite back; together with [`write_suite`] this allows exact replay
/// of a campaign.
pub fn read_suite(path: &Path) -> Result<Vec<TestCase>, TestGenError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Error)]
pub enum TestGenError {
    #[error("class spec has no partitions")]
    EmptyPartitions,
    #[error("partition {0} has no values")]
    EmptyValues(String),
    #[error("case {0} is not a source case")]
    NotASource(String),
    #[error("case {0} is not in the canonical daytime/clear condition")]
    NotCanonical(String),
    #[error("suite io: {0}")]
    Io(#[from] std::io::Error),
    #[error("suite json: {0}")]
    Json(#[from] serde_json::Error),
}
