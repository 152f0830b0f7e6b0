//! Scenario domain model: environments, agents, maps and the four urban
//! scenario classes, built deterministically from parameter assignments.

mod build;

pub use build::{build_scenario, layout};

use crate::geom::{Pose, Vec2};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// One of the four urban scenario classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScenarioClass {
    /// Pedestrians in close quarters: a narrow street lined with parked cars.
    A,
    /// Pedestrian at an intersection while the ego turns left.
    B,
    /// Go around: a blocked lane with oncoming traffic.
    C,
    /// Busy intersection with dark crossing vehicles.
    D,
}

impl ScenarioClass {
    pub const ALL: [ScenarioClass; 4] = [
        ScenarioClass::A,
        ScenarioClass::B,
        ScenarioClass::C,
        ScenarioClass::D,
    ];

    /// Human-readable label used in summary tables.
    pub fn label(self) -> &'static str {
        match self {
            ScenarioClass::A => "Close Quarters",
            ScenarioClass::B => "Pedestrian at Intersection",
            ScenarioClass::C => "Go Around, Oncoming",
            ScenarioClass::D => "Camera Tricks",
        }
    }
}

impl fmt::Display for ScenarioClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioClass::A => "A",
            ScenarioClass::B => "B",
            ScenarioClass::C => "C",
            ScenarioClass::D => "D",
        })
    }
}

impl FromStr for ScenarioClass {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(ScenarioClass::A),
            "B" | "b" => Ok(ScenarioClass::B),
            "C" | "c" => Ok(ScenarioClass::C),
            "D" | "d" => Ok(ScenarioClass::D),
            other => Err(ScenarioError::UnknownClass(other.to_string())),
        }
    }
}

/// Weather and lighting for one scenario run.
///
/// `rain` and `fog` are intensities in `[0, 1]` (0 = none, 1 = intense);
/// `time_of_day` is hours in `[0, 24)` (12 = noon, 0 = midnight).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnvironmentConditions {
    pub rain: f64,
    pub fog: f64,
    pub time_of_day: f64,
}

impl EnvironmentConditions {
    /// Clear weather at noon: the canonical source-case condition.
    pub fn clear_noon() -> Self {
        EnvironmentConditions {
            rain: 0.0,
            fog: 0.0,
            time_of_day: 12.0,
        }
    }

    pub fn is_clear_noon(&self) -> bool {
        self.rain == 0.0 && self.fog == 0.0 && self.time_of_day == 12.0
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !in_unit(self.rain) {
            return Err(ScenarioError::OutOfRange {
                name: "rain".into(),
                value: self.rain,
                expected: "[0, 1]".into(),
            });
        }
        if !in_unit(self.fog) {
            return Err(ScenarioError::OutOfRange {
                name: "fog".into(),
                value: self.fog,
                expected: "[0, 1]".into(),
            });
        }
        if !(0.0..24.0).contains(&self.time_of_day) {
            return Err(ScenarioError::OutOfRange {
                name: "timeOfDay".into(),
                value: self.time_of_day,
                expected: "[0, 24)".into(),
            });
        }
        Ok(())
    }
}

impl Default for EnvironmentConditions {
    fn default() -> Self {
        Self::clear_noon()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentKind {
    EgoVehicle,
    NpcVehicle,
    Pedestrian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentColor {
    Black,
    White,
    Blue,
    Red,
    Default,
}

/// Rectangular footprint in meters: length along heading, width across.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub length: f64,
    pub width: f64,
}

impl Footprint {
    pub const VEHICLE: Footprint = Footprint {
        length: 4.7,
        width: 1.9,
    };
    pub const PEDESTRIAN: Footprint = Footprint {
        length: 0.5,
        width: 0.5,
    };

    pub fn half_length(&self) -> f64 {
        self.length / 2.0
    }

    pub fn half_width(&self) -> f64 {
        self.width / 2.0
    }

    pub fn half_diagonal(&self) -> f64 {
        (self.half_length().powi(2) + self.half_width().powi(2)).sqrt()
    }

    /// The footprint placed at a pose, as an oriented rectangle.
    pub fn obb_at(&self, pose: &Pose) -> crate::geom::Obb {
        crate::geom::Obb::new(
            pose.position(),
            pose.heading,
            self.half_length(),
            self.half_width(),
        )
    }
}

/// What an agent does once the simulation starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Behavior {
    /// Never moves.
    Stationary,
    /// Waits until the ego comes within `trigger_distance` (Euclidean,
    /// inclusive), then follows `waypoints` at constant `speed`. Activation
    /// latches: once triggered the agent keeps going.
    TriggeredWaypoints {
        waypoints: Vec<Vec2>,
        speed: f64,
        trigger_distance: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: String,
    pub kind: AgentKind,
    pub pose: Pose,
    pub footprint: Footprint,
    pub color: AgentColor,
    pub behavior: Behavior,
}

impl AgentSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.footprint.length <= 0.0 || self.footprint.width <= 0.0 {
            return Err(ScenarioError::InvalidAgent {
                id: self.id.clone(),
                reason: "footprint dimensions must be positive".into(),
            });
        }
        if !self.pose.is_finite() {
            return Err(ScenarioError::InvalidAgent {
                id: self.id.clone(),
                reason: "pose must be finite".into(),
            });
        }
        if let Behavior::TriggeredWaypoints {
            speed,
            trigger_distance,
            waypoints,
        } = &self.behavior
        {
            if *speed < 0.0 || !speed.is_finite() {
                return Err(ScenarioError::InvalidAgent {
                    id: self.id.clone(),
                    reason: "speed must be finite and >= 0".into(),
                });
            }
            if *trigger_distance < 0.0 || !trigger_distance.is_finite() {
                return Err(ScenarioError::InvalidAgent {
                    id: self.id.clone(),
                    reason: "trigger distance must be finite and >= 0".into(),
                });
            }
            if waypoints.is_empty() {
                return Err(ScenarioError::InvalidAgent {
                    id: self.id.clone(),
                    reason: "triggered behavior needs at least one waypoint".into(),
                });
            }
        }
        Ok(())
    }
}

/// One straight road: a centerline with one lane per direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoadSegment {
    pub name: String,
    pub start: Vec2,
    pub end: Vec2,
    pub lane_width: f64,
    pub legal_centerline_crossing: bool,
}

impl RoadSegment {
    /// Total paved half-width (one lane each way).
    pub fn half_width(&self) -> f64 {
        self.lane_width
    }
}

/// Painted crossing area at an intersection approach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Crosswalk {
    pub center: Vec2,
    /// Walking direction across the road, radians.
    pub walk_heading: f64,
    /// Extent along the walking direction.
    pub length: f64,
    /// Extent across the walking direction.
    pub width: f64,
}

/// A four-way junction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub center: Vec2,
    pub crosswalks: Vec<Crosswalk>,
}

/// Synthetic map: straight segments plus at most one four-way intersection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapGeometry {
    pub segments: Vec<RoadSegment>,
    pub intersections: Vec<Intersection>,
}

/// Clearance added around the paved area when checking map containment;
/// street-parked vehicles and waiting pedestrians sit on the shoulder.
const MAP_SHOULDER: f64 = 15.0;

impl MapGeometry {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.segments.is_empty() {
            return Err(ScenarioError::InvalidMap("map has no segments".into()));
        }
        for seg in &self.segments {
            if seg.lane_width <= 0.0 {
                return Err(ScenarioError::InvalidMap(format!(
                    "segment {} has non-positive lane width",
                    seg.name
                )));
            }
        }
        Ok(())
    }

    /// Axis-aligned bounds of the mapped area including shoulders.
    pub fn bounds(&self) -> (Vec2, Vec2) {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for seg in &self.segments {
            let pad = seg.half_width() + MAP_SHOULDER;
            for p in [seg.start, seg.end] {
                min.x = min.x.min(p.x - pad);
                min.y = min.y.min(p.y - pad);
                max.x = max.x.max(p.x + pad);
                max.y = max.y.max(p.y + pad);
            }
        }
        (min, max)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let (min, max) = self.bounds();
        p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y
    }
}

/// Which way the ego leaves the intersection (if the map has one).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurnDirection {
    Straight,
    Left,
    Right,
    None,
}

impl fmt::Display for TurnDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TurnDirection::Straight => "straight",
            TurnDirection::Left => "left",
            TurnDirection::Right => "right",
            TurnDirection::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EgoRoute {
    pub start: Pose,
    pub destination: Vec2,
    pub turn_direction: TurnDirection,
}

/// A fully concrete world setup, ready to simulate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScenarioInstance {
    pub class_id: ScenarioClass,
    pub map: MapGeometry,
    pub agents: Vec<AgentSpec>,
    pub environment: EnvironmentConditions,
    pub ego_route: EgoRoute,
}

impl ScenarioInstance {
    /// Index of the unique ego agent.
    pub fn ego_index(&self) -> Option<usize> {
        self.agents
            .iter()
            .position(|a| a.kind == AgentKind::EgoVehicle)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.map.validate()?;
        self.environment.validate()?;
        let ego_count = self
            .agents
            .iter()
            .filter(|a| a.kind == AgentKind::EgoVehicle)
            .count();
        if ego_count != 1 {
            return Err(ScenarioError::InvalidInstance(format!(
                "expected exactly one ego vehicle, found {ego_count}"
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for agent in &self.agents {
            agent.validate()?;
            if !seen.insert(agent.id.as_str()) {
                return Err(ScenarioError::InvalidInstance(format!(
                    "duplicate agent id {}",
                    agent.id
                )));
            }
            if !self.map.contains(agent.pose.position()) {
                return Err(ScenarioError::InvalidInstance(format!(
                    "agent {} spawns outside map bounds",
                    agent.id
                )));
            }
        }
        if !self.map.contains(self.ego_route.destination) {
            return Err(ScenarioError::InvalidInstance(
                "destination outside map bounds".into(),
            ));
        }
        Ok(())
    }
}

/// A single parameter value: numeric, or one of an enumerated set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Choice(String),
}

impl ParamValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            ParamValue::Number(v) => Some(*v),
            ParamValue::Choice(_) => None,
        }
    }

    pub fn as_choice(&self) -> Option<&str> {
        match self {
            ParamValue::Number(_) => None,
            ParamValue::Choice(s) => Some(s),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(v) => {
                if v.fract() == 0.0 && v.abs() < 1e12 {
                    write!(f, "{}", *v as i64)
                } else {
                    write!(f, "{v}")
                }
            }
            ParamValue::Choice(s) => f.write_str(s),
        }
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Number(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Choice(v.to_string())
    }
}

/// Named parameter values for one test case. Keys must exactly match the
/// parameter set of the scenario class they are used with.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterAssignment(pub BTreeMap<String, ParamValue>);

impl ParameterAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: &str, value: impl Into<ParamValue>) -> &mut Self {
        self.0.insert(name.to_string(), value.into());
        self
    }

    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.0.get(name)
    }

    pub fn number(&self, name: &str) -> Result<f64, ScenarioError> {
        self.0
            .get(name)
            .ok_or_else(|| ScenarioError::MissingParameter(name.to_string()))?
            .as_number()
            .ok_or_else(|| ScenarioError::WrongParameterType {
                name: name.to_string(),
                expected: "number".into(),
            })
    }

    pub fn choice(&self, name: &str) -> Result<&str, ScenarioError> {
        self.0
            .get(name)
            .ok_or_else(|| ScenarioError::MissingParameter(name.to_string()))?
            .as_choice()
            .ok_or_else(|| ScenarioError::WrongParameterType {
                name: name.to_string(),
                expected: "choice".into(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(|k| k.as_str())
    }

    /// Checks the key set is exactly `expected`.
    pub fn expect_keys(&self, expected: &[&str]) -> Result<(), ScenarioError> {
        for key in expected {
            if !self.0.contains_key(*key) {
                return Err(ScenarioError::MissingParameter((*key).to_string()));
            }
        }
        for key in self.0.keys() {
            if !expected.contains(&key.as_str()) {
                return Err(ScenarioError::UnexpectedParameter(key.clone()));
            }
        }
        Ok(())
    }
}

/// Parameter names per class, in table order. This order is also the
/// enumeration order of equivalence-partitioned suites.
pub fn class_parameters(class: ScenarioClass) -> &'static [&'static str] {
    match class {
        ScenarioClass::A => &["pedSpeed", "pedTrigger", "numberOfCar", "pedLocation"],
        ScenarioClass::B => &[
            "rain",
            "fog",
            "timeOfDay",
            "pedSpeed",
            "pedTrigger",
            "pedDistanceFromIntersection",
        ],
        ScenarioClass::C => &["oncomingSpeed", "spawnDistance", "oncomingTrigger"],
        ScenarioClass::D => &[
            "leftSpeed",
            "leftTrigger",
            "rightSpeed",
            "rightTrigger",
            "turnDirection",
        ],
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario class: {0}")]
    UnknownClass(String),
    #[error("missing parameter: {0}")]
    MissingParameter(String),
    #[error("unexpected parameter: {0}")]
    UnexpectedParameter(String),
    #[error("parameter {name} must be a {expected}")]
    WrongParameterType { name: String, expected: String },
    #[error("parameter {name} out of range: {value} (expected {expected})")]
    OutOfRange {
        name: String,
        value: f64,
        expected: String,
    },
    #[error("invalid agent {id}: {reason}")]
    InvalidAgent { id: String, reason: String },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}
