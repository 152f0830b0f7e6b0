//! Deterministic fixed-timestep world simulation.
//!
//! One [`Simulation`] owns the whole world for one run: agent motion along
//! waypoint polylines, trigger activation, ego path following and collision
//! detection. Runs share no mutable state, so distinct runs may execute on
//! any number of threads and still produce bit-identical outcomes.

mod engine;
mod route;

pub use engine::{agent_path, check_triggers, detect_collision, run_simulation, Simulation};
pub use route::RoutePath;

use crate::geom::{Pose, Vec2};
use crate::planners::EgoCommand;
use crate::scenario::ScenarioError;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

/// Ego reaching within this distance of its destination ends the run.
pub const DESTINATION_RADIUS: f64 = 2.0;

/// Step size and wall of one simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SimulationLimits {
    /// Timestep in seconds.
    pub dt: f64,
    /// Simulated-time budget in seconds.
    pub max_sim_time: f64,
}

impl SimulationLimits {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::Limits("dt must be positive".into()));
        }
        if !(self.max_sim_time >= self.dt && self.max_sim_time.is_finite()) {
            return Err(SimError::Limits("maxSimTime must be at least dt".into()));
        }
        Ok(())
    }
}

impl Default for SimulationLimits {
    fn default() -> Self {
        SimulationLimits {
            dt: 0.05,
            max_sim_time: 60.0,
        }
    }
}

/// Ego longitudinal dynamics and path-following speed limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct EgoDynamics {
    /// Free-road target speed, m/s.
    pub cruise_speed: f64,
    /// Acceleration bound, m/s^2.
    pub max_accel: f64,
    /// Deceleration bound, m/s^2.
    pub max_decel: f64,
    /// Speed cap while on an intersection turn arc, m/s.
    pub turn_speed_cap: f64,
}

impl Default for EgoDynamics {
    fn default() -> Self {
        EgoDynamics {
            cruise_speed: 10.0,
            max_accel: 2.0,
            max_decel: 6.0,
            turn_speed_cap: 4.0,
        }
    }
}

impl EgoDynamics {
    pub fn validate(&self) -> Result<(), SimError> {
        let ok = self.cruise_speed > 0.0
            && self.max_accel > 0.0
            && self.max_decel > 0.0
            && self.turn_speed_cap > 0.0
            && [
                self.cruise_speed,
                self.max_accel,
                self.max_decel,
                self.turn_speed_cap,
            ]
            .iter()
            .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(SimError::Limits(
                "ego dynamics must be positive and finite".into(),
            ))
        }
    }

    /// Distance needed to brake from `speed` to rest.
    pub fn stopping_distance(&self, speed: f64) -> f64 {
        speed * speed / (2.0 * self.max_decel)
    }
}

/// Everything one run needs besides the instance and planner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SimParams {
    pub limits: SimulationLimits,
    pub dynamics: EgoDynamics,
    /// Per-step pose sampling; campaigns disable it to keep memory flat.
    pub record_trajectory: bool,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            limits: SimulationLimits::default(),
            dynamics: EgoDynamics::default(),
            record_trajectory: true,
        }
    }
}

/// Classified outcome of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    Safe,
    Collision,
    Timeout,
}

impl Verdict {
    /// The pass/fail oracle: a run fails exactly when footprints overlapped.
    pub fn is_failure(self) -> bool {
        self == Verdict::Collision
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Safe => "Safe",
            Verdict::Collision => "Collision",
            Verdict::Timeout => "Timeout",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CollisionDetail {
    /// Ids of the overlapping pair, in agent order.
    pub agents: (String, String),
    /// Simulated time of first overlap, seconds.
    pub time: f64,
    /// Midpoint between the two centers at the moment of overlap.
    pub position: Vec2,
}

/// One sampled agent pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub time: f64,
    /// Index into [`SimulationOutcome::agent_ids`].
    pub agent: usize,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulationOutcome {
    pub verdict: Verdict,
    pub collision: Option<CollisionDetail>,
    pub destination_reached: bool,
    /// Simulated end time, seconds.
    pub sim_time: f64,
    pub steps: u64,
    pub agent_ids: Vec<String>,
    pub trajectory: Vec<TrajectorySample>,
    /// Wall-clock cost of the run; excluded from serialized outcomes so
    /// archived results compare byte-for-byte.
    #[serde(skip)]
    pub wall_clock: f64,
}

impl SimulationOutcome {
    /// Writes the trajectory as CSV: `time,agentId,x,y,heading,speed`.
    pub fn write_trajectory_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "time,agentId,x,y,heading,speed")?;
        for s in &self.trajectory {
            writeln!(
                out,
                "{:.3},{},{:.6},{:.6},{:.6},{:.6}",
                s.time, self.agent_ids[s.agent], s.x, s.y, s.heading, s.speed
            )?;
        }
        Ok(())
    }
}

/// Dynamic state of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AgentState {
    pub pose: Pose,
    /// Current speed, m/s. Scripted agents report their scripted speed while
    /// moving and 0 when waiting or done.
    pub speed: f64,
    /// Latching trigger flag: once true, never false.
    pub activated: bool,
    /// Arc length travelled along the agent's waypoint path (ego: its route).
    pub path_progress: f64,
    /// Index of the waypoint currently being approached.
    pub waypoint_index: usize,
}

/// Full world snapshot at one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WorldState {
    pub time: f64,
    pub step: u64,
    pub ego_index: usize,
    pub agents: Vec<AgentState>,
    pub command_log: Vec<(f64, EgoCommand)>,
}

impl WorldState {
    pub fn ego(&self) -> &AgentState {
        &self.agents[self.ego_index]
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("rejected instance: {0}")]
    Instance(#[from] ScenarioError),
    #[error("invalid simulation parameters: {0}")]
    Limits(String),
    #[error("planner returned a non-finite command at t={time}s")]
    NonFiniteCommand { time: f64 },
    #[error("unsupported route geometry: {0}")]
    Route(String),
}
