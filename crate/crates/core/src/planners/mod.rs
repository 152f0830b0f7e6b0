//! Pluggable ego planners.
//!
//! A planner is a deterministic function from world observations to a
//! longitudinal command; the ego never leaves its planned route, so commands
//! carry only a target speed. Three baselines ship with the crate:
//!
//! * [`BlindPlanner`] drives at cruise speed no matter what (lower bound),
//! * [`OracleBrakePlanner`] brakes on ground-truth conflicts (upper bound),
//! * [`LimitedPerceptionPlanner`] brakes on *perceived* conflicts through a
//!   range-degraded sensing model with a reaction delay; this is the
//!   system-under-test stand-in whose failures the campaigns study.

mod baseline;
mod perception;

pub use baseline::{BlindPlanner, LimitedPerceptionPlanner, OracleBrakePlanner, PlannerKind};
pub use perception::{perceive, PerceivedAgent, PerceptionConfig};

use crate::geom::Polyline;
use crate::scenario::ScenarioInstance;
use crate::sim::{EgoDynamics, RoutePath, WorldState};
use serde::{Deserialize, Serialize};

/// Longitudinal command for one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EgoCommand {
    /// Requested speed, m/s; the simulator clamps it to `[0, cruise]` and
    /// applies acceleration bounds.
    pub target_speed: f64,
    /// Always true in this artifact: the ego follows its planned route.
    pub follow_route: bool,
}

impl EgoCommand {
    pub fn cruise(dynamics: &EgoDynamics) -> Self {
        EgoCommand {
            target_speed: dynamics.cruise_speed,
            follow_route: true,
        }
    }

    pub fn stop() -> Self {
        EgoCommand {
            target_speed: 0.0,
            follow_route: true,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.target_speed.is_finite()
    }
}

/// Everything a planner may look at for one step.
///
/// `agent_paths` holds the scripted waypoint polyline per agent (`None` for
/// stationary agents), indexed like `instance.agents`.
pub struct PlanContext<'a> {
    pub world: &'a WorldState,
    pub instance: &'a ScenarioInstance,
    pub route: &'a RoutePath,
    pub dynamics: &'a EgoDynamics,
    pub agent_paths: &'a [Option<Polyline>],
}

/// The single plan-step entry point: state in, command out.
///
/// Planners may keep per-run memory (e.g. a reaction-delay buffer) behind
/// `&mut self`; the campaign runner constructs a fresh planner per run, so
/// no state leaks between runs.
pub trait Planner: Send {
    fn name(&self) -> &'static str;
    fn plan(&mut self, ctx: &PlanContext<'_>) -> EgoCommand;
}
