//! The three baseline planners.

use super::*;
use crate::geom::segment_segment_distance;
use crate::scenario::{AgentSpec, Behavior};
use crate::sim::AgentState;
use std::collections::VecDeque;

/// Lateral slack added around footprints when testing route conflicts.
const CONFLICT_CLEARANCE: f64 = 0.3;

/// Scripted speed of an agent, 0 for stationary ones.
fn scripted_speed(spec: &AgentSpec) -> f64 {
    match &spec.behavior {
        Behavior::Stationary => 0.0,
        Behavior::TriggeredWaypoints { speed, .. } => *speed,
    }
}

/// True when the observed agent conflicts with the ego's remaining route.
///
/// A waiting, finished, or zero-speed agent is a static obstacle: it
/// conflicts when its footprint sits on the remaining route corridor. A
/// moving agent conflicts when its remaining scripted path passes within
/// footprint reach of the remaining route, i.e. the paths cross or merge.
fn conflicts_with_route(ctx: &PlanContext<'_>, index: usize, observed: &AgentState) -> bool {
    let spec = &ctx.instance.agents[index];
    let ego_half_width = ctx.instance.agents[ctx.world.ego_index]
        .footprint
        .half_width();
    let ego_progress = ctx.world.ego().path_progress;
    let route = ctx.route.polyline();

    let path = ctx.agent_paths[index].as_ref();
    let moving = observed.activated
        && scripted_speed(spec) > 0.0
        && path.map_or(false, |p| observed.path_progress < p.length());

    if !moving {
        let obb = spec.footprint.obb_at(&observed.pose);
        let threshold = ego_half_width + CONFLICT_CLEARANCE;
        let mut blocked = false;
        route.for_each_remaining_segment(ego_progress, |a, b| {
            if obb.distance_to_segment(a, b) <= threshold {
                blocked = true;
                return false;
            }
            true
        });
        blocked
    } else {
        let path = path.expect("moving agent has a path");
        let threshold = ego_half_width + spec.footprint.half_width() + CONFLICT_CLEARANCE;
        let mut crossing = false;
        route.for_each_remaining_segment(ego_progress, |ra, rb| {
            path.for_each_remaining_segment(observed.path_progress, |pa, pb| {
                if segment_segment_distance(ra, rb, pa, pb) <= threshold {
                    crossing = true;
                    return false;
                }
                true
            });
            !crossing
        });
        crossing
    }
}

/// Drives at cruise speed unconditionally. Perception-free, so its outcomes
/// cannot depend on environment conditions; campaigns use it as the
/// environment-independence control.
#[derive(Debug, Default, Clone, Copy)]
pub struct BlindPlanner;

impl Planner for BlindPlanner {
    fn name(&self) -> &'static str {
        "blind"
    }

    fn plan(&mut self, ctx: &PlanContext<'_>) -> EgoCommand {
        EgoCommand::cruise(ctx.dynamics)
    }
}

/// Brakes to a stop whenever any agent, known with perfect ground truth,
/// statically blocks or dynamically crosses the remaining route; cruises
/// otherwise. It never leaves its lane-keeping route, so blocked lanes are
/// waited out rather than overtaken.
#[derive(Debug, Default, Clone, Copy)]
pub struct OracleBrakePlanner;

impl Planner for OracleBrakePlanner {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn plan(&mut self, ctx: &PlanContext<'_>) -> EgoCommand {
        for i in 0..ctx.instance.agents.len() {
            if i == ctx.world.ego_index {
                continue;
            }
            if conflicts_with_route(ctx, i, &ctx.world.agents[i]) {
                return EgoCommand::stop();
            }
        }
        EgoCommand::cruise(ctx.dynamics)
    }
}

/// Same braking rule as [`OracleBrakePlanner`], but restricted to agents the
/// degraded sensing model actually reports, and acting on perception from
/// `reaction_steps` steps ago.
#[derive(Debug, Clone)]
pub struct LimitedPerceptionPlanner {
    config: PerceptionConfig,
    memory: VecDeque<Vec<PerceivedAgent>>,
}

impl LimitedPerceptionPlanner {
    pub fn new(config: PerceptionConfig) -> Self {
        LimitedPerceptionPlanner {
            config,
            memory: VecDeque::new(),
        }
    }

    pub fn config(&self) -> &PerceptionConfig {
        &self.config
    }
}

impl Planner for LimitedPerceptionPlanner {
    fn name(&self) -> &'static str {
        "limited"
    }

    fn plan(&mut self, ctx: &PlanContext<'_>) -> EgoCommand {
        let current = perceive(ctx.world, ctx.instance, &self.config);
        self.memory.push_back(current);
        let depth = self.config.reaction_steps as usize + 1;
        while self.memory.len() > depth {
            self.memory.pop_front();
        }
        if self.memory.len() < depth {
            // Still warming up the delay line: nothing perceived to act on.
            return EgoCommand::cruise(ctx.dynamics);
        }
        let effective = self.memory.front().expect("non-empty memory");
        for perceived in effective {
            if conflicts_with_route(ctx, perceived.index, &perceived.state) {
                return EgoCommand::stop();
            }
        }
        EgoCommand::cruise(ctx.dynamics)
    }
}

/// Planner selection for configs and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Blind,
    Oracle,
    Limited,
}

impl PlannerKind {
    /// Builds a fresh planner instance for one run.
    pub fn build(&self, perception: &PerceptionConfig) -> Box<dyn Planner> {
        match self {
            PlannerKind::Blind => Box::new(BlindPlanner),
            PlannerKind::Oracle => Box::new(OracleBrakePlanner),
            PlannerKind::Limited => Box::new(LimitedPerceptionPlanner::new(*perception)),
        }
    }
}

impl std::fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PlannerKind::Blind => "blind",
            PlannerKind::Oracle => "oracle",
            PlannerKind::Limited => "limited",
        })
    }
}

impl std::str::FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "blind" => Ok(PlannerKind::Blind),
            "oracle" => Ok(PlannerKind::Oracle),
            "limited" => Ok(PlannerKind::Limited),
            other => Err(format!("unknown planner: {other}")),
        }
    }
}
