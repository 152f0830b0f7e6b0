//! Range-and-field-of-view sensing with multiplicative environmental
//! degradation.
//!
//! The effective detection range is
//! `baseRange x night x rain x fog x darkColor`, where each factor is 1 in
//! clear daylight and shrinks under night, rain, fog, or (at night) for
//! black-painted agents. Detection is boundary-inclusive and deterministic.

use super::*;
use crate::geom::angle_diff;
use crate::scenario::{AgentColor, EnvironmentConditions};
use crate::sim::AgentState;

/// Sensing constants. All of them live in the campaign config so results are
/// self-describing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct PerceptionConfig {
    /// Clear-daylight detection range, meters.
    pub base_range: f64,
    /// Total field of view, radians, centered on the ego heading.
    pub field_of_view: f64,
    /// Range multiplier at night.
    pub night_factor: f64,
    /// Rain degrades range by `1 - rain_slope * intensity`.
    pub rain_slope: f64,
    /// Fog degrades range by `1 - fog_slope * intensity`.
    pub fog_slope: f64,
    /// Extra multiplier for black agents at night.
    pub dark_color_night_factor: f64,
    /// Steps of perception latency for the limited planner.
    pub reaction_steps: u32,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        PerceptionConfig {
            base_range: 60.0,
            field_of_view: 2.0 * std::f64::consts::FRAC_PI_3,
            night_factor: 0.6,
            rain_slope: 0.3,
            fog_slope: 0.4,
            dark_color_night_factor: 0.7,
            reaction_steps: 1,
        }
    }
}

impl PerceptionConfig {
    /// Night covers everything outside `[6, 18)` hours.
    pub fn is_night(&self, time_of_day: f64) -> bool {
        !(6.0..18.0).contains(&time_of_day)
    }

    pub fn rain_factor(&self, intensity: f64) -> f64 {
        1.0 - self.rain_slope * intensity
    }

    pub fn fog_factor(&self, intensity: f64) -> f64 {
        1.0 - self.fog_slope * intensity
    }

    /// Effective detection range for an agent of the given color.
    pub fn effective_range(&self, env: &EnvironmentConditions, color: AgentColor) -> f64 {
        let night = self.is_night(env.time_of_day);
        let mut range = self.base_range;
        if night {
            range *= self.night_factor;
        }
        range *= self.rain_factor(env.rain);
        range *= self.fog_factor(env.fog);
        if night && color == AgentColor::Black {
            range *= self.dark_color_night_factor;
        }
        range
    }
}

/// Kinematic snapshot of a detected agent, taken at perception time.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceivedAgent {
    /// Index into `instance.agents`.
    pub index: usize,
    pub state: AgentState,
    /// Ego-to-agent distance at perception time.
    pub distance: f64,
}

/// Returns the agents the ego senses this step: within the effective range
/// for their color (inclusive) and inside the field of view (inclusive).
pub fn perceive(
    world: &WorldState,
    instance: &ScenarioInstance,
    config: &PerceptionConfig,
) -> Vec<PerceivedAgent> {
    let ego = world.ego();
    let ego_pos = ego.pose.position();
    let half_fov = config.field_of_view / 2.0;
    let mut detected = Vec::new();
    for (index, agent) in instance.agents.iter().enumerate() {
        if index == world.ego_index {
            continue;
        }
        let state = &world.agents[index];
        let offset = state.pose.position() - ego_pos;
        let distance = offset.length();
        if distance > config.effective_range(&instance.environment, agent.color) {
            continue;
        }
        if distance > 0.0 {
            let bearing = angle_diff(ego.pose.heading, offset.angle());
            if bearing.abs() > half_fov {
                continue;
            }
        }
        detected.push(PerceivedAgent {
            index,
            state: state.clone(),
            distance,
        });
    }
    detected
}
