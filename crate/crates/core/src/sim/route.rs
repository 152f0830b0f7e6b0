//! Ego route paths: lane centerlines joined by circular turn arcs.

use super::{EgoDynamics, SimError};
use crate::geom::{Polyline, Pose, Vec2};
use crate::scenario::{ScenarioInstance, TurnDirection};

/// Turn arc radii. Left turns sweep across the junction, right turns hug it.
const TURN_RADIUS_LEFT: f64 = 5.25;
const TURN_RADIUS_RIGHT: f64 = 3.5;
/// Chords per quarter arc.
const ARC_POINTS: usize = 24;

/// The ego's planned path with per-point speed caps.
///
/// Straight routes carry no cap below cruise; turn arcs are capped at the
/// dynamics' `turn_speed_cap`, so an ego approaching a turn slows down and an
/// ego driving straight through does not.
#[derive(Debug, Clone)]
pub struct RoutePath {
    line: Polyline,
    /// Raw speed cap at each polyline vertex.
    caps: Vec<f64>,
    cruise: f64,
    decel: f64,
}

impl RoutePath {
    /// Builds the route for an instance: straight for `Straight`/`None`,
    /// otherwise approach segment + quarter arc + exit segment through the
    /// map's intersection.
    pub fn for_instance(
        instance: &ScenarioInstance,
        dynamics: &EgoDynamics,
    ) -> Result<RoutePath, SimError> {
        let start = instance.ego_route.start;
        let dest = instance.ego_route.destination;
        match instance.ego_route.turn_direction {
            TurnDirection::Straight | TurnDirection::None => Self::straight(start, dest, dynamics),
            TurnDirection::Left => Self::turn(start, dest, dynamics, true),
            TurnDirection::Right => Self::turn(start, dest, dynamics, false),
        }
    }

    fn straight(start: Pose, dest: Vec2, dynamics: &EgoDynamics) -> Result<RoutePath, SimError> {
        let p0 = start.position();
        if p0.distance(dest) == 0.0 {
            return Err(SimError::Route(
                "degenerate route: start == destination".into(),
            ));
        }
        let along = (dest - p0).normalized();
        if along.dot(start.forward()) < 0.99 {
            return Err(SimError::Route(
                "straight route must head toward the destination".into(),
            ));
        }
        Ok(RoutePath {
            line: Polyline::new(vec![p0, dest]),
            caps: vec![dynamics.cruise_speed; 2],
            cruise: dynamics.cruise_speed,
            decel: dynamics.max_decel,
        })
    }

    fn turn(
        start: Pose,
        dest: Vec2,
        dynamics: &EgoDynamics,
        left: bool,
    ) -> Result<RoutePath, SimError> {
        let p0 = start.position();
        let u = start.forward();
        let w = if left { u.perp() } else { -u.perp() };
        // Corner where the approach line meets the exit line:
        // p0 + t*u = dest - k*w.
        let det = u.x * w.y - u.y * w.x;
        if det.abs() < 1e-9 {
            return Err(SimError::Route("turn requires perpendicular exit".into()));
        }
        let d = dest - p0;
        let t = (d.x * w.y - d.y * w.x) / det;
        let k = (u.x * d.y - u.y * d.x) / det;
        let radius = if left {
            TURN_RADIUS_LEFT
        } else {
            TURN_RADIUS_RIGHT
        };
        if t <= radius || k <= radius {
            return Err(SimError::Route(
                "destination too close to the corner for the turn radius".into(),
            ));
        }
        let corner = p0 + u * t;
        let arc_in = corner - u * radius;
        let arc_out = corner + w * radius;
        let center = arc_in + if left { u.perp() } else { -u.perp() } * radius;

        let mut points = vec![p0];
        let a0 = (arc_in - center).angle();
        let sweep = if left {
            std::f64::consts::FRAC_PI_2
        } else {
            -std::f64::consts::FRAC_PI_2
        };
        for i in 0..=ARC_POINTS {
            let a = a0 + sweep * (i as f64 / ARC_POINTS as f64);
            points.push(center + Vec2::from_angle(a) * radius);
        }
        points.push(arc_out);
        points.push(dest);

        let mut caps = vec![dynamics.cruise_speed; points.len()];
        // Arc vertices (including entry and exit) are speed-capped.
        for cap in caps.iter_mut().take(points.len() - 1).skip(1) {
            *cap = dynamics.turn_speed_cap.min(dynamics.cruise_speed);
        }
        Ok(RoutePath {
            line: Polyline::new(points),
            caps,
            cruise: dynamics.cruise_speed,
            decel: dynamics.max_decel,
        })
    }

    pub fn length(&self) -> f64 {
        self.line.length()
    }

    pub fn destination(&self) -> Vec2 {
        self.line.end()
    }

    pub fn polyline(&self) -> &Polyline {
        &self.line
    }

    /// Pose at arc length `s` (clamped to the route ends).
    pub fn pose_at(&self, s: f64) -> Pose {
        let p = self.line.point_at(s);
        let dir = self.line.direction_at(s);
        Pose::new(p.x, p.y, dir.angle())
    }

    /// Highest speed the ego may carry at arc length `s` such that every
    /// upcoming cap is still reachable within the braking bound.
    pub fn allowed_speed_at(&self, s: f64) -> f64 {
        let pts = self.line.points();
        if pts.len() < 2 {
            return self.cruise;
        }
        let mut allowed = self.cruise;
        let mut cum = 0.0;
        for i in 0..pts.len() {
            if i > 0 {
                cum += pts[i - 1].distance(pts[i]);
            }
            if cum < s {
                continue;
            }
            let cap = self.caps[i];
            if cap < allowed {
                let reach = (cap * cap + 2.0 * self.decel * (cum - s)).sqrt();
                allowed = allowed.min(reach);
            }
            if allowed <= self.caps.iter().copied().fold(f64::INFINITY, f64::min) {
                break;
            }
        }
        allowed
    }
}
