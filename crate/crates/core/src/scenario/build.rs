//! Deterministic construction of scenario instances for classes A-D.
//!
//! All layout constants live in [`layout`] so campaigns are reproducible and
//! tests can assert the geometric relations of built instances.

use super::*;
use crate::geom::{Pose, Vec2};

/// Fixed geometry shared by the class builders. Distances in meters.
pub mod layout {
    /// Lane width; each road has one lane per direction at `+-LANE_OFFSET`.
    pub const LANE_WIDTH: f64 = 3.5;
    /// Lane centerline offset from the road centerline.
    pub const LANE_OFFSET: f64 = 1.75;

    /// Class A: ego spawn x; far enough back to reach cruise speed before
    /// the parked rows begin.
    pub const A_EGO_START_X: f64 = -20.0;
    /// Class A: x coordinate of the first parked car.
    pub const A_FIRST_CAR_X: f64 = 12.0;
    /// Class A: spacing between parked cars along the street.
    pub const A_CAR_SPACING: f64 = 6.0;
    /// Class A: parked rows sit at `y = +-A_CAR_ROW_Y`.
    pub const A_CAR_ROW_Y: f64 = 5.0;
    /// Class A: pedestrians step out at `y = -A_PED_EDGE_Y` and cross to
    /// `y = +A_PED_EDGE_Y`.
    pub const A_PED_EDGE_Y: f64 = 3.5;
    /// Class A: longitudinal gap between the two pedestrians.
    pub const A_PED_GAP: f64 = 1.0;
    /// Class A: destination distance past the last parked car.
    pub const A_DEST_BEYOND: f64 = 15.0;

    /// Class B: ego spawn distance south of the intersection center.
    pub const B_EGO_START: f64 = 35.0;
    /// Class B/D: crosswalk centers sit this far from the intersection center.
    pub const CROSSWALK_OFFSET: f64 = 5.0;
    /// Class B: ego destination distance west of the intersection center.
    pub const B_DEST: f64 = 25.0;
    /// Class B: pedestrian walks to this y on the far side of the road.
    pub const B_PED_GOAL_Y: f64 = 8.0;

    /// Class C: stationary blocker distance ahead of the ego spawn.
    pub const C_BLOCKER_AHEAD: f64 = 6.0;
    /// Class C: destination distance past the blocker.
    pub const C_DEST_BEYOND_BLOCKER: f64 = 8.0;
    /// Class C: final waypoint of the oncoming vehicle (behind the ego).
    pub const C_ONCOMING_GOAL_X: f64 = -30.0;

    /// Class D: ego spawn distance south of the intersection center.
    pub const D_EGO_START: f64 = 45.0;
    /// Class D: destination distance past the intersection center.
    pub const D_DEST: f64 = 25.0;
    /// Class D: spawn x of the crossing vehicle approaching from the west.
    pub const D_LEFT_SPAWN_X: f64 = -32.0;
    /// Class D: spawn x of the crossing vehicle approaching from the east.
    pub const D_RIGHT_SPAWN_X: f64 = 39.0;
    /// Class D: crossing vehicles park at `+-D_CROSS_GOAL_X` after crossing.
    pub const D_CROSS_GOAL_X: f64 = 45.0;
    /// Class D: queued cars in the opposite lane of the ego's road.
    pub const D_COLUMN_LEN: usize = 6;
    pub const D_COLUMN_FIRST_Y: f64 = -10.0;
    pub const D_COLUMN_SPACING: f64 = 7.0;
}

use layout::*;

/// Builds a concrete [`ScenarioInstance`] from a class and its parameters.
///
/// Construction is pure: identical inputs produce structurally identical
/// instances.
pub fn build_scenario(
    class: ScenarioClass,
    params: &ParameterAssignment,
) -> Result<ScenarioInstance, ScenarioError> {
    params.expect_keys(class_parameters(class))?;
    let instance = match class {
        ScenarioClass::A => build_class_a(params)?,
        ScenarioClass::B => build_class_b(params)?,
        ScenarioClass::C => build_class_c(params)?,
        ScenarioClass::D => build_class_d(params)?,
    };
    instance.validate()?;
    Ok(instance)
}

fn require_non_negative(name: &str, value: f64) -> Result<f64, ScenarioError> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ScenarioError::OutOfRange {
            name: name.into(),
            value,
            expected: ">= 0".into(),
        })
    }
}

fn require_positive_int(name: &str, value: f64) -> Result<usize, ScenarioError> {
    if value >= 1.0 && value.fract() == 0.0 && value <= 10_000.0 {
        Ok(value as usize)
    } else {
        Err(ScenarioError::OutOfRange {
            name: name.into(),
            value,
            expected: "positive integer".into(),
        })
    }
}

fn vehicle(id: String, x: f64, y: f64, heading: f64, color: AgentColor) -> AgentSpec {
    AgentSpec {
        id,
        kind: AgentKind::NpcVehicle,
        pose: Pose::new(x, y, heading),
        footprint: Footprint::VEHICLE,
        color,
        behavior: Behavior::Stationary,
    }
}

fn ego(pose: Pose) -> AgentSpec {
    AgentSpec {
        id: "ego".into(),
        kind: AgentKind::EgoVehicle,
        pose,
        footprint: Footprint::VEHICLE,
        color: AgentColor::White,
        behavior: Behavior::Stationary,
    }
}

fn straight_road(name: &str, start: Vec2, end: Vec2) -> RoadSegment {
    RoadSegment {
        name: name.into(),
        start,
        end,
        lane_width: LANE_WIDTH,
        legal_centerline_crossing: false,
    }
}

fn four_way_intersection(center: Vec2) -> Intersection {
    let crosswalks = [
        (
            Vec2::new(-CROSSWALK_OFFSET, 0.0),
            std::f64::consts::FRAC_PI_2,
        ),
        (
            Vec2::new(CROSSWALK_OFFSET, 0.0),
            std::f64::consts::FRAC_PI_2,
        ),
        (Vec2::new(0.0, -CROSSWALK_OFFSET), 0.0),
        (Vec2::new(0.0, CROSSWALK_OFFSET), 0.0),
    ]
    .into_iter()
    .map(|(offset, walk_heading)| Crosswalk {
        center: center + offset,
        walk_heading,
        length: 2.0 * LANE_WIDTH + 1.0,
        width: 3.0,
    })
    .collect();
    Intersection { center, crosswalks }
}

/// Class A: the ego threads a narrow street between two rows of parked cars;
/// two pedestrians step out at the `pedLocation`-th car and cross.
fn build_class_a(params: &ParameterAssignment) -> Result<ScenarioInstance, ScenarioError> {
    let ped_speed = require_non_negative("pedSpeed", params.number("pedSpeed")?)?;
    let ped_trigger = require_non_negative("pedTrigger", params.number("pedTrigger")?)?;
    let cars_per_side = require_positive_int("numberOfCar", params.number("numberOfCar")?)?;
    let ped_location = require_positive_int("pedLocation", params.number("pedLocation")?)?;

    let car_x = |index: usize| A_FIRST_CAR_X + A_CAR_SPACING * (index - 1) as f64;
    let last_car_x = car_x(cars_per_side);
    let ped_x = car_x(ped_location);
    let dest_x = last_car_x + A_DEST_BEYOND;
    let road_end = dest_x.max(ped_x) + 30.0;

    let map = MapGeometry {
        segments: vec![straight_road(
            "street",
            Vec2::new(A_EGO_START_X - 15.0, 0.0),
            Vec2::new(road_end, 0.0),
        )],
        intersections: vec![],
    };

    let mut agents = vec![ego(Pose::new(A_EGO_START_X, -LANE_OFFSET, 0.0))];
    for i in 1..=cars_per_side {
        agents.push(vehicle(
            format!("parked-right-{i}"),
            car_x(i),
            -A_CAR_ROW_Y,
            0.0,
            AgentColor::Default,
        ));
        agents.push(vehicle(
            format!("parked-left-{i}"),
            car_x(i),
            A_CAR_ROW_Y,
            std::f64::consts::PI,
            AgentColor::Default,
        ));
    }
    for (n, offset) in [(1usize, 0.0), (2, A_PED_GAP)] {
        let x = ped_x + offset;
        agents.push(AgentSpec {
            id: format!("pedestrian-{n}"),
            kind: AgentKind::Pedestrian,
            pose: Pose::new(x, -A_PED_EDGE_Y, std::f64::consts::FRAC_PI_2),
            footprint: Footprint::PEDESTRIAN,
            color: AgentColor::Default,
            behavior: Behavior::TriggeredWaypoints {
                waypoints: vec![Vec2::new(x, A_PED_EDGE_Y)],
                speed: ped_speed,
                trigger_distance: ped_trigger,
            },
        });
    }

    Ok(ScenarioInstance {
        class_id: ScenarioClass::A,
        map,
        agents,
        environment: EnvironmentConditions::clear_noon(),
        ego_route: EgoRoute {
            start: Pose::new(A_EGO_START_X, -LANE_OFFSET, 0.0),
            destination: Vec2::new(dest_x, -LANE_OFFSET),
            turn_direction: TurnDirection::None,
        },
    })
}

/// Class B: the ego turns left at a four-way intersection while a pedestrian,
/// triggered on approach, crosses the exit road at the west crosswalk.
fn build_class_b(params: &ParameterAssignment) -> Result<ScenarioInstance, ScenarioError> {
    let environment = EnvironmentConditions {
        rain: params.number("rain")?,
        fog: params.number("fog")?,
        time_of_day: params.number("timeOfDay")?,
    };
    environment.validate()?;
    let ped_speed = require_non_negative("pedSpeed", params.number("pedSpeed")?)?;
    let ped_trigger = require_non_negative("pedTrigger", params.number("pedTrigger")?)?;
    let ped_distance = require_non_negative(
        "pedDistanceFromIntersection",
        params.number("pedDistanceFromIntersection")?,
    )?;
    if ped_distance <= LANE_WIDTH {
        return Err(ScenarioError::OutOfRange {
            name: "pedDistanceFromIntersection".into(),
            value: ped_distance,
            expected: "greater than the road half-width".into(),
        });
    }

    let map = MapGeometry {
        segments: vec![
            straight_road("north-south", Vec2::new(0.0, -45.0), Vec2::new(0.0, 30.0)),
            straight_road("east-west", Vec2::new(-40.0, 0.0), Vec2::new(40.0, 0.0)),
        ],
        intersections: vec![four_way_intersection(Vec2::ZERO)],
    };

    // The pedestrian waits south of the west crosswalk and walks north,
    // parallel to the ego's original heading, across the ego's exit road.
    let crosswalk_x = -CROSSWALK_OFFSET;
    let ped_start = Vec2::new(crosswalk_x, -ped_distance);

    let agents = vec![
        ego(Pose::new(
            LANE_OFFSET,
            -B_EGO_START,
            std::f64::consts::FRAC_PI_2,
        )),
        AgentSpec {
            id: "pedestrian".into(),
            kind: AgentKind::Pedestrian,
            pose: Pose::new(ped_start.x, ped_start.y, std::f64::consts::FRAC_PI_2),
            footprint: Footprint::PEDESTRIAN,
            color: AgentColor::Default,
            behavior: Behavior::TriggeredWaypoints {
                waypoints: vec![Vec2::new(crosswalk_x, B_PED_GOAL_Y)],
                speed: ped_speed,
                trigger_distance: ped_trigger,
            },
        },
        vehicle("parked-1".into(), -8.0, 5.5, 0.0, AgentColor::Default),
        vehicle("parked-2".into(), -13.5, 5.5, 0.0, AgentColor::Default),
    ];

    Ok(ScenarioInstance {
        class_id: ScenarioClass::B,
        map,
        agents,
        environment,
        ego_route: EgoRoute {
            start: Pose::new(LANE_OFFSET, -B_EGO_START, std::f64::consts::FRAC_PI_2),
            destination: Vec2::new(-B_DEST, LANE_OFFSET),
            turn_direction: TurnDirection::Left,
        },
    })
}

/// Class C: a stationary vehicle blocks the ego's lane a few meters ahead
/// while an oncoming vehicle approaches in the adjacent opposite lane.
fn build_class_c(params: &ParameterAssignment) -> Result<ScenarioInstance, ScenarioError> {
    let oncoming_speed = require_non_negative("oncomingSpeed", params.number("oncomingSpeed")?)?;
    let spawn_distance = require_non_negative("spawnDistance", params.number("spawnDistance")?)?;
    let oncoming_trigger =
        require_non_negative("oncomingTrigger", params.number("oncomingTrigger")?)?;
    if spawn_distance <= C_BLOCKER_AHEAD {
        return Err(ScenarioError::OutOfRange {
            name: "spawnDistance".into(),
            value: spawn_distance,
            expected: "beyond the blocked vehicle".into(),
        });
    }

    let road_end = spawn_distance + 40.0;
    let map = MapGeometry {
        segments: vec![straight_road(
            "avenue",
            Vec2::new(C_ONCOMING_GOAL_X - 10.0, 0.0),
            Vec2::new(road_end, 0.0),
        )],
        intersections: vec![],
    };

    let agents = vec![
        ego(Pose::new(0.0, -LANE_OFFSET, 0.0)),
        vehicle(
            "blocked-car".into(),
            C_BLOCKER_AHEAD,
            -LANE_OFFSET,
            0.0,
            AgentColor::Default,
        ),
        AgentSpec {
            id: "oncoming".into(),
            kind: AgentKind::NpcVehicle,
            pose: Pose::new(spawn_distance, LANE_OFFSET, std::f64::consts::PI),
            footprint: Footprint::VEHICLE,
            color: AgentColor::Default,
            behavior: Behavior::TriggeredWaypoints {
                waypoints: vec![Vec2::new(C_ONCOMING_GOAL_X, LANE_OFFSET)],
                speed: oncoming_speed,
                trigger_distance: oncoming_trigger,
            },
        },
    ];

    Ok(ScenarioInstance {
        class_id: ScenarioClass::C,
        map,
        agents,
        environment: EnvironmentConditions::clear_noon(),
        ego_route: EgoRoute {
            start: Pose::new(0.0, -LANE_OFFSET, 0.0),
            destination: Vec2::new(C_BLOCKER_AHEAD + C_DEST_BEYOND_BLOCKER, -LANE_OFFSET),
            turn_direction: TurnDirection::None,
        },
    })
}

fn parse_turn(value: &str) -> Result<TurnDirection, ScenarioError> {
    match value {
        "straight" => Ok(TurnDirection::Straight),
        "left" => Ok(TurnDirection::Left),
        "right" => Ok(TurnDirection::Right),
        other => Err(ScenarioError::WrongParameterType {
            name: format!("turnDirection ({other})"),
            expected: "one of straight|left|right".into(),
        }),
    }
}

/// Class D: a busy intersection. Dark vehicles queue in the opposite lane and
/// two dark vehicles cross perpendicular to the ego when it approaches.
fn build_class_d(params: &ParameterAssignment) -> Result<ScenarioInstance, ScenarioError> {
    let left_speed = require_non_negative("leftSpeed", params.number("leftSpeed")?)?;
    let left_trigger = require_non_negative("leftTrigger", params.number("leftTrigger")?)?;
    let right_speed = require_non_negative("rightSpeed", params.number("rightSpeed")?)?;
    let right_trigger = require_non_negative("rightTrigger", params.number("rightTrigger")?)?;
    let turn = parse_turn(params.choice("turnDirection")?)?;

    let map = MapGeometry {
        segments: vec![
            straight_road("north-south", Vec2::new(0.0, -55.0), Vec2::new(0.0, 35.0)),
            straight_road("east-west", Vec2::new(-55.0, 0.0), Vec2::new(55.0, 0.0)),
        ],
        intersections: vec![four_way_intersection(Vec2::ZERO)],
    };

    let destination = match turn {
        TurnDirection::Straight | TurnDirection::None => Vec2::new(LANE_OFFSET, D_DEST),
        TurnDirection::Left => Vec2::new(-D_DEST, LANE_OFFSET),
        TurnDirection::Right => Vec2::new(D_DEST, -LANE_OFFSET),
    };

    let mut agents = vec![ego(Pose::new(
        LANE_OFFSET,
        -D_EGO_START,
        std::f64::consts::FRAC_PI_2,
    ))];
    for i in 0..D_COLUMN_LEN {
        agents.push(vehicle(
            format!("queued-{}", i + 1),
            -LANE_OFFSET,
            D_COLUMN_FIRST_Y - D_COLUMN_SPACING * i as f64,
            -std::f64::consts::FRAC_PI_2,
            AgentColor::Black,
        ));
    }
    agents.push(AgentSpec {
        id: "crosser-left".into(),
        kind: AgentKind::NpcVehicle,
        pose: Pose::new(D_LEFT_SPAWN_X, -LANE_OFFSET, 0.0),
        footprint: Footprint::VEHICLE,
        color: AgentColor::Black,
        behavior: Behavior::TriggeredWaypoints {
            waypoints: vec![Vec2::new(D_CROSS_GOAL_X, -LANE_OFFSET)],
            speed: left_speed,
            trigger_distance: left_trigger,
        },
    });
    agents.push(AgentSpec {
        id: "crosser-right".into(),
        kind: AgentKind::NpcVehicle,
        pose: Pose::new(D_RIGHT_SPAWN_X, LANE_OFFSET, std::f64::consts::PI),
        footprint: Footprint::VEHICLE,
        color: AgentColor::Black,
        behavior: Behavior::TriggeredWaypoints {
            waypoints: vec![Vec2::new(-D_CROSS_GOAL_X, LANE_OFFSET)],
            speed: right_speed,
            trigger_distance: right_trigger,
        },
    });

    Ok(ScenarioInstance {
        class_id: ScenarioClass::D,
        map,
        agents,
        environment: EnvironmentConditions::clear_noon(),
        ego_route: EgoRoute {
            start: Pose::new(LANE_OFFSET, -D_EGO_START, std::f64::consts::FRAC_PI_2),
            destination,
            turn_direction: turn,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_scenario, class_parameters};

    fn params_a(speed: f64, trigger: f64, cars: f64, location: f64) -> ParameterAssignment {
        let mut p = ParameterAssignment::new();
        p.set("pedSpeed", speed)
            .set("pedTrigger", trigger)
            .set("numberOfCar", cars)
            .set("pedLocation", location);
        p
    }

    #[test]
    fn class_a_default_layout() {
        // 10 cars per side, pedestrians at the 5th car, 20 m trigger.
        let instance = build_scenario(ScenarioClass::A, &params_a(2.0, 20.0, 10.0, 5.0)).unwrap();
        let parked: Vec<_> = instance
            .agents
            .iter()
            .filter(|a| a.kind == AgentKind::NpcVehicle)
            .collect();
        assert_eq!(parked.len(), 20, "10 parked cars per side");
        let fifth_car_x = A_FIRST_CAR_X + 4.0 * A_CAR_SPACING;
        let ped = instance
            .agents
            .iter()
            .find(|a| a.id == "pedestrian-1")
            .unwrap();
        assert_eq!(ped.pose.x, fifth_car_x);
        match &ped.behavior {
            Behavior::TriggeredWaypoints {
                trigger_distance, ..
            } => assert_eq!(*trigger_distance, 20.0),
            other => panic!("unexpected behavior {other:?}"),
        }
    }

    #[test]
    fn class_a_car_count_and_ped_column() {
        for (cars, loc) in [(4.0, 2.0), (10.0, 3.0), (20.0, 5.0)] {
            let instance =
                build_scenario(ScenarioClass::A, &params_a(1.0, 10.0, cars, loc)).unwrap();
            let parked = instance
                .agents
                .iter()
                .filter(|a| a.kind == AgentKind::NpcVehicle)
                .count();
            assert_eq!(parked, 2 * cars as usize);
            let expected_x = A_FIRST_CAR_X + (loc - 1.0) * A_CAR_SPACING;
            let ped = instance
                .agents
                .iter()
                .find(|a| a.id == "pedestrian-1")
                .unwrap();
            assert_eq!(ped.pose.x, expected_x);
            // Both pedestrians cross to the opposite side.
            for id in ["pedestrian-1", "pedestrian-2"] {
                let a = instance.agents.iter().find(|a| a.id == id).unwrap();
                match &a.behavior {
                    Behavior::TriggeredWaypoints { waypoints, .. } => {
                        assert_eq!(waypoints.last().unwrap().y, A_PED_EDGE_Y);
                    }
                    other => panic!("unexpected behavior {other:?}"),
                }
            }
        }
    }

    #[test]
    fn class_b_ped_distance_to_crosswalk_is_exact() {
        for d in [6.0, 9.0, 12.0] {
            let mut p = ParameterAssignment::new();
            p.set("rain", 0.0)
                .set("fog", 0.0)
                .set("timeOfDay", 12.0)
                .set("pedSpeed", 8.0)
                .set("pedTrigger", 24.0)
                .set("pedDistanceFromIntersection", d);
            let instance = build_scenario(ScenarioClass::B, &p).unwrap();
            let ped = instance
                .agents
                .iter()
                .find(|a| a.kind == AgentKind::Pedestrian)
                .unwrap();
            let crosswalk = instance.map.intersections[0]
                .crosswalks
                .iter()
                .find(|c| c.center.x < 0.0)
                .unwrap();
            let dist = ped.pose.position().distance(crosswalk.center);
            assert!((dist - d).abs() < 1e-9, "distance {dist} != {d}");
        }
    }

    #[test]
    fn class_b_environment_from_params() {
        let mut p = ParameterAssignment::new();
        p.set("rain", 1.0)
            .set("fog", 1.0)
            .set("timeOfDay", 0.0)
            .set("pedSpeed", 6.0)
            .set("pedTrigger", 14.0)
            .set("pedDistanceFromIntersection", 9.0);
        let instance = build_scenario(ScenarioClass::B, &p).unwrap();
        assert_eq!(instance.environment.rain, 1.0);
        assert_eq!(instance.environment.fog, 1.0);
        assert_eq!(instance.environment.time_of_day, 0.0);
    }

    #[test]
    fn class_c_geometry() {
        // Blocker 6 m ahead of the ego, oncoming vehicle 40 m away in the
        // opposite lane.
        let mut p = ParameterAssignment::new();
        p.set("oncomingSpeed", 8.0)
            .set("spawnDistance", 40.0)
            .set("oncomingTrigger", 30.0);
        let instance = build_scenario(ScenarioClass::C, &p).unwrap();
        let ego = &instance.agents[instance.ego_index().unwrap()];
        let blocker = instance
            .agents
            .iter()
            .find(|a| a.id == "blocked-car")
            .unwrap();
        let oncoming = instance.agents.iter().find(|a| a.id == "oncoming").unwrap();
        assert_eq!(blocker.pose.x - ego.pose.x, C_BLOCKER_AHEAD);
        assert_eq!(blocker.pose.y, ego.pose.y, "blocker shares the ego lane");
        assert_eq!(oncoming.pose.x - ego.pose.x, 40.0);
        assert_eq!(
            oncoming.pose.y, LANE_OFFSET,
            "oncoming in the opposite lane"
        );
        assert!(instance.ego_route.destination.x > blocker.pose.x);
    }

    #[test]
    fn class_d_zero_speed_crossers_never_reach_the_intersection() {
        let mut p = ParameterAssignment::new();
        p.set("leftSpeed", 0.0)
            .set("leftTrigger", 5.0)
            .set("rightSpeed", 0.0)
            .set("rightTrigger", 10.0)
            .set("turnDirection", "straight");
        let instance = build_scenario(ScenarioClass::D, &p).unwrap();
        for id in ["crosser-left", "crosser-right"] {
            let a = instance.agents.iter().find(|a| a.id == id).unwrap();
            match &a.behavior {
                Behavior::TriggeredWaypoints { speed, .. } => assert_eq!(*speed, 0.0),
                other => panic!("unexpected behavior {other:?}"),
            }
            assert!(
                a.pose.position().x.abs() > 2.0 * LANE_WIDTH,
                "spawns outside the junction box"
            );
        }
    }

    #[test]
    fn class_d_all_npcs_black() {
        for turn in ["straight", "left", "right"] {
            let mut p = ParameterAssignment::new();
            p.set("leftSpeed", 5.0)
                .set("leftTrigger", 55.0)
                .set("rightSpeed", 10.0)
                .set("rightTrigger", 45.0)
                .set("turnDirection", turn);
            let instance = build_scenario(ScenarioClass::D, &p).unwrap();
            for a in &instance.agents {
                if a.kind == AgentKind::NpcVehicle {
                    assert_eq!(a.color, AgentColor::Black, "{} must be black", a.id);
                }
            }
        }
    }

    #[test]
    fn build_is_pure() {
        let p = params_a(2.0, 20.0, 10.0, 5.0);
        let one = build_scenario(ScenarioClass::A, &p).unwrap();
        let two = build_scenario(ScenarioClass::A, &p).unwrap();
        assert_eq!(one, two);
        assert_eq!(
            serde_json::to_string(&one).unwrap(),
            serde_json::to_string(&two).unwrap()
        );
    }

    #[test]
    fn every_class_has_exactly_one_ego_and_reaches_destination() {
        let cases: Vec<(ScenarioClass, ParameterAssignment)> = vec![
            (ScenarioClass::A, params_a(4.0, 10.0, 20.0, 3.0)),
            (ScenarioClass::B, {
                let mut p = ParameterAssignment::new();
                p.set("rain", 0.0)
                    .set("fog", 0.0)
                    .set("timeOfDay", 12.0)
                    .set("pedSpeed", 10.0)
                    .set("pedTrigger", 32.0)
                    .set("pedDistanceFromIntersection", 12.0);
                p
            }),
            (ScenarioClass::C, {
                let mut p = ParameterAssignment::new();
                p.set("oncomingSpeed", 12.0)
                    .set("spawnDistance", 70.0)
                    .set("oncomingTrigger", 40.0);
                p
            }),
            (ScenarioClass::D, {
                let mut p = ParameterAssignment::new();
                p.set("leftSpeed", 10.0)
                    .set("leftTrigger", 25.0)
                    .set("rightSpeed", 5.0)
                    .set("rightTrigger", 15.0)
                    .set("turnDirection", "left");
                p
            }),
        ];
        for (class, params) in cases {
            let instance = build_scenario(class, &params).unwrap();
            assert!(instance.ego_index().is_some());
            assert!(instance.validate().is_ok());
        }
    }

    #[test]
    fn wrong_parameters_are_rejected() {
        let mut missing = ParameterAssignment::new();
        missing.set("pedSpeed", 2.0);
        assert!(build_scenario(ScenarioClass::A, &missing).is_err());

        let mut extra = params_a(2.0, 20.0, 10.0, 5.0);
        extra.set("bogus", 1.0);
        assert!(matches!(
            build_scenario(ScenarioClass::A, &extra),
            Err(ScenarioError::UnexpectedParameter(_))
        ));

        let out_of_range = params_a(2.0, 20.0, 0.0, 5.0);
        assert!(matches!(
            build_scenario(ScenarioClass::A, &out_of_range),
            Err(ScenarioError::OutOfRange { .. })
        ));

        let mut bad_turn = ParameterAssignment::new();
        bad_turn
            .set("leftSpeed", 0.0)
            .set("leftTrigger", 5.0)
            .set("rightSpeed", 0.0)
            .set("rightTrigger", 10.0)
            .set("turnDirection", "u-turn");
        assert!(build_scenario(ScenarioClass::D, &bad_turn).is_err());
    }

    #[test]
    fn parameter_names_match_class_tables() {
        assert_eq!(
            class_parameters(ScenarioClass::B),
            &[
                "rain",
                "fog",
                "timeOfDay",
                "pedSpeed",
                "pedTrigger",
                "pedDistanceFromIntersection"
            ]
        );
    }
}
