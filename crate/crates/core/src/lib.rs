//! Scenario-based safety testing for autonomous-driving planners.
//!
//! The crate generates parameterized urban-driving scenarios by equivalence
//! partitioning, executes them in a deterministic 2D kinematic simulator
//! against pluggable planners, derives metamorphic follow-up runs that vary
//! only the environment (day to night, clear to storm), and aggregates
//! collision outcomes into per-class and per-parameter reports.
//!
//! A quick tour:
//!
//! ```
//! use crosscheck::scenario::{build_scenario, ParameterAssignment, ScenarioClass};
//! use crosscheck::planners::OracleBrakePlanner;
//! use crosscheck::sim::{run_simulation, SimParams, Verdict};
//!
//! let mut params = ParameterAssignment::new();
//! params.set("pedSpeed", 2.0)
//!     .set("pedTrigger", 30.0)
//!     .set("numberOfCar", 10.0)
//!     .set("pedLocation", 5.0);
//! let instance = build_scenario(ScenarioClass::A, &params)?;
//! let outcome = run_simulation(&instance, &mut OracleBrakePlanner, &SimParams::default())?;
//! assert_eq!(outcome.verdict, Verdict::Safe);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! The `campaign` module scales this up to whole suites with parallel,
//! isolated runs and persisted artifacts; the `crosscheck` binary in the
//! workspace wraps it in a command line.

pub mod campaign;
pub mod geom;
pub mod planners;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod testgen;

pub use campaign::{run_campaign, CampaignConfig};
pub use planners::{
    BlindPlanner, EgoCommand, LimitedPerceptionPlanner, OracleBrakePlanner, PerceptionConfig,
    Planner, PlannerKind,
};
pub use report::{aggregate, mt_summarize, CampaignReport};
pub use scenario::{
    build_scenario, EnvironmentConditions, ParameterAssignment, ScenarioClass, ScenarioInstance,
};
pub use sim::{run_simulation, SimParams, SimulationOutcome, Verdict};
pub use testgen::{derive_follow_ups, enumerate_test_cases, ClassSpec, Relation, TestCase};

// The guide's code blocks double as doctests, so `cargo test --doc` keeps the
// book in lock-step with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scenario-classes.md")]
    mod scenario_classes {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/planners.md")]
    mod planners {}
    #[doc = include_str!("../../../book/src/test-generation.md")]
    mod test_generation {}
    #[doc = include_str!("../../../book/src/reporting.md")]
    mod reporting {}
    #[doc = include_str!("../../../book/src/campaigns.md")]
    mod campaigns {}
}
