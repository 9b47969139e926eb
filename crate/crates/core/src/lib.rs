//! Task allocation on stochastic-vertex-cost aisle graphs.
//!
//! Crop rows are modelled as an aisle graph whose interior vertices carry
//! tasks with exponentially distributed, unknown costs and priority levels.
//! Robots carry a resource budget spent on tasks and an energy budget spent
//! on travel; both refill at base stations. [`planner`] implements NBA-P,
//! [`baselines`] the lawnmower and greedy partial-row planners, and [`sim`]
//! the mission engine used to compare them.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod experiment;
pub mod field;
pub mod graph;
pub mod planner;
pub mod scenario;
pub mod sim;
pub mod stopping;
pub mod task;

pub use error::{ClassError, FieldError, GraphError, MissionError, ScenarioError, StoppingError};
pub use graph::{AisleGraph, EdgeCosts, Heading, Side, VertexId};
pub use planner::{Action, RobotState};
pub use sim::{Metrics, Mission, MissionTrace, PlannerKind};
pub use stopping::TripState;
pub use task::{ClassSet, PriorityClass, Task, TaskBoard, TaskStatus};
